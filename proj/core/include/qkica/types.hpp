#pragma once

#include <Eigen/Dense>

namespace qkica {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

} // namespace qkica
