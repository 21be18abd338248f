#pragma once

#include <cmath>

#include "qkica/types.hpp"

namespace qkica {

struct KernelSpec {
    double sigma = 1.0 / std::sqrt(2.0);
    void validate() const;
};

double kernel_eval(const KernelSpec& spec, double x, double y);

Matrix gram_raw(const Vector& z, const KernelSpec& spec);

// Double centering: K_jk = raw_jk - rowmean_j - colmean_k + grandmean.
Matrix gram_center(const Matrix& raw);
void gram_center_inplace(Matrix& a);

struct GramPair {
    Matrix raw;
    Matrix centered;
};

GramPair gram_pair(const Vector& z, const KernelSpec& spec);

} // namespace qkica
