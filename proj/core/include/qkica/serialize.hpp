#pragma once

#include <string>

#include "qkica/preprocess.hpp"

namespace qkica {

std::string whitening_to_json(const WhiteningModel& model);
WhiteningModel whitening_from_json(const std::string& text);

} // namespace qkica
