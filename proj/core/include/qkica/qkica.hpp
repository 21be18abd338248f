#pragma once

#include "qkica/circuit.hpp"
#include "qkica/contrast.hpp"
#include "qkica/csv.hpp"
#include "qkica/error.hpp"
#include "qkica/gram.hpp"
#include "qkica/nystrom.hpp"
#include "qkica/optimize.hpp"
#include "qkica/parallel.hpp"
#include "qkica/preprocess.hpp"
#include "qkica/qemu.hpp"
#include "qkica/rng.hpp"
#include "qkica/serialize.hpp"
#include "qkica/sources.hpp"
#include "qkica/spectral.hpp"
#include "qkica/types.hpp"
