#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qkica/sources.hpp"
#include "qkica/types.hpp"

namespace qkica {

// Contrast as a function of the orthogonal unmixing W; lower is better.
using ContrastFn = std::function<double(const Matrix& W)>;

struct GridAxis {
    double lo = 0.0;
    double hi = 0.0;
    Index steps = 1;

    double value(Index i) const;
    // LO:HI:STEPS
    static GridAxis parse(const std::string& s);
};

struct LandscapeGrid {
    GridAxis axis1;
    GridAxis axis2;
    // J(axis1.value(r), axis2.value(c)); one column for a single generator.
    Matrix J;
    Index argmin_row = 0;
    Index argmin_col = 0;
};

// One or two generators; W = exp(d1 P1 + d2 P2).
LandscapeGrid scan_landscape(const GeneratorSet& generators, const GridAxis& axis1,
                             const GridAxis& axis2, const ContrastFn& contrast, int threads = 1);

struct OptimizeOptions {
    int max_iters = 100;
    double tol = 1e-6;
    int restarts = 5;
    double fd_step = 1e-3;
    std::uint64_t seed = 0;
    // Initial step length in angle units for the line search.
    double initial_step = 0.5;
};

struct OptimizeReport {
    Matrix W_opt;
    double J_opt = 0.0;
    // (iteration, contrast) of the winning restart, accepted steps only.
    std::vector<std::pair<int, double>> J_trace;
    int restarts_used = 0;
    int failed_restarts = 0;
    bool converged = false;
    std::optional<double> amari;
};

// Finite-difference Riemannian descent on SO(m) with exponential retraction,
// Armijo backtracking and random restarts. The first restart starts at I,
// or at opts.start when given.
OptimizeReport minimize_stiefel(Index m, const ContrastFn& contrast, const OptimizeOptions& opts,
                                const std::optional<Matrix>& start = std::nullopt);

// Product P = unmixing * mixing, scored by how far P is from a scaled
// permutation. Zero exactly when it is one.
double amari_error(const Matrix& mixing, const Matrix& unmixing);
// Score a product matrix directly.
double amari_index(const Matrix& P);

// Pearson correlation of row i of S1 with row j of S2.
Matrix correlation_matrix(const SampleMatrix& S1, const SampleMatrix& S2);

} // namespace qkica
