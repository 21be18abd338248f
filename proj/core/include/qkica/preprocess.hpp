#pragma once

#include <cstdint>
#include <optional>

#include "qkica/sources.hpp"
#include "qkica/types.hpp"

namespace qkica {

struct WhiteningModel {
    Vector mean;
    Matrix M;
    Matrix inv_sqrt;
    std::optional<Matrix> perturbed_inv_sqrt;
    std::optional<Matrix> E;
    double eps2 = 0.0;
    // Magnitude actually applied, in [0.9 eps2, eps2).
    double eps2_applied = 0.0;
    double mu_M = 1.0;
    std::uint64_t seed = 0;

    // Model that leaves already whitened m-row data unchanged.
    static WhiteningModel identity(Index m);
};

SampleMatrix center(const SampleMatrix& X);

// (1/N) Xc Xc^T.
Matrix covariance(const SampleMatrix& Xc);

struct WhitenResult {
    SampleMatrix Y;
    WhiteningModel model;
};

// Throws NumericalError when an eigenvalue of the covariance falls below
// 1e-12 times the largest.
WhitenResult whiten(const SampleMatrix& X);

// Adds eps2' E to the inverse square root with E symmetric, ||E||_2 = 1.
// Requires 0 <= eps2 < 0.2.
WhiteningModel perturb_whitening(const WhiteningModel& model, double eps2, std::uint64_t seed);

// W M^{-1/2} (X - mean), using the perturbed inverse square root on request.
SampleMatrix apply_unmixing(const SampleMatrix& X, const WhiteningModel& model, const Matrix& W,
                            bool use_perturbed);

double condition_number(const Matrix& M);

double spectral_norm(const Matrix& A);

// Largest |x_ij - mean_i|. The error analysis assumes this is at most 1.
double max_centered_deviation(const SampleMatrix& X);

} // namespace qkica
