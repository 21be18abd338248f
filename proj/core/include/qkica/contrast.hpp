#pragma once

#include <vector>

#include "qkica/gram.hpp"
#include "qkica/sources.hpp"
#include "qkica/spectral.hpp"
#include "qkica/types.hpp"

namespace qkica {

// Normalized: f(mu) = mu / (mu + kappa/2) with mu = lambda / N.
// Raw: f = lambda / (lambda + kappa).
enum class KappaConvention { Normalized, Raw };

struct ContrastOptions {
    double kappa = 0.1;
    KernelSpec kernel;
    double eps_trunc = 0.02;
    // Signed overlaps give the classical matrix; unsigned gives the adapted one.
    bool signed_mode = true;
    KappaConvention convention = KappaConvention::Normalized;
    EigenSolver solver = EigenSolver::Automatic;
    int threads = 1;
};

struct BlockIndex {
    Index variable;
    Index pair;
};

struct RkappaMatrix {
    Matrix data;
    std::vector<BlockIndex> index;
    double kappa = 0.1;
    bool signed_mode = true;

    Index d() const { return data.rows(); }
};

// Offset h in f(mu) = mu / (mu + h) for the given convention.
double shrink_offset(double kappa, KappaConvention convention, Index n_samples);

RkappaMatrix build_rkappa(const std::vector<GramSpectrum>& spectra, double kappa, bool signed_mode,
                          KappaConvention convention = KappaConvention::Normalized);

struct LogDet {
    double log_abs = 0.0;
    int sign = 1;
    double value() const;
};

// Cholesky when require_pd (throws NumericalError on a non-positive pivot),
// pivoted LDL^T otherwise.
LogDet log_determinant(const Matrix& a, bool require_pd);

double det_contrast(const RkappaMatrix& r);
// -ln det; +inf when det <= 0 in unsigned mode.
double neg_log_det(const RkappaMatrix& r);

double min_eig(const Matrix& r);

// One centered-Gram spectrum per row of Z.
std::vector<GramSpectrum> spectra_of(const Matrix& Z, const ContrastOptions& opts);

struct ContrastValue {
    double det = 1.0;
    double neg_log_det = 0.0;
    Index d = 0;
};

ContrastValue contrast_from_spectra(const std::vector<GramSpectrum>& spectra,
                                    const ContrastOptions& opts);
ContrastValue contrast_pipeline(const SampleMatrix& Z, const ContrastOptions& opts);

// E{y^4} - 3 (E{y^2})^2 from raw sample moments.
double kurtosis_contrast(const Vector& y);

struct PerturbationCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    // d mu_A ||B|| / ||A||; the bound needs it below 1.
    double x = 0.0;
    bool premise_ok = false;
};

PerturbationCheck det_perturbation_check(const Matrix& A, const Matrix& B);

// t / (1 - t) with t = d^2 eps / xi; +inf when t >= 1.
double composite_det_bound(Index d, double eps, double xi);

} // namespace qkica
