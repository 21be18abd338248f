#pragma once

#include <cstdint>
#include <vector>

#include "qkica/gram.hpp"
#include "qkica/sources.hpp"
#include "qkica/spectral.hpp"
#include "qkica/types.hpp"

namespace qkica {

// Eigenfunction of the empirical centered integral operator of one variable.
struct Eigenfunction {
    Index variable = 0;
    Index index = 0;
    // sqrt(N) u on the base samples, so (1/N) sum Phi^2 = 1.
    Vector values;
    double mu = 0.0;
    Vector base;
    // mean_b K(z_n, z_b) for each base sample n.
    Vector row_means;
    KernelSpec kernel;
};

// The first `count` kept pairs of `spectrum` as eigenfunctions over z.
std::vector<Eigenfunction> eigenfunctions(const Vector& z, const GramSpectrum& spectrum,
                                          Index count, const KernelSpec& kernel,
                                          Index variable = 0);

// K(x,y) - mean_n K(z_n,y) - mean_n K(x,z_n) + mean_nn' K(z_n,z_n').
double centered_kernel_eval(const Vector& samples, const KernelSpec& kernel, double x, double y);

// (1/(N mu)) sum_n K'(z_n, x) Phi_n. Throws when mu <= 1e-10.
double extend_eigenfunction(const Eigenfunction& ef, double x);
double extend_derivative(const Eigenfunction& ef, double x);
// Values and derivatives at many points; deriv may be null.
void extend_batch(const Eigenfunction& ef, const Vector& x, Vector& value, Vector* deriv);

// (1/N) sum_m phi_a(z_im) phi_b(z_jm) over paired samples.
double overlap_via_M(const Eigenfunction& a, const Eigenfunction& b, const Vector& zi,
                     const Vector& zj);

struct OverlapEstimate {
    Index k = 0;
    Index l = 0;
    double C = 0.0;
    double D = 0.0;
    Index n_mc = 0;
    double F_ij = 0.0;

    double standard_error() const;
};

// C = -E[(x d/dy - y d/dx)(phi_a(x) phi_b(y))] over independent x ~ si,
// y ~ sj, and D^2 = E[(.)^2] - C^2. Requires n_mc >= 100.
OverlapEstimate estimate_C_D(const Eigenfunction& a, const Eigenfunction& b,
                             const Distribution& si, const Distribution& sj, Index n_mc,
                             std::uint64_t seed);

// All (k, l) pairs of two eigenfunction lists sharing one set of draws.
std::vector<OverlapEstimate> estimate_C_D_table(const std::vector<Eigenfunction>& efi,
                                                const std::vector<Eigenfunction>& efj,
                                                const Distribution& si, const Distribution& sj,
                                                Index n_mc, std::uint64_t seed);

struct CoverageOptions {
    double F_ij = 1.0;
    double eps2 = 0.05;
    Index N = 1000;
    Index n_trials = 200;
    double delta = 3.0;
    std::uint64_t seed = 0;
    double eps_trunc = 0.02;
    Index top = 3;
    Index n_mc = 10000;
    KernelSpec kernel;
    int threads = 1;
};

struct CoverageResult {
    // eps2 F_ij = 0 leaves nothing to cover.
    bool skipped = false;
    double coverage = 0.0;
    // Pair with the largest |C| among the top x top reference pairs.
    OverlapEstimate pair;
    double half_width = 0.0;
    std::vector<double> overlaps;
    // Sample standard deviation of overlap - eps2 F C across trials.
    double spread = 0.0;
};

// Trials draw s, form z = (I + eps2 F) s with F antisymmetric and F_12 = F_ij,
// and test |<u_ik, u_jl> - eps2 F C| < delta eps2 F D / sqrt(N). C and D
// come from a separate unperturbed reference sample; per-trial eigenvector
// signs are aligned to it through the Nystrom extension.
CoverageResult coverage_trial(const Distribution& si, const Distribution& sj,
                                  const CoverageOptions& opts);

} // namespace qkica
