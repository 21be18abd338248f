#pragma once

#include "qkica/types.hpp"

namespace qkica {

enum class EigenSolver {
    // Dense when nothing is truncated or N is small, subspace otherwise.
    Automatic,
    Dense,
    // Block subspace iteration with Rayleigh-Ritz; falls back to Dense if
    // it fails to converge.
    Subspace,
};

struct GramSpectrum {
    // Normalized eigenvalues lambda / N, descending, kept pairs only.
    Vector mu;
    // Orthonormal eigenvectors as columns, matching mu.
    Matrix vectors;
    double eps_trunc = 0.0;
    Index n_samples = 0;
    // Upper bound on the largest discarded mu; exact when one was resolved.
    double discarded_max = 0.0;
    // trace(K) / N.
    double trace_mu = 0.0;

    Index kept() const { return mu.size(); }
};

// Keeps every pair with mu >= eps_trunc / 2. eps_trunc = 0 keeps all N.
GramSpectrum decompose(const Matrix& K, Index N, double eps_trunc,
                       EigenSolver solver = EigenSolver::Automatic);

// Largest-magnitude component positive, ties to the lowest index.
void canonicalize_signs(Matrix& vectors);

// <u_ik, u_jl> for all kept k, l.
Matrix overlaps(const GramSpectrum& si, const GramSpectrum& sj);

double state_norm_K(const Matrix& K, Index N);

// sqrt(sum_kl mu_ik^2 <u_jl, u_ik>^2).
double state_norm_psi(const GramSpectrum& si, const GramSpectrum& sj);

} // namespace qkica
