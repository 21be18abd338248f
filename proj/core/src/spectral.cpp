#include "qkica/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#ifdef QKICA_HAVE_LAPACKE
#include <lapacke.h>
#endif

#include "qkica/error.hpp"
#include "qkica/rng.hpp"

namespace qkica {

namespace {

// Eigenpairs in descending order. Values are in the units of the input.
struct EigPairs {
    Vector values;
    Matrix vectors;
    // Everything not returned lies below this (when set).
    double floor = 0.0;
};

#ifdef QKICA_HAVE_LAPACKE
EigPairs dense_eigh(const Matrix& k, std::optional<double> lower) {
    const lapack_int n = static_cast<lapack_int>(k.rows());
    Matrix a = k;
    Vector w(n);
    Matrix z(n, n);
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
    lapack_int found = 0;
    const char range = lower ? 'V' : 'A';
    const double vl = lower.value_or(0.0);
    const double vu = std::max(1.0, 2.0 * k.cwiseAbs().rowwise().sum().maxCoeff()) + std::abs(vl);
    const lapack_int info =
        LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', range, 'L', n, a.data(), n, vl, vu, 0, 0, 0.0, &found,
                       w.data(), z.data(), n, isuppz.data());
    if (info != 0) throw NumericalError("spectral", "dsyevr failed with info " + std::to_string(info));
    EigPairs out;
    out.values.resize(found);
    out.vectors.resize(n, found);
    for (lapack_int i = 0; i < found; ++i) {
        out.values(i) = w(found - 1 - i);
        out.vectors.col(i) = z.col(found - 1 - i);
    }
    out.floor = vl;
    return out;
}
#else
// Full tridiagonal solve; `lower` only trims what is returned.
EigPairs dense_eigh(const Matrix& k, std::optional<double> lower) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(k);
    if (es.info() != Eigen::Success) throw NumericalError("spectral", "symmetric eigensolver did not converge");
    const Index n = k.rows();
    Index found = n;
    if (lower)
        while (found > 0 && !(es.eigenvalues()(n - found) > *lower)) --found;
    EigPairs out;
    out.values = es.eigenvalues().tail(found).reverse();
    out.vectors = es.eigenvectors().rightCols(found).rowwise().reverse();
    out.floor = lower.value_or(0.0);
    return out;
}
#endif

Matrix orthonormalize(const Matrix& a) {
    Eigen::HouseholderQR<Matrix> qr(a);
    return qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
}

Matrix gaussian_block(Index rows, Index cols, std::uint64_t stream) {
    CounterRng rng(0x5EED5EEDULL, {stream});
    Matrix g(rows, cols);
    for (Index c = 0; c < cols; ++c)
        for (Index r = 0; r < rows; ++r) g(r, c) = rng.normal();
    return g;
}

// Block subspace iteration for the eigenpairs of a PSD matrix at or above
// `guard`. The block grows until its smallest Ritz value is well below the
// guard, so the wanted pairs converge at a fast geometric rate.
std::optional<EigPairs> subspace_eigh(const Matrix& k, double guard) {
    const Index n = k.rows();
    constexpr int kMaxIter = 400;
    constexpr Index kStep = 8;
    Index b = std::min<Index>(n, 16);
    Matrix q = orthonormalize(k.selfadjointView<Eigen::Lower>() * gaussian_block(n, b, 0));
    std::uint64_t grow_stream = 1;
    for (int it = 0; it < kMaxIter; ++it) {
        const Matrix y = k.selfadjointView<Eigen::Lower>() * q;
        Matrix t = q.transpose() * y;
        t = 0.5 * (t + t.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Matrix> es(t);
        const Matrix s = es.eigenvectors().rowwise().reverse();
        const Vector theta = es.eigenvalues().reverse();
        const Matrix x = q * s;
        const Matrix ax = y * s;
        const double top = std::max(theta(0), 1e-300);
        if (theta(b - 1) >= guard / 8.0 && b < n) {
            const Index add = std::min(kStep, n - b);
            Matrix grown(n, b + add);
            grown.leftCols(b) = x;
            grown.rightCols(add) = k.selfadjointView<Eigen::Lower>() * gaussian_block(n, add, grow_stream++);
            q = orthonormalize(grown);
            b += add;
            continue;
        }
        bool converged = true;
        Index wanted = 0;
        for (Index j = 0; j < b && theta(j) >= guard; ++j) {
            ++wanted;
            const double res = (ax.col(j) - theta(j) * x.col(j)).norm();
            if (res > 1e-12 * top) {
                converged = false;
                break;
            }
        }
        if (converged) {
            EigPairs out;
            out.values = theta.head(wanted);
            out.vectors = x.leftCols(wanted);
            out.floor = guard;
            return out;
        }
        q = orthonormalize(ax);
    }
    return std::nullopt;
}

} // namespace

void canonicalize_signs(Matrix& vectors) {
    for (Index c = 0; c < vectors.cols(); ++c) {
        Index best = 0;
        double best_abs = -1.0;
        for (Index r = 0; r < vectors.rows(); ++r) {
            const double a = std::abs(vectors(r, c));
            if (a > best_abs) {
                best_abs = a;
                best = r;
            }
        }
        if (vectors.rows() > 0 && vectors(best, c) < 0.0) vectors.col(c) = -vectors.col(c);
    }
}

GramSpectrum decompose(const Matrix& K, Index N, double eps_trunc, EigenSolver solver) {
    if (K.rows() != K.cols()) throw InvalidArgument("decompose needs a square matrix");
    if (N <= 0) throw InvalidArgument("decompose needs N > 0");
    if (!(eps_trunc >= 0.0)) throw InvalidArgument("eps_trunc must be non-negative");
    const double scale = std::max(1.0, K.cwiseAbs().maxCoeff());
    if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw InvalidArgument("decompose needs a symmetric matrix");

    GramSpectrum out;
    out.eps_trunc = eps_trunc;
    out.n_samples = N;
    out.trace_mu = K.trace() / static_cast<double>(N);
    const Index n = K.rows();
    if (n == 0) return out;

    const double nd = static_cast<double>(N);
    const double threshold = 0.5 * eps_trunc * nd;
    if (solver == EigenSolver::Automatic)
        solver = (eps_trunc == 0.0 || n <= 384) ? EigenSolver::Dense : EigenSolver::Subspace;

    std::optional<EigPairs> pairs;
    if (eps_trunc > 0.0 && solver == EigenSolver::Subspace) pairs = subspace_eigh(K, 0.5 * threshold);
    if (!pairs) {
        pairs = dense_eigh(K, eps_trunc > 0.0 ? std::optional<double>(0.5 * threshold) : std::nullopt);
    }

    Index kept = 0;
    if (eps_trunc == 0.0) {
        kept = pairs->values.size();
    } else {
        while (kept < pairs->values.size() && pairs->values(kept) >= threshold) ++kept;
    }
    out.mu = pairs->values.head(kept) / nd;
    out.vectors = pairs->vectors.leftCols(kept);
    canonicalize_signs(out.vectors);
    if (kept < pairs->values.size()) {
        out.discarded_max = pairs->values(kept) / nd;
    } else if (eps_trunc > 0.0) {
        out.discarded_max = pairs->floor / nd;
    }
    return out;
}

Matrix overlaps(const GramSpectrum& si, const GramSpectrum& sj) {
    if (si.vectors.rows() != sj.vectors.rows())
        throw InvalidArgument("overlaps need eigenvectors of equal length");
    return si.vectors.transpose() * sj.vectors;
}

double state_norm_K(const Matrix& K, Index N) { return K.norm() / static_cast<double>(N); }

double state_norm_psi(const GramSpectrum& si, const GramSpectrum& sj) {
    const Matrix o = overlaps(si, sj);
    return (si.mu.asDiagonal() * o).norm();
}

} // namespace qkica
