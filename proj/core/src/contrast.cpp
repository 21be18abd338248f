#include "qkica/contrast.hpp"

#include <cmath>
#include <limits>

#include "qkica/error.hpp"
#include "qkica/parallel.hpp"

namespace qkica {

double shrink_offset(double kappa, KappaConvention convention, Index n_samples) {
    if (convention == KappaConvention::Raw) return kappa / static_cast<double>(n_samples);
    return 0.5 * kappa;
}

RkappaMatrix build_rkappa(const std::vector<GramSpectrum>& spectra, double kappa, bool signed_mode,
                          KappaConvention convention) {
    if (!(kappa > 0.0)) throw InvalidArgument("kappa must be positive");
    RkappaMatrix r;
    r.kappa = kappa;
    r.signed_mode = signed_mode;
    std::vector<Index> offset(spectra.size() + 1, 0);
    for (std::size_t i = 0; i < spectra.size(); ++i) {
        offset[i + 1] = offset[i] + spectra[i].kept();
        for (Index k = 0; k < spectra[i].kept(); ++k) r.index.push_back({static_cast<Index>(i), k});
    }
    const Index d = offset.back();
    r.data = Matrix::Identity(d, d);
    std::vector<Vector> f(spectra.size());
    for (std::size_t i = 0; i < spectra.size(); ++i) {
        const double h = shrink_offset(kappa, convention, spectra[i].n_samples);
        f[i] = spectra[i].mu.array() / (spectra[i].mu.array() + h);
    }
    for (std::size_t i = 0; i < spectra.size(); ++i) {
        for (std::size_t j = i + 1; j < spectra.size(); ++j) {
            if (spectra[i].kept() == 0 || spectra[j].kept() == 0) continue;
            Matrix o = overlaps(spectra[i], spectra[j]);
            if (!signed_mode) o = o.cwiseAbs();
            const Matrix block = f[i].asDiagonal() * o * f[j].asDiagonal();
            r.data.block(offset[i], offset[j], block.rows(), block.cols()) = block;
            r.data.block(offset[j], offset[i], block.cols(), block.rows()) = block.transpose();
        }
    }
    return r;
}

double LogDet::value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }

LogDet log_determinant(const Matrix& a, bool require_pd) {
    LogDet out;
    if (a.rows() == 0) return out;
    if (require_pd) {
        Eigen::LLT<Matrix> llt(a);
        if (llt.info() != Eigen::Success)
            throw NumericalError("contrast", "non-positive pivot in Cholesky factorization");
        out.log_abs = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        return out;
    }
    Eigen::PartialPivLU<Matrix> lu(a);
    const auto diag = lu.matrixLU().diagonal();
    int sign = static_cast<int>(lu.permutationP().determinant());
    double log_abs = 0.0;
    for (Index i = 0; i < diag.size(); ++i) {
        if (diag(i) == 0.0) return {-std::numeric_limits<double>::infinity(), 0};
        if (diag(i) < 0.0) sign = -sign;
        log_abs += std::log(std::abs(diag(i)));
    }
    out.log_abs = log_abs;
    out.sign = sign;
    return out;
}

double det_contrast(const RkappaMatrix& r) { return log_determinant(r.data, r.signed_mode).value(); }

double neg_log_det(const RkappaMatrix& r) {
    const LogDet ld = log_determinant(r.data, r.signed_mode);
    if (ld.sign <= 0) return std::numeric_limits<double>::infinity();
    return -ld.log_abs;
}

double min_eig(const Matrix& r) {
    if (r.rows() == 0) return 1.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(r, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

std::vector<GramSpectrum> spectra_of(const Matrix& Z, const ContrastOptions& opts) {
    opts.kernel.validate();
    std::vector<GramSpectrum> out(static_cast<std::size_t>(Z.rows()));
    parallel_for(out.size(), opts.threads, [&](std::size_t i) {
        Matrix k = gram_raw(Z.row(static_cast<Index>(i)).transpose(), opts.kernel);
        gram_center_inplace(k);
        out[i] = decompose(k, Z.cols(), opts.eps_trunc, opts.solver);
    });
    return out;
}

ContrastValue contrast_from_spectra(const std::vector<GramSpectrum>& spectra,
                                    const ContrastOptions& opts) {
    const RkappaMatrix r = build_rkappa(spectra, opts.kappa, opts.signed_mode, opts.convention);
    const LogDet ld = log_determinant(r.data, r.signed_mode);
    ContrastValue v;
    v.det = ld.value();
    v.neg_log_det = ld.sign > 0 ? -ld.log_abs : std::numeric_limits<double>::infinity();
    v.d = r.d();
    return v;
}

ContrastValue contrast_pipeline(const SampleMatrix& Z, const ContrastOptions& opts) {
    Z.validate();
    return contrast_from_spectra(spectra_of(Z.data, opts), opts);
}

double kurtosis_contrast(const Vector& y) {
    if (y.size() < 4) throw InvalidArgument("kurtosis needs at least 4 samples");
    const double m2 = y.array().square().mean();
    const double m4 = y.array().square().square().mean();
    return m4 - 3.0 * m2 * m2;
}

PerturbationCheck det_perturbation_check(const Matrix& A, const Matrix& B) {
    if (A.rows() != A.cols() || B.rows() != A.rows() || B.cols() != A.cols())
        throw InvalidArgument("perturbation check needs square matrices of equal size");
    const Index d = A.rows();
    Eigen::JacobiSVD<Matrix> svd(A);
    const Vector& sv = svd.singularValues();
    if (d == 0 || !(sv(d - 1) > 1e-14 * sv(0))) throw InvalidArgument("perturbation check needs a nonsingular A");
    const double normB = B.size() == 0 ? 0.0 : Eigen::JacobiSVD<Matrix>(B).singularValues()(0);
    PerturbationCheck c;
    // d * mu_A * ||B|| / ||A|| with mu_A = s_max / s_min.
    c.x = static_cast<double>(d) * normB / sv(d - 1);
    c.premise_ok = c.x < 1.0;
    c.rhs = c.premise_ok ? c.x / (1.0 - c.x) : std::numeric_limits<double>::infinity();
    const LogDet a = log_determinant(A, false);
    const LogDet ab = log_determinant(A + B, false);
    const double ratio = ab.sign == 0 ? 0.0 : (ab.sign * a.sign) * std::exp(ab.log_abs - a.log_abs);
    c.lhs = std::abs(ratio - 1.0);
    return c;
}

double composite_det_bound(Index d, double eps, double xi) {
    const double t = static_cast<double>(d) * static_cast<double>(d) * eps / xi;
    if (!(t < 1.0)) return std::numeric_limits<double>::infinity();
    return t / (1.0 - t);
}

} // namespace qkica
