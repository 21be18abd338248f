#include "qkica/preprocess.hpp"

#include <cmath>
#include <sstream>

#include "qkica/error.hpp"
#include "qkica/rng.hpp"

namespace qkica {

WhiteningModel WhiteningModel::identity(Index m) {
    WhiteningModel w;
    w.mean = Vector::Zero(m);
    w.M = Matrix::Identity(m, m);
    w.inv_sqrt = Matrix::Identity(m, m);
    return w;
}

SampleMatrix center(const SampleMatrix& X) {
    if (X.n() < 2) throw InvalidArgument("centering needs N >= 2");
    const Vector mean = X.data.rowwise().mean();
    SampleMatrix out(X.data.colwise() - mean, X.labels);
    // A second pass removes the residual mean left by rounding.
    const Vector residual = out.data.rowwise().mean();
    out.data.colwise() -= residual;
    return out;
}

Matrix covariance(const SampleMatrix& Xc) {
    Matrix M = (Xc.data * Xc.data.transpose()) / static_cast<double>(Xc.n());
    return 0.5 * (M + M.transpose());
}

WhitenResult whiten(const SampleMatrix& X) {
    X.validate();
    const Vector mean = X.data.rowwise().mean();
    const SampleMatrix Xc = center(X);
    const Matrix M = covariance(Xc);
    Eigen::SelfAdjointEigenSolver<Matrix> es(M);
    const Vector& ev = es.eigenvalues();
    const double top = ev.maxCoeff();
    for (Index i = 0; i < ev.size(); ++i) {
        if (!(ev(i) > 1e-12 * top)) {
            std::ostringstream msg;
            msg << "covariance is singular: eigenvalue " << i << " = " << ev(i)
                << " is below 1e-12 * " << top;
            throw NumericalError("preprocess", msg.str());
        }
    }
    const Matrix& E = es.eigenvectors();
    WhitenResult r;
    r.model.mean = mean;
    r.model.M = M;
    r.model.inv_sqrt = E * ev.cwiseSqrt().cwiseInverse().asDiagonal() * E.transpose();
    r.model.inv_sqrt = 0.5 * (r.model.inv_sqrt + r.model.inv_sqrt.transpose()).eval();
    r.model.mu_M = top / ev.minCoeff();
    Matrix Y = r.model.inv_sqrt * Xc.data;
    // One refinement pass: for ill-conditioned M the first pass leaves
    // cov(Y) - I at roughly cond(M) * machine epsilon.
    Eigen::SelfAdjointEigenSolver<Matrix> rs(covariance(SampleMatrix(Y)));
    const Matrix fix = rs.eigenvectors() * rs.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                       rs.eigenvectors().transpose();
    r.model.inv_sqrt = (fix * r.model.inv_sqrt).eval();
    r.Y = SampleMatrix(r.model.inv_sqrt * Xc.data, X.labels);
    return r;
}

WhiteningModel perturb_whitening(const WhiteningModel& model, double eps2, std::uint64_t seed) {
    if (!(eps2 >= 0.0 && eps2 < 0.2)) throw InvalidArgument("eps2 must lie in [0, 0.2)");
    const Index m = model.inv_sqrt.rows();
    WhiteningModel out = model;
    out.eps2 = eps2;
    out.seed = seed;
    if (eps2 == 0.0) {
        out.eps2_applied = 0.0;
        out.E = Matrix::Zero(m, m);
        out.perturbed_inv_sqrt = model.inv_sqrt;
        return out;
    }
    CounterRng rng(seed, {0x77686974ULL});
    Matrix g(m, m);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j) g(i, j) = rng.normal();
    Matrix E = 0.5 * (g + g.transpose());
    E /= spectral_norm(E);
    const double applied = rng.uniform(0.9 * eps2, eps2);
    out.eps2_applied = applied;
    out.E = E;
    out.perturbed_inv_sqrt = model.inv_sqrt + applied * E;
    return out;
}

SampleMatrix apply_unmixing(const SampleMatrix& X, const WhiteningModel& model, const Matrix& W,
                            bool use_perturbed) {
    const Index m = model.inv_sqrt.rows();
    if (W.rows() != m || W.cols() != m) throw InvalidArgument("unmixing matrix has the wrong shape");
    if (X.m() != m) throw InvalidArgument("sample rows do not match the whitening model");
    if ((W.transpose() * W - Matrix::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-8)
        throw InvalidArgument("unmixing matrix is not orthogonal within 1e-8");
    const Matrix* S = &model.inv_sqrt;
    if (use_perturbed) {
        if (!model.perturbed_inv_sqrt) throw InvalidArgument("whitening model has no perturbed variant");
        S = &*model.perturbed_inv_sqrt;
    }
    const Matrix T = W * (*S);
    return SampleMatrix(T * (X.data.colwise() - model.mean));
}

double condition_number(const Matrix& M) {
    if (M.rows() != M.cols() || M.rows() == 0) throw InvalidArgument("condition number needs a square matrix");
    Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) throw InvalidArgument("condition number needs a positive definite matrix");
    return hi / lo;
}

double spectral_norm(const Matrix& A) {
    if (A.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(A);
    return svd.singularValues()(0);
}

double max_centered_deviation(const SampleMatrix& X) {
    const Vector mean = X.data.rowwise().mean();
    return (X.data.colwise() - mean).cwiseAbs().maxCoeff();
}

} // namespace qkica
