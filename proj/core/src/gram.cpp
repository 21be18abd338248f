#include "qkica/gram.hpp"

#include "qkica/error.hpp"

namespace qkica {

void KernelSpec::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("kernel sigma must be positive");
}

double kernel_eval(const KernelSpec& spec, double x, double y) {
    const double d = x - y;
    return std::exp(-d * d / (2.0 * spec.sigma * spec.sigma));
}

Matrix gram_raw(const Vector& z, const KernelSpec& spec) {
    spec.validate();
    const Index n = z.size();
    if (n < 2) throw InvalidArgument("Gram matrix needs N >= 2");
    const double scale = -1.0 / (2.0 * spec.sigma * spec.sigma);
    Matrix k(n, n);
    for (Index c = 0; c < n; ++c) {
        k(c, c) = 1.0;
        for (Index r = c + 1; r < n; ++r) {
            const double d = z(r) - z(c);
            const double v = std::exp(scale * d * d);
            k(r, c) = v;
            k(c, r) = v;
        }
    }
    return k;
}

void gram_center_inplace(Matrix& a) {
    if (a.rows() != a.cols()) throw InvalidArgument("Gram centering needs a square matrix");
    const Vector col_mean = a.colwise().mean().transpose();
    const Vector row_mean = a.rowwise().mean();
    const double grand = row_mean.mean();
    for (Index c = 0; c < a.cols(); ++c)
        for (Index r = 0; r < a.rows(); ++r) a(r, c) += grand - row_mean(r) - col_mean(c);
}

Matrix gram_center(const Matrix& raw) {
    Matrix k = raw;
    gram_center_inplace(k);
    return k;
}

GramPair gram_pair(const Vector& z, const KernelSpec& spec) {
    GramPair p;
    p.raw = gram_raw(z, spec);
    p.centered = gram_center(p.raw);
    return p;
}

} // namespace qkica
