#include <gtest/gtest.h>

#include <cmath>

#include "qkica/error.hpp"
#include "qkica/gram.hpp"
#include "qkica/rng.hpp"

using namespace qkica;

namespace {

Vector random_z(Index n, std::uint64_t seed) {
    CounterRng rng(seed);
    Vector z(n);
    for (Index i = 0; i < n; ++i) z(i) = rng.normal();
    return z;
}

} // namespace

TEST(KernelEval, Examples) {
    const KernelSpec def;
    EXPECT_EQ(kernel_eval(def, 0.3, 0.3), 1.0);
    EXPECT_NEAR(kernel_eval(def, 0.0, 1.0), std::exp(-1.0), 1e-15);
    EXPECT_NEAR(kernel_eval(KernelSpec{1.0}, 1.0, 3.0), std::exp(-2.0), 1e-15);
    EXPECT_NEAR(kernel_eval(def, 0.0, 1.0), 0.367879, 1e-6);
    EXPECT_NEAR(kernel_eval(KernelSpec{1.0}, 1.0, 3.0), 0.135335, 1e-6);
}

TEST(KernelEval, InvalidSigma) {
    EXPECT_THROW(KernelSpec{0.0}.validate(), InvalidArgument);
    EXPECT_THROW(KernelSpec{-1.0}.validate(), InvalidArgument);
    EXPECT_THROW(KernelSpec{std::nan("")}.validate(), InvalidArgument);
}

TEST(GramRaw, Examples) {
    Vector z(2);
    z << 0, 0;
    EXPECT_EQ(gram_raw(z, KernelSpec{}), Matrix::Ones(2, 2));
    z << 0, 1;
    const Matrix g = gram_raw(z, KernelSpec{});
    EXPECT_EQ(g(0, 0), 1.0);
    EXPECT_NEAR(g(0, 1), std::exp(-1.0), 1e-15);
    EXPECT_EQ(g, g.transpose());
}

TEST(GramRaw, SymmetricExactly) {
    const Matrix g = gram_raw(random_z(50, 1), KernelSpec{});
    EXPECT_EQ(g, g.transpose());
}

TEST(GramCenter, TwoByTwo) {
    const double a = std::exp(-1.0);
    Matrix raw(2, 2);
    raw << 1, a, a, 1;
    Matrix want(2, 2);
    want << 1, -1, -1, 1;
    want *= (1.0 - a) / 2.0;
    EXPECT_LE((gram_center(raw) - want).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(GramCenter, OnesVanish) { EXPECT_LE(gram_center(Matrix::Ones(5, 5)).cwiseAbs().maxCoeff(), 1e-15); }

TEST(GramCenter, MatchesProjectorProduct) {
    for (Index n : {3, 17, 64}) {
        const Matrix raw = gram_raw(random_z(n, static_cast<std::uint64_t>(n)), KernelSpec{});
        const Matrix P = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
        EXPECT_LE((gram_center(raw) - P * raw * P).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(GramCenter, Idempotent) {
    const Matrix k = gram_center(gram_raw(random_z(80, 2), KernelSpec{}));
    EXPECT_LE((gram_center(k) - k).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GramCenter, RowSumsVanish) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Matrix k = gram_center(gram_raw(random_z(100 + static_cast<Index>(s), s), KernelSpec{0.3 + 0.1 * s}));
        EXPECT_LE(k.rowwise().sum().cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LE(k.colwise().sum().cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(GramCenter, PsdPreserved) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const Index n = 120;
        const Matrix k = gram_center(gram_raw(random_z(n, s), KernelSpec{}));
        Eigen::SelfAdjointEigenSolver<Matrix> es(k, Eigen::EigenvaluesOnly);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * static_cast<double>(n));
    }
}

TEST(GramCenter, InplaceMatches) {
    const Matrix raw = gram_raw(random_z(40, 3), KernelSpec{});
    Matrix k = raw;
    gram_center_inplace(k);
    EXPECT_LE((k - gram_center(raw)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(GramCenter, NonSquareRejected) { EXPECT_THROW(gram_center(Matrix::Ones(2, 3)), InvalidArgument); }

TEST(GramPair, BothParts) {
    const Vector z = random_z(30, 4);
    const GramPair p = gram_pair(z, KernelSpec{});
    EXPECT_EQ(p.raw, gram_raw(z, KernelSpec{}));
    EXPECT_LE((p.centered - gram_center(p.raw)).cwiseAbs().maxCoeff(), 1e-15);
}
