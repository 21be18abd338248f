#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "qkica/contrast.hpp"
#include "qkica/error.hpp"
#include "qkica/preprocess.hpp"
#include "qkica/sources.hpp"

using namespace qkica;

namespace {

// One kept pair with eigenvector e and mu chosen so f(mu) = f.
GramSpectrum single_pair(const Vector& e, double f, double kappa) {
    GramSpectrum s;
    s.n_samples = 100;
    s.mu = Vector::Constant(1, f * (kappa / 2.0) / (1.0 - f));
    s.vectors = e.normalized();
    return s;
}

SampleMatrix whitened_sources(std::vector<Distribution> d, Index n, std::uint64_t seed) {
    SourceSpec spec;
    spec.distributions = std::move(d);
    spec.n_samples = n;
    spec.seed = seed;
    return whiten(sample_sources(spec)).Y;
}

double cofactor_det3(const Matrix& a) {
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
           a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

} // namespace

TEST(ShrinkOffset, Conventions) {
    EXPECT_DOUBLE_EQ(shrink_offset(0.1, KappaConvention::Normalized, 500), 0.05);
    EXPECT_DOUBLE_EQ(shrink_offset(2.0, KappaConvention::Raw, 500), 2.0 / 500.0);
}

TEST(BuildRkappa, SingleVariableIsIdentity) {
    const SampleMatrix z = whitened_sources({Distribution::uniform()}, 200, 1);
    ContrastOptions o;
    const ContrastValue v = contrast_pipeline(z, o);
    EXPECT_GT(v.d, 0);
    EXPECT_DOUBLE_EQ(v.det, 1.0);
    EXPECT_DOUBLE_EQ(v.neg_log_det, 0.0);
}

TEST(BuildRkappa, QuarterEntry) {
    Vector e(4);
    e << 1, -1, 1, -1;
    const double kappa = 0.1;
    // mu = kappa / 2 gives f = 1/2, so the entry is 1/4 for identical vectors.
    const std::vector<GramSpectrum> s = {single_pair(e, 0.5, kappa), single_pair(e, 0.5, kappa)};
    const RkappaMatrix r = build_rkappa(s, kappa, true);
    ASSERT_EQ(r.d(), 2);
    EXPECT_NEAR(r.data(0, 1), 0.25, 1e-15);
    EXPECT_NEAR(r.data(1, 0), 0.25, 1e-15);
    EXPECT_NEAR(det_contrast(r), 1.0 - 1.0 / 16.0, 1e-15);
}

TEST(BuildRkappa, SignedAndUnsigned) {
    Vector a(4), b(4);
    a << 1, -1, 1, -1;
    b << -1, 1, -1, 1;
    const std::vector<GramSpectrum> s = {single_pair(a, 0.5, 0.1), single_pair(b, 0.5, 0.1)};
    EXPECT_NEAR(build_rkappa(s, 0.1, true).data(0, 1), -0.25, 1e-15);
    EXPECT_NEAR(build_rkappa(s, 0.1, false).data(0, 1), 0.25, 1e-15);
}

TEST(BuildRkappa, BlockIndex) {
    std::vector<GramSpectrum> s(3);
    for (std::size_t i = 0; i < s.size(); ++i) {
        s[i].n_samples = 5;
        s[i].mu = Vector::Constant(static_cast<Index>(i + 1), 0.2);
        s[i].vectors = Matrix::Identity(5, static_cast<Index>(i + 1));
    }
    const RkappaMatrix r = build_rkappa(s, 0.1, true);
    ASSERT_EQ(r.d(), 6);
    EXPECT_EQ(r.index[3].variable, 2);
    EXPECT_EQ(r.index[3].pair, 0);
    EXPECT_EQ(r.data.diagonal(), Vector::Ones(6));
    EXPECT_EQ(r.data, r.data.transpose());
    EXPECT_THROW(build_rkappa(s, 0.0, true), InvalidArgument);
}

TEST(LogDeterminant, TwoByTwo) {
    for (double c : {0.0, 0.3, -0.7, 0.99}) {
        Matrix a(2, 2);
        a << 1, c, c, 1;
        EXPECT_NEAR(log_determinant(a, true).value(), 1.0 - c * c, 1e-14);
        EXPECT_NEAR(log_determinant(a, false).value(), 1.0 - c * c, 1e-14);
    }
}

TEST(LogDeterminant, MatchesCofactorExpansion) {
    CounterRng rng(3);
    for (int t = 0; t < 50; ++t) {
        Matrix a(3, 3);
        for (Index i = 0; i < 9; ++i) a(i / 3, i % 3) = rng.normal();
        const double want = cofactor_det3(a);
        EXPECT_NEAR(log_determinant(a, false).value(), want, 1e-12 * std::max(1.0, std::abs(want)));
        const Matrix spd = a * a.transpose() + Matrix::Identity(3, 3);
        EXPECT_NEAR(log_determinant(spd, true).value(), cofactor_det3(spd), 1e-10 * cofactor_det3(spd));
    }
}

TEST(LogDeterminant, SignAndSingular) {
    Matrix a(2, 2);
    a << 1, 2, 2, 1;
    const LogDet l = log_determinant(a, false);
    EXPECT_EQ(l.sign, -1);
    EXPECT_NEAR(l.value(), -3.0, 1e-14);
    EXPECT_THROW(log_determinant(a, true), NumericalError);
    EXPECT_EQ(log_determinant(Matrix::Zero(2, 2), false).sign, 0);
    EXPECT_EQ(log_determinant(Matrix(0, 0), true).value(), 1.0);
}

TEST(NegLogDet, InfiniteWhenNotPositive) {
    RkappaMatrix r;
    r.signed_mode = false;
    r.data.resize(2, 2);
    r.data << 1, 2, 2, 1;
    EXPECT_EQ(neg_log_det(r), std::numeric_limits<double>::infinity());
}

TEST(MinEig, Example) {
    Matrix a(2, 2);
    a << 1, 0.5, 0.5, 1;
    EXPECT_NEAR(min_eig(a), 0.5, 1e-15);
    EXPECT_EQ(min_eig(Matrix(0, 0)), 1.0);
}

TEST(Contrast, DuplicateVariableIsDependent) {
    SampleMatrix z = whitened_sources({Distribution::uniform(), Distribution::laplace()}, 400, 5);
    z.data.row(1) = z.data.row(0);
    const ContrastValue v = contrast_pipeline(z, ContrastOptions{});
    EXPECT_LT(v.det, 0.9);
}

TEST(Contrast, IndependentNearOne) {
    const SampleMatrix z = whitened_sources({Distribution::uniform(), Distribution::laplace()}, 1000, 6);
    const ContrastValue v = contrast_pipeline(z, ContrastOptions{});
    EXPECT_GT(v.det, 0.9);
    EXPECT_LE(v.det, 1.0);
}

TEST(Contrast, PermutationInvariant) {
    const SampleMatrix z =
        whitened_sources({Distribution::uniform(), Distribution::laplace(), Distribution::exponential()}, 300, 7);
    Matrix m = (Matrix(3, 3) << 0.8, 0.6, 0, -0.6, 0.8, 0, 0, 0, 1).finished();
    const SampleMatrix mixed(m * z.data);
    SampleMatrix perm(mixed.data);
    perm.data.row(0) = mixed.data.row(2);
    perm.data.row(2) = mixed.data.row(0);
    for (bool signed_mode : {true, false}) {
        ContrastOptions o;
        o.signed_mode = signed_mode;
        EXPECT_NEAR(contrast_pipeline(mixed, o).det, contrast_pipeline(perm, o).det, 1e-10);
    }
}

TEST(Contrast, SignedMatrixPositiveDefinite) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const SampleMatrix z =
            whitened_sources({Distribution::uniform(), Distribution::laplace(), Distribution::uniform()}, 150, seed);
        ContrastOptions o;
        const RkappaMatrix r = build_rkappa(spectra_of(z.data, o), o.kappa, true);
        EXPECT_GT(min_eig(r.data), 0.0);
        EXPECT_GT(det_contrast(r), 0.0);
        EXPECT_LE(det_contrast(r), 1.0 + 1e-12);
    }
}

TEST(Contrast, ThreadCountDoesNotMatter) {
    const SampleMatrix z =
        whitened_sources({Distribution::uniform(), Distribution::laplace(), Distribution::gaussian()}, 300, 8);
    ContrastOptions a, b;
    b.threads = 3;
    EXPECT_EQ(contrast_pipeline(z, a).det, contrast_pipeline(z, b).det);
}

TEST(Kurtosis, UniformAndErrors) {
    const SampleMatrix z = whitened_sources({Distribution::uniform()}, 20000, 9);
    EXPECT_NEAR(kurtosis_contrast(z.data.row(0).transpose()), -1.2, 0.1);
    EXPECT_THROW(kurtosis_contrast(Vector::Ones(3)), InvalidArgument);
}

TEST(Perturbation, IdentityExample) {
    const PerturbationCheck c = det_perturbation_check(Matrix::Identity(3, 3), 0.01 * Matrix::Identity(3, 3));
    EXPECT_TRUE(c.premise_ok);
    EXPECT_NEAR(c.x, 0.03, 1e-15);
    EXPECT_NEAR(c.lhs, 0.030301, 1e-12);
    EXPECT_NEAR(c.rhs, 0.03 / 0.97, 1e-12);
    EXPECT_NEAR(c.rhs, 0.030928, 1e-6);
}

TEST(Perturbation, BoundHoldsWhenPremiseHolds) {
    CounterRng rng(10);
    int checked = 0;
    for (int t = 0; t < 300; ++t) {
        const Index d = 2 + static_cast<Index>(rng.next_u64() % 4);
        Matrix g(d, d), b(d, d);
        for (Index i = 0; i < d * d; ++i) {
            g(i / d, i % d) = rng.normal();
            b(i / d, i % d) = rng.normal();
        }
        const Matrix a = g * g.transpose() + Matrix::Identity(d, d);
        b *= rng.uniform(0.0, 0.3) / (Eigen::JacobiSVD<Matrix>(b).singularValues()(0) * static_cast<double>(d));
        const PerturbationCheck c = det_perturbation_check(a, b);
        if (!c.premise_ok) continue;
        ++checked;
        EXPECT_LE(c.lhs, c.rhs * (1.0 + 1e-12));
    }
    EXPECT_GT(checked, 100);
}

TEST(Perturbation, Errors) {
    EXPECT_THROW(det_perturbation_check(Matrix::Zero(2, 2), Matrix::Zero(2, 2)), InvalidArgument);
    EXPECT_THROW(det_perturbation_check(Matrix::Identity(2, 2), Matrix::Zero(3, 3)), InvalidArgument);
}

TEST(CompositeBound, Values) {
    EXPECT_NEAR(composite_det_bound(2, 0.05, 1.0), 0.25, 1e-15);
    EXPECT_EQ(composite_det_bound(2, 0.25, 1.0), std::numeric_limits<double>::infinity());
    EXPECT_EQ(composite_det_bound(3, 0.0, 0.5), 0.0);
}
