#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qkica/contrast.hpp"
#include "qkica/error.hpp"
#include "qkica/optimize.hpp"
#include "qkica/preprocess.hpp"
#include "qkica/sources.hpp"

using namespace qkica;

TEST(Amari, Examples) {
    EXPECT_NEAR(amari_index((Matrix(2, 2) << 1, 1, 1, 1).finished()), 1.0, 1e-15);
    EXPECT_EQ(amari_index(Matrix::Identity(3, 3)), 0.0);
    const Matrix scaled_perm = (Matrix(3, 3) << 0, 2, 0, 0, 0, -0.5, 3, 0, 0).finished();
    EXPECT_EQ(amari_index(scaled_perm), 0.0);
    EXPECT_THROW(amari_index(Matrix::Zero(2, 2)), InvalidArgument);
    EXPECT_THROW(amari_index(Matrix::Zero(2, 3)), InvalidArgument);
}

TEST(Amari, UsesUnmixingTimesMixing) {
    const Matrix a = (Matrix(2, 2) << 2, 1, 0, 1).finished();
    EXPECT_NEAR(amari_error(a, a.inverse()), 0.0, 1e-15);
    // Rows of W scaled and swapped still recover the sources.
    const Matrix w = (Matrix(2, 2) << 0, 3, 1, 0).finished() * a.inverse();
    EXPECT_NEAR(amari_error(a, w), 0.0, 1e-15);
    EXPECT_THROW(amari_error(a, Matrix::Identity(3, 3)), InvalidArgument);
}

TEST(Amari, BoundedByOne) {
    CounterRng rng(1);
    for (int t = 0; t < 100; ++t) {
        Matrix p(3, 3);
        for (Index i = 0; i < 9; ++i) p(i / 3, i % 3) = rng.normal();
        const double e = amari_index(p);
        EXPECT_GE(e, 0.0);
        EXPECT_LE(e, 2.0);
    }
}

TEST(Correlation, Examples) {
    Matrix s(2, 4);
    s << 1, 2, 3, 4, 4, 3, 2, 1;
    const Matrix c = correlation_matrix(SampleMatrix(s), SampleMatrix(s));
    EXPECT_NEAR(c(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(c(0, 1), -1.0, 1e-15);
    Matrix t(1, 4);
    t << 1, -1, -1, 1;
    EXPECT_NEAR(correlation_matrix(SampleMatrix(s), SampleMatrix(t))(0, 0), 0.0, 1e-15);
    EXPECT_THROW(correlation_matrix(SampleMatrix(s), SampleMatrix(Matrix::Ones(1, 4))), InvalidArgument);
    EXPECT_THROW(correlation_matrix(SampleMatrix(s), SampleMatrix(Matrix::Ones(1, 3))), InvalidArgument);
}

TEST(GridAxis, Parse) {
    const GridAxis g = GridAxis::parse("-0.5:0.5:11");
    EXPECT_EQ(g.lo, -0.5);
    EXPECT_EQ(g.hi, 0.5);
    EXPECT_EQ(g.steps, 11);
    EXPECT_NEAR(g.value(5), 0.0, 1e-16);
    EXPECT_EQ(g.value(10), 0.5);
    EXPECT_EQ(GridAxis::parse("1:3:1").value(0), 2.0);
    for (const char* bad : {"1:2", "a:b:c", "1:0:3", "0:1:0", "0:1:3:4", ""})
        EXPECT_THROW(GridAxis::parse(bad), InvalidArgument) << bad;
}

TEST(ScanLandscape, QuadraticBowl) {
    const GeneratorSet g = GeneratorSet::elementary(3);
    GeneratorSet two;
    two.generators = {g.generators[0], g.generators[1]};
    two.deltas = {0.0, 0.0};
    const Matrix target = rotation_from_generators({two.generators, {0.2, -0.1}});
    const ContrastFn f = [&](const Matrix& w) { return (w - target).squaredNorm(); };
    const LandscapeGrid a = scan_landscape(two, GridAxis{-0.5, 0.5, 11}, GridAxis{-0.5, 0.5, 11}, f);
    EXPECT_EQ(a.argmin_row, 7);
    EXPECT_EQ(a.argmin_col, 4);
    const LandscapeGrid b = scan_landscape(two, GridAxis{-0.5, 0.5, 11}, GridAxis{-0.5, 0.5, 11}, f, 3);
    EXPECT_EQ(a.J, b.J);
    GeneratorSet one;
    one.generators = {g.generators[0]};
    one.deltas = {0.0};
    EXPECT_EQ(scan_landscape(one, GridAxis{-1, 1, 5}, GridAxis{}, f).J.cols(), 1);
    EXPECT_THROW(scan_landscape(GeneratorSet{}, GridAxis{}, GridAxis{}, f), InvalidArgument);
}

TEST(MinimizeStiefel, FindsRotationTarget) {
    GeneratorSet g = GeneratorSet::elementary(3);
    g.deltas = {0.3, -0.2, 0.4};
    const Matrix target = rotation_from_generators(g);
    const ContrastFn f = [&](const Matrix& w) { return (w - target).squaredNorm(); };
    OptimizeOptions o;
    o.restarts = 2;
    o.max_iters = 200;
    const OptimizeReport r = minimize_stiefel(3, f, o);
    EXPECT_LE((r.W_opt - target).cwiseAbs().maxCoeff(), 1e-3);
    EXPECT_LE((r.W_opt.transpose() * r.W_opt - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(r.restarts_used, 2);
    for (std::size_t i = 1; i < r.J_trace.size(); ++i) EXPECT_LE(r.J_trace[i].second, r.J_trace[i - 1].second);
}

TEST(MinimizeStiefel, FixedPointStart) {
    const ContrastFn f = [](const Matrix& w) { return (w - Matrix::Identity(2, 2)).squaredNorm(); };
    OptimizeOptions o;
    o.restarts = 1;
    const OptimizeReport r = minimize_stiefel(2, f, o);
    EXPECT_LE((r.W_opt - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(r.J_opt, 1e-12);
}

TEST(MinimizeStiefel, SingleVariableAndErrors) {
    const ContrastFn f = [](const Matrix&) { return 1.0; };
    const OptimizeReport r = minimize_stiefel(1, f, OptimizeOptions{});
    EXPECT_EQ(r.W_opt, Matrix::Identity(1, 1));
    EXPECT_TRUE(r.converged);
    OptimizeOptions bad;
    bad.restarts = 0;
    EXPECT_THROW(minimize_stiefel(2, f, bad), InvalidArgument);
    const ContrastFn nan = [](const Matrix&) { return std::nan(""); };
    EXPECT_THROW(minimize_stiefel(2, nan, OptimizeOptions{}), NumericalError);
}

TEST(MinimizeStiefel, RecoversUniformSources) {
    SourceSpec spec;
    spec.distributions = {Distribution::uniform(), Distribution::uniform()};
    spec.n_samples = 1000;
    spec.seed = 4;
    const Matrix a = (Matrix(2, 2) << 1.0, 0.6, -0.4, 1.2).finished();
    const SampleMatrix x = mix(sample_sources(spec), a);
    const WhitenResult wr = whiten(x);
    ContrastOptions copts;
    const ContrastFn f = [&](const Matrix& w) {
        return contrast_pipeline(SampleMatrix(w * wr.Y.data), copts).neg_log_det;
    };
    OptimizeOptions o;
    o.restarts = 3;
    o.max_iters = 30;
    o.seed = 1;
    const OptimizeReport r = minimize_stiefel(2, f, o);
    const Matrix unmixing = r.W_opt * wr.model.inv_sqrt;
    EXPECT_LE(amari_error(a, unmixing), 0.15);
}
