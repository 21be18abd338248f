#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qkica/contrast.hpp"
#include "qkica/error.hpp"
#include "qkica/sources.hpp"

using namespace qkica;

namespace {

constexpr double kPi = 3.14159265358979323846;

double mean(const Matrix& a, Index row) { return a.row(row).mean(); }

double var(const Matrix& a, Index row) {
    const double m = mean(a, row);
    return (a.row(row).array() - m).square().mean();
}

std::string temp_file(const std::string& name, const std::string& text) {
    const auto p = std::filesystem::temp_directory_path() / ("qkica_" + name);
    std::ofstream(p) << text;
    return p.string();
}

} // namespace

TEST(Sources, EveryLawIsStandardized) {
    for (const char* name : {"uniform", "laplace", "exponential", "gaussian", "bimodal"}) {
        const SampleMatrix S = sample_sources(SourceSpec{{Distribution::parse(name)}, 200000, 11});
        EXPECT_NEAR(mean(S.data, 0), 0.0, 0.02) << name;
        EXPECT_NEAR(var(S.data, 0), 1.0, 0.03) << name;
    }
}

TEST(Sources, KurtosisMatchesLaw) {
    // Excess kurtosis: uniform -6/5, Laplace 3, exponential 6, Gaussian 0.
    const std::pair<const char*, double> expected[] = {
        {"uniform", -1.2}, {"laplace", 3.0}, {"exponential", 6.0}, {"gaussian", 0.0}};
    for (const auto& [name, k] : expected) {
        const SampleMatrix S = sample_sources(SourceSpec{{Distribution::parse(name)}, 400000, 13});
        EXPECT_NEAR(kurtosis_contrast(S.data.row(0).transpose()), k, 0.1 + 0.05 * std::abs(k)) << name;
    }
}

TEST(Sources, UniformSupport) {
    const SampleMatrix S = sample_sources(SourceSpec{{Distribution::uniform()}, 10000, 1});
    EXPECT_LE(S.data.cwiseAbs().maxCoeff(), std::sqrt(3.0));
}

TEST(Sources, ExponentialLowerBound) {
    const SampleMatrix S = sample_sources(SourceSpec{{Distribution::exponential()}, 10000, 1});
    EXPECT_GE(S.data.minCoeff(), -1.0);
}

TEST(Sources, MixtureIsStandardizedAnalytically) {
    const Distribution d = Distribution::mixture({-2.0, 3.0}, {0.3, 0.7}, {0.5, 1.0});
    const SampleMatrix S = sample_sources(SourceSpec{{d}, 300000, 4});
    EXPECT_NEAR(mean(S.data, 0), 0.0, 0.01);
    EXPECT_NEAR(var(S.data, 0), 1.0, 0.02);
}

TEST(Sources, InvalidMixtureRejected) {
    EXPECT_THROW(Distribution::mixture({0.0, 1.0}, {0.5}, {1.0, 1.0}).validate(), InvalidArgument);
    EXPECT_THROW(Distribution::mixture({0.0, 1.0}, {0.5, 0.0}, {1.0, 1.0}).validate(), InvalidArgument);
    EXPECT_THROW(Distribution::mixture({0.0, 1.0}, {0.5, 0.5}, {1.0, -1.0}).validate(), InvalidArgument);
    EXPECT_THROW(Distribution::parse("cauchy"), InvalidArgument);
}

TEST(Sources, ReproducibleAcrossThreadCounts) {
    const SourceSpec spec{{Distribution::uniform(), Distribution::laplace(), Distribution::parse("bimodal")}, 5000, 99};
    const SampleMatrix a = sample_sources(spec, 1);
    const SampleMatrix b = sample_sources(spec, 4);
    const SampleMatrix c = sample_sources(spec, 1);
    EXPECT_EQ(a.data, b.data);
    EXPECT_EQ(a.data, c.data);
}

TEST(Sources, SeedsGiveDifferentSamples) {
    const SampleMatrix a = sample_sources(SourceSpec{{Distribution::gaussian()}, 100, 1});
    const SampleMatrix b = sample_sources(SourceSpec{{Distribution::gaussian()}, 100, 2});
    EXPECT_NE(a.data, b.data);
}

TEST(Mix, IdentityLeavesSources) {
    const SampleMatrix S = sample_sources(SourceSpec{{Distribution::uniform(), Distribution::laplace()}, 50, 1});
    EXPECT_EQ(mix(S, Matrix::Identity(2, 2)).data, S.data);
}

TEST(Mix, RowSwap) {
    Matrix s(2, 2);
    s << 1, 2, 3, 4;
    Matrix a(2, 2);
    a << 0, 1, 1, 0;
    Matrix want(2, 2);
    want << 3, 4, 1, 2;
    EXPECT_EQ(mix(SampleMatrix(s), a).data, want);
}

TEST(Mix, InverseRoundTrip) {
    const SampleMatrix S = sample_sources(SourceSpec{{Distribution::uniform(), Distribution::laplace()}, 200, 3});
    Matrix a(2, 2);
    a << 2.0, 0.5, -0.3, 1.5;
    const SampleMatrix back = mix(mix(S, a), a.inverse());
    EXPECT_LE((back.data - S.data).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Mix, Linear) {
    const SampleMatrix S = sample_sources(SourceSpec{{Distribution::uniform(), Distribution::laplace()}, 200, 3});
    Matrix a(2, 2), b(2, 2);
    a << 1.0, 0.2, 0.4, -1.0;
    b << 0.3, 0.7, -0.5, 2.0;
    const Matrix lhs = mix(S, a).data + mix(S, b).data;
    EXPECT_LE((lhs - mix(S, a + b).data).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Mix, FlagsSingularWithoutRejecting) {
    const SampleMatrix S = sample_sources(SourceSpec{{Distribution::uniform(), Distribution::laplace()}, 20, 3});
    Matrix a(2, 2);
    a << 1, 2, 2, 4;
    bool singular = false;
    const SampleMatrix X = mix(S, a, &singular);
    EXPECT_TRUE(singular);
    EXPECT_EQ(X.m(), 2);
}

TEST(Mix, ShapeMismatchRejected) {
    const SampleMatrix S = sample_sources(SourceSpec{{Distribution::uniform(), Distribution::laplace()}, 20, 3});
    EXPECT_THROW(mix(S, Matrix::Identity(3, 3)), InvalidArgument);
}

TEST(Rotation, ZeroAnglesGiveIdentity) {
    GeneratorSet g = GeneratorSet::elementary(4);
    EXPECT_EQ(g.generators.size(), 6u);
    EXPECT_LE((rotation_from_generators(g) - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Rotation, QuarterTurn) {
    GeneratorSet g;
    Matrix p(2, 2);
    p << 0, -1, 1, 0;
    g.generators = {p};
    g.deltas = {kPi / 2.0};
    Matrix want(2, 2);
    want << 0, -1, 1, 0;
    EXPECT_LE((rotation_from_generators(g) - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Rotation, ElementaryOrder) {
    const GeneratorSet g = GeneratorSet::elementary(3);
    // (0,1), (0,2), (1,2) with +1 above the diagonal.
    EXPECT_EQ(g.generators[0](0, 1), 1.0);
    EXPECT_EQ(g.generators[0](1, 0), -1.0);
    EXPECT_EQ(g.generators[1](0, 2), 1.0);
    EXPECT_EQ(g.generators[2](1, 2), 1.0);
}

TEST(Rotation, OrthogonalForLargeAngles) {
    CounterRng rng(17);
    for (int t = 0; t < 50; ++t) {
        GeneratorSet g = GeneratorSet::elementary(4);
        for (auto& d : g.deltas) d = rng.uniform(-10.0, 10.0) / 2.5;
        const Matrix W = rotation_from_generators(g);
        EXPECT_LE((W.transpose() * W - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_NEAR(W.determinant(), 1.0, 1e-10);
    }
}

TEST(Rotation, RejectsNonSkewGenerator) {
    GeneratorSet g;
    g.generators = {Matrix::Identity(2, 2)};
    g.deltas = {0.1};
    EXPECT_THROW(rotation_from_generators(g), InvalidArgument);
}

TEST(LoadCsv, RowsAndCols) {
    const std::string path = temp_file("rows.csv", "1,2,3,4,5\n6,7,8,9,10\n11,12,13,14,15\n");
    const SampleMatrix r = load_csv(path, Orientation::Rows);
    EXPECT_EQ(r.m(), 3);
    EXPECT_EQ(r.n(), 5);
    EXPECT_EQ(r.data(1, 2), 8.0);
    const SampleMatrix c = load_csv(path, Orientation::Cols);
    EXPECT_EQ(c.m(), 5);
    EXPECT_EQ(c.n(), 3);
    EXPECT_EQ(c.data(2, 1), 8.0);
}

TEST(LoadCsv, HeaderBecomesLabels) {
    const std::string path = temp_file("hdr.csv", "a,\"b,c\"\r\n1,2\r\n3,4\r\n5,6\r\n");
    const SampleMatrix c = load_csv(path, Orientation::Cols);
    ASSERT_EQ(c.labels.size(), 2u);
    EXPECT_EQ(c.labels[1], "b,c");
    EXPECT_EQ(c.n(), 3);
}

TEST(LoadCsv, Errors) {
    EXPECT_THROW(load_csv(temp_file("ragged.csv", "1,2\n3\n"), Orientation::Rows), InvalidArgument);
    EXPECT_THROW(load_csv(temp_file("nan.csv", "1,2\n3,x\n"), Orientation::Rows), InvalidArgument);
    EXPECT_THROW(load_csv(temp_file("inf.csv", "1,2\n3,inf\n"), Orientation::Rows), InvalidArgument);
    EXPECT_THROW(load_csv("/nonexistent/qkica.csv", Orientation::Rows), InvalidArgument);
    EXPECT_THROW(parse_orientation("diagonal"), InvalidArgument);
}
