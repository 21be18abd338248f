#include <gtest/gtest.h>

#include <cmath>

#include "qkica/error.hpp"
#include "qkica/gram.hpp"
#include "qkica/preprocess.hpp"
#include "qkica/qemu.hpp"
#include "qkica/sources.hpp"

using namespace qkica;

namespace {

SampleMatrix whitened(std::vector<Distribution> d, Index n, std::uint64_t seed) {
    SourceSpec spec;
    spec.distributions = std::move(d);
    spec.n_samples = n;
    spec.seed = seed;
    return whiten(sample_sources(spec)).Y;
}

GramSpectrum spectrum_with(std::initializer_list<double> mu) {
    GramSpectrum s;
    s.n_samples = 10;
    s.mu.resize(static_cast<Index>(mu.size()));
    Index i = 0;
    for (double v : mu) s.mu(i++) = v;
    s.vectors = Matrix::Identity(10, s.mu.size());
    return s;
}

} // namespace

TEST(NoiseBudgets, General) {
    NoiseSpec n;
    n.eps1 = 0.01;
    n.kappa = 0.1;
    const NoiseBudgets b = noise_budgets(n, 0.5);
    EXPECT_NEAR(b.eps_mu, 0.5 * 0.1 * 0.01 / 4.0, 1e-18);
    EXPECT_EQ(b.eps_I, b.eps_mu);
}

TEST(NoiseBudgets, NearIndependent) {
    NoiseSpec n;
    n.mode = NoiseMode::NearIndependent;
    n.eps1 = 0.2;
    n.eps2 = 0.05;
    n.kappa = 0.1;
    n.G = 2.0;
    const NoiseBudgets b = noise_budgets(n, 0.5);
    EXPECT_NEAR(b.eps_mu, 0.1 * 0.2 / 8.0, 1e-18);
    EXPECT_NEAR(b.eps_I, 0.2 * 0.05 * 0.1 / 4.0, 1e-18);
}

TEST(NoiseBudgets, EntryCap) {
    NoiseBudgets b;
    b.eps_mu = 0.001;
    b.eps_I = 0.002;
    // (2/kappa)(eps_I + 2 eps_mu + 2 eps_mu^2 / kappa)
    EXPECT_NEAR(entry_error_cap(b, 0.1), 20.0 * (0.002 + 0.002 + 2e-6 / 0.1), 1e-15);
}

TEST(ValidateNoise, Rules) {
    NoiseSpec n;
    n.eps1 = 0.05;
    EXPECT_NO_THROW(validate_noise(n, 4, 0.5));
    EXPECT_THROW(validate_noise(n, 5, 0.5), BudgetError);
    EXPECT_THROW(validate_noise(n, 4, 0.0), BudgetError);
    n.check_budget = false;
    EXPECT_NO_THROW(validate_noise(n, 5, 0.0));
    n.eps2 = 0.2;
    EXPECT_THROW(validate_noise(n, 4, 0.5), InvalidArgument);
    NoiseSpec near;
    near.mode = NoiseMode::NearIndependent;
    near.eps1 = 0.99;
    EXPECT_NO_THROW(validate_noise(near, 100, 0.0));
    near.eps1 = 1.0;
    EXPECT_THROW(validate_noise(near, 100, 0.0), BudgetError);
    EXPECT_EQ(parse_noise_mode("near"), NoiseMode::NearIndependent);
    EXPECT_THROW(parse_noise_mode("loud"), InvalidArgument);
}

TEST(EigReadout, ZeroNoiseKeepsEverything) {
    const GramSpectrum s = spectrum_with({0.3, 0.01, 0.001});
    CounterRng rng(1);
    const NoisySpectrum n = emulate_eig_readout(s, 0.0, rng);
    EXPECT_EQ(n.spectrum.kept(), 3);
    EXPECT_EQ(n.spectrum.mu, s.mu);
}

TEST(EigReadout, DiscardsBelowBudget) {
    const GramSpectrum s = spectrum_with({0.3, 0.01, 0.001});
    CounterRng rng(2);
    const NoisySpectrum n = emulate_eig_readout(s, 0.005, rng);
    // 0.001 + U(-0.005, 0.005) never reaches 0.005.
    ASSERT_EQ(n.spectrum.kept(), 2);
    EXPECT_EQ(n.source, (std::vector<Index>{0, 1}));
    for (Index a = 0; a < 2; ++a) {
        EXPECT_LE(std::abs(n.spectrum.mu(a) - n.mu_exact(a)), 0.005);
        EXPECT_GE(n.spectrum.mu(a), 0.005);
    }
    EXPECT_EQ(n.spectrum.vectors.col(1), s.vectors.col(1));
}

TEST(OverlapReadout, NonNegativeAndSignFree) {
    CounterRng a(3), b(3);
    for (int t = 0; t < 200; ++t) {
        const double ov = a.uniform(-1.0, 1.0);
        b.uniform(-1.0, 1.0);
        const double x = emulate_overlap_readout(0.2, ov, 0.01, a);
        const double y = emulate_overlap_readout(0.2, -ov, 0.01, b);
        EXPECT_GE(x, 0.0);
        EXPECT_EQ(x, y);
        EXPECT_LE(std::abs(x - std::abs(0.2 * ov)), 0.01 + 1e-15);
    }
}

TEST(NoisyContrast, ZeroNoiseMatchesAdapted) {
    const SampleMatrix z =
        whitened({Distribution::uniform(), Distribution::laplace(), Distribution::uniform()}, 300, 4);
    ContrastOptions o;
    o.signed_mode = false;
    const auto spectra = spectra_of(z.data, o);
    NoiseSpec n;
    n.kappa = o.kappa;
    const NoisyContrastResult r = noisy_contrast_from_spectra(spectra, n, o);
    EXPECT_NEAR(r.det_noisy, contrast_from_spectra(spectra, o).det, 1e-12);
    EXPECT_LE(r.relative_error, 1e-12);
    EXPECT_EQ(r.discarded, 0);
}

TEST(NoisyContrast, EntriesWithinCap) {
    const SampleMatrix z = whitened({Distribution::uniform(), Distribution::laplace()}, 300, 5);
    ContrastOptions o;
    const auto spectra = spectra_of(z.data, o);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        NoiseSpec n;
        n.kappa = o.kappa;
        n.eps1 = 0.2 / static_cast<double>(spectra[0].kept() + spectra[1].kept()) /
                 static_cast<double>(spectra[0].kept() + spectra[1].kept());
        n.seed = seed;
        const NoisyContrastResult r = noisy_contrast_from_spectra(spectra, n, o);
        EXPECT_GT(r.max_entry_error, 0.0);
        EXPECT_LE(r.max_entry_error, r.entry_cap);
        EXPECT_LE(r.relative_error, composite_det_bound(r.d, r.entry_cap, r.xi));
    }
}

TEST(NoisyContrast, SeedDeterminesResult) {
    const SampleMatrix z = whitened({Distribution::uniform(), Distribution::laplace()}, 200, 6);
    ContrastOptions o;
    const auto spectra = spectra_of(z.data, o);
    NoiseSpec n;
    n.kappa = o.kappa;
    n.eps1 = 0.002;
    n.seed = 11;
    const auto a = noisy_contrast_from_spectra(spectra, n, o);
    const auto b = noisy_contrast_from_spectra(spectra, n, o);
    EXPECT_EQ(a.det_noisy, b.det_noisy);
    n.seed = 12;
    EXPECT_NE(noisy_contrast_from_spectra(spectra, n, o).det_noisy, a.det_noisy);
}

TEST(NoisyContrast, KappaMismatch) {
    ContrastOptions o;
    NoiseSpec n;
    n.kappa = 0.2;
    EXPECT_THROW(noisy_contrast_from_spectra({}, n, o), InvalidArgument);
}

TEST(NoisyContrast, FullPathWithWhiteningNoise) {
    SourceSpec spec;
    spec.distributions = {Distribution::uniform(), Distribution::laplace()};
    spec.n_samples = 300;
    spec.seed = 7;
    const SampleMatrix x = mix(sample_sources(spec), (Matrix(2, 2) << 2, 1, 1, 1).finished());
    const WhiteningModel model = whiten(x).model;
    ContrastOptions o;
    NoiseSpec n;
    n.kappa = o.kappa;
    n.mode = NoiseMode::NearIndependent;
    n.eps1 = 0.1;
    n.eps2 = 0.05;
    const NoisyContrastResult r = noisy_contrast(x, model, Matrix::Identity(2, 2), n, o);
    EXPECT_GT(r.d, 0);
    EXPECT_TRUE(std::isfinite(r.det_noisy));
}

TEST(Eigenphase, Rounding) {
    EXPECT_EQ(round_to_bits(0.3, 2), 0.25);
    EXPECT_EQ(round_to_bits(0.4, 2), 0.5);
    EXPECT_EQ(round_to_bits(0.3, 4), 0.3125);
    EXPECT_THROW(round_to_bits(0.3, 0), InvalidArgument);
    Matrix k(2, 2);
    k << 1, -1, -1, 1;
    const std::vector<double> r = eigenphase_readout(k * 0.3, 2, 2);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r[0], 0.25);
    EXPECT_EQ(r[1], 0.0);
}
