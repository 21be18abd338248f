#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qkica/contrast.hpp"
#include "qkica/preprocess.hpp"
#include "qkica/rng.hpp"
#include "qkica/spectral.hpp"

namespace qkica {

enum class NoiseMode { General, NearIndependent };

NoiseMode parse_noise_mode(const std::string& s);

struct NoiseSpec {
    double eps1 = 0.0;
    double eps2 = 0.0;
    double kappa = 0.1;
    NoiseMode mode = NoiseMode::General;
    // General mode. When unset, a noiseless pilot min_eig is used.
    std::optional<double> xi_est;
    // Near-independent mode overlap scale.
    double G = 1.0;
    std::uint64_t seed = 0;
    bool check_budget = true;
};

struct NoiseBudgets {
    double eps_mu = 0.0;
    double eps_I = 0.0;
};

// General: eps_mu = eps_I = xi kappa eps1 / 4.
// Near-independent: eps_mu = kappa eps1 / (4 G), eps_I = eps1 eps2 kappa / 4.
NoiseBudgets noise_budgets(const NoiseSpec& noise, double xi);

// Throws BudgetError. General mode needs eps1 < 1/d^2 and xi > 0; near mode
// needs eps1 < 1.
void validate_noise(const NoiseSpec& noise, Index d, double xi);

// Worst-case error of one reconstructed off-diagonal entry:
// (2/kappa) (eps_I + 2 eps_mu + 2 eps_mu^2 / kappa).
double entry_error_cap(const NoiseBudgets& b, double kappa);

struct NoisySpectrum {
    // Surviving pairs, mu replaced by the noisy readout.
    GramSpectrum spectrum;
    // Position of each survivor in the input spectrum.
    std::vector<Index> source;
    Vector mu_exact;
};

// mu + U(-eps_mu, eps_mu); pairs reading below eps_mu are dropped.
NoisySpectrum emulate_eig_readout(const GramSpectrum& spectrum, double eps_mu, CounterRng& rng);

// max(|mu_ik <u, u>| + U(-eps_I, eps_I), 0). The sign is never returned.
double emulate_overlap_readout(double mu_ik, double overlap, double eps_I, CounterRng& rng);

struct NoisyContrastResult {
    double det_noisy = 1.0;
    double det_reference = 1.0;
    double relative_error = 0.0;
    Index d = 0;
    double xi = 1.0;
    NoiseBudgets budgets;
    double max_entry_error = 0.0;
    double entry_cap = 0.0;
    Index discarded = 0;
};

// Reference is the noiseless adapted determinant on the same spectra.
// Off-diagonal entries of dropped pairs are zero, so d is unchanged.
NoisyContrastResult noisy_contrast_from_spectra(const std::vector<GramSpectrum>& spectra,
                                                const NoiseSpec& noise,
                                                const ContrastOptions& opts);

// Full path: whitening perturbed by eps2 (seeded from noise.seed), unmixing
// by W, spectra, noisy readout, reconstruction, determinant.
NoisyContrastResult noisy_contrast(const SampleMatrix& X, const WhiteningModel& model,
                                   const Matrix& W, const NoiseSpec& noise,
                                   const ContrastOptions& opts);

double round_to_bits(double mu, int r_bits);

// Exact eigenvalues of K / N rounded to r_bits, descending.
std::vector<double> eigenphase_readout(const Matrix& K, Index N, int r_bits);

} // namespace qkica
