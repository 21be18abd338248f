#include "qkica/qemu.hpp"

#include <algorithm>
#include <cmath>

#include "qkica/error.hpp"

namespace qkica {

namespace {

constexpr std::uint64_t kEigStream = 1;
constexpr std::uint64_t kOverlapStream = 2;

double cap_for_offset(const NoiseBudgets& b, double h) {
    return (b.eps_I + 2.0 * b.eps_mu + b.eps_mu * b.eps_mu / h) / h;
}

} // namespace

NoiseMode parse_noise_mode(const std::string& s) {
    if (s == "general") return NoiseMode::General;
    if (s == "near" || s == "near_independent") return NoiseMode::NearIndependent;
    throw InvalidArgument("noise mode must be general or near, got '" + s + "'");
}

NoiseBudgets noise_budgets(const NoiseSpec& noise, double xi) {
    NoiseBudgets b;
    if (noise.mode == NoiseMode::General) {
        b.eps_mu = xi * noise.kappa * noise.eps1 / 4.0;
        b.eps_I = b.eps_mu;
    } else {
        b.eps_mu = noise.kappa * noise.eps1 / (4.0 * noise.G);
        b.eps_I = noise.eps1 * noise.eps2 * noise.kappa / 4.0;
    }
    return b;
}

void validate_noise(const NoiseSpec& noise, Index d, double xi) {
    if (!(noise.kappa > 0.0)) throw InvalidArgument("kappa must be positive");
    if (!(noise.eps1 >= 0.0)) throw InvalidArgument("eps1 must be non-negative");
    if (!(noise.eps2 >= 0.0 && noise.eps2 < 0.2)) throw InvalidArgument("eps2 must lie in [0, 0.2)");
    if (!noise.check_budget) return;
    if (noise.mode == NoiseMode::General) {
        const double limit = d > 0 ? 1.0 / (static_cast<double>(d) * static_cast<double>(d)) : 1.0;
        if (!(noise.eps1 < limit))
            throw BudgetError("general mode needs eps1 < 1/d^2 = " + std::to_string(limit) + " (d = " +
                              std::to_string(d) + ")");
        if (!(xi > 0.0)) throw BudgetError("general mode needs a positive minimal eigenvalue");
    } else {
        if (!(noise.eps1 < 1.0)) throw BudgetError("near-independent mode needs eps1 < 1");
        if (!(noise.G > 0.0)) throw BudgetError("near-independent mode needs G > 0");
    }
}

double entry_error_cap(const NoiseBudgets& b, double kappa) { return cap_for_offset(b, 0.5 * kappa); }

NoisySpectrum emulate_eig_readout(const GramSpectrum& spectrum, double eps_mu, CounterRng& rng) {
    NoisySpectrum out;
    out.spectrum.eps_trunc = spectrum.eps_trunc;
    out.spectrum.n_samples = spectrum.n_samples;
    out.spectrum.trace_mu = spectrum.trace_mu;
    out.spectrum.discarded_max = spectrum.discarded_max;
    std::vector<double> mu;
    for (Index k = 0; k < spectrum.kept(); ++k) {
        rng.seek(static_cast<std::uint64_t>(k));
        const double noisy = spectrum.mu(k) + rng.uniform(-eps_mu, eps_mu);
        if (eps_mu > 0.0 && noisy < eps_mu) continue;
        mu.push_back(noisy);
        out.source.push_back(k);
    }
    const Index kept = static_cast<Index>(mu.size());
    out.spectrum.mu.resize(kept);
    out.mu_exact.resize(kept);
    out.spectrum.vectors.resize(spectrum.vectors.rows(), kept);
    for (Index a = 0; a < kept; ++a) {
        out.spectrum.mu(a) = mu[static_cast<std::size_t>(a)];
        out.mu_exact(a) = spectrum.mu(out.source[static_cast<std::size_t>(a)]);
        out.spectrum.vectors.col(a) = spectrum.vectors.col(out.source[static_cast<std::size_t>(a)]);
    }
    return out;
}

double emulate_overlap_readout(double mu_ik, double overlap, double eps_I, CounterRng& rng) {
    return std::max(std::abs(mu_ik * overlap) + rng.uniform(-eps_I, eps_I), 0.0);
}

NoisyContrastResult noisy_contrast_from_spectra(const std::vector<GramSpectrum>& spectra,
                                                const NoiseSpec& noise,
                                                const ContrastOptions& opts) {
    if (std::abs(noise.kappa - opts.kappa) > 1e-15 * std::max(1.0, opts.kappa))
        throw InvalidArgument("noise and contrast kappa differ");
    const RkappaMatrix ref = build_rkappa(spectra, opts.kappa, false, opts.convention);
    const Index d = ref.d();
    NoisyContrastResult res;
    res.d = d;
    res.xi = noise.xi_est ? *noise.xi_est : min_eig(ref.data);
    validate_noise(noise, d, res.xi);
    res.budgets = noise_budgets(noise, res.xi);

    std::vector<NoisySpectrum> noisy;
    noisy.reserve(spectra.size());
    for (std::size_t i = 0; i < spectra.size(); ++i) {
        CounterRng rng(noise.seed, {kEigStream, static_cast<std::uint64_t>(i)});
        noisy.push_back(emulate_eig_readout(spectra[i], res.budgets.eps_mu, rng));
        res.discarded += spectra[i].kept() - noisy.back().spectrum.kept();
    }

    std::vector<Index> offset(spectra.size() + 1, 0);
    for (std::size_t i = 0; i < spectra.size(); ++i) offset[i + 1] = offset[i] + spectra[i].kept();
    Matrix r = Matrix::Identity(d, d);
    for (std::size_t i = 0; i < spectra.size(); ++i) {
        const double hi = shrink_offset(opts.kappa, opts.convention, spectra[i].n_samples);
        for (std::size_t j = i + 1; j < spectra.size(); ++j) {
            const double hj = shrink_offset(opts.kappa, opts.convention, spectra[j].n_samples);
            const NoisySpectrum& ni = noisy[i];
            const NoisySpectrum& nj = noisy[j];
            if (ni.spectrum.kept() == 0 || nj.spectrum.kept() == 0) continue;
            const Matrix o = overlaps(ni.spectrum, nj.spectrum);
            for (Index a = 0; a < ni.spectrum.kept(); ++a) {
                const Index k = ni.source[static_cast<std::size_t>(a)];
                const double denom = ni.spectrum.mu(a) + hi;
                for (Index b = 0; b < nj.spectrum.kept(); ++b) {
                    const Index l = nj.source[static_cast<std::size_t>(b)];
                    CounterRng rng(noise.seed, {kOverlapStream, static_cast<std::uint64_t>(i),
                                                static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(j),
                                                static_cast<std::uint64_t>(l)});
                    const double amp = emulate_overlap_readout(ni.mu_exact(a), o(a, b), res.budgets.eps_I, rng);
                    const double mu_l = nj.spectrum.mu(b);
                    const double entry = amp * (mu_l / (mu_l + hj)) / denom;
                    r(offset[i] + k, offset[j] + l) = entry;
                    r(offset[j] + l, offset[i] + k) = entry;
                }
            }
        }
    }

    double h_min = 0.5 * opts.kappa;
    for (const auto& s : spectra) h_min = std::min(h_min, shrink_offset(opts.kappa, opts.convention, s.n_samples));
    res.entry_cap = cap_for_offset(res.budgets, h_min);
    res.max_entry_error = d > 0 ? (r - ref.data).cwiseAbs().maxCoeff() : 0.0;

    const LogDet l_ref = log_determinant(ref.data, false);
    const LogDet l_noisy = log_determinant(r, false);
    res.det_reference = l_ref.value();
    res.det_noisy = l_noisy.value();
    if (l_ref.sign == 0) throw NumericalError("qemu", "reference determinant is zero");
    const double ratio = l_noisy.sign == 0 ? 0.0 : (l_noisy.sign * l_ref.sign) * std::exp(l_noisy.log_abs - l_ref.log_abs);
    res.relative_error = std::abs(ratio - 1.0);
    return res;
}

NoisyContrastResult noisy_contrast(const SampleMatrix& X, const WhiteningModel& model,
                                   const Matrix& W, const NoiseSpec& noise,
                                   const ContrastOptions& opts) {
    const bool perturb = noise.eps2 > 0.0;
    const WhiteningModel used = perturb ? perturb_whitening(model, noise.eps2, noise.seed) : model;
    const SampleMatrix Z = apply_unmixing(X, used, W, perturb);
    return noisy_contrast_from_spectra(spectra_of(Z.data, opts), noise, opts);
}

double round_to_bits(double mu, int r_bits) {
    if (r_bits < 1) throw InvalidArgument("r_bits must be at least 1");
    const double scale = std::ldexp(1.0, r_bits);
    return std::round(mu * scale) / scale;
}

std::vector<double> eigenphase_readout(const Matrix& K, Index N, int r_bits) {
    if (r_bits < 1) throw InvalidArgument("r_bits must be at least 1");
    const GramSpectrum s = decompose(K, N, 0.0, EigenSolver::Dense);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(s.kept()));
    for (Index k = 0; k < s.kept(); ++k) out.push_back(round_to_bits(s.mu(k), r_bits));
    return out;
}

} // namespace qkica
