#include "qkica_tools/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "qkica/circuit.hpp"
#include "qkica/csv.hpp"
#include "qkica/error.hpp"
#include "qkica/gram.hpp"
#include "qkica/nystrom.hpp"
#include "qkica/parallel.hpp"
#include "qkica/preprocess.hpp"
#include "qkica/qemu.hpp"
#include "qkica/spectral.hpp"
#include "qkica_tools/svg.hpp"

namespace qkica::tools {

namespace {

constexpr double kPi = 3.14159265358979323846;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

std::string artifact(const SuiteOptions& o, const std::string& name) {
    std::filesystem::create_directories(o.out_dir);
    return (std::filesystem::path(o.out_dir) / name).string();
}

Matrix rotation2(double angle) {
    GeneratorSet g = GeneratorSet::elementary(2);
    g.deltas = {angle};
    return rotation_from_generators(g);
}

SampleMatrix whitened_sources(const std::vector<Distribution>& d, Index n, std::uint64_t seed) {
    return whiten(sample_sources(SourceSpec{d, n, seed})).Y;
}

double neg_log(double det) { return det > 0.0 ? -std::log(det) : std::numeric_limits<double>::infinity(); }

// ---------------------------------------------------------------------------
// Landscape minimum on a 21 x 21 grid, three sources, two generators.

CriterionResult landscape_minimum(const SuiteOptions& o) {
    CriterionResult r{1, "landscape minimum", false, "", 0.0};
    const auto t0 = Clock::now();
    const SampleMatrix Y =
        whitened_sources({Distribution::uniform(), Distribution::laplace(), Distribution::uniform()}, 1000, o.seed);
    GeneratorSet all = GeneratorSet::elementary(3);
    GeneratorSet gens;
    gens.generators = {all.generators[0], all.generators[1]};
    gens.deltas = {0.0, 0.0};
    const GridAxis axis{-kPi / 4.0, kPi / 4.0, 21};
    ContrastOptions opts;
    // Three sources keep d near 15, where eps1 = 4e-3 sits at the edge of the
    // general-mode budget eps1 < 1/d^2. The comparison is about where the
    // minimum lies, so cells beyond the budget are evaluated and counted.
    const ContrastLandscapes L =
        scan_contrasts(Y.data, gens, axis, axis, opts, {2e-3, 4e-3}, o.seed, o.threads, false);
    r.seconds = seconds_since(t0);

    const auto c = argmin_cell(L.classical);
    const auto a = argmin_cell(L.adapted);
    bool ok = c == std::make_pair(Index{10}, Index{10}) && a == c && L.budget_failures == 0;
    std::ostringstream os;
    os << "classical argmin (" << c.first << "," << c.second << "), adapted (" << a.first << "," << a.second << ")";
    for (std::size_t e = 0; e < L.eps1.size(); ++e) {
        const auto n = argmin_cell(L.noisy[e]);
        ok = ok && n == c;
        os << ", eps1=" << L.eps1[e] << " (" << n.first << "," << n.second << ")";
    }
    os << "; centre (10,10); d_max " << L.d_max << ", noisy cells beyond eps1 < 1/d^2: " << L.over_budget << ", "
       << fmt("%.1f", r.seconds) << " s of 120";
    ok = ok && r.seconds <= 120.0;
    r.pass = ok;
    r.detail = os.str();

    if (!o.out_dir.empty()) {
        std::vector<double> ticks;
        for (Index i = 0; i < axis.steps; ++i) ticks.push_back(axis.value(i));
        auto emit = [&](const std::string& stem, const std::string& title, const Matrix& m) {
            write_matrix_csv(artifact(o, stem + ".csv"), m);
            const auto mc = argmin_cell(m);
            write_text_file(artifact(o, stem + ".svg"),
                            svg_heatmap(m, {title, "delta2", "delta1", ticks, ticks, mc.first, mc.second}));
        };
        emit("landscape_classical", "-ln det, signed", L.classical);
        emit("landscape_adapted", "-ln det, unsigned", L.adapted);
        for (std::size_t e = 0; e < L.eps1.size(); ++e)
            emit("landscape_noisy_" + std::to_string(e + 1), "-ln det, eps1 = " + fmt("%g", L.eps1[e]), L.noisy[e]);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Relative determinant error: linear in eps1, flat in N.

double c2_relative_error(Index n, double eps1, std::uint64_t seed) {
    const SampleMatrix Y = whitened_sources({Distribution::uniform(), Distribution::laplace()}, n, seed);
    const Matrix Z = rotation2(0.1 * kPi) * Y.data;
    ContrastOptions opts;
    NoiseSpec noise;
    noise.eps1 = eps1;
    noise.kappa = opts.kappa;
    noise.seed = mix64(seed ^ 0x6E6F697365ULL);
    return noisy_contrast_from_spectra(spectra_of(Z, opts), noise, opts).relative_error;
}

CriterionResult error_scaling(const SuiteOptions& o) {
    CriterionResult r{2, "eps1 linearity and N flatness", false, "", 0.0};
    const auto t0 = Clock::now();
    constexpr int kSeeds = 20;
    const std::vector<double> eps = {1e-3, 2e-3, 4e-3, 8e-3};
    const std::vector<Index> ns = {256, 512, 1024, 2048};

    std::vector<double> err_eps(eps.size() * kSeeds);
    std::vector<double> err_n(ns.size() * kSeeds);
    parallel_for(static_cast<std::size_t>(kSeeds), o.threads, [&](std::size_t s) {
        const std::uint64_t seed = mix64(o.seed + 0x1000 + s);
        for (std::size_t e = 0; e < eps.size(); ++e) err_eps[e * kSeeds + s] = c2_relative_error(1024, eps[e], seed);
        for (std::size_t k = 0; k < ns.size(); ++k) err_n[k * kSeeds + s] = c2_relative_error(ns[k], 2e-3, seed);
    });
    std::vector<double> lx, ly, nx, ny;
    for (std::size_t e = 0; e < eps.size(); ++e) {
        lx.push_back(std::log(eps[e]));
        ly.push_back(std::log(median({err_eps.begin() + e * kSeeds, err_eps.begin() + (e + 1) * kSeeds})));
    }
    for (std::size_t k = 0; k < ns.size(); ++k) {
        nx.push_back(std::log(static_cast<double>(ns[k])));
        ny.push_back(std::log(median({err_n.begin() + k * kSeeds, err_n.begin() + (k + 1) * kSeeds})));
    }
    const double slope_eps = linear_fit(lx, ly).second;
    const double slope_n = linear_fit(nx, ny).second;
    r.seconds = seconds_since(t0);
    r.pass = std::abs(slope_eps - 1.0) <= 0.3 && std::abs(slope_n) <= 0.3;
    r.detail = "eps1 slope " + fmt("%.3f", slope_eps) + " (1 +- 0.3), N slope " + fmt("%.3f", slope_n) + " (|.| <= 0.3)";

    if (!o.out_dir.empty()) {
        std::vector<double> med_e, med_n, xe(eps), xn;
        for (double v : ly) med_e.push_back(std::exp(v));
        for (double v : ny) med_n.push_back(std::exp(v));
        for (Index n : ns) xn.push_back(static_cast<double>(n));
        write_text_file(artifact(o, "relerr_eps1.svg"),
                        svg_line_chart({{"median over 20 seeds", xe, med_e}},
                                       {"relative det error vs eps1 (N = 1024)", "eps1", "relative error", true, true}));
        write_text_file(artifact(o, "relerr_n.svg"),
                        svg_line_chart({{"median over 20 seeds", xn, med_n}},
                                       {"relative det error vs N (eps1 = 2e-3)", "N", "relative error", true, true}));
        std::ofstream csv(artifact(o, "relerr.csv"), std::ios::binary);
        CsvWriter w(csv);
        w.header({"N", "eps1", "relative_error"});
        for (std::size_t e = 0; e < eps.size(); ++e) w.row({1024.0, eps[e], med_e[e]});
        for (std::size_t k = 0; k < ns.size(); ++k) w.row({xn[k], 2e-3, med_n[k]});
    }
    return r;
}

// ---------------------------------------------------------------------------
// psi-norm a + b / sqrt(N) fits across mixing angles.

CriterionResult psi_asymptotics(const SuiteOptions& o) {
    CriterionResult r{3, "psi-norm asymptotics", false, "", 0.0};
    const auto t0 = Clock::now();
    constexpr int kSeeds = 16;
    const std::vector<double> deltas = {0.0, 0.05, 0.1, 0.2};
    const std::vector<Index> ns = {256, 512, 1024, 2048, 4096};
    ContrastOptions opts;

    // Mean of squared norms per (delta, N), aggregated as a root mean square.
    std::vector<double> sq(deltas.size() * ns.size() * kSeeds, 0.0);
    const std::size_t jobs = ns.size() * kSeeds;
    parallel_for(jobs, o.threads, [&](std::size_t job) {
        const std::size_t k = job / kSeeds;
        const std::size_t s = job % kSeeds;
        const SampleMatrix Y = whitened_sources({Distribution::uniform(), Distribution::laplace()}, ns[k],
                                                mix64(o.seed + 0x3000 + s));
        for (std::size_t d = 0; d < deltas.size(); ++d) {
            const Matrix Z = rotation2(deltas[d]) * Y.data;
            const auto sp = spectra_of(Z, opts);
            const double v = state_norm_psi(sp[0], sp[1]);
            sq[(d * ns.size() + k) * kSeeds + s] = v * v;
        }
    });

    std::vector<double> x;
    for (Index n : ns) x.push_back(1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> a(deltas.size()), b(deltas.size());
    std::vector<std::vector<double>> curves(deltas.size());
    for (std::size_t d = 0; d < deltas.size(); ++d) {
        for (std::size_t k = 0; k < ns.size(); ++k) {
            double acc = 0.0;
            for (int s = 0; s < kSeeds; ++s) acc += sq[(d * ns.size() + k) * kSeeds + s];
            curves[d].push_back(std::sqrt(acc / kSeeds));
        }
        std::tie(a[d], b[d]) = linear_fit(x, curves[d]);
    }
    r.seconds = seconds_since(t0);
    const double limit = 0.1 * b[0] / 16.0;
    bool monotone = true;
    for (std::size_t d = 1; d < deltas.size(); ++d) monotone = monotone && a[d] > a[d - 1];
    r.pass = std::abs(a[0]) <= limit && monotone;
    std::ostringstream os;
    os << "delta=0: |a| " << fmt("%.2e", std::abs(a[0])) << " <= " << fmt("%.2e", limit) << "; a across delta";
    for (double v : a) os << " " << fmt("%.4f", v);
    os << (monotone ? " (increasing)" : " (not increasing)");
    r.detail = os.str();

    if (!o.out_dir.empty()) {
        std::vector<Series> series;
        std::vector<double> xn;
        for (Index n : ns) xn.push_back(static_cast<double>(n));
        for (std::size_t d = 0; d < deltas.size(); ++d)
            series.push_back({"delta = " + fmt("%g", deltas[d]), xn, curves[d]});
        write_text_file(artifact(o, "psi_norm.svg"),
                        svg_line_chart(series, {"psi norm (RMS over 16 seeds)", "N", "||psi||", true, true}));
        std::ofstream csv(artifact(o, "psi_norm.csv"), std::ios::binary);
        CsvWriter w(csv);
        w.header({"delta", "N", "psi_norm_rms", "fit_a", "fit_b"});
        for (std::size_t d = 0; d < deltas.size(); ++d)
            for (std::size_t k = 0; k < ns.size(); ++k)
                w.row({deltas[d], xn[k], curves[d][k], a[d], b[d]});
    }
    return r;
}

// ---------------------------------------------------------------------------
// Composite determinant bound over random configurations.

CriterionResult bound_holds(const SuiteOptions& o) {
    CriterionResult r{4, "determinant error bound", false, "", 0.0};
    const auto t0 = Clock::now();
    constexpr int kConfigs = 100;
    const std::vector<Distribution> pool = {Distribution::uniform(), Distribution::laplace(),
                                            Distribution::exponential(), Distribution::parse("bimodal")};
    struct Row {
        Index m = 0, d = 0;
        double eps1 = 0, eps2 = 0, xi = 0, rel = 0, bound = 0, loose = 0, entry = 0, cap = 0;
        bool ok = false;
        std::string error;
    };
    std::vector<Row> rows(kConfigs);
    parallel_for(static_cast<std::size_t>(kConfigs), o.threads, [&](std::size_t c) {
        Row& row = rows[c];
        try {
            CounterRng rng(o.seed, {4, static_cast<std::uint64_t>(c)});
            row.m = rng.uniform() < 0.5 ? 2 : 3;
            std::vector<Distribution> dists;
            for (Index i = 0; i < row.m; ++i)
                dists.push_back(pool[static_cast<std::size_t>(rng.uniform() * pool.size()) % pool.size()]);
            const std::uint64_t data_seed = rng.next_u64();
            GeneratorSet g = GeneratorSet::elementary(row.m);
            for (auto& dl : g.deltas) dl = rng.uniform(-kPi, kPi);
            const Matrix W = rotation_from_generators(g);
            row.eps2 = rng.uniform(0.0, 0.1);
            const double eps1_scale = rng.uniform(0.05, 0.3);
            const std::uint64_t noise_seed = rng.next_u64();

            const SampleMatrix S = sample_sources(SourceSpec{dists, 500, data_seed});
            const WhitenResult wr = whiten(S);
            const WhiteningModel pm = perturb_whitening(wr.model, row.eps2, noise_seed);
            ContrastOptions opts;
            const auto spectra = spectra_of(apply_unmixing(S, pm, W, true).data, opts);
            for (const auto& s : spectra) row.d += s.kept();
            NoiseSpec noise;
            noise.kappa = opts.kappa;
            noise.eps1 = eps1_scale / static_cast<double>(row.d * row.d);
            noise.eps2 = row.eps2;
            noise.seed = noise_seed;
            row.eps1 = noise.eps1;
            const NoisyContrastResult res = noisy_contrast_from_spectra(spectra, noise, opts);
            row.xi = res.xi;
            row.rel = res.relative_error;
            row.entry = res.max_entry_error;
            row.cap = res.entry_cap;
            row.bound = composite_det_bound(res.d, res.entry_cap, res.xi);
            row.loose = composite_det_bound(res.d, 2.0 * static_cast<double>(res.d * res.d) * res.entry_cap, res.xi);
            // Slack covers only floating-point rounding in the determinants.
            row.ok = row.rel <= row.bound * (1.0 + 1e-12) + 1e-14 && row.entry <= row.cap * (1.0 + 1e-12);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });
    r.seconds = seconds_since(t0);
    int violations = 0, errors = 0;
    double worst = 0.0;
    for (const auto& row : rows) {
        if (!row.error.empty()) {
            ++errors;
            continue;
        }
        if (!row.ok) ++violations;
        if (row.bound > 0.0 && std::isfinite(row.bound)) worst = std::max(worst, row.rel / row.bound);
    }
    r.pass = violations == 0 && errors == 0;
    r.detail = std::to_string(violations) + " violations, " + std::to_string(errors) +
               " errors in 100 configs; max error/bound " + fmt("%.2e", worst);
    for (const auto& row : rows)
        if (!row.error.empty()) {
            r.detail += "; first error: " + row.error;
            break;
        }

    if (!o.out_dir.empty()) {
        std::ofstream csv(artifact(o, "bound_configs.csv"), std::ios::binary);
        CsvWriter w(csv);
        w.header({"config", "m", "d", "eps1", "eps2", "xi", "relative_error", "bound", "bound_loose",
                  "max_entry_error", "entry_cap", "ok"});
        for (std::size_t c = 0; c < rows.size(); ++c) {
            const Row& x = rows[c];
            w.row({std::to_string(c), std::to_string(x.m), std::to_string(x.d), format_double(x.eps1),
                   format_double(x.eps2), format_double(x.xi), format_double(x.rel), format_double(x.bound),
                   format_double(x.loose), format_double(x.entry), format_double(x.cap), x.ok ? "1" : "0"});
        }
    }
    return r;
}

// ---------------------------------------------------------------------------

CriterionResult block_encoding(const SuiteOptions& o) {
    CriterionResult r{5, "block-encoding identity", false, "", 0.0};
    const auto t0 = Clock::now();
    const double tol = std::ldexp(1.0, -6);
    bool ok = true;
    std::ostringstream os;
    for (int n = 1; n <= 3; ++n) {
        CounterRng rng(o.seed, {5, static_cast<std::uint64_t>(n)});
        CircuitLayout layout{n, 8, true};
        Vector z(layout.samples());
        for (Index k = 0; k < z.size(); ++k) z(k) = rng.uniform(-std::sqrt(3.0), std::sqrt(3.0));
        const CircuitReport rep = verify_block_encoding(z, layout, KernelSpec{}, rng.next_u64());
        ok = ok && rep.max_block_deviation <= tol && rep.unitarity_residual <= 1e-10;
        os << "n=" << n << ": dev " << fmt("%.2e", rep.max_block_deviation) << ", unitarity "
           << fmt("%.1e", rep.unitarity_residual) << " (" << rep.qubits << " qubits); ";
    }
    r.seconds = seconds_since(t0);
    r.pass = ok && r.seconds <= 30.0;
    os << "limits 2^-6 and 1e-10, " << fmt("%.2f", r.seconds) << " s of 30";
    r.detail = os.str();
    return r;
}

// ---------------------------------------------------------------------------

CriterionResult perturbation_inequality(const SuiteOptions& o) {
    CriterionResult r{6, "determinant perturbation inequality", false, "", 0.0};
    const auto t0 = Clock::now();
    constexpr int kInstances = 1000;
    std::vector<int> bad(kInstances, 0);
    std::vector<double> ratio(kInstances, 0.0);
    parallel_for(static_cast<std::size_t>(kInstances), o.threads, [&](std::size_t t) {
        CounterRng rng(o.seed, {6, static_cast<std::uint64_t>(t)});
        const Index d = 1 + static_cast<Index>(rng.uniform() * 20.0) % 20;
        Matrix g(d, d), h(d, d);
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j) {
                g(i, j) = rng.normal();
                h(i, j) = rng.normal();
            }
        Eigen::HouseholderQR<Matrix> qr(g);
        const Matrix q = qr.householderQ();
        Vector lam(d);
        for (Index i = 0; i < d; ++i) lam(i) = std::exp(rng.uniform(-2.0, 2.0));
        const Matrix A = q * lam.asDiagonal() * q.transpose();
        Matrix B = 0.5 * (h + h.transpose());
        // Scale B so that d mu_A ||B|| / ||A|| hits a chosen x in (0, 0.95).
        const double x = rng.uniform(0.0, 0.95);
        const PerturbationCheck unit = det_perturbation_check(A, B);
        B *= x / unit.x;
        const PerturbationCheck c = det_perturbation_check(A, B);
        ratio[t] = c.rhs > 0.0 ? c.lhs / c.rhs : 0.0;
        bad[t] = c.premise_ok && !(c.lhs <= c.rhs * (1.0 + 1e-12) + 1e-12) ? 1 : 0;
    });
    r.seconds = seconds_since(t0);
    int violations = 0;
    for (int b : bad) violations += b;
    r.pass = violations == 0;
    r.detail = std::to_string(violations) + " violations in 1000 instances, max lhs/rhs " +
               fmt("%.3f", *std::max_element(ratio.begin(), ratio.end()));
    return r;
}

// ---------------------------------------------------------------------------

std::vector<OverlapEstimate> c7_table(const Distribution& dist, std::uint64_t seed, Index n_mc) {
    const SampleMatrix S = sample_sources(SourceSpec{{dist, dist}, 1000, seed});
    ContrastOptions opts;
    const auto sp = spectra_of(S.data, opts);
    const auto e1 = eigenfunctions(S.data.row(0).transpose(), sp[0], std::min<Index>(3, sp[0].kept()), opts.kernel, 0);
    const auto e2 = eigenfunctions(S.data.row(1).transpose(), sp[1], std::min<Index>(3, sp[1].kept()), opts.kernel, 1);
    return estimate_C_D_table(e1, e2, dist, dist, n_mc, mix64(seed ^ 0x7777ULL));
}

CriterionResult gaussian_degeneracy(const SuiteOptions& o) {
    CriterionResult r{7, "Gaussian degeneracy", false, "", 0.0};
    const auto t0 = Clock::now();
    const Index n_mc = 10000;
    const auto g = c7_table(Distribution::gaussian(), mix64(o.seed + 0x7001), n_mc);
    const auto u = c7_table(Distribution::uniform(), mix64(o.seed + 0x7002), n_mc);
    double g_max = 0.0, u_max = 0.0;
    for (const auto& e : g) g_max = std::max(g_max, std::abs(e.C) / e.standard_error());
    for (const auto& e : u) u_max = std::max(u_max, std::abs(e.C) / e.standard_error());
    r.seconds = seconds_since(t0);
    r.pass = g.size() == 9 && u.size() == 9 && g_max <= 3.0 && u_max > 5.0;
    r.detail = "gaussian max |C|/(D/sqrt(n_mc)) " + fmt("%.2f", g_max) + " (<= 3), uniform " + fmt("%.2f", u_max) +
               " (> 5)";
    if (!o.out_dir.empty()) {
        std::ofstream csv(artifact(o, "gaussian_degeneracy.csv"), std::ios::binary);
        CsvWriter w(csv);
        w.header({"sources", "k", "l", "C", "D", "stderr"});
        for (const auto& e : g)
            w.row({"gaussian", std::to_string(e.k), std::to_string(e.l), format_double(e.C), format_double(e.D),
                   format_double(e.standard_error())});
        for (const auto& e : u)
            w.row({"uniform", std::to_string(e.k), std::to_string(e.l), format_double(e.C), format_double(e.D),
                   format_double(e.standard_error())});
    }
    return r;
}

// ---------------------------------------------------------------------------

CriterionResult inner_product_coverage(const SuiteOptions& o) {
    CriterionResult r{8, "inner-product coverage", false, "", 0.0};
    const auto t0 = Clock::now();
    CoverageOptions c;
    c.seed = mix64(o.seed + 0x8000);
    c.threads = o.threads;
    const CoverageResult res = coverage_trial(Distribution::uniform(), Distribution::uniform(), c);
    r.seconds = seconds_since(t0);
    r.pass = !res.skipped && res.coverage >= 0.82;
    r.detail = "coverage " + fmt("%.3f", res.coverage) + " (>= 0.82) for pair (" + std::to_string(res.pair.k) + "," +
               std::to_string(res.pair.l) + "), half-width " + fmt("%.4f", res.half_width) + ", trial spread " +
               fmt("%.4f", res.spread);
    if (!o.out_dir.empty()) {
        std::ofstream csv(artifact(o, "coverage_trials.csv"), std::ios::binary);
        CsvWriter w(csv);
        w.header({"trial", "overlap", "target", "half_width"});
        const double target = c.eps2 * c.F_ij * res.pair.C;
        for (std::size_t t = 0; t < res.overlaps.size(); ++t)
            w.row({std::to_string(t), format_double(res.overlaps[t]), format_double(target),
                   format_double(res.half_width)});
    }
    return r;
}

// ---------------------------------------------------------------------------

double c9_amari(Index n, std::uint64_t seed) {
    const SampleMatrix S = sample_sources(SourceSpec{{Distribution::uniform(), Distribution::laplace()}, n, seed});
    CounterRng rng(seed, {9});
    Matrix A(2, 2);
    for (Index i = 0; i < 4; ++i) A(i / 2, i % 2) = rng.normal();
    const SampleMatrix X = mix(S, A);
    const WhitenResult wr = whiten(X);
    ContrastOptions opts;
    opts.signed_mode = false;
    const ContrastFn fn = [&](const Matrix& W) {
        return neg_log_det(build_rkappa(spectra_of(W * wr.Y.data, opts), opts.kappa, false, opts.convention));
    };
    OptimizeOptions oo;
    oo.restarts = 3;
    oo.max_iters = 30;
    oo.tol = 1e-6;
    oo.seed = mix64(seed ^ 0x6F7074ULL);
    const OptimizeReport rep = minimize_stiefel(2, fn, oo);
    return amari_error(A, rep.W_opt * wr.model.inv_sqrt);
}

CriterionResult amari_trend(const SuiteOptions& o) {
    CriterionResult r{9, "Amari trend", false, "", 0.0};
    const auto t0 = Clock::now();
    constexpr int kSeeds = 10;
    const std::vector<Index> ns = {200, 2000};
    std::vector<double> am(ns.size() * kSeeds);
    parallel_for(am.size(), o.threads, [&](std::size_t job) {
        const std::size_t k = job / kSeeds;
        am[job] = c9_amari(ns[k], mix64(o.seed + 0x9000 + job % kSeeds));
    });
    const double small = median({am.begin(), am.begin() + kSeeds});
    const double large = median({am.begin() + kSeeds, am.end()});
    r.seconds = seconds_since(t0);
    r.pass = large < small && large <= 0.15;
    r.detail = "median Amari N=200 " + fmt("%.4f", small) + ", N=2000 " + fmt("%.4f", large) + " (< N=200, <= 0.15)";
    if (!o.out_dir.empty()) {
        std::ofstream csv(artifact(o, "amari.csv"), std::ios::binary);
        CsvWriter w(csv);
        w.header({"N", "seed_index", "amari"});
        for (std::size_t j = 0; j < am.size(); ++j)
            w.row({std::to_string(ns[j / kSeeds]), std::to_string(j % kSeeds), format_double(am[j])});
    }
    return r;
}

// ---------------------------------------------------------------------------

CriterionResult invariants(const SuiteOptions& o) {
    CriterionResult r{10, "whitening and Gram invariants", false, "", 0.0};
    const auto t0 = Clock::now();
    constexpr int kCases = 1000;
    const std::vector<Distribution> pool = {Distribution::uniform(), Distribution::laplace(),
                                            Distribution::exponential(), Distribution::gaussian(),
                                            Distribution::parse("bimodal")};
    std::vector<double> cov_err(kCases, 0.0), row_err(kCases, 0.0), diag_err(kCases, 0.0);
    std::vector<int> not_pd(kCases, 0);
    parallel_for(static_cast<std::size_t>(kCases), o.threads, [&](std::size_t t) {
        CounterRng rng(o.seed, {10, static_cast<std::uint64_t>(t)});
        const Index m = 2 + static_cast<Index>(rng.uniform() * 3.0) % 3;
        const Index n = 50 + static_cast<Index>(rng.uniform() * 251.0) % 251;
        std::vector<Distribution> dists;
        for (Index i = 0; i < m; ++i) dists.push_back(pool[static_cast<std::size_t>(rng.uniform() * 5.0) % 5]);
        Matrix A(m, m);
        for (Index i = 0; i < m * m; ++i) A(i / m, i % m) = rng.normal();
        const SampleMatrix X = mix(sample_sources(SourceSpec{dists, n, rng.next_u64()}), A);
        try {
            const WhitenResult wr = whiten(X);
            cov_err[t] = (covariance(center(wr.Y)) - Matrix::Identity(m, m)).cwiseAbs().maxCoeff();
            ContrastOptions opts;
            const Matrix K = gram_center(gram_raw(wr.Y.data.row(0).transpose(), opts.kernel));
            row_err[t] = K.rowwise().sum().cwiseAbs().maxCoeff();
            const auto sp = spectra_of(wr.Y.data, opts);
            const RkappaMatrix R = build_rkappa(sp, opts.kappa, true, opts.convention);
            diag_err[t] = (R.data.diagonal().array() - 1.0).abs().maxCoeff();
            Eigen::LLT<Matrix> llt(R.data);
            not_pd[t] = llt.info() == Eigen::Success && min_eig(R.data) > 0.0 ? 0 : 1;
        } catch (const NumericalError&) {
            // A draw whose mixing is numerically singular cannot be whitened.
            not_pd[t] = 2;
        }
    });
    r.seconds = seconds_since(t0);
    int failures = 0, skipped = 0;
    for (int v : not_pd) {
        if (v == 1) ++failures;
        if (v == 2) ++skipped;
    }
    const double c = *std::max_element(cov_err.begin(), cov_err.end());
    const double g = *std::max_element(row_err.begin(), row_err.end());
    const double dg = *std::max_element(diag_err.begin(), diag_err.end());
    r.pass = c <= 1e-10 && g <= 1e-10 && dg <= 1e-12 && failures == 0 && skipped == 0;
    r.detail = "max |cov - I| " + fmt("%.1e", c) + ", max |row sum| " + fmt("%.1e", g) + ", max |diag - 1| " +
               fmt("%.1e", dg) + ", not PD " + std::to_string(failures) + ", unwhitenable " + std::to_string(skipped) +
               " of 1000";
    return r;
}

} // namespace

std::vector<int> parse_suite(const std::string& suite) {
    std::vector<int> ids;
    if (suite == "all") {
        for (int i = 1; i <= kCriterionCount; ++i) ids.push_back(i);
        return ids;
    }
    static const std::pair<const char*, int> kNames[] = {{"fig4", 1}, {"fig6b", 2}, {"fig6a", 3}, {"fig8a", 9}};
    std::stringstream ss(suite);
    std::string item;
    while (std::getline(ss, item, ',')) {
        bool named = false;
        for (const auto& [name, id] : kNames)
            if (item == name) {
                ids.push_back(id);
                named = true;
            }
        if (named) continue;
        int v = 0;
        try {
            std::size_t used = 0;
            v = std::stoi(item, &used);
            if (used != item.size()) v = 0;
        } catch (const std::exception&) {
            v = 0;
        }
        if (v < 1 || v > kCriterionCount) throw InvalidArgument("suite must be 'all', fig4, fig6a, fig6b, fig8a or ids in 1..10, got '" + item + "'");
        ids.push_back(v);
    }
    if (ids.empty()) throw InvalidArgument("empty suite");
    return ids;
}

CriterionResult run_criterion(int id, const SuiteOptions& o) {
    switch (id) {
    case 1: return landscape_minimum(o);
    case 2: return error_scaling(o);
    case 3: return psi_asymptotics(o);
    case 4: return bound_holds(o);
    case 5: return block_encoding(o);
    case 6: return perturbation_inequality(o);
    case 7: return gaussian_degeneracy(o);
    case 8: return inner_product_coverage(o);
    case 9: return amari_trend(o);
    case 10: return invariants(o);
    default: throw InvalidArgument("no criterion " + std::to_string(id));
    }
}

std::string format_result(const CriterionResult& r) {
    return std::string(r.pass ? "PASS" : "FAIL") + " [" + std::to_string(r.id) + "] " + r.name + " (" +
           fmt("%.1f", r.seconds) + " s): " + r.detail;
}

ContrastLandscapes scan_contrasts(const Matrix& Y, const GeneratorSet& generators, const GridAxis& axis1,
                                  const GridAxis& axis2, const ContrastOptions& opts,
                                  const std::vector<double>& eps1, std::uint64_t noise_seed, int threads,
                                  bool check_budget) {
    if (generators.generators.empty() || generators.generators.size() > 2)
        throw InvalidArgument("landscape scan takes one or two generators");
    const bool two = generators.generators.size() == 2;
    ContrastLandscapes L;
    L.axis1 = axis1;
    L.axis2 = two ? axis2 : GridAxis{0.0, 0.0, 1};
    L.eps1 = eps1;
    const Index rows = L.axis1.steps;
    const Index cols = L.axis2.steps;
    L.classical.resize(rows, cols);
    L.adapted.resize(rows, cols);
    L.noisy.assign(eps1.size(), Matrix(rows, cols));
    std::vector<Index> d(static_cast<std::size_t>(rows * cols), 0);
    std::vector<Index> fails(static_cast<std::size_t>(rows * cols), 0);
    std::vector<Index> over(static_cast<std::size_t>(rows * cols), 0);
    ContrastOptions inner = opts;
    inner.threads = 1;
    parallel_for(static_cast<std::size_t>(rows * cols), threads, [&](std::size_t cell) {
        const Index i = static_cast<Index>(cell) / cols;
        const Index j = static_cast<Index>(cell) % cols;
        GeneratorSet g = generators;
        g.deltas = {L.axis1.value(i)};
        if (two) g.deltas.push_back(L.axis2.value(j));
        const Matrix Z = rotation_from_generators(g) * Y;
        const auto spectra = spectra_of(Z, inner);
        const RkappaMatrix rs = build_rkappa(spectra, inner.kappa, true, inner.convention);
        const RkappaMatrix ru = build_rkappa(spectra, inner.kappa, false, inner.convention);
        L.classical(i, j) = neg_log_det(rs);
        L.adapted(i, j) = neg_log_det(ru);
        d[cell] = ru.d();
        for (std::size_t e = 0; e < eps1.size(); ++e) {
            NoiseSpec noise;
            noise.eps1 = eps1[e];
            noise.kappa = inner.kappa;
            noise.seed = mix64(noise_seed ^ (0x5C0000ULL + cell));
            noise.check_budget = check_budget;
            if (eps1[e] * static_cast<double>(ru.d() * ru.d()) >= 1.0) ++over[cell];
            try {
                L.noisy[e](i, j) = neg_log(noisy_contrast_from_spectra(spectra, noise, inner).det_noisy);
            } catch (const BudgetError&) {
                L.noisy[e](i, j) = std::numeric_limits<double>::quiet_NaN();
                ++fails[cell];
            }
        }
    });
    for (std::size_t c = 0; c < d.size(); ++c) {
        L.d_max = std::max(L.d_max, d[c]);
        L.budget_failures += fails[c];
        L.over_budget += over[c];
    }
    return L;
}

std::pair<Index, Index> argmin_cell(const Matrix& a) {
    std::pair<Index, Index> best{-1, -1};
    double v = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            if (std::isfinite(a(i, j)) && a(i, j) < v) {
                v = a(i, j);
                best = {i, j};
            }
    return best;
}

std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("linear fit needs two or more points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (!(sxx > 0.0)) throw InvalidArgument("linear fit needs distinct x");
    const double b = sxy / sxx;
    return {my - b * mx, b};
}

double median(std::vector<double> v) {
    if (v.empty()) throw InvalidArgument("median of an empty set");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace qkica::tools
