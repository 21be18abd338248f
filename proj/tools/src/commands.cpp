#include "qkica_tools/commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include "qkica/circuit.hpp"
#include "qkica/contrast.hpp"
#include "qkica/csv.hpp"
#include "qkica/error.hpp"
#include "qkica/gram.hpp"
#include "qkica/nystrom.hpp"
#include "qkica/parallel.hpp"
#include "qkica/preprocess.hpp"
#include "qkica/qemu.hpp"
#include "qkica/serialize.hpp"
#include "qkica/spectral.hpp"
#include "qkica_tools/config.hpp"
#include "qkica_tools/experiments.hpp"
#include "qkica_tools/manifest.hpp"
#include "qkica_tools/svg.hpp"

namespace qkica::tools {

namespace {

// Flag values; a flag overrides the config only when it was given.
struct Flags {
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    double kappa = 0, sigma = 0, eps1 = 0, eps2 = 0, eps_trunc = 0;
    std::string grid, grid2, orientation, mode, phase, input, sources, suite;
    Index samples = 0;
    int circuit_n = 0, circuit_s = 0;
    bool kappa_raw = false, dump_gram = false, no_whiten = false, unsigned_mode = false;
    std::map<std::string, CLI::Option*> opts;

    bool given(const std::string& name) const {
        auto it = opts.find(name);
        return it != opts.end() && it->second->count() > 0;
    }
};

void add_common(CLI::App* cmd, Flags& f) {
    f.opts["config"] = cmd->add_option("--config", f.config, "JSON config or run manifest");
    f.opts["seed"] = cmd->add_option("--seed", f.seed, "Master seed (required here or in the config)");
    f.opts["out"] = cmd->add_option("--out", f.out, "Output directory");
    f.opts["kappa"] = cmd->add_option("--kappa", f.kappa, "Regularizer kappa");
    f.opts["sigma"] = cmd->add_option("--sigma", f.sigma, "Gaussian kernel width");
    f.opts["eps1"] = cmd->add_option("--eps1", f.eps1, "Readout precision eps1");
    f.opts["eps2"] = cmd->add_option("--eps2", f.eps2, "Whitening perturbation eps2");
    f.opts["eps_trunc"] = cmd->add_option("--eps-trunc", f.eps_trunc, "Spectral truncation threshold");
    f.opts["grid"] = cmd->add_option("--grid", f.grid, "Scan axis LO:HI:STEPS");
    f.opts["grid2"] = cmd->add_option("--grid2", f.grid2, "Second scan axis LO:HI:STEPS");
    f.opts["orientation"] = cmd->add_option("--orientation", f.orientation, "CSV orientation")
                                ->check(CLI::IsMember({"rows", "cols"}));
    f.opts["mode"] = cmd->add_option("--mode", f.mode, "Noise mode")->check(CLI::IsMember({"general", "near"}));
    f.opts["phase"] = cmd->add_option("--phase", f.phase, "Optimizer phase")->check(CLI::IsMember({"coarse", "refine"}));
    f.opts["kappa_raw"] = cmd->add_flag("--kappa-raw", f.kappa_raw, "Use lambda / (lambda + kappa)");
    f.opts["dump_gram"] = cmd->add_flag("--dump-gram", f.dump_gram, "Write centered Gram matrices");
    f.opts["input"] = cmd->add_option("--input", f.input, "Sample CSV instead of generated sources");
    f.opts["sources"] = cmd->add_option("--sources", f.sources, "Comma list: uniform,laplace,exponential,gaussian,bimodal");
    f.opts["samples"] = cmd->add_option("--samples", f.samples, "Samples per source");
    f.opts["no_whiten"] = cmd->add_flag("--no-whiten", f.no_whiten, "Use the input as already whitened");
    f.opts["unsigned"] = cmd->add_flag("--unsigned", f.unsigned_mode, "Adapted (unsigned-overlap) contrast");
    f.opts["circuit_n"] = cmd->add_option("--circuit-n", f.circuit_n, "Address qubits per register");
    f.opts["circuit_s"] = cmd->add_option("--circuit-s", f.circuit_s, "Kernel precision bits");
    f.opts["suite"] = cmd->add_option("--suite", f.suite, "all, fig4, fig6a, fig6b, fig8a or ids 1..10");
}

ExperimentConfig resolve(const Flags& f) {
    ExperimentConfig c = f.given("config") ? ExperimentConfig::load(f.config) : ExperimentConfig{};
    if (f.given("seed")) c.seed = f.seed;
    if (f.given("out")) c.out = f.out;
    if (f.given("kappa")) c.contrast.kappa = f.kappa;
    if (f.given("sigma")) c.contrast.kernel.sigma = f.sigma;
    if (f.given("eps1")) c.noise.eps1 = f.eps1;
    if (f.given("eps2")) c.noise.eps2 = f.eps2;
    if (f.given("eps_trunc")) c.contrast.eps_trunc = f.eps_trunc;
    if (f.given("grid")) c.grid = GridAxis::parse(f.grid);
    if (f.given("grid2")) c.grid2 = GridAxis::parse(f.grid2);
    if (f.given("orientation")) c.orientation = parse_orientation(f.orientation);
    if (f.given("mode")) c.noise.mode = parse_noise_mode(f.mode);
    if (f.given("phase")) c.phase = f.phase;
    if (f.kappa_raw) c.contrast.convention = KappaConvention::Raw;
    if (f.dump_gram) c.dump_gram = true;
    if (f.given("input")) c.input_csv = f.input;
    if (f.given("sources")) {
        c.sources.distributions.clear();
        std::stringstream ss(f.sources);
        std::string item;
        while (std::getline(ss, item, ',')) c.sources.distributions.push_back(Distribution::parse(item));
    }
    if (f.given("samples")) c.sources.n_samples = f.samples;
    if (f.no_whiten) c.whiten = false;
    if (f.unsigned_mode) c.contrast.signed_mode = false;
    if (f.given("circuit_n")) c.circuit.n = f.circuit_n;
    if (f.given("circuit_s")) c.circuit.s = f.circuit_s;
    if (f.given("suite")) c.suite = f.suite;
    c.noise.kappa = c.contrast.kappa;
    if (c.phase != "coarse" && c.phase != "refine") throw InvalidArgument("phase must be coarse or refine");
    c.contrast.kernel.validate();
    if (!(c.contrast.kappa > 0.0)) throw InvalidArgument("kappa must be positive");
    if (!(c.contrast.eps_trunc >= 0.0 && c.contrast.eps_trunc < 1.0)) throw InvalidArgument("eps_trunc must lie in [0, 1)");
    c.require_seed();
    c.contrast.threads = default_threads();
    return c;
}

// Everything a command writes goes through here so the manifest lists it.
class Run {
public:
    Run(std::string command, const ExperimentConfig& cfg) : cfg_(cfg) {
        manifest_.command = std::move(command);
        manifest_.config = cfg.to_json();
        std::filesystem::create_directories(cfg.out);
    }
    std::string path(const std::string& name) {
        manifest_.outputs.push_back(name);
        return (std::filesystem::path(cfg_.out) / name).string();
    }
    nlohmann::json& summary() { return manifest_.summary; }
    void finish() { manifest_.write((std::filesystem::path(cfg_.out) / "manifest.json").string()); }

private:
    const ExperimentConfig& cfg_;
    Manifest manifest_;
};

struct Input {
    SampleMatrix X;
    // Known only for generated data.
    std::optional<Matrix> mixing;
};

Input load_input(const ExperimentConfig& c) {
    Input in;
    if (!c.input_csv.empty()) {
        in.X = load_csv(c.input_csv, c.orientation);
    } else {
        SourceSpec spec = c.sources;
        spec.seed = c.require_seed();
        const SampleMatrix S = sample_sources(spec, c.contrast.threads);
        in.mixing = c.mixing(S.m());
        bool singular = false;
        in.X = mix(S, *in.mixing, &singular);
        if (singular) throw InvalidArgument("mixing matrix is numerically singular");
    }
    in.X.validate();
    return in;
}

struct Prepared {
    Input input;
    WhiteningModel model;
    // Data the contrast sees at W = I, including any eps2 perturbation.
    SampleMatrix Y;
};

Prepared prepare(const ExperimentConfig& c) {
    Prepared p;
    p.input = load_input(c);
    p.model = c.whiten ? whiten(p.input.X).model : WhiteningModel::identity(p.input.X.m());
    if (!c.whiten) p.model.mean = Vector::Zero(p.input.X.m());
    const bool perturb = c.noise.eps2 > 0.0;
    if (perturb) p.model = perturb_whitening(p.model, c.noise.eps2, mix64(c.require_seed() ^ 0x7768ULL));
    p.Y = apply_unmixing(p.input.X, p.model, Matrix::Identity(p.input.X.m(), p.input.X.m()), perturb);
    return p;
}

NoiseSpec noise_for(const ExperimentConfig& c, std::uint64_t salt) {
    NoiseSpec n = c.noise;
    n.kappa = c.contrast.kappa;
    n.seed = mix64(c.require_seed() ^ salt);
    return n;
}

// Noiseless: -ln det of the configured matrix. Noisy: mean of -ln det over
// three independent readouts of the adapted matrix.
ContrastFn make_contrast(const ExperimentConfig& c, const Matrix& Y) {
    const ContrastOptions opts = c.contrast;
    if (c.noise.eps1 <= 0.0)
        return [opts, &Y](const Matrix& W) {
            return neg_log_det(build_rkappa(spectra_of(W * Y, opts), opts.kappa, opts.signed_mode, opts.convention));
        };
    const NoiseSpec base = noise_for(c, 0x6E6F6973ULL);
    return [opts, base, &Y](const Matrix& W) {
        const auto spectra = spectra_of(W * Y, opts);
        double acc = 0.0;
        for (std::uint64_t k = 0; k < 3; ++k) {
            NoiseSpec n = base;
            n.seed = mix64(base.seed + k);
            const double det = noisy_contrast_from_spectra(spectra, n, opts).det_noisy;
            acc += det > 0.0 ? -std::log(det) : std::numeric_limits<double>::infinity();
        }
        return acc / 3.0;
    };
}

void write_rkappa(const std::string& path, const RkappaMatrix& r) {
    std::vector<std::string> header;
    for (const auto& b : r.index) header.push_back("i" + std::to_string(b.variable) + "_k" + std::to_string(b.pair));
    write_matrix_csv(path, r.data, header);
}

std::vector<std::string> labels_or_default(const SampleMatrix& S) {
    if (S.labels.size() == static_cast<std::size_t>(S.m())) return S.labels;
    std::vector<std::string> l;
    for (Index i = 0; i < S.m(); ++i) l.push_back("x" + std::to_string(i));
    return l;
}

// Same orientation as inputs, so outputs load back with the same flags.
// Labels go in a header row, which only the column layout has room for.
void write_samples(const std::string& path, const SampleMatrix& S, const std::vector<std::string>& labels,
                   Orientation o) {
    if (o == Orientation::Rows)
        write_matrix_csv(path, S.data);
    else
        write_matrix_csv(path, S.data.transpose(), labels);
}

// ---------------------------------------------------------------------------

int cmd_gen(const ExperimentConfig& c, std::ostream& out) {
    Run run("gen", c);
    SourceSpec spec = c.sources;
    spec.seed = c.require_seed();
    const SampleMatrix S = sample_sources(spec, c.contrast.threads);
    std::vector<std::string> names;
    for (const auto& d : spec.distributions) names.push_back(d.name());
    write_samples(run.path("sources.csv"), S, names, c.orientation);
    run.summary()["m"] = S.m();
    run.summary()["n"] = S.n();
    run.finish();
    out << "wrote " << S.m() << " x " << S.n() << " sources to " << c.out << "\n";
    return 0;
}

int cmd_mix(const ExperimentConfig& c, std::ostream& out) {
    Run run("mix", c);
    Input in;
    if (!c.input_csv.empty()) {
        const SampleMatrix S = load_csv(c.input_csv, c.orientation);
        in.mixing = c.mixing(S.m());
        bool singular = false;
        in.X = mix(S, *in.mixing, &singular);
        if (singular) out << "warning: mixing matrix is numerically singular\n";
    } else {
        in = load_input(c);
    }
    write_samples(run.path("mixed.csv"), in.X, labels_or_default(SampleMatrix(in.X.data)), c.orientation);
    write_matrix_csv(run.path("mixing.csv"), *in.mixing);
    run.finish();
    out << "mixed " << in.X.m() << " x " << in.X.n() << " samples\n";
    return 0;
}

int cmd_preprocess(const ExperimentConfig& c, std::ostream& out) {
    Run run("preprocess", c);
    const Input in = load_input(c);
    const WhitenResult wr = whiten(in.X);
    WhiteningModel model = wr.model;
    SampleMatrix Y = wr.Y;
    if (c.noise.eps2 > 0.0) {
        model = perturb_whitening(model, c.noise.eps2, mix64(c.require_seed() ^ 0x7768ULL));
        Y = apply_unmixing(in.X, model, Matrix::Identity(in.X.m(), in.X.m()), true);
    }
    write_samples(run.path("whitened.csv"), Y, labels_or_default(SampleMatrix(Y.data)), c.orientation);
    write_text_file(run.path("whitening.json"), whitening_to_json(model) + "\n");
    const double dev = max_centered_deviation(Y);
    run.summary()["condition_number"] = condition_number(model.M);
    run.summary()["max_centered_deviation"] = dev;
    run.finish();
    out << "condition number " << format_double(condition_number(model.M)) << ", max |y - mean| "
        << format_double(dev) << "\n";
    if (dev > 1.0) out << "note: samples exceed unit deviation; error bounds assume |y| <= 1\n";
    return 0;
}

int cmd_contrast(const ExperimentConfig& c, std::ostream& out) {
    Run run("contrast", c);
    const Prepared p = prepare(c);
    const auto spectra = spectra_of(p.Y.data, c.contrast);
    const RkappaMatrix r = build_rkappa(spectra, c.contrast.kappa, c.contrast.signed_mode, c.contrast.convention);
    const double det = det_contrast(r);
    write_rkappa(run.path("rkappa.csv"), r);
    if (c.dump_gram)
        for (Index i = 0; i < p.Y.m(); ++i)
            write_matrix_csv(run.path("gram_" + std::to_string(i) + ".csv"),
                             gram_center(gram_raw(p.Y.data.row(i).transpose(), c.contrast.kernel)));
    run.summary()["det"] = det;
    run.summary()["neg_log_det"] = neg_log_det(r);
    run.summary()["d"] = r.d();
    out << "det = " << format_double(det) << "\n-ln det = " << format_double(neg_log_det(r)) << "\nd = " << r.d()
        << "\n";
    if (c.noise.eps1 > 0.0) {
        const NoisyContrastResult n = noisy_contrast_from_spectra(spectra, noise_for(c, 0x6E6F6973ULL), c.contrast);
        run.summary()["det_noisy"] = n.det_noisy;
        out << "det (noisy readout) = " << format_double(n.det_noisy) << "\n";
    }
    run.finish();
    return 0;
}

int cmd_scan(const ExperimentConfig& c, std::ostream& out) {
    Run run("scan", c);
    const Prepared p = prepare(c);
    const Index m = p.Y.m();
    if (m < 2) throw InvalidArgument("scan needs at least two variables");
    GeneratorSet all = GeneratorSet::elementary(m);
    GeneratorSet gens;
    gens.generators = {all.generators[0]};
    if (c.grid2 && all.generators.size() > 1) gens.generators.push_back(all.generators[1]);
    gens.deltas.assign(gens.generators.size(), 0.0);
    const GridAxis axis2 = gens.generators.size() == 2 ? *c.grid2 : GridAxis{0.0, 0.0, 1};
    const LandscapeGrid g = scan_landscape(gens, c.grid, axis2, make_contrast(c, p.Y.data), c.contrast.threads);

    {
        std::ofstream csv(run.path("landscape.csv"), std::ios::binary);
        CsvWriter w(csv);
        w.header({"delta1", "delta2", "J"});
        for (Index i = 0; i < g.J.rows(); ++i)
            for (Index j = 0; j < g.J.cols(); ++j) w.row({g.axis1.value(i), g.axis2.value(j), g.J(i, j)});
    }
    std::vector<double> x1, x2;
    for (Index i = 0; i < g.axis1.steps; ++i) x1.push_back(g.axis1.value(i));
    for (Index j = 0; j < g.axis2.steps; ++j) x2.push_back(g.axis2.value(j));
    const std::string title = std::string("-ln det R, ") + (c.contrast.signed_mode ? "signed" : "unsigned") +
                              (c.noise.eps1 > 0.0 ? ", eps1 = " + format_double(c.noise.eps1) : "");
    if (gens.generators.size() == 2) {
        write_text_file(run.path("landscape.svg"),
                        svg_heatmap(g.J, {title, "delta2", "delta1", x2, x1, g.argmin_row, g.argmin_col}));
    } else {
        std::vector<double> y(g.J.data(), g.J.data() + g.J.size());
        write_text_file(run.path("landscape.svg"), svg_line_chart({{"J", x1, y}}, {title, "delta", "J", false, false}));
    }
    run.summary()["argmin"] = {g.axis1.value(g.argmin_row), g.axis2.value(g.argmin_col)};
    run.summary()["J_min"] = g.J(g.argmin_row, g.argmin_col);
    run.finish();
    out << "argmin at delta = (" << format_double(g.axis1.value(g.argmin_row)) << ", "
        << format_double(g.axis2.value(g.argmin_col)) << "), J = " << format_double(g.J(g.argmin_row, g.argmin_col))
        << "\n";
    return 0;
}

int cmd_optimize(const ExperimentConfig& cfg, std::ostream& out) {
    ExperimentConfig c = cfg;
    OptimizeOptions oo = c.optimizer;
    oo.seed = mix64(c.require_seed() ^ 0x6F7074ULL);
    // The refinement phase assumes the data are already close to independent:
    // the near-independent budget, a short step and a single start at I.
    if (c.phase == "refine") {
        c.noise.mode = NoiseMode::NearIndependent;
        oo.initial_step = std::min(oo.initial_step, 0.1);
        oo.restarts = 1;
    }
    Run run("optimize", c);
    const Prepared p = prepare(c);
    const OptimizeReport rep = minimize_stiefel(p.Y.m(), make_contrast(c, p.Y.data), oo);
    write_matrix_csv(run.path("W_opt.csv"), rep.W_opt);
    {
        std::ofstream csv(run.path("trace.csv"), std::ios::binary);
        CsvWriter w(csv);
        w.header({"iteration", "J"});
        for (const auto& [it, J] : rep.J_trace) w.row({static_cast<double>(it), J});
    }
    std::vector<double> xs, ys;
    for (const auto& [it, J] : rep.J_trace) {
        xs.push_back(it);
        ys.push_back(J);
    }
    write_text_file(run.path("trace.svg"), svg_line_chart({{"J", xs, ys}}, {"contrast trace", "iteration", "J", false, false}));
    run.summary()["J_opt"] = rep.J_opt;
    run.summary()["converged"] = rep.converged;
    run.summary()["restarts_used"] = rep.restarts_used;
    run.summary()["failed_restarts"] = rep.failed_restarts;
    out << "J_opt = " << format_double(rep.J_opt) << "\nconverged = " << (rep.converged ? "true" : "false") << "\n";
    if (p.input.mixing) {
        const double a = amari_error(*p.input.mixing, rep.W_opt * p.model.inv_sqrt);
        run.summary()["amari"] = a;
        out << "amari = " << format_double(a) << "\n";
        SampleMatrix est = apply_unmixing(p.input.X, p.model, rep.W_opt, false);
        SourceSpec spec = c.sources;
        spec.seed = c.require_seed();
        write_matrix_csv(run.path("correlation.csv"), correlation_matrix(est, sample_sources(spec)));
    }
    run.finish();
    return 0;
}

int cmd_emulate(const ExperimentConfig& c, std::ostream& out) {
    Run run("emulate", c);
    const Prepared p = prepare(c);
    ContrastOptions opts = c.contrast;
    const auto spectra = spectra_of(p.Y.data, opts);
    const NoisyContrastResult n = noisy_contrast_from_spectra(spectra, noise_for(c, 0x6E6F6973ULL), opts);
    const double bound = composite_det_bound(n.d, n.entry_cap, n.xi);
    nlohmann::json s = {{"det_noisy", n.det_noisy},         {"det_reference", n.det_reference},
                        {"relative_error", n.relative_error}, {"bound", bound},
                        {"d", n.d},                           {"xi", n.xi},
                        {"eps_mu", n.budgets.eps_mu},         {"eps_I", n.budgets.eps_I},
                        {"max_entry_error", n.max_entry_error}, {"entry_cap", n.entry_cap},
                        {"discarded", n.discarded}};
    write_text_file(run.path("emulate.json"), s.dump(2) + "\n");
    run.summary() = s;
    run.finish();
    out << "det (noisy) = " << format_double(n.det_noisy) << "\ndet (reference) = " << format_double(n.det_reference)
        << "\nrelative error = " << format_double(n.relative_error) << " (bound " << format_double(bound)
        << ")\nd = " << n.d << ", xi = " << format_double(n.xi) << ", discarded pairs = " << n.discarded << "\n";
    return 0;
}

int cmd_verify_circuit(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
    Run run("verify-circuit", c);
    c.circuit.validate();
    CounterRng rng(c.require_seed(), {0x63697263ULL});
    Vector z(c.circuit.samples());
    for (Index k = 0; k < z.size(); ++k) z(k) = rng.uniform(-std::sqrt(3.0), std::sqrt(3.0));
    const CircuitReport rep = verify_block_encoding(z, c.circuit, c.contrast.kernel, rng.next_u64());
    const double tol = std::ldexp(1.0, 2 - c.circuit.s);
    run.summary()["max_block_deviation"] = rep.max_block_deviation;
    run.summary()["unitarity_residual"] = rep.unitarity_residual;
    run.summary()["qubits"] = rep.qubits;
    run.summary()["tolerance"] = tol;
    run.finish();
    out << "qubits = " << rep.qubits << "\nmax block deviation = " << format_double(rep.max_block_deviation)
        << " (tolerance " << format_double(tol) << ")\nunitarity residual = " << format_double(rep.unitarity_residual)
        << "\n";
    if (rep.max_block_deviation > tol || rep.unitarity_residual > 1e-10) {
        err << "circuit: block encoding outside tolerance\n";
        return 2;
    }
    return 0;
}

int cmd_nystrom(const ExperimentConfig& c, std::ostream& out) {
    if (!c.input_csv.empty()) throw InvalidArgument("nystrom needs source samplers; use generated sources");
    Run run("nystrom", c);
    SourceSpec spec = c.sources;
    spec.seed = c.require_seed();
    const SampleMatrix S = sample_sources(spec, c.contrast.threads);
    const auto spectra = spectra_of(S.data, c.contrast);
    std::vector<std::vector<Eigenfunction>> efs;
    for (Index i = 0; i < S.m(); ++i)
        efs.push_back(eigenfunctions(S.data.row(i).transpose(), spectra[static_cast<std::size_t>(i)],
                                     std::min(c.nystrom.top, spectra[static_cast<std::size_t>(i)].kept()),
                                     c.contrast.kernel, i));
    std::ofstream csv(run.path("nystrom.csv"), std::ios::binary);
    CsvWriter w(csv);
    w.header({"i", "k", "j", "l", "C", "D", "stderr"});
    for (Index i = 0; i < S.m(); ++i)
        for (Index j = i + 1; j < S.m(); ++j) {
            const auto table = estimate_C_D_table(efs[static_cast<std::size_t>(i)], efs[static_cast<std::size_t>(j)],
                                                  spec.distributions[static_cast<std::size_t>(i)],
                                                  spec.distributions[static_cast<std::size_t>(j)], c.nystrom.n_mc,
                                                  mix64(spec.seed ^ (0x4E00ULL + static_cast<std::uint64_t>(i * 64 + j))));
            for (const auto& e : table)
                w.row({std::to_string(i), std::to_string(e.k), std::to_string(j), std::to_string(e.l),
                       format_double(e.C), format_double(e.D), format_double(e.standard_error())});
        }
    csv.close();
    out << "wrote C/D table for " << S.m() << " variables\n";
    if (c.nystrom.coverage) {
        if (S.m() < 2) throw InvalidArgument("coverage needs two sources");
        CoverageOptions o;
        o.F_ij = c.nystrom.F_ij;
        o.eps2 = c.noise.eps2;
        o.N = c.sources.n_samples;
        o.n_trials = c.nystrom.trials;
        o.delta = c.nystrom.delta;
        o.seed = mix64(spec.seed ^ 0x436F76ULL);
        o.eps_trunc = c.contrast.eps_trunc;
        o.top = c.nystrom.top;
        o.n_mc = c.nystrom.n_mc;
        o.kernel = c.contrast.kernel;
        o.threads = c.contrast.threads;
        const CoverageResult r = coverage_trial(spec.distributions[0], spec.distributions[1], o);
        if (r.skipped) {
            out << "coverage skipped: eps2 F_ij = 0\n";
            run.summary()["coverage"] = nullptr;
        } else {
            out << "coverage = " << format_double(r.coverage) << " over " << o.n_trials << " trials\n";
            run.summary()["coverage"] = r.coverage;
            run.summary()["half_width"] = r.half_width;
        }
    }
    run.finish();
    return 0;
}

int cmd_bench(const ExperimentConfig& c, std::ostream& out) {
    Run run("bench", c);
    const auto ids = parse_suite(c.suite);
    SuiteOptions so;
    so.seed = c.require_seed();
    so.threads = c.contrast.threads;
    so.out_dir = c.out;
    bool all_pass = true;
    nlohmann::json results = nlohmann::json::array();
    for (int id : ids) {
        const CriterionResult r = run_criterion(id, so);
        out << format_result(r) << std::endl;
        all_pass = all_pass && r.pass;
        results.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    }
    run.summary()["criteria"] = results;
    // Artifacts are written by the suite itself; list what is there.
    std::vector<std::string> names;
    for (const auto& e : std::filesystem::directory_iterator(c.out))
        if (e.path().filename() != "manifest.json") names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    for (const auto& n : names) run.path(n);
    run.finish();
    return all_pass ? 0 : 3;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Kernel ICA with an emulated quantum readout model"};
    app.require_subcommand(1);
    struct Sub {
        const char* name;
        const char* help;
    };
    const Sub subs[] = {
        {"gen", "Sample independent sources"},
        {"mix", "Mix sources with the configured matrix"},
        {"preprocess", "Center and whiten observations"},
        {"contrast", "Evaluate det R_kappa at W = I"},
        {"scan", "Contrast landscape over one or two rotation angles"},
        {"optimize", "Minimize the contrast over rotations"},
        {"emulate", "Noisy readout of det R_kappa against the exact value"},
        {"verify-circuit", "Check the kernel block encoding"},
        {"nystrom", "C and D integrals of Nystrom eigenfunctions"},
        {"bench", "Run the acceptance suite"},
    };
    std::vector<CLI::App*> cmds;
    // Each subcommand gets its own flag storage so option pointers stay valid.
    std::vector<std::unique_ptr<Flags>> flags;
    for (const auto& s : subs) {
        CLI::App* cmd = app.add_subcommand(s.name, s.help);
        flags.push_back(std::make_unique<Flags>());
        add_common(cmd, *flags.back());
        cmds.push_back(cmd);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }
    try {
        for (std::size_t k = 0; k < cmds.size(); ++k) {
            if (!cmds[k]->parsed()) continue;
            const ExperimentConfig c = resolve(*flags[k]);
            const std::string name = subs[k].name;
            if (name == "gen") return cmd_gen(c, out);
            if (name == "mix") return cmd_mix(c, out);
            if (name == "preprocess") return cmd_preprocess(c, out);
            if (name == "contrast") return cmd_contrast(c, out);
            if (name == "scan") return cmd_scan(c, out);
            if (name == "optimize") return cmd_optimize(c, out);
            if (name == "emulate") return cmd_emulate(c, out);
            if (name == "verify-circuit") return cmd_verify_circuit(c, out, err);
            if (name == "nystrom") return cmd_nystrom(c, out);
            if (name == "bench") return cmd_bench(c, out);
        }
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        err << "numerical failure in " << e.module() << ": " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

} // namespace qkica::tools
