#include "qkica_tools/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "qkica/error.hpp"

namespace qkica::tools {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw InvalidArgument(where + " must be an object");
    for (const auto& item : j.items())
        if (!allowed.count(item.key())) throw InvalidArgument("unknown key '" + item.key() + "' in " + where);
}

json distribution_to_json(const Distribution& d) {
    if (d.kind != DistributionKind::Mixture) return d.name();
    return json{{"kind", "mixture"}, {"means", d.means}, {"weights", d.weights}, {"stds", d.stds}};
}

Distribution distribution_from_json(const json& j) {
    if (j.is_string()) return Distribution::parse(j.get<std::string>());
    reject_unknown(j, {"kind", "means", "weights", "stds"}, "distribution");
    const std::string kind = j.value("kind", "");
    if (kind != "mixture") return Distribution::parse(kind);
    return Distribution::mixture(j.at("means").get<std::vector<double>>(), j.at("weights").get<std::vector<double>>(),
                                 j.at("stds").get<std::vector<double>>());
}

json axis_to_json(const GridAxis& g) { return json{{"lo", g.lo}, {"hi", g.hi}, {"steps", g.steps}}; }

GridAxis axis_from_json(const json& j) {
    if (j.is_string()) return GridAxis::parse(j.get<std::string>());
    reject_unknown(j, {"lo", "hi", "steps"}, "grid");
    GridAxis g{j.at("lo").get<double>(), j.at("hi").get<double>(), j.at("steps").get<Index>()};
    if (g.steps < 1 || !(g.lo <= g.hi)) throw InvalidArgument("grid needs steps >= 1 and lo <= hi");
    return g;
}

json matrix_json(const Matrix& a) {
    json rows = json::array();
    for (Index r = 0; r < a.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
        rows.push_back(row);
    }
    return rows;
}

Matrix matrix_from(const json& j) {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw InvalidArgument("mixing matrix is empty");
    Matrix a(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.front().size()) throw InvalidArgument("mixing matrix rows are ragged");
        for (std::size_t c = 0; c < rows[r].size(); ++c) a(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    }
    return a;
}

} // namespace

ExperimentConfig::ExperimentConfig() {
    sources.distributions = {Distribution::uniform(), Distribution::laplace()};
    sources.n_samples = 1000;
}

json ExperimentConfig::to_json() const {
    json j;
    if (seed) j["seed"] = *seed;
    json dists = json::array();
    for (const auto& d : sources.distributions) dists.push_back(distribution_to_json(d));
    j["sources"] = {{"distributions", dists},
                    {"n_samples", sources.n_samples},
                    {"input_csv", input_csv},
                    {"orientation", orientation == Orientation::Rows ? "rows" : "cols"},
                    {"whiten", whiten}};
    json mixing = json::object();
    if (mixing_matrix) mixing["matrix"] = matrix_json(*mixing_matrix);
    if (!mixing_deltas.empty()) mixing["deltas"] = mixing_deltas;
    j["mixing"] = mixing;
    j["kernel"] = {{"sigma", contrast.kernel.sigma}};
    j["contrast"] = {{"kappa", contrast.kappa},
                     {"eps_trunc", contrast.eps_trunc},
                     {"signed", contrast.signed_mode},
                     {"kappa_raw", contrast.convention == KappaConvention::Raw},
                     {"dump_gram", dump_gram}};
    json noise_j = {{"eps1", noise.eps1},
                    {"eps2", noise.eps2},
                    {"mode", noise.mode == NoiseMode::General ? "general" : "near"},
                    {"G", noise.G},
                    {"check_budget", noise.check_budget}};
    if (noise.xi_est) noise_j["xi_est"] = *noise.xi_est;
    j["noise"] = noise_j;
    j["optimizer"] = {{"max_iters", optimizer.max_iters},
                      {"tol", optimizer.tol},
                      {"restarts", optimizer.restarts},
                      {"fd_step", optimizer.fd_step},
                      {"initial_step", optimizer.initial_step},
                      {"phase", phase}};
    j["scan"] = {{"grid", axis_to_json(grid)}};
    if (grid2) j["scan"]["grid2"] = axis_to_json(*grid2);
    j["nystrom"] = {{"n_mc", nystrom.n_mc},     {"top", nystrom.top},     {"F_ij", nystrom.F_ij},
                    {"trials", nystrom.trials}, {"delta", nystrom.delta}, {"coverage", nystrom.coverage}};
    j["circuit"] = {{"n", circuit.n}, {"s", circuit.s}, {"split_flag", circuit.split_flag}};
    j["bench"] = {{"suite", suite}};
    j["out"] = out;
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& input) {
    const json& j = input.contains("manifest_version") ? input.at("config") : input;
    reject_unknown(j, {"seed", "sources", "mixing", "kernel", "contrast", "noise", "optimizer", "scan", "nystrom",
                       "circuit", "bench", "out"},
                   "config");
    ExperimentConfig c;
    try {
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("sources")) {
            const json& s = j.at("sources");
            reject_unknown(s, {"distributions", "n_samples", "input_csv", "orientation", "whiten"}, "sources");
            if (s.contains("distributions")) {
                c.sources.distributions.clear();
                for (const auto& d : s.at("distributions")) c.sources.distributions.push_back(distribution_from_json(d));
            }
            c.sources.n_samples = s.value("n_samples", c.sources.n_samples);
            c.input_csv = s.value("input_csv", c.input_csv);
            if (s.contains("orientation")) c.orientation = parse_orientation(s.at("orientation").get<std::string>());
            c.whiten = s.value("whiten", c.whiten);
        }
        if (j.contains("mixing")) {
            const json& m = j.at("mixing");
            reject_unknown(m, {"matrix", "deltas"}, "mixing");
            if (m.contains("matrix")) c.mixing_matrix = matrix_from(m.at("matrix"));
            if (m.contains("deltas")) c.mixing_deltas = m.at("deltas").get<std::vector<double>>();
        }
        if (j.contains("kernel")) {
            reject_unknown(j.at("kernel"), {"sigma"}, "kernel");
            c.contrast.kernel.sigma = j.at("kernel").value("sigma", c.contrast.kernel.sigma);
        }
        if (j.contains("contrast")) {
            const json& k = j.at("contrast");
            reject_unknown(k, {"kappa", "eps_trunc", "signed", "kappa_raw", "dump_gram"}, "contrast");
            c.contrast.kappa = k.value("kappa", c.contrast.kappa);
            c.contrast.eps_trunc = k.value("eps_trunc", c.contrast.eps_trunc);
            c.contrast.signed_mode = k.value("signed", c.contrast.signed_mode);
            if (k.value("kappa_raw", false)) c.contrast.convention = KappaConvention::Raw;
            c.dump_gram = k.value("dump_gram", c.dump_gram);
        }
        if (j.contains("noise")) {
            const json& n = j.at("noise");
            reject_unknown(n, {"eps1", "eps2", "mode", "G", "xi_est", "check_budget"}, "noise");
            c.noise.eps1 = n.value("eps1", c.noise.eps1);
            c.noise.eps2 = n.value("eps2", c.noise.eps2);
            if (n.contains("mode")) c.noise.mode = parse_noise_mode(n.at("mode").get<std::string>());
            c.noise.G = n.value("G", c.noise.G);
            if (n.contains("xi_est") && !n.at("xi_est").is_null()) c.noise.xi_est = n.at("xi_est").get<double>();
            c.noise.check_budget = n.value("check_budget", c.noise.check_budget);
        }
        if (j.contains("optimizer")) {
            const json& o = j.at("optimizer");
            reject_unknown(o, {"max_iters", "tol", "restarts", "fd_step", "initial_step", "phase"}, "optimizer");
            c.optimizer.max_iters = o.value("max_iters", c.optimizer.max_iters);
            c.optimizer.tol = o.value("tol", c.optimizer.tol);
            c.optimizer.restarts = o.value("restarts", c.optimizer.restarts);
            c.optimizer.fd_step = o.value("fd_step", c.optimizer.fd_step);
            c.optimizer.initial_step = o.value("initial_step", c.optimizer.initial_step);
            c.phase = o.value("phase", c.phase);
        }
        if (j.contains("scan")) {
            const json& s = j.at("scan");
            reject_unknown(s, {"grid", "grid2"}, "scan");
            if (s.contains("grid")) c.grid = axis_from_json(s.at("grid"));
            if (s.contains("grid2")) c.grid2 = axis_from_json(s.at("grid2"));
        }
        if (j.contains("nystrom")) {
            const json& n = j.at("nystrom");
            reject_unknown(n, {"n_mc", "top", "F_ij", "trials", "delta", "coverage"}, "nystrom");
            c.nystrom.n_mc = n.value("n_mc", c.nystrom.n_mc);
            c.nystrom.top = n.value("top", c.nystrom.top);
            c.nystrom.F_ij = n.value("F_ij", c.nystrom.F_ij);
            c.nystrom.trials = n.value("trials", c.nystrom.trials);
            c.nystrom.delta = n.value("delta", c.nystrom.delta);
            c.nystrom.coverage = n.value("coverage", c.nystrom.coverage);
        }
        if (j.contains("circuit")) {
            const json& q = j.at("circuit");
            reject_unknown(q, {"n", "s", "split_flag"}, "circuit");
            c.circuit.n = q.value("n", c.circuit.n);
            c.circuit.s = q.value("s", c.circuit.s);
            c.circuit.split_flag = q.value("split_flag", c.circuit.split_flag);
        }
        if (j.contains("bench")) {
            reject_unknown(j.at("bench"), {"suite"}, "bench");
            c.suite = j.at("bench").value("suite", c.suite);
        }
        c.out = j.value("out", c.out);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
    c.noise.kappa = c.contrast.kappa;
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidArgument("config '" + path + "' is not valid JSON: " + e.what());
    }
    return from_json(j);
}

std::uint64_t ExperimentConfig::require_seed() const {
    if (!seed) throw InvalidArgument("a seed is required (--seed or \"seed\" in the config)");
    return *seed;
}

Matrix ExperimentConfig::mixing(Index m) const {
    if (mixing_matrix) {
        if (mixing_matrix->rows() != m || mixing_matrix->cols() != m)
            throw InvalidArgument("mixing matrix must be " + std::to_string(m) + " x " + std::to_string(m));
        return *mixing_matrix;
    }
    if (!mixing_deltas.empty()) {
        GeneratorSet g = GeneratorSet::elementary(m);
        if (g.generators.size() != mixing_deltas.size())
            throw InvalidArgument("expected " + std::to_string(g.generators.size()) + " mixing deltas");
        g.deltas = mixing_deltas;
        return rotation_from_generators(g);
    }
    return Matrix::Identity(m, m);
}

std::string config_hash(const json& config) {
    const std::string text = config.dump();
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace qkica::tools
