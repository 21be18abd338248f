#include "qkica/sources.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "qkica/csv.hpp"
#include "qkica/error.hpp"
#include "qkica/parallel.hpp"

namespace qkica {

namespace {

// Each sample consumes at most this many counter values.
constexpr std::uint64_t kDrawsPerSample = 4;

struct MixtureMoments {
    double mean;
    double sd;
};

MixtureMoments mixture_moments(const Distribution& d) {
    double wsum = 0.0;
    for (double w : d.weights) wsum += w;
    double mean = 0.0;
    double second = 0.0;
    for (std::size_t c = 0; c < d.weights.size(); ++c) {
        const double w = d.weights[c] / wsum;
        mean += w * d.means[c];
        second += w * (d.stds[c] * d.stds[c] + d.means[c] * d.means[c]);
    }
    return {mean, std::sqrt(second - mean * mean)};
}

} // namespace

Distribution Distribution::mixture(std::vector<double> means, std::vector<double> weights,
                                   std::vector<double> stds) {
    Distribution d{DistributionKind::Mixture, std::move(means), std::move(weights), std::move(stds)};
    d.validate();
    return d;
}

Distribution Distribution::parse(const std::string& name) {
    if (name == "uniform") return uniform();
    if (name == "laplace") return laplace();
    if (name == "exponential") return exponential();
    if (name == "gaussian") return gaussian();
    if (name == "bimodal") return mixture({-1.0, 1.0}, {0.5, 0.5}, {0.5, 0.5});
    throw InvalidArgument("unknown distribution '" + name + "'");
}

std::string Distribution::name() const {
    switch (kind) {
    case DistributionKind::Uniform: return "uniform";
    case DistributionKind::Laplace: return "laplace";
    case DistributionKind::Exponential: return "exponential";
    case DistributionKind::Gaussian: return "gaussian";
    case DistributionKind::Mixture: return "mixture";
    }
    return "unknown";
}

void Distribution::validate() const {
    if (kind != DistributionKind::Mixture) return;
    if (weights.empty() || weights.size() != means.size() || weights.size() != stds.size())
        throw InvalidArgument("mixture needs equally many means, weights and stds");
    for (double w : weights)
        if (!(w > 0.0)) throw InvalidArgument("mixture weights must be positive");
    for (double s : stds)
        if (!(s >= 0.0)) throw InvalidArgument("mixture stds must be non-negative");
    if (!(mixture_moments(*this).sd > 0.0)) throw InvalidArgument("mixture has zero variance");
}

double Distribution::sample(CounterRng& rng) const {
    switch (kind) {
    case DistributionKind::Uniform:
        return std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
    case DistributionKind::Laplace: {
        const double u = rng.uniform() - 0.5;
        const double b = 1.0 / std::numbers::sqrt2;
        return -b * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
    }
    case DistributionKind::Exponential:
        return -std::log(rng.uniform()) - 1.0;
    case DistributionKind::Gaussian:
        return rng.normal();
    case DistributionKind::Mixture: {
        const MixtureMoments mm = mixture_moments(*this);
        double wsum = 0.0;
        for (double w : weights) wsum += w;
        double u = rng.uniform() * wsum;
        std::size_t c = 0;
        while (c + 1 < weights.size() && u >= weights[c]) {
            u -= weights[c];
            ++c;
        }
        const double x = means[c] + stds[c] * rng.normal();
        return (x - mm.mean) / mm.sd;
    }
    }
    throw InvalidArgument("unknown distribution kind");
}

void SampleMatrix::validate() const {
    if (m() < 1 || n() < 2) throw InvalidArgument("sample matrix needs m >= 1 and N >= 2");
    if (!data.allFinite()) throw InvalidArgument("sample matrix has non-finite entries");
}

GeneratorSet GeneratorSet::elementary(Index m) {
    GeneratorSet g;
    for (Index a = 0; a < m; ++a) {
        for (Index b = a + 1; b < m; ++b) {
            Matrix p = Matrix::Zero(m, m);
            p(a, b) = 1.0;
            p(b, a) = -1.0;
            g.generators.push_back(std::move(p));
            g.deltas.push_back(0.0);
        }
    }
    return g;
}

SampleMatrix sample_sources(const SourceSpec& spec, int threads) {
    if (spec.distributions.empty()) throw InvalidArgument("no source distributions given");
    if (spec.n_samples < 2) throw InvalidArgument("n_samples must be at least 2");
    for (const auto& d : spec.distributions) d.validate();
    const Index m = static_cast<Index>(spec.distributions.size());
    Matrix data(m, spec.n_samples);
    parallel_for(static_cast<std::size_t>(m), threads, [&](std::size_t i) {
        CounterRng rng(spec.seed, {static_cast<std::uint64_t>(i)});
        const Distribution& dist = spec.distributions[i];
        for (Index j = 0; j < spec.n_samples; ++j) {
            rng.seek(static_cast<std::uint64_t>(j) * kDrawsPerSample);
            data(static_cast<Index>(i), j) = dist.sample(rng);
        }
    });
    std::vector<std::string> labels;
    for (const auto& d : spec.distributions) labels.push_back(d.name());
    return SampleMatrix(std::move(data), std::move(labels));
}

SampleMatrix mix(const SampleMatrix& S, const Matrix& A, bool* singular) {
    if (A.rows() != A.cols()) throw InvalidArgument("mixing matrix must be square");
    if (A.cols() != S.m()) throw InvalidArgument("mixing matrix does not match the number of rows");
    if (singular != nullptr) {
        Eigen::JacobiSVD<Matrix> svd(A);
        const auto& sv = svd.singularValues();
        *singular = sv.size() == 0 || !(sv(sv.size() - 1) > 1e-12 * sv(0));
    }
    return SampleMatrix(A * S.data);
}

Matrix rotation_from_generators(const GeneratorSet& g) {
    if (g.generators.empty()) throw InvalidArgument("generator set is empty");
    if (g.generators.size() != g.deltas.size())
        throw InvalidArgument("generator and delta counts differ");
    const Index m = g.generators.front().rows();
    Matrix sum = Matrix::Zero(m, m);
    for (std::size_t a = 0; a < g.generators.size(); ++a) {
        const Matrix& p = g.generators[a];
        if (p.rows() != m || p.cols() != m) throw InvalidArgument("generators must share one square shape");
        const double scale = std::max(1.0, p.cwiseAbs().maxCoeff());
        if ((p + p.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw InvalidArgument("generator " + std::to_string(a) + " is not skew-symmetric");
        sum += g.deltas[a] * p;
    }
    Matrix skew = 0.5 * (sum - sum.transpose());
    Matrix w = skew.exp();
    // One Newton-Schulz polish step removes the exponential's rounding drift.
    w = 0.5 * w * (3.0 * Matrix::Identity(m, m) - w.transpose() * w);
    return w;
}

Orientation parse_orientation(const std::string& s) {
    if (s == "rows") return Orientation::Rows;
    if (s == "cols") return Orientation::Cols;
    throw InvalidArgument("orientation must be rows or cols, got '" + s + "'");
}

SampleMatrix load_csv(const std::string& path, Orientation orientation) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        std::vector<double> values;
        values.reserve(cells.size());
        bool numeric = true;
        std::size_t bad = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            std::istringstream cs(cells[c]);
            double v = 0.0;
            cs >> v;
            if (cs.fail() || !(cs >> std::ws).eof()) {
                numeric = false;
                bad = c;
                break;
            }
            values.push_back(v);
        }
        if (!numeric) {
            if (rows.empty() && labels.empty()) {
                labels = cells;
                width = cells.size();
                continue;
            }
            throw InvalidArgument(path + ":" + std::to_string(line_no) + ": non-numeric cell in column " +
                                  std::to_string(bad + 1));
        }
        if (width == 0) width = values.size();
        if (values.size() != width)
            throw InvalidArgument(path + ":" + std::to_string(line_no) + ": ragged row (" +
                                  std::to_string(values.size()) + " cells, expected " +
                                  std::to_string(width) + ")");
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw InvalidArgument("'" + path + "' has no numeric rows");
    Matrix a(static_cast<Index>(rows.size()), static_cast<Index>(width));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < width; ++c) a(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    if (orientation == Orientation::Cols) a.transposeInPlace();
    SampleMatrix out(std::move(a), std::move(labels));
    out.validate();
    return out;
}

} // namespace qkica
