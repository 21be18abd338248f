#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qkica/rng.hpp"
#include "qkica/types.hpp"

namespace qkica {

enum class DistributionKind { Uniform, Laplace, Exponential, Gaussian, Mixture };

// A 1-D law rescaled to zero mean and unit variance in distribution.
struct Distribution {
    DistributionKind kind = DistributionKind::Gaussian;
    // Gaussian-mixture components; unused for the other kinds.
    std::vector<double> means;
    std::vector<double> weights;
    std::vector<double> stds;

    static Distribution uniform() { return {DistributionKind::Uniform, {}, {}, {}}; }
    static Distribution laplace() { return {DistributionKind::Laplace, {}, {}, {}}; }
    static Distribution exponential() { return {DistributionKind::Exponential, {}, {}, {}}; }
    static Distribution gaussian() { return {DistributionKind::Gaussian, {}, {}, {}}; }
    static Distribution mixture(std::vector<double> means, std::vector<double> weights,
                                std::vector<double> stds);
    // uniform | laplace | exponential | gaussian | bimodal
    static Distribution parse(const std::string& name);

    std::string name() const;
    void validate() const;
    double sample(CounterRng& rng) const;
};

struct SourceSpec {
    std::vector<Distribution> distributions;
    Index n_samples = 1000;
    std::uint64_t seed = 0;
};

// Rows are variables, columns are samples.
struct SampleMatrix {
    Matrix data;
    std::vector<std::string> labels;

    SampleMatrix() = default;
    explicit SampleMatrix(Matrix d, std::vector<std::string> l = {})
        : data(std::move(d)), labels(std::move(l)) {}

    Index m() const { return data.rows(); }
    Index n() const { return data.cols(); }
    void validate() const;
};

struct GeneratorSet {
    std::vector<Matrix> generators;
    std::vector<double> deltas;

    // E_ab - E_ba for a < b in lexicographic order, all deltas zero.
    static GeneratorSet elementary(Index m);
};

SampleMatrix sample_sources(const SourceSpec& spec, int threads = 1);

// A * S. Sets *singular when A is numerically singular; never rejects it.
SampleMatrix mix(const SampleMatrix& S, const Matrix& A, bool* singular = nullptr);

// exp(sum_a delta_a P_a), an element of SO(m).
Matrix rotation_from_generators(const GeneratorSet& g);

enum class Orientation { Rows, Cols };

Orientation parse_orientation(const std::string& s);

// Rows orientation: each CSV row is a variable. A first row holding any
// non-numeric cell is taken as a header and stored in labels.
SampleMatrix load_csv(const std::string& path, Orientation orientation);

} // namespace qkica
