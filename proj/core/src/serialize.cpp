#include "qkica/serialize.hpp"

#include <json.hpp>

#include "qkica/error.hpp"

namespace qkica {

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& a) {
    json rows = json::array();
    for (Index r = 0; r < a.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    if (!j.is_array()) throw InvalidArgument("matrix must be an array of rows");
    const Index rows = static_cast<Index>(j.size());
    const Index cols = rows > 0 ? static_cast<Index>(j.front().size()) : 0;
    Matrix a(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const auto& row = j.at(static_cast<std::size_t>(r));
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) throw InvalidArgument("matrix rows are ragged");
        for (Index c = 0; c < cols; ++c) a(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return a;
}

} // namespace

std::string whitening_to_json(const WhiteningModel& model) {
    json j;
    j["mean"] = std::vector<double>(model.mean.data(), model.mean.data() + model.mean.size());
    j["M"] = matrix_to_json(model.M);
    j["inv_sqrt"] = matrix_to_json(model.inv_sqrt);
    j["mu_M"] = model.mu_M;
    j["eps2"] = model.eps2;
    j["eps2_applied"] = model.eps2_applied;
    j["seed"] = model.seed;
    if (model.perturbed_inv_sqrt) j["perturbed_inv_sqrt"] = matrix_to_json(*model.perturbed_inv_sqrt);
    if (model.E) j["E"] = matrix_to_json(*model.E);
    return j.dump(2);
}

WhiteningModel whitening_from_json(const std::string& text) {
    WhiteningModel m;
    try {
        const json j = json::parse(text);
        const auto mean = j.at("mean").get<std::vector<double>>();
        m.mean = Eigen::Map<const Vector>(mean.data(), static_cast<Index>(mean.size()));
        m.M = matrix_from_json(j.at("M"));
        m.inv_sqrt = matrix_from_json(j.at("inv_sqrt"));
        m.mu_M = j.value("mu_M", 1.0);
        m.eps2 = j.value("eps2", 0.0);
        m.eps2_applied = j.value("eps2_applied", 0.0);
        m.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("perturbed_inv_sqrt")) m.perturbed_inv_sqrt = matrix_from_json(j.at("perturbed_inv_sqrt"));
        if (j.contains("E")) m.E = matrix_from_json(j.at("E"));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("whitening model JSON: ") + e.what());
    }
    const Index k = m.mean.size();
    if (m.M.rows() != k || m.M.cols() != k || m.inv_sqrt.rows() != k || m.inv_sqrt.cols() != k)
        throw InvalidArgument("whitening model JSON has inconsistent shapes");
    return m;
}

} // namespace qkica
