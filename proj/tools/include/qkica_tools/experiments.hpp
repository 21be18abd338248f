#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qkica/contrast.hpp"
#include "qkica/optimize.hpp"
#include "qkica/sources.hpp"

namespace qkica::tools {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct SuiteOptions {
    std::uint64_t seed = 0;
    int threads = 1;
    // Artifacts (CSV, SVG) go here when non-empty.
    std::string out_dir;
};

constexpr int kCriterionCount = 10;

// "all", or a comma list of ids in 1..10 and the aliases fig4, fig6a, fig6b
// and fig8a (criteria 1, 3, 2 and 9).
std::vector<int> parse_suite(const std::string& suite);
CriterionResult run_criterion(int id, const SuiteOptions& opts);
// One line: "PASS [id] name (seconds s): detail".
std::string format_result(const CriterionResult& r);

// Classical, adapted and noisy adapted -ln det over a 2-D grid, sharing
// one set of spectra per cell. With check_budget, noisy cells that break
// the general-mode budget are NaN; without it they are evaluated and
// counted in over_budget.
struct ContrastLandscapes {
    GridAxis axis1;
    GridAxis axis2;
    Matrix classical;
    Matrix adapted;
    std::vector<double> eps1;
    std::vector<Matrix> noisy;
    Index d_max = 0;
    Index budget_failures = 0;
    Index over_budget = 0;
};

ContrastLandscapes scan_contrasts(const Matrix& Y, const GeneratorSet& generators, const GridAxis& axis1,
                                  const GridAxis& axis2, const ContrastOptions& opts,
                                  const std::vector<double>& eps1, std::uint64_t noise_seed, int threads,
                                  bool check_budget = true);

// Row and column of the smallest finite entry; (-1, -1) when none.
std::pair<Index, Index> argmin_cell(const Matrix& a);

// Least squares y = a + b x.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y);
double median(std::vector<double> v);

} // namespace qkica::tools
