// Runs every acceptance criterion and prints one PASS/FAIL line each.
// Exit status is nonzero when any criterion fails.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qkica/parallel.hpp"
#include "qkica_tools/experiments.hpp"

int main(int argc, char** argv) {
    using namespace qkica::tools;
    CLI::App app{"qkica acceptance suite"};
    std::uint64_t seed = 1;
    std::string suite = "all";
    std::string out;
    app.add_option("--seed", seed, "Master seed");
    app.add_option("--suite", suite, "all, or a comma list of criterion ids");
    app.add_option("--out", out, "Directory for CSV and SVG artifacts");
    CLI11_PARSE(app, argc, argv);

    SuiteOptions opts;
    opts.seed = seed;
    opts.threads = qkica::default_threads();
    opts.out_dir = out;
    int failed = 0;
    try {
        for (int id : parse_suite(suite)) {
            const CriterionResult r = run_criterion(id, opts);
            std::cout << format_result(r) << std::endl;
            if (!r.pass) ++failed;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << "\n";
    return failed == 0 ? 0 : 1;
}
