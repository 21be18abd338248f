#pragma once

#include <string>
#include <vector>

#include "qkica/types.hpp"

namespace qkica::tools {

struct HeatmapSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    // Axis values for columns (x) and rows (y).
    std::vector<double> x_values;
    std::vector<double> y_values;
    // Cell to outline, if any.
    Index mark_row = -1;
    Index mark_col = -1;
};

// Rows of `values` map to y, columns to x. Non-finite cells are drawn grey.
std::string svg_heatmap(const Matrix& values, const HeatmapSpec& spec);

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct LineChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
};

std::string svg_line_chart(const std::vector<Series>& series, const LineChartSpec& spec);

void write_text_file(const std::string& path, const std::string& text);

} // namespace qkica::tools
