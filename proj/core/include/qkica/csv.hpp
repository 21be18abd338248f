#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qkica/types.hpp"

namespace qkica {

// RFC 4180 field splitting; quoted fields may contain commas and "".
std::vector<std::string> split_csv_line(const std::string& line);
std::string csv_escape(const std::string& field);
// Shortest round-trip decimal form, stable across runs.
std::string format_double(double x);

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}
    void header(const std::vector<std::string>& cols);
    void row(const std::vector<std::string>& cells);
    void row(const std::vector<double>& cells);

private:
    std::ostream& os_;
};

void write_matrix_csv(const std::string& path, const Matrix& a,
                      const std::vector<std::string>& header = {});

} // namespace qkica
