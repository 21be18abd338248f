#include "qkica/csv.hpp"

#include <charconv>
#include <fstream>
#include <ostream>

#include "qkica/error.hpp"

namespace qkica {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

void CsvWriter::header(const std::vector<std::string>& cols) { row(cols); }

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) os_ << ',';
        os_ << csv_escape(cells[i]);
    }
    os_ << "\r\n";
}

void CsvWriter::row(const std::vector<double>& cells) {
    std::vector<std::string> s;
    s.reserve(cells.size());
    for (double v : cells) s.push_back(format_double(v));
    row(s);
}

void write_matrix_csv(const std::string& path, const Matrix& a, const std::vector<std::string>& header) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write '" + path + "'");
    CsvWriter w(out);
    if (!header.empty()) w.header(header);
    for (Index r = 0; r < a.rows(); ++r) {
        std::vector<double> cells(static_cast<std::size_t>(a.cols()));
        for (Index c = 0; c < a.cols(); ++c) cells[static_cast<std::size_t>(c)] = a(r, c);
        w.row(cells);
    }
}

} // namespace qkica
