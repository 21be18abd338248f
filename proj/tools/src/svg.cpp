#include "qkica_tools/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "qkica/error.hpp"

namespace qkica::tools {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 110.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(ch);
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

// Five-stop perceptual ramp, dark blue to yellow.
std::string ramp(double t) {
    static constexpr std::array<std::array<double, 3>, 5> stops{{
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
    t = std::clamp(t, 0.0, 1.0) * 4.0;
    const int i = std::min(3, static_cast<int>(t));
    const double f = t - i;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                  static_cast<int>(std::lround(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                  static_cast<int>(std::lround(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                  static_cast<int>(std::lround(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
    return buf;
}

void header(std::ostringstream& os, const std::string& title) {
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth << "\" height=\""
       << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << px(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << escape(title)
       << "</text>\n";
}

void axis_labels(std::ostringstream& os, const std::string& x_label, const std::string& y_label) {
    os << "<text x=\"" << px(kLeft + (kWidth - kLeft - kRight) / 2) << "\" y=\"" << px(kHeight - 14)
       << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(x_label) << "</text>\n";
    os << "<text transform=\"translate(18," << px(kTop + (kHeight - kTop - kBottom) / 2)
       << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"13\">" << escape(y_label) << "</text>\n";
}

} // namespace

std::string svg_heatmap(const Matrix& values, const HeatmapSpec& spec) {
    std::ostringstream os;
    header(os, spec.title);
    const Index rows = values.rows();
    const Index cols = values.cols();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c)
            if (std::isfinite(values(r, c))) {
                lo = std::min(lo, values(r, c));
                hi = std::max(hi, values(r, c));
            }
    if (!(hi > lo)) hi = lo + 1.0;
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    const double cw = cols > 0 ? pw / static_cast<double>(cols) : pw;
    const double ch = rows > 0 ? ph / static_cast<double>(rows) : ph;
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            const double v = values(r, c);
            const std::string fill = std::isfinite(v) ? ramp((v - lo) / (hi - lo)) : "#bbbbbb";
            // Row 0 at the bottom so y increases upward.
            const double y = kTop + ph - static_cast<double>(r + 1) * ch;
            os << "<rect x=\"" << px(kLeft + static_cast<double>(c) * cw) << "\" y=\"" << px(y) << "\" width=\""
               << px(cw + 0.3) << "\" height=\"" << px(ch + 0.3) << "\" fill=\"" << fill << "\"/>\n";
        }
    }
    if (spec.mark_row >= 0 && spec.mark_col >= 0) {
        const double y = kTop + ph - static_cast<double>(spec.mark_row + 1) * ch;
        os << "<rect x=\"" << px(kLeft + static_cast<double>(spec.mark_col) * cw) << "\" y=\"" << px(y)
           << "\" width=\"" << px(cw) << "\" height=\"" << px(ch)
           << "\" fill=\"none\" stroke=\"red\" stroke-width=\"2\"/>\n";
    }
    auto tick_every = [](std::size_t n) { return std::max<std::size_t>(1, n / 5); };
    for (std::size_t c = 0; c < spec.x_values.size(); c += tick_every(spec.x_values.size())) {
        const double x = kLeft + (static_cast<double>(c) + 0.5) * cw;
        os << "<text x=\"" << px(x) << "\" y=\"" << px(kTop + ph + 18) << "\" text-anchor=\"middle\" font-size=\"11\">"
           << num(spec.x_values[c]) << "</text>\n";
    }
    for (std::size_t r = 0; r < spec.y_values.size(); r += tick_every(spec.y_values.size())) {
        const double y = kTop + ph - (static_cast<double>(r) + 0.5) * ch;
        os << "<text x=\"" << px(kLeft - 6) << "\" y=\"" << px(y + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
           << num(spec.y_values[r]) << "</text>\n";
    }
    const double bx = kWidth - kRight + 20;
    for (int i = 0; i < 50; ++i) {
        const double t = i / 49.0;
        os << "<rect x=\"" << px(bx) << "\" y=\"" << px(kTop + ph * (1.0 - t) - ph / 50.0) << "\" width=\"16\" height=\""
           << px(ph / 50.0 + 0.5) << "\" fill=\"" << ramp(t) << "\"/>\n";
    }
    os << "<text x=\"" << px(bx + 20) << "\" y=\"" << px(kTop + 10) << "\" font-size=\"11\">" << num(hi) << "</text>\n";
    os << "<text x=\"" << px(bx + 20) << "\" y=\"" << px(kTop + ph) << "\" font-size=\"11\">" << num(lo) << "</text>\n";
    axis_labels(os, spec.x_label, spec.y_label);
    os << "</svg>\n";
    return os.str();
}

std::string svg_line_chart(const std::vector<Series>& series, const LineChartSpec& spec) {
    std::ostringstream os;
    header(os, spec.title);
    auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            const double x = tx(s.x[i]);
            const double y = ty(s.y[i]);
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            xlo = std::min(xlo, x);
            xhi = std::max(xhi, x);
            ylo = std::min(ylo, y);
            yhi = std::max(yhi, y);
        }
    }
    if (!std::isfinite(xlo)) xlo = 0.0, xhi = 1.0, ylo = 0.0, yhi = 1.0;
    if (!(xhi > xlo)) xhi = xlo + 1.0;
    if (!(yhi > ylo)) yhi = ylo + 1.0;
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - xlo) / (xhi - xlo) * pw; };
    auto sy = [&](double y) { return kTop + ph - (y - ylo) / (yhi - ylo) * ph; };
    os << "<rect x=\"" << px(kLeft) << "\" y=\"" << px(kTop) << "\" width=\"" << px(pw) << "\" height=\"" << px(ph)
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = xlo + (xhi - xlo) * i / 4.0;
        const double yv = ylo + (yhi - ylo) * i / 4.0;
        os << "<line x1=\"" << px(sx(xv)) << "\" y1=\"" << px(kTop + ph) << "\" x2=\"" << px(sx(xv)) << "\" y2=\""
           << px(kTop + ph + 5) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << px(sx(xv)) << "\" y=\"" << px(kTop + ph + 18)
           << "\" text-anchor=\"middle\" font-size=\"11\">" << num(spec.log_x ? std::pow(10.0, xv) : xv) << "</text>\n";
        os << "<line x1=\"" << px(kLeft - 5) << "\" y1=\"" << px(sy(yv)) << "\" x2=\"" << px(kLeft) << "\" y2=\""
           << px(sy(yv)) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << px(kLeft - 8) << "\" y=\"" << px(sy(yv) + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
           << num(spec.log_y ? std::pow(10.0, yv) : yv) << "</text>\n";
    }
    static const std::array<const char*, 6> colors{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = colors[k % colors.size()];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            const double x = tx(s.x[i]);
            const double y = ty(s.y[i]);
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            os << px(sx(x)) << ',' << px(sy(y)) << ' ';
        }
        os << "\"/>\n";
        const double ly = kTop + 14.0 + 16.0 * static_cast<double>(k);
        os << "<line x1=\"" << px(kWidth - kRight + 8) << "\" y1=\"" << px(ly - 4) << "\" x2=\""
           << px(kWidth - kRight + 24) << "\" y2=\"" << px(ly - 4) << "\" stroke=\"" << color
           << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << px(kWidth - kRight + 28) << "\" y=\"" << px(ly) << "\" font-size=\"11\">"
           << escape(s.name) << "</text>\n";
    }
    axis_labels(os, spec.x_label, spec.y_label);
    os << "</svg>\n";
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write '" + path + "'");
    out << text;
}

} // namespace qkica::tools
