#include "lotuslab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace lotuslab {

namespace {

constexpr double kWidth = 640.0, kHeight = 400.0;
constexpr double kLeft = 70.0, kRight = 610.0, kTop = 40.0, kBottom = 350.0;
const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(5) << v;
    return os.str();
}

}  // namespace

void write_svg_lineplot(const std::filesystem::path& path, const std::string& title,
                        const std::string& x_label, const std::string& y_label,
                        const std::vector<SvgSeries>& series) {
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    bool first = true;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            if (first) {
                x0 = x1 = x;
                y0 = y1 = y;
                first = false;
            }
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (first) throw std::invalid_argument("write_svg_lineplot: no points");
    if (x1 == x0) x1 = x0 + 1.0;
    if (y1 == y0) y1 = y0 + 1.0;

    auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * (kRight - kLeft); };
    auto py = [&](double y) { return kBottom - (y - y0) / (y1 - y0) * (kBottom - kTop); };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_svg_lineplot: cannot open " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kWidth << " " << kHeight
        << "\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << title << "</text>\n";
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kRight - kLeft
        << "\" height=\"" << kBottom - kTop << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 3; ++i) {
        const double fx = x0 + (x1 - x0) * i / 3.0;
        const double fy = y0 + (y1 - y0) * i / 3.0;
        out << "<text x=\"" << px(fx) << "\" y=\"" << kBottom + 20
            << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(fx) << "</text>\n";
        out << "<text x=\"" << kLeft - 8 << "\" y=\"" << py(fy) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(fy) << "</text>\n";
    }
    out << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kHeight - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n";
    out << "<text x=\"18\" y=\"" << (kTop + kBottom) / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
        << (kTop + kBottom) / 2 << ")\">" << y_label << "</text>\n";
    for (size_t si = 0; si < series.size(); ++si) {
        const char* color = kPalette[si % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (auto [x, y] : series[si].points) out << fmt(px(x)) << "," << fmt(py(y)) << " ";
        out << "\"/>\n";
        out << "<text x=\"" << kRight - 6 << "\" y=\"" << kTop + 16 + 16.0 * si
            << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">"
            << series[si].name << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace lotuslab
