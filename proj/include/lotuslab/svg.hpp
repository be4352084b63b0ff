#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace lotuslab {

struct SvgSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

/// Minimal deterministic line plot: 640x400 viewBox, framed plot area,
/// four tick labels per axis, one polyline per series with a fixed
/// palette and a legend in the top-right corner.
void write_svg_lineplot(const std::filesystem::path& path, const std::string& title,
                        const std::string& x_label, const std::string& y_label,
                        const std::vector<SvgSeries>& series);

}  // namespace lotuslab
