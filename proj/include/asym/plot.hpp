#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace asym::plot {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct Axes {
    std::string title;
    std::string x_label;
    std::string y_label;
};

/// Standalone SVG line chart. Identical input gives identical bytes.
/// Throws ValidationError when there is no point to draw.
std::string render_svg(const std::vector<Series>& series, const Axes& axes);

void emit_plot(const std::vector<Series>& series, const Axes& axes, const std::filesystem::path& path);

}  // namespace asym::plot
