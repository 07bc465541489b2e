#include "asym/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "asym/error.hpp"
#include "asym/serialize.hpp"

namespace asym::plot {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

constexpr std::array<const char*, 6> kColors{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string fmt(double v) {
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.2f", v);
    return buf.data();
}

std::string tick(double v) {
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.4g", v);
    return buf.data();
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

Range padded(double lo, double hi) {
    if (!(hi > lo)) {
        const double pad = std::abs(lo) > 0 ? 0.1 * std::abs(lo) : 1.0;
        return {lo - pad, hi + pad};
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

}  // namespace

std::string render_svg(const std::vector<Series>& series, const Axes& axes) {
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    std::size_t points = 0;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) throw ValidationError("emit_plot: series '" + s.label + "' has mismatched x and y");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
            ++points;
        }
    }
    if (points == 0) throw ValidationError("emit_plot: empty series");
    const Range xr = padded(xmin, xmax);
    const Range yr = padded(ymin, ymax);
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double y) { return kTop + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(axes.title)
        << "</text>\n";
    svg << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\"" << fmt(pw) << "\" height=\"" << fmt(ph)
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = xr.lo + (xr.hi - xr.lo) * k / 4.0;
        const double yv = yr.lo + (yr.hi - yr.lo) * k / 4.0;
        svg << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << fmt(kTop + ph + 16) << "\" text-anchor=\"middle\">" << tick(xv)
            << "</text>\n";
        svg << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(py(yv) + 4) << "\" text-anchor=\"end\">" << tick(yv)
            << "</text>\n";
    }
    svg << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << fmt(kHeight - 12) << "\" text-anchor=\"middle\">"
        << escape(axes.x_label) << "</text>\n";
    svg << "<text x=\"16\" y=\"" << fmt(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << fmt(kTop + ph / 2) << ")\">" << escape(axes.y_label) << "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* color = kColors[i % kColors.size()];
        std::ostringstream pts;
        std::size_t count = 0;
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
            pts << (count++ ? " " : "") << fmt(px(s.x[k])) << ',' << fmt(py(s.y[k]));
        }
        if (count == 1) {
            const std::string p = pts.str();
            const auto comma = p.find(',');
            svg << "<circle cx=\"" << p.substr(0, comma) << "\" cy=\"" << p.substr(comma + 1) << "\" r=\"3\" fill=\"" << color
                << "\"/>\n";
        } else if (count > 1) {
            svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
        }
        const double ly = kTop + 14.0 + 18.0 * static_cast<double>(i);
        svg << "<line x1=\"" << fmt(kWidth - kRight + 12) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\"" << fmt(kWidth - kRight + 32)
            << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << fmt(kWidth - kRight + 38) << "\" y=\"" << fmt(ly) << "\">" << escape(s.label) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void emit_plot(const std::vector<Series>& series, const Axes& axes, const std::filesystem::path& path) {
    io::write_file(path, render_svg(series, axes));
}

}  // namespace asym::plot
