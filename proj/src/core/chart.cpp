#include "chart.hpp"

#include <algorithm>
#include <fstream>

#include "error.hpp"
#include "textio.hpp"

namespace fgsmbench {

namespace {

constexpr double kWidth = 640.0, kHeight = 420.0;
constexpr double kPlotX = 72.0, kPlotY = 44.0, kPlotW = 540.0, kPlotH = 320.0;

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

} // namespace

void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<std::pair<double, double>>& points) {
    if (points.empty()) {
        throw ArgumentError("chart: no data points");
    }
    double x_max = 0.0, y_lo = 0.0, y_hi = 1.0;
    for (const auto& [x, y] : points) {
        x_max = std::max(x_max, x);
        y_lo = std::min(y_lo, y);
        y_hi = std::max(y_hi, y);
    }
    if (x_max <= 0.0) x_max = 1.0;
    const double x_lo = 0.0;
    const auto px = [&](double x) {
        return kPlotX + (x - x_lo) / (x_max - x_lo) * kPlotW;
    };
    const auto py = [&](double y) {
        return kPlotY + (1.0 - (y - y_lo) / (y_hi - y_lo)) * kPlotH;
    };

    std::ofstream out(path);
    if (!out) {
        throw IoError("chart: cannot create " + path);
    }
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt_g6(kWidth)
        << "\" height=\"" << fmt_g6(kHeight) << "\" viewBox=\"0 0 " << fmt_g6(kWidth) << " "
        << fmt_g6(kHeight) << "\">\n";
    out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "  <text x=\"" << fmt_g6(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << escape_xml(title) << "</text>\n";
    out << "  <rect id=\"plot-area\" x=\"" << fmt_g6(kPlotX) << "\" y=\"" << fmt_g6(kPlotY)
        << "\" width=\"" << fmt_g6(kPlotW) << "\" height=\"" << fmt_g6(kPlotH)
        << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\" data-x-min=\"" << fmt_g6(x_lo)
        << "\" data-x-max=\"" << fmt_g6(x_max) << "\" data-y-min=\"" << fmt_g6(y_lo)
        << "\" data-y-max=\"" << fmt_g6(y_hi) << "\"/>\n";

    constexpr int kTicks = 5;
    for (int i = 0; i <= kTicks; ++i) {
        const double fx = x_lo + (x_max - x_lo) * i / kTicks;
        const double gx = px(fx);
        out << "  <line x1=\"" << fmt_g6(gx) << "\" y1=\"" << fmt_g6(kPlotY + kPlotH)
            << "\" x2=\"" << fmt_g6(gx) << "\" y2=\"" << fmt_g6(kPlotY + kPlotH + 5)
            << "\" stroke=\"#444\"/>\n";
        out << "  <text x=\"" << fmt_g6(gx) << "\" y=\"" << fmt_g6(kPlotY + kPlotH + 20)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt_g6(fx) << "</text>\n";
        const double fy = y_lo + (y_hi - y_lo) * i / kTicks;
        const double gy = py(fy);
        out << "  <line x1=\"" << fmt_g6(kPlotX - 5) << "\" y1=\"" << fmt_g6(gy) << "\" x2=\""
            << fmt_g6(kPlotX) << "\" y2=\"" << fmt_g6(gy) << "\" stroke=\"#444\"/>\n";
        out << "  <text x=\"" << fmt_g6(kPlotX - 9) << "\" y=\"" << fmt_g6(gy + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt_g6(fy) << "</text>\n";
    }
    out << "  <text x=\"" << fmt_g6(kPlotX + kPlotW / 2) << "\" y=\""
        << fmt_g6(kHeight - 10)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << escape_xml(x_label) << "</text>\n";
    out << "  <text x=\"18\" y=\"" << fmt_g6(kPlotY + kPlotH / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << fmt_g6(kPlotY + kPlotH / 2) << ")\">"
        << escape_xml(y_label) << "</text>\n";

    out << "  <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i) out << " ";
        out << fmt_g6(px(points[i].first)) << "," << fmt_g6(py(points[i].second));
    }
    out << "\"/>\n";
    for (const auto& [x, y] : points) {
        out << "  <circle cx=\"" << fmt_g6(px(x)) << "\" cy=\"" << fmt_g6(py(y))
            << "\" r=\"3\" fill=\"#1f77b4\" data-x=\"" << fmt_g6(x) << "\" data-y=\""
            << fmt_g6(y) << "\"/>\n";
    }
    out << "</svg>\n";
    if (!out) {
        throw IoError("chart: write failed for " + path);
    }
}

} // namespace fgsmbench
