#pragma once

#include <string>
#include <utility>
#include <vector>

namespace fgsmbench {

/// Standalone SVG line chart of one (x, y) series.
///
/// The x axis always covers at least [0, max x] and the y axis at least
/// [0, 1]; both stretch further when data falls outside. The plot rectangle
/// carries id="plot-area" plus data-x-min/max and data-y-min/max attributes,
/// and every point is a circle with data-x/data-y attributes, so emitted
/// charts can be checked mechanically.
void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<std::pair<double, double>>& points);

} // namespace fgsmbench
