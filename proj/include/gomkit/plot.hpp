#ifndef GOMKIT_PLOT_HPP
#define GOMKIT_PLOT_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

namespace gomkit {

struct PlotSeries {
    std::string label;
    Eigen::VectorXd values;
    std::string color; // SVG color
};

/// Minimal SVG line chart for real-vs-simulated descriptor traces.
std::string svg_line_plot(const std::string& title, const std::vector<PlotSeries>& series,
                          int width = 800, int height = 360);

} // namespace gomkit

#endif
