#pragma once

#include <string>
#include <vector>

namespace okan::app {

struct LineSeries {
    std::string label;
    std::string color;
    std::vector<double> y;
};

/// Static line chart; x is the sample index. Output depends only on the inputs.
std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<LineSeries>& series);

}  // namespace okan::app
