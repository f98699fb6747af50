#pragma once

#include <span>
#include <string>
#include <vector>

namespace oscsim
{
struct PlotSeries
{
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotStyle
{
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
};

PlotStyle transient_style();  //!< J(t) on a log time axis
PlotStyle field_style();      //!< |E(x)|
PlotStyle density_style();    //!< n(x) on a log density axis

/*!
 * Line plot as SVG text. Points that cannot be placed (non-finite, or
 * non-positive on a log axis) are skipped. Output depends only on the input.
 */
std::string render_svg(std::span<PlotSeries const> series, PlotStyle const& style);

}  // namespace oscsim
