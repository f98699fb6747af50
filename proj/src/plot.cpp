#include "oscsim/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace oscsim
{
namespace
{
constexpr double width = 640.0;
constexpr double height = 420.0;
constexpr double left = 80.0;
constexpr double right = 20.0;
constexpr double top = 40.0;
constexpr double bottom = 50.0;

char const* const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
char const* const dashes[] = {"", "6,3", "2,2", "8,3,2,3"};

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape(std::string const& s)
{
    std::string out;
    for (char c : s)
    {
        switch (c)
        {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Axis
{
    bool log = false;
    double lo = 0.0;
    double hi = 1.0;

    bool accepts(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
    double coord(double v) const { return log ? std::log10(v) : v; }
    double frac(double v) const { return (coord(v) - lo) / (hi - lo); }

    void fit(double min, double max)
    {
        lo = coord(min);
        hi = coord(max);
        if (log)
        {
            lo = std::floor(lo);
            hi = std::ceil(hi);
        }
        if (hi <= lo)
        {
            double const pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.05;
            lo -= pad;
            hi += pad;
        }
        else if (!log)
        {
            double const pad = 0.05 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
    }

    std::vector<double> ticks() const
    {
        std::vector<double> out;
        if (log)
        {
            int const step = std::max(1, static_cast<int>(std::ceil((hi - lo) / 8.0)));
            for (double e = lo; e <= hi + 1e-9; e += step)
                out.push_back(std::pow(10.0, e));
            return out;
        }
        double const raw = (hi - lo) / 6.0;
        double const mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0})
            if (m * mag >= raw)
            {
                step = m * mag;
                break;
            }
        for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step)
            out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
        return out;
    }
};
}  // namespace

PlotStyle transient_style()
{
    return {"Photocurrent transient", "t [s]", "J [A/m^2]", true, false};
}

PlotStyle field_style()
{
    return {"Electric field magnitude", "x [m]", "|E| [V/m]", false, false};
}

PlotStyle density_style()
{
    return {"Electron density", "x [m]", "n [1/m^3]", false, true};
}

std::string render_svg(std::span<PlotSeries const> series, PlotStyle const& style)
{
    if (series.empty())
        throw std::invalid_argument("render_svg: no series to plot");
    Axis ax{style.log_x};
    Axis ay{style.log_y};
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    double ymin = xmin;
    double ymax = -xmin;
    for (auto const& s : series)
    {
        if (s.x.size() != s.y.size())
            throw std::invalid_argument("render_svg: series '" + s.label + "' has mismatched lengths");
        for (std::size_t k = 0; k < s.x.size(); ++k)
        {
            if (!ax.accepts(s.x[k]) || !ay.accepts(s.y[k]))
                continue;
            xmin = std::min(xmin, s.x[k]);
            xmax = std::max(xmax, s.x[k]);
            ymin = std::min(ymin, s.y[k]);
            ymax = std::max(ymax, s.y[k]);
        }
    }
    if (!std::isfinite(xmin))
        throw std::invalid_argument("render_svg: no plottable points");
    ax.fit(xmin, xmax);
    ay.fit(ymin, ymax);

    double const pw = width - left - right;
    double const ph = height - top - bottom;
    auto px = [&](double x) { return left + ax.frac(x) * pw; };
    auto py = [&](double y) { return top + (1.0 - ay.frac(y)) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << num(width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(style.title) << "</text>\n";
    o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\""
      << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (double v : ax.ticks())
    {
        double const x = px(v);
        o << "<line x1=\"" << num(x) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(x) << "\" y2=\""
          << num(top + ph + 5) << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << num(x) << "\" y=\"" << num(top + ph + 18) << "\" text-anchor=\"middle\">"
          << tick_label(v) << "</text>\n";
    }
    for (double v : ay.ticks())
    {
        double const y = py(v);
        o << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left) << "\" y2=\""
          << num(y) << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << num(left - 8) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
          << tick_label(v) << "</text>\n";
    }
    o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 10)
      << "\" text-anchor=\"middle\">" << escape(style.x_label) << "</text>\n";
    o << "<text x=\"16\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << num(top + ph / 2) << ")\">" << escape(style.y_label) << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s)
    {
        auto const& ser = series[s];
        o << "<polyline fill=\"none\" stroke=\"" << palette[s % 6] << "\" stroke-width=\"1.5\"";
        if (*dashes[s % 4])
            o << " stroke-dasharray=\"" << dashes[s % 4] << "\"";
        o << " points=\"";
        bool first = true;
        for (std::size_t k = 0; k < ser.x.size(); ++k)
        {
            if (!ax.accepts(ser.x[k]) || !ay.accepts(ser.y[k]))
                continue;
            o << (first ? "" : " ") << num(px(ser.x[k])) << ',' << num(py(ser.y[k]));
            first = false;
        }
        o << "\"/>\n";
    }

    if (series.size() > 1)
    {
        double y = top + 16;
        for (std::size_t s = 0; s < series.size(); ++s, y += 16)
        {
            double const x = left + 12;
            o << "<line x1=\"" << num(x) << "\" y1=\"" << num(y - 4) << "\" x2=\"" << num(x + 24) << "\" y2=\""
              << num(y - 4) << "\" stroke=\"" << palette[s % 6] << "\" stroke-width=\"1.5\"";
            if (*dashes[s % 4])
                o << " stroke-dasharray=\"" << dashes[s % 4] << "\"";
            o << "/>\n<text x=\"" << num(x + 30) << "\" y=\"" << num(y) << "\">" << escape(series[s].label)
              << "</text>\n";
        }
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace oscsim
