#include "oscsim/rise_time.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace oscsim
{
double crossing_time(std::span<double const> t, std::span<double const> j, double j_inf, double fraction)
{
    double const level = fraction * j_inf;
    double const s = j_inf > 0.0 ? 1.0 : -1.0;
    for (std::size_t k = 0; k < t.size(); ++k)
    {
        if (s * j[k] < s * level)
            continue;
        if (k == 0)
            return t[0];
        double const w = (level - j[k - 1]) / (j[k] - j[k - 1]);
        if (t[k - 1] <= 0.0)
            return t[k - 1] + w * (t[k] - t[k - 1]);
        double const a = std::log(t[k - 1]);
        double const b = std::log(t[k]);
        return std::exp(a + w * (b - a));
    }
    throw NotSteadyError("current never reaches " + std::to_string(fraction) + " of its final value");
}

RiseTimeReport extract_rise_time(std::span<double const> t, std::span<double const> j, double flatness)
{
    if (t.size() != j.size() || t.size() < 3)
        throw std::invalid_argument("rise time needs at least 3 matching samples");
    std::size_t const tail = std::max<std::size_t>(1, t.size() / 20);
    double sum = 0.0;
    for (std::size_t k = t.size() - tail; k < t.size(); ++k)
        sum += j[k];
    RiseTimeReport r;
    r.j_inf = sum / static_cast<double>(tail);
    if (r.j_inf == 0.0 || !std::isfinite(r.j_inf))
        throw NotSteadyError("final current is zero; thresholds are undefined");
    for (std::size_t k = t.size() - tail; k < t.size(); ++k)
        if (std::abs(j[k] - r.j_inf) > flatness * std::abs(r.j_inf))
            throw NotSteadyError("not converged to steady state: tail varies beyond tolerance");
    r.t10 = crossing_time(t, j, r.j_inf, 0.1);
    r.t50 = crossing_time(t, j, r.j_inf, 0.5);
    r.t90 = crossing_time(t, j, r.j_inf, 0.9);
    return r;
}

}  // namespace oscsim
