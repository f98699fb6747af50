#pragma once

#include <span>
#include <stdexcept>

namespace oscsim
{
class NotSteadyError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct RiseTimeReport
{
    double j_inf = 0.0;
    double t10 = 0.0;
    double t50 = 0.0;
    double t90 = 0.0;

    double rise_time() const { return t90 - t10; }
};

/*!
 * First time J(t) reaches `fraction` of `j_inf`, by linear interpolation in
 * log t between samples (linear in t when the earlier sample is t = 0).
 */
double crossing_time(std::span<double const> t, std::span<double const> j, double j_inf, double fraction);

/*!
 * J_inf is the mean of the final 5% of samples. The tail must be flat: every
 * tail sample within `flatness` of J_inf (relative), otherwise NotSteadyError.
 */
RiseTimeReport extract_rise_time(std::span<double const> t,
                                 std::span<double const> j,
                                 double flatness = 1e-3);

}  // namespace oscsim
