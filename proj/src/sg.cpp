#include "oscsim/sg.hpp"

#include <cmath>
#include <stdexcept>

namespace oscsim
{
double bernoulli(double x)
{
    double const ax = std::abs(x);
    if (ax < 1e-4)
    {
        return 1.0 - 0.5 * x + x * x / 12.0;
    }
    if (x > 0.0)
    {
        // x e^{-x} / (1 - e^{-x}) stays finite for large x
        double const e = std::exp(-x);
        return x * e / (-std::expm1(-x));
    }
    return x / std::expm1(x);
}

double bernoulli_derivative(double x)
{
    if (std::abs(x) < 1e-2)
    {
        double const x2 = x * x;
        return -0.5 + x / 6.0 - x * x2 / 180.0 + x * x2 * x2 / 5040.0;
    }
    double const b = bernoulli(x);
    return b * (1.0 - b) / x - b;
}

EdgeFlux sg_edge_flux(double eta_i,
                      double eta_j,
                      double phi_i,
                      double phi_j,
                      double mu,
                      double vth,
                      double h,
                      Carrier carrier,
                      std::optional<double> v_max)
{
    if (!(h > 0.0))
        throw std::invalid_argument("edge length must be positive");

    double delta = (phi_j - phi_i) / vth;
    double slope = 1.0 / vth;
    if (v_max)
    {
        double const limit = *v_max * h / (mu * vth);
        if (std::abs(delta) > limit)
        {
            delta = std::copysign(limit, delta);
            slope = 0.0;
        }
    }
    double const d_over_h = mu * vth / h;
    double const bp = bernoulli(delta);
    double const bm = bernoulli(-delta);
    double const dbp = bernoulli_derivative(delta);
    double const dbm = bernoulli_derivative(-delta);

    EdgeFlux flux;
    flux.delta_slope = slope;
    if (carrier == Carrier::electron)
    {
        flux.coeff_j = d_over_h * bp;
        flux.coeff_i = -d_over_h * bm;
        flux.d_delta = d_over_h * (dbp * eta_j + dbm * eta_i);
    }
    else
    {
        flux.coeff_j = d_over_h * bm;
        flux.coeff_i = -d_over_h * bp;
        flux.d_delta = d_over_h * (-dbm * eta_j - dbp * eta_i);
    }
    flux.value = flux.coeff_i * eta_i + flux.coeff_j * eta_j;
    return flux;
}

}  // namespace oscsim
