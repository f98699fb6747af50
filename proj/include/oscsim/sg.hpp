#pragma once

#include <optional>

namespace oscsim
{
//! B(x) = x / (e^x - 1), the Scharfetter-Gummel kernel.
double bernoulli(double x);
//! dB/dx.
double bernoulli_derivative(double x);

enum class Carrier
{
    electron,
    hole
};

/*!
 * Numerical flux on one edge, oriented from node i to node j.
 *
 * The flux is linear in the nodal densities:
 * value = coeff_i * eta_i + coeff_j * eta_j. `d_delta` is dJ/d(delta) at the
 * evaluated densities, and `delta_slope` is d(delta)/d(phi_j - phi_i), which
 * drops to zero when the drift-velocity clamp is active.
 */
struct EdgeFlux
{
    double value = 0.0;
    double coeff_i = 0.0;
    double coeff_j = 0.0;
    double d_delta = 0.0;
    double delta_slope = 0.0;
};

/*!
 * Exponentially fitted flux of J_n = D n' - mu n phi' (electrons) or
 * J_p = D p' + mu p phi' (holes) between two nodes a distance h apart.
 *
 * With v_max set, the potential drop entering the exponential is limited so
 * that mu |phi_j - phi_i| / h never exceeds v_max.
 */
EdgeFlux sg_edge_flux(double eta_i,
                      double eta_j,
                      double phi_i,
                      double phi_j,
                      double mu,
                      double vth,
                      double h,
                      Carrier carrier,
                      std::optional<double> v_max = std::nullopt);

}  // namespace oscsim
