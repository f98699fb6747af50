#pragma once

#include <cmath>
#include <vector>

#include "oscsim/assembly.hpp"
#include "oscsim/config.hpp"
#include "oscsim/mesh.hpp"

namespace oscsim::test_support
{
/*!
 * Manufactured steady electron continuity problem on [0, L]:
 * phi = 0.5 (1 - x/L) + 0.1 sin(pi x / L),
 * n = n0 (1 + x/L + 0.5 sin(pi x / L)), reaction R = 1e6 1/s, and the
 * source chosen so that -d/dx (D n' - mu n phi') + R n = S exactly.
 * Returns the max relative nodal error of the discrete solution.
 */
inline double mms_continuity_error(std::size_t nodes)
{
    double const L = 70e-9;
    double const mu = 2e-8;
    double const vth = 0.025852;
    double const D = mu * vth;
    double const n0 = 1e20;
    double const R = 1e6;
    double const k = pi / L;

    auto phi = [&](double x) { return 0.5 * (1 - x / L) + 0.1 * std::sin(k * x); };
    auto dphi = [&](double x) { return -0.5 / L + 0.1 * k * std::cos(k * x); };
    auto d2phi = [&](double x) { return -0.1 * k * k * std::sin(k * x); };
    auto n = [&](double x) { return n0 * (1 + x / L + 0.5 * std::sin(k * x)); };
    auto dn = [&](double x) { return n0 * (1 / L + 0.5 * k * std::cos(k * x)); };
    auto d2n = [&](double x) { return -n0 * 0.5 * k * k * std::sin(k * x); };

    auto const mesh = Mesh1D::uniform(L, nodes);
    std::vector<double> p(nodes), reaction(nodes, R), source(nodes);
    for (std::size_t i = 0; i < nodes; ++i)
    {
        double const x = mesh.x(i);
        p[i] = phi(x);
        double const dj = D * d2n(x) - mu * (dn(x) * dphi(x) + n(x) * d2phi(x));
        source[i] = -dj + R * n(x);
    }
    ContactParams c;
    c.cathode = Contact::with_densities(p.front(), n(0.0), 1.0);
    c.anode = Contact::with_densities(p.back(), n(L), 1.0);
    CarrierTransport tr{Carrier::electron, mu, vth, std::nullopt};
    auto const sol = assemble_continuity(mesh, p, tr, reaction, source, 0.0, {}, c).solve();
    double err = 0.0;
    for (std::size_t i = 0; i < nodes; ++i)
        err = std::max(err, std::abs(sol[i] - n(mesh.x(i))) / n(mesh.x(i)));
    return err;
}

//! Constant-coefficient Dirichlet scenario on a coarse mesh.
inline ScenarioConfig small_config(double generation = generation_low, std::size_t nodes = 81)
{
    ScenarioConfig cfg = ScenarioConfig::defaults();
    cfg.geometry.node_count = nodes;
    cfg.material.generation = generation;
    cfg.material.kdiss_override = 4.4e5;
    cfg.material.k_rec = 1e7;
    cfg.coefficients = CoefficientMode::mean_field;
    cfg.output.t_end = 1e-3;
    cfg.output.per_decade = 8;
    return cfg;
}
}  // namespace oscsim::test_support
