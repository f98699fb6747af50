#include <cmath>

#include <gtest/gtest.h>

#include "oscsim/assembly.hpp"
#include "oscsim/sg.hpp"
#include "support.hpp"

using namespace oscsim;

TEST(Bernoulli, Identities)
{
    EXPECT_DOUBLE_EQ(bernoulli(0.0), 1.0);
    for (double x : {1e-9, 1e-5, 1e-4, 3e-4, 0.1, 1.0, 5.0, 40.0, 700.0})
    {
        EXPECT_NEAR(bernoulli(-x) - bernoulli(x), x, 1e-12 * std::max(1.0, x)) << x;
        EXPECT_NEAR(bernoulli(-x), bernoulli(x) * std::exp(x), 1e-12 * bernoulli(-x)) << x;
    }
    EXPECT_TRUE(std::isfinite(bernoulli(-800.0)));
    EXPECT_NEAR(bernoulli(-800.0), 800.0, 1e-9);
    EXPECT_GE(bernoulli(800.0), 0.0);
}

TEST(Bernoulli, SeriesBranchIsContinuous)
{
    for (double x : {1e-4, -1e-4, 1e-2, -1e-2})
    {
        double const below = bernoulli(x * (1 - 1e-12));
        double const above = bernoulli(x * (1 + 1e-12));
        EXPECT_NEAR(below, above, 1e-13);
        double const h = 1e-6;
        double const fd = (bernoulli(x + h) - bernoulli(x - h)) / (2 * h);
        EXPECT_NEAR(bernoulli_derivative(x), fd, 1e-8);
    }
}

TEST(ScharfetterGummel, ReducesToCentralDiffusionWithoutField)
{
    auto const f = sg_edge_flux(2.0, 5.0, 0.3, 0.3, 2e-8, 0.025, 1e-9, Carrier::electron);
    double const d_over_h = 2e-8 * 0.025 / 1e-9;
    EXPECT_NEAR(f.value, d_over_h * 3.0, 1e-12 * d_over_h);
    auto const g = sg_edge_flux(2.0, 5.0, 0.3, 0.3, 2e-8, 0.025, 1e-9, Carrier::hole);
    EXPECT_NEAR(g.value, f.value, 1e-12 * d_over_h);
}

TEST(ScharfetterGummel, EquilibriumDensitiesCarryNoFlux)
{
    double const vth = 0.025;
    double const dphi = 0.2;
    // Boltzmann ratios: n_j / n_i = e^{dphi/V}, p_j / p_i = e^{-dphi/V}.
    auto const fn = sg_edge_flux(1.0, std::exp(dphi / vth), 0.0, dphi, 1e-8, vth, 1e-9, Carrier::electron);
    auto const fp = sg_edge_flux(1.0, std::exp(-dphi / vth), 0.0, dphi, 1e-8, vth, 1e-9, Carrier::hole);
    EXPECT_NEAR(fn.value, 0.0, 1e-10 * std::abs(fn.coeff_j));
    EXPECT_NEAR(fp.value, 0.0, 1e-10 * std::abs(fp.coeff_i));
}

TEST(ScharfetterGummel, StrongFieldGivesUpwindDrift)
{
    // Electron flux mu n phi' (negative sign) is upwinded from node j when phi rises.
    double const vth = 0.025;
    double const mu = 1e-8;
    double const h = 1e-9;
    double const dphi = 5.0;
    auto const f = sg_edge_flux(3.0, 7.0, 0.0, dphi, mu, vth, h, Carrier::electron);
    EXPECT_NEAR(f.value, -mu * dphi / h * 3.0, 1e-6 * mu * dphi / h * 3.0);
}

TEST(ScharfetterGummel, DerivativesMatchFiniteDifferences)
{
    double const vth = 0.025;
    for (auto carrier : {Carrier::electron, Carrier::hole})
    {
        double const ni = 2e21, nj = 7e20, pi_ = 0.1, pj = 0.16;
        auto const f = sg_edge_flux(ni, nj, pi_, pj, 2e-8, vth, 2e-9, carrier);
        double const h = 1e-7;
        auto const up = sg_edge_flux(ni, nj, pi_, pj + h, 2e-8, vth, 2e-9, carrier);
        auto const dn = sg_edge_flux(ni, nj, pi_, pj - h, 2e-8, vth, 2e-9, carrier);
        double const fd = (up.value - dn.value) / (2 * h);
        EXPECT_NEAR(f.d_delta * f.delta_slope, fd, 1e-6 * std::abs(fd));
    }
}

TEST(ScharfetterGummel, VelocityClampFreezesTheDrop)
{
    auto const f = sg_edge_flux(1.0, 1.0, 0.0, 1.0, 1e-8, 0.025, 1e-9, Carrier::electron, 1.0);
    EXPECT_EQ(f.delta_slope, 0.0);
    auto const g = sg_edge_flux(1.0, 1.0, 0.0, 2.0, 1e-8, 0.025, 1e-9, Carrier::electron, 1.0);
    EXPECT_DOUBLE_EQ(f.value, g.value);
}

TEST(Continuity, ManufacturedSolutionConvergesAtSecondOrder)
{
    double prev = test_support::mms_continuity_error(51);
    for (std::size_t nodes : {101, 201, 401, 801})
    {
        double const err = test_support::mms_continuity_error(nodes);
        double const order = std::log2(prev / err);
        EXPECT_GE(order, 1.9) << nodes << " nodes";
        prev = err;
    }
}

TEST(Continuity, NegativeReactionIsRejected)
{
    auto const mesh = Mesh1D::uniform(1.0, 5);
    std::vector<double> phi(5, 0.0), r(5, 0.0), s(5, 0.0);
    r[2] = -1.0;
    auto const c = default_contacts(0.0, 0.025);
    CarrierTransport tr{Carrier::electron, 1.0, 0.025, std::nullopt};
    EXPECT_THROW(assemble_continuity(mesh, phi, tr, r, s, 0.0, {}, c), std::invalid_argument);
}

TEST(Continuity, RobinContactBalancesSurfaceRecombination)
{
    // Pure diffusion with no volume source: the Robin flux law fixes the
    // linear profile n(x) = A + B x with D B = alpha n(0) - beta at x = 0.
    auto const mesh = Mesh1D::uniform(1.0, 41);
    std::vector<double> phi(41, 0.0), r(41, 0.0), s(41, 0.0);
    ContactParams c;
    c.mode = BoundaryMode::robin;
    c.cathode = Contact::with_densities(0.0, 3.0, 1.0, 2.0);
    c.cathode.kappa_n = 1.0;
    c.anode = Contact::with_densities(0.0, 1.0, 1.0, 1.0);
    CarrierTransport tr{Carrier::electron, 1.0, 1.0, std::nullopt};
    auto const n = assemble_continuity(mesh, phi, tr, r, s, 0.0, {}, c).solve();
    // Outward normal at x = 0 is -1: kappa (-D n') = beta - alpha n(0).
    double const slope = (n[40] - n[0]);
    EXPECT_NEAR(-slope, 6.0 - 2.0 * n[0], 1e-12);
    EXPECT_NEAR(n[40], 1.0, 1e-14);
}

TEST(Poisson, ChargeFreeGivesLinearPotential)
{
    auto const mesh = Mesh1D::graded(70e-9, 31, 1.05);
    std::vector<double> n(31, 1e20), p(31, 1e20);
    auto const c = default_contacts(0.5, 0.025);
    auto const phi = assemble_poisson(mesh, n, p, c, 4 * PhysicalConstants::eps0).solve();
    for (std::size_t i = 0; i < 31; ++i)
        EXPECT_NEAR(phi[i], 0.5 * (1 - mesh.x(i) / 70e-9), 1e-12);
}

TEST(Current, EquilibriumCarriesNoCurrentAndUniformFlowIsConstant)
{
    MaterialParams m;
    double const vth = m.thermal_voltage();
    auto const mesh = Mesh1D::uniform(70e-9, 21);
    StateVector s(21);
    for (std::size_t i = 0; i < 21; ++i)
    {
        s.phi[i] = 0.5 * (1 - mesh.x(i) / 70e-9);
        s.n[i] = 1e18 * std::exp(s.phi[i] / vth);
        s.p[i] = 1e18 * std::exp(-s.phi[i] / vth);
        s.X[i] = 1.0;
    }
    auto const j = compute_current(mesh, s, m);
    // Each carrier flux is ~1e7 A/m^2 here; the cancellation leaves roundoff only.
    for (double v : j.conduction)
        EXPECT_NEAR(v, 0.0, 1e-6);
    EXPECT_EQ(j.photocurrent(), -j.contact);

    std::vector<double> rate(21);
    for (std::size_t i = 0; i < 21; ++i)
        rate[i] = 1e14 * mesh.x(i);
    auto const jd = compute_current(mesh, s, m, rate);
    double const displacement = -m.permittivity() * (-1e14);
    for (double v : jd.total)
        EXPECT_NEAR(v, displacement, 1e-10 * displacement);
}
