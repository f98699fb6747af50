#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oscsim/model.hpp"
#include "oscsim/reduced_transient.hpp"
#include "oscsim/stationary.hpp"

using namespace oscsim;

namespace
{
ReducedKinetics kinetics()
{
    return ReducedKinetics{4.3e28, 1e-17, 4.4e5, 1e7};
}
}  // namespace

TEST(Stationary, PairDensityAndRates)
{
    std::vector<double> n{1e20, 2e21}, p{3e20, 5e19}, tau{1e-7, 2e-7}, kd{4e5, 8e6};
    auto const x = stationary_x(n, p, 4.3e28, 1e-17, tau);
    EXPECT_DOUBLE_EQ(x[0], 1e-7 * 4.3e28 + 1e-17 * 1e-7 * 3e40);
    EXPECT_DOUBLE_EQ(x[1], 2e-7 * 4.3e28 + 1e-17 * 2e-7 * 1e41);
    double const t0 = exciton_tau(4e5, 1e7);
    auto const u = stationary_rates(n, p, 4.3e28, kd, 1e-17, 1e7);
    EXPECT_NEAR(u[0], t0 * (4e5 * 4.3e28 - 1e-17 * 1e7 * 3e40), 1e-12 * std::abs(u[0]));
}

TEST(ModifiedRates, LimitsInTime)
{
    auto const k = kinetics();
    double const tau = k.tau();
    double const x0 = 2e18, pn0 = 1e33;
    EXPECT_DOUBLE_EQ(modified_generation(0.0, x0, pn0, k), k.kdiss * x0);
    EXPECT_DOUBLE_EQ(modified_recombination(0.0, k), k.gamma * tau * (k.krec + k.kdiss));
    double const e = std::exp(-1.0);
    EXPECT_NEAR(modified_generation(tau, x0, pn0, k),
                k.kdiss * (x0 * e + tau * k.generation * (1 - e)) + k.gamma * k.kdiss * 0.5 * tau * e * pn0,
                1e-12 * modified_generation(tau, x0, pn0, k));
    EXPECT_NEAR(modified_recombination(tau, k),
                k.gamma * (tau * (k.krec + k.kdiss * e) + k.kdiss * 0.5 * tau * e),
                1e-14 * modified_recombination(tau, k));
    double const late = 1e3 * tau;
    EXPECT_NEAR(modified_generation(late, x0, pn0, k), k.kdiss * tau * k.generation,
                1e-12 * k.kdiss * tau * k.generation);
    EXPECT_NEAR(modified_recombination(late, k), k.gamma * tau * k.krec, 1e-14 * k.gamma * tau * k.krec);

    auto const r = modified_rates(tau, std::vector<double>{x0, 0.0}, std::vector<double>{pn0, 0.0}, k);
    EXPECT_EQ(r.generation[0], modified_generation(tau, x0, pn0, k));
    EXPECT_EQ(r.recombination, modified_recombination(tau, k));
    EXPECT_THROW(modified_rates(tau, std::vector<double>{1.0}, std::vector<double>{}, k), std::invalid_argument);
}

TEST(ModifiedRates, AgreeWithReconstructedPairDensity)
{
    // k_diss X - gamma p n with X rebuilt from the lumped memory term equals
    // G~ - R~ p n for any sample.
    auto const k = kinetics();
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> lg(28.0, 36.0), lt(-10.0, -4.0);
    for (int trial = 0; trial < 50; ++trial)
    {
        double const t = std::pow(10.0, lt(rng));
        double const pn0 = std::pow(10.0, lg(rng));
        double const pn = std::pow(10.0, lg(rng));
        double const x0 = 1e18;
        double const full = k.kdiss * reconstruct_x(t, x0, pn0, pn, k) - k.gamma * pn;
        double const reduced = modified_generation(t, x0, pn0, k) - modified_recombination(t, k) * pn;
        double const scale = k.kdiss * reconstruct_x(t, x0, pn0, pn, k) + k.gamma * pn;
        EXPECT_NEAR(full, reduced, 1e-12 * scale);
    }
}

TEST(ReconstructX, EndpointsAndConstantHistory)
{
    auto const k = kinetics();
    double const tau = k.tau();
    EXPECT_DOUBLE_EQ(reconstruct_x(0.0, 3e18, 1e33, 5e34, k), 3e18);
    double const pn = 7e33;
    // Constant p n makes the lumped memory exact.
    double const t = 2.5 * tau;
    double const decay = std::exp(-t / tau);
    double const exact = 3e18 * decay + tau * k.generation * (1 - decay) + k.gamma * tau * (1 - decay) * pn;
    EXPECT_NEAR(reconstruct_x(t, 3e18, pn, pn, k), exact, 1e-12 * exact);
    auto const x = stationary_x(std::vector<double>{pn}, std::vector<double>{1.0}, k.generation, k.gamma,
                                std::vector<double>{tau});
    EXPECT_NEAR(reconstruct_x(1e4 * tau, 3e18, 1e30, pn, k), x[0], 1e-12 * x[0]);
}

TEST(TrapezoidWeights, ExactForLinearIntegrands)
{
    for (double r : {1e-6, 1e-4, 2e-3, 0.3, 1.0, 7.0, 60.0})
    {
        double const tau = 2e-7;
        double const dt = r * tau;
        auto const [w0, w1] = exponential_trapezoid_weights(dt, tau);
        double const a = 1.7, b = -0.6;  // lambda(0) = a, lambda(dt) = b
        // Composite Simpson on a fine grid as the reference.
        int const m = 20000;
        double s = 0.0;
        for (int i = 0; i <= m; ++i)
        {
            double const u = dt * i / m;
            double const f = (a + (b - a) * u / dt) * std::exp(-(dt - u) / tau);
            double const w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            s += w * f;
        }
        s *= dt / (3.0 * m);
        EXPECT_NEAR(w0 * a + w1 * b, s, 1e-10 * std::abs(s) + 1e-300) << r;
    }
}

TEST(Memory, VanishesAtStartAndForStationaryHistory)
{
    auto const k = kinetics();
    std::vector<double> vol{0.5, 1.0, 0.5};
    std::vector<double> t{0.0, 1e-8, 5e-8, 2e-7};
    std::vector<std::vector<double>> flat(4, {1e33, 2e33, 3e33});
    auto const d = memory_diagnostics(t, flat, vol, k.gamma, k.kdiss, k.tau());
    EXPECT_EQ(d.exact[0], 0.0);
    EXPECT_EQ(d.lumped[0], 0.0);
    for (std::size_t i = 0; i < t.size(); ++i)
    {
        EXPECT_NEAR(d.exact[i], 0.0, 1e-12 * k.gamma * k.kdiss * 3e33 * k.tau());
        EXPECT_EQ(d.lumped[i], 0.0);
    }
}

TEST(Memory, LinearHistoryMatchesClosedForm)
{
    auto const k = kinetics();
    double const tau = k.tau();
    double const a = 1e33, b = 4e39;
    std::vector<double> t, vol{1.0};
    std::vector<std::vector<double>> pn;
    for (int i = 0; i <= 40; ++i)
    {
        double const s = 5 * tau * i / 40.0;
        t.push_back(s);
        pn.push_back({a + b * s});
    }
    auto const d = memory_diagnostics(t, pn, vol, k.gamma, k.kdiss, tau);
    for (std::size_t i = 0; i < t.size(); ++i)
    {
        double const s = t[i];
        double const exact = -k.gamma * k.kdiss * b * tau * tau * (1 - std::exp(-s / tau) * (1 + s / tau));
        double const lumped = -k.gamma * k.kdiss * 0.5 * s * std::exp(-s / tau) * b * s;
        EXPECT_NEAR(d.exact[i], exact, 1e-9 * std::abs(exact) + 1e-6);
        EXPECT_NEAR(d.lumped[i], lumped, 1e-12 * std::abs(lumped) + 1e-6);
        EXPECT_NEAR(d.difference[i], std::abs(exact - lumped), 1e-9 * std::abs(exact) + 1e-6);
    }
}

TEST(Memory, InputChecks)
{
    auto const k = kinetics();
    std::vector<double> vol{1.0};
    std::vector<double> two{0.0, 1e-8};
    std::vector<std::vector<double>> pn{{1.0}, {2.0}};
    EXPECT_THROW(memory_diagnostics(two, pn, vol, k.gamma, k.kdiss, k.tau()), std::invalid_argument);
    MemoryAccumulator acc(vol, k.gamma, k.kdiss, k.tau());
    EXPECT_THROW(acc.add(1e-9, std::vector<double>{1.0}), std::invalid_argument);
    acc.add(0.0, std::vector<double>{1.0});
    EXPECT_THROW(acc.add(0.0, std::vector<double>{1.0}), std::invalid_argument);
}
