#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oscsim/bdf.hpp"

using namespace oscsim;

namespace
{
// y' = -y.
class Decay final : public DaeProblem
{
  public:
    std::size_t size() const override { return 1; }
    std::size_t block_size() const override { return 1; }
    std::size_t bandwidth() const override { return 0; }
    bool is_differential(std::size_t) const override { return true; }
    bool is_positive(std::size_t) const override { return false; }
    void residual(double, std::span<double const> y, std::span<double const> yd, std::span<double> f,
                  std::span<double> mag) const override
    {
        f[0] = yd[0] + y[0];
        if (!mag.empty())
            mag[0] = std::abs(yd[0]) + std::abs(y[0]);
    }
    void jacobian(double, std::span<double const>, double cj, BandedMatrix& jac) const override
    {
        jac = BandedMatrix(1, 0, 0);
        jac.set(0, 0, cj + 1.0);
    }
};

// u' = -u + w, 0 = w - cos t. Exact: u = (cos t + sin t) / 2, w = cos t.
class IndexOne final : public DaeProblem
{
  public:
    std::size_t size() const override { return 2; }
    std::size_t block_size() const override { return 2; }
    std::size_t bandwidth() const override { return 1; }
    bool is_differential(std::size_t k) const override { return k == 0; }
    bool is_positive(std::size_t) const override { return false; }
    void residual(double t, std::span<double const> y, std::span<double const> yd, std::span<double> f,
                  std::span<double> mag) const override
    {
        f[0] = yd[0] + y[0] - y[1];
        f[1] = y[1] - std::cos(t);
        if (!mag.empty())
        {
            mag[0] = std::abs(yd[0]) + std::abs(y[0]) + std::abs(y[1]);
            mag[1] = std::abs(y[1]) + 1.0;
        }
    }
    void jacobian(double, std::span<double const>, double cj, BandedMatrix& jac) const override
    {
        jac = BandedMatrix(2, 1, 1);
        jac.set(0, 0, cj + 1.0);
        jac.set(0, 1, -1.0);
        jac.set(1, 1, 1.0);
    }
};

double fixed_step_error(int order, double dt)
{
    Decay problem;
    IntegratorOptions opt;
    opt.scaling = ScalingSet::unit(1);
    opt.fixed_dt = dt;
    opt.fixed_order = order;
    opt.newton.atol = 1e-14;
    opt.newton.rtol = 1e-12;
    opt.newton.ftol = 1e-12;
    BdfIntegrator bdf(problem, opt);
    bdf.initialize(0.0, {1.0});
    std::vector<HistoryEntry> seed;
    for (int k = 0; k < order; ++k)
        seed.push_back({-k * dt, {std::exp(k * dt)}});
    bdf.seed_history(seed, order);
    double last = 0.0;
    bdf.integrate(1.0, {}, [&](double, std::span<double const> y, auto, bool, auto const&) { last = y[0]; });
    return std::abs(last - std::exp(-1.0));
}
}  // namespace

TEST(BdfCoefficients, UniformSecondOrder)
{
    double const dt = 0.1;
    std::vector<double> times{2 * dt, dt, 0.0};
    auto const c = bdf_coefficients(times);
    ASSERT_EQ(c.size(), 3u);
    EXPECT_NEAR(c[0], 1.5 / dt, 1e-12);
    EXPECT_NEAR(c[1], -2.0 / dt, 1e-12);
    EXPECT_NEAR(c[2], 0.5 / dt, 1e-12);
    auto const e = bdf_coefficients(std::vector<double>{dt, 0.0});
    EXPECT_NEAR(e[0], 1 / dt, 1e-12);
    EXPECT_NEAR(e[1], -1 / dt, 1e-12);
}

TEST(BdfCoefficients, MatchLagrangeDerivativeOnVariableSteps)
{
    std::vector<double> times{1.0, 0.7, 0.55, 0.2, 0.1};
    auto const c = bdf_coefficients(times);
    std::size_t const m = times.size();
    // l_j'(t_0) for the Lagrange basis on `times`.
    for (std::size_t j = 0; j < m; ++j)
    {
        double expected;
        if (j == 0)
        {
            expected = 0.0;
            for (std::size_t k = 1; k < m; ++k)
                expected += 1.0 / (times[0] - times[k]);
        }
        else
        {
            double num = 1.0, den = 1.0;
            for (std::size_t k = 0; k < m; ++k)
            {
                if (k != j)
                    den *= times[j] - times[k];
                if (k != j && k != 0)
                    num *= times[0] - times[k];
            }
            expected = num / den;
        }
        EXPECT_NEAR(c[j], expected, 1e-10 * std::max(1.0, std::abs(expected))) << j;
    }
    // Exact for polynomials of degree m - 1.
    double d = 0.0;
    for (std::size_t j = 0; j < m; ++j)
        d += c[j] * std::pow(times[j], 4);
    EXPECT_NEAR(d, 4.0, 1e-9);
}

TEST(BdfCoefficients, SumToZeroOnRandomSteps)
{
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> h(0.1, 3.0);
    for (int order = 1; order <= 5; ++order)
    {
        std::vector<double> times{0.0};
        for (int k = 0; k < order; ++k)
            times.push_back(times.back() - h(rng));
        auto const theta = bdf_coefficients(times);
        double const scale = std::abs(theta[0]);
        EXPECT_NEAR(std::accumulate(theta.begin(), theta.end(), 0.0), 0.0, 1e-12 * scale) << order;
    }
}

TEST(BdfCoefficients, RejectsRepeatedTimes)
{
    EXPECT_ANY_THROW(bdf_coefficients(std::vector<double>{1.0, 1.0}));
}

TEST(Extrapolate, ReproducesQuadratics)
{
    std::vector<double> times{0.3, 0.1, -0.2};
    std::vector<std::vector<double>> vals;
    for (double t : times)
        vals.push_back({1 + 2 * t - 3 * t * t, t * t});
    std::vector<std::vector<double> const*> ptr{&vals[0], &vals[1], &vals[2]};
    auto const y = extrapolate(times, ptr, 0.9);
    EXPECT_NEAR(y[0], 1 + 1.8 - 3 * 0.81, 1e-12);
    EXPECT_NEAR(y[1], 0.81, 1e-12);
}

TEST(ErrorEstimate, WeightedRmsOverMaskedEntries)
{
    std::vector<double> corr{1.0, 2.0, 5.0}, pred{1.1, 2.0, 0.0}, atol{0.1, 0.1, 0.1};
    std::vector<bool> mask{true, true, false};
    double const e = error_estimate(corr, pred, 0.5, atol, 0.0, mask);
    EXPECT_NEAR(e, 0.5 * std::sqrt((1.0 + 0.0) / 2.0), 1e-12);
}

TEST(BdfIntegrator, FixedStepOrdersOfAccuracy)
{
    for (int order = 1; order <= 5; ++order)
    {
        double const coarse = fixed_step_error(order, 0.02);
        double const fine = fixed_step_error(order, 0.01);
        double const observed = std::log2(coarse / fine);
        EXPECT_NEAR(observed, order, 0.25) << "order " << order;
    }
}

TEST(BdfIntegrator, AdaptiveIndexOneDaeHitsOutputsExactly)
{
    IndexOne problem;
    for (int cap = 1; cap <= 5; ++cap)
    {
        IntegratorOptions opt;
        opt.scaling = ScalingSet::unit(2);
        opt.order_cap = cap;
        opt.rtol = 1e-7;
        opt.atol = {1e-9, 1e-9};
        opt.dt_init = 1e-4;
        BdfIntegrator bdf(problem, opt);
        bdf.initialize(0.0, {0.5, 0.3});  // w is inconsistent on purpose
        std::vector<double> outputs{0.5, 1.0, 2.0, 3.3};
        std::vector<double> hit;
        double worst = 0.0;
        int max_order = 0;
        bdf.integrate(5.0, outputs, [&](double t, std::span<double const> y, auto, bool out, StepStats const& s) {
            max_order = std::max(max_order, s.order);
            worst = std::max(worst, std::abs(y[0] - 0.5 * (std::cos(t) + std::sin(t))));
            worst = std::max(worst, std::abs(y[1] - std::cos(t)));
            if (out)
                hit.push_back(t);
        });
        EXPECT_EQ(hit, (std::vector<double>{0.0, 0.5, 1.0, 2.0, 3.3, 5.0})) << cap;
        // BDF1 accumulates its local errors over many more steps.
        EXPECT_LT(worst, cap == 1 ? 5e-4 : 2e-5) << cap;
        EXPECT_LE(max_order, cap);
        if (cap >= 3)
            EXPECT_GE(max_order, 3);
    }
}

TEST(BdfIntegrator, OptionsAreValidated)
{
    IntegratorOptions opt;
    opt.scaling = ScalingSet::unit(1);
    opt.order_cap = 6;
    EXPECT_ANY_THROW(opt.validate(1));
    opt.order_cap = 2;
    EXPECT_NO_THROW(opt.validate(1));
    Decay problem;
    BdfIntegrator bdf(problem, opt);
    EXPECT_THROW(bdf.step(0.1), IntegrationError);
}

TEST(BdfIntegrator, ZeroLengthIntervalReturnsInitialRecord)
{
    Decay problem;
    IntegratorOptions opt;
    opt.scaling = ScalingSet::unit(1);
    BdfIntegrator bdf(problem, opt);
    bdf.initialize(0.0, {1.0});
    int calls = 0;
    bdf.integrate(0.0, {}, [&](double t, std::span<double const> y, auto, bool out, auto const&) {
        ++calls;
        EXPECT_EQ(t, 0.0);
        EXPECT_EQ(y[0], 1.0);
        EXPECT_TRUE(out);
    });
    EXPECT_EQ(calls, 1);
}

TEST(BdfIntegrator, ErrorEstimateTracksTrueLocalError)
{
    Decay problem;
    for (int order = 1; order <= 4; ++order)
    {
        IntegratorOptions opt;
        opt.scaling = ScalingSet::unit(1);
        opt.order_cap = order;
        opt.rtol = 1e-6;
        opt.atol = {1e-6};
        opt.newton.atol = 1e-14;
        opt.newton.rtol = 1e-12;
        opt.newton.ftol = 1e-13;
        double const dt = 0.05;
        BdfIntegrator bdf(problem, opt);
        bdf.initialize(0.0, {1.0});
        std::vector<HistoryEntry> seed;
        for (int k = 0; k <= order; ++k)
            seed.push_back({-k * dt, {std::exp(k * dt)}});
        bdf.seed_history(seed, order);
        auto const r = bdf.step(dt);
        double const y = std::exp(-dt);
        double const truth = std::abs(r.y[0] - y) / (1e-6 + 1e-6 * std::abs(y));
        EXPECT_GT(r.error, truth / 5.0) << order;
        EXPECT_LT(r.error, truth * 5.0) << order;
    }
}

TEST(BdfIntegrator, AcceptedStepsPassTheErrorTest)
{
    IndexOne problem;
    IntegratorOptions opt;
    opt.scaling = ScalingSet::unit(2);
    opt.order_cap = 5;
    opt.rtol = 1e-6;
    opt.atol = {1e-6, 1e-6};
    BdfIntegrator bdf(problem, opt);
    bdf.initialize(0.0, {0.5, 1.0});
    double worst = 0.0;
    bdf.integrate(10.0, {}, [&](double, auto, auto, bool, StepStats const& s) { worst = std::max(worst, s.error); });
    EXPECT_LE(worst, 1.0);
    EXPECT_GT(bdf.state().steps, 10);
}
