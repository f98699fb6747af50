#include <cmath>

#include <gtest/gtest.h>

#include "oscsim/newton.hpp"

using namespace oscsim;

namespace
{
// Two unknowns per block, one block: root at (1, 2).
class TwoByTwo final : public NonlinearSystem
{
  public:
    explicit TwoByTwo(double shift = 0.0, bool positive = false) : shift_(shift), positive_(positive) {}
    std::size_t size() const override { return 2; }
    std::size_t block_size() const override { return 2; }
    std::size_t bandwidth() const override { return 1; }
    bool is_positive(std::size_t) const override { return positive_; }
    void evaluate(std::span<double const> y, std::span<double> f, std::span<double> mag) const override
    {
        f[0] = y[0] * y[0] - 1.0 + (y[1] - 2.0) + shift_;
        f[1] = std::exp(y[0] - 1.0) - 1.0 + std::pow(y[1] - 2.0, 3) + 2.0 * (y[1] - 2.0);
        if (!mag.empty())
        {
            mag[0] = y[0] * y[0] + 1.0 + std::abs(y[1]) + 2.0 + std::abs(shift_);
            mag[1] = std::exp(y[0] - 1.0) + 1.0 + std::abs(std::pow(y[1] - 2.0, 3)) + std::abs(y[1]) + 2.0;
        }
    }
    void jacobian(std::span<double const> y, BandedMatrix& jac) const override
    {
        jac = BandedMatrix(2, 1, 1);
        jac.set(0, 0, 2 * y[0]);
        jac.set(0, 1, 1.0);
        jac.set(1, 0, std::exp(y[0] - 1.0));
        jac.set(1, 1, 3 * std::pow(y[1] - 2.0, 2) + 2.0);
    }

  private:
    double shift_;
    bool positive_;
};

// atan(y) = 0: undamped Newton diverges from |y| > 1.39.
class Atan final : public NonlinearSystem
{
  public:
    std::size_t size() const override { return 1; }
    std::size_t block_size() const override { return 1; }
    std::size_t bandwidth() const override { return 0; }
    bool is_positive(std::size_t) const override { return false; }
    void evaluate(std::span<double const> y, std::span<double> f, std::span<double> mag) const override
    {
        f[0] = std::atan(y[0]);
        if (!mag.empty())
            mag[0] = 1.0;
    }
    void jacobian(std::span<double const> y, BandedMatrix& jac) const override
    {
        jac = BandedMatrix(1, 0, 0);
        jac.set(0, 0, 1.0 / (1.0 + y[0] * y[0]));
    }
};

// Scalar y' = -k y on a single differential row.
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
        f[0] = yd[0] + 3.0 * y[0];
        if (!mag.empty())
            mag[0] = std::abs(yd[0]) + 3.0 * std::abs(y[0]);
    }
    void jacobian(double, std::span<double const>, double cj, BandedMatrix& jac) const override
    {
        jac = BandedMatrix(1, 0, 0);
        jac.set(0, 0, cj + 3.0);
    }
};
}  // namespace

TEST(Newton, ConvergesQuadraticallyNearTheRoot)
{
    TwoByTwo sys;
    std::vector<double> y{1.3, 2.4};
    auto const report = newton_solve(sys, y, ScalingSet::unit(2), NewtonOptions{});
    ASSERT_TRUE(report.converged) << report.message;
    EXPECT_NEAR(y[0], 1.0, 1e-10);
    EXPECT_NEAR(y[1], 2.0, 1e-8);
    auto const& h = report.residual_history;
    ASSERT_GE(h.size(), 4u);
    // Quadratic contraction once inside the basin.
    EXPECT_LT(h[3], 10 * h[2] * h[2] + 1e-14);
}

TEST(Newton, ScalingDoesNotMoveTheRoot)
{
    TwoByTwo sys;
    std::vector<double> a{1.3, 2.4}, b{1.3, 2.4};
    ScalingSet odd{{1e3, 1e-2}, {1e-1, 1e2}};
    auto const ra = newton_solve(sys, a, ScalingSet::unit(2), NewtonOptions{});
    auto const rb = newton_solve(sys, b, odd, NewtonOptions{});
    ASSERT_TRUE(ra.converged);
    ASSERT_TRUE(rb.converged);
    EXPECT_NEAR(a[0], b[0], 1e-9);
    EXPECT_NEAR(a[1], b[1], 1e-7);
}

TEST(Newton, DampingRescuesAFarStart)
{
    Atan sys;
    std::vector<double> y{5.0};
    NewtonOptions opt;
    opt.max_iterations = 40;
    auto const report = newton_solve(sys, y, ScalingSet::unit(1), opt);
    ASSERT_TRUE(report.converged) << report.message;
    EXPECT_LT(report.damping_min(), 1.0);
    EXPECT_NEAR(y[0], 0.0, 1e-9);
}

TEST(Newton, ReportsFailureWhenIterationsRunOut)
{
    TwoByTwo sys(5.0);
    std::vector<double> y{1.0, 2.0};
    NewtonOptions opt;
    opt.max_iterations = 2;
    auto const report = newton_solve(sys, y, ScalingSet::unit(2), opt);
    EXPECT_FALSE(report.converged);
    EXPECT_FALSE(report.message.empty());
}

TEST(Newton, ActiveDensityFloorPreventsConvergence)
{
    TwoByTwo sys(0.0, true);
    std::vector<double> y{2.0, 2.0};
    NewtonOptions opt;
    opt.density_floor = 1.5;  // above the root y0 = 1
    auto const report = newton_solve(sys, y, ScalingSet::unit(2), opt);
    EXPECT_FALSE(report.converged);
    EXPECT_TRUE(report.floor_active);
    EXPECT_GE(y[0], 1.5);
}

TEST(Newton, OptionsAndScalingAreValidated)
{
    NewtonOptions bad;
    bad.backtrack = 1.5;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    ScalingSet s{{1.0}, {1.0, 2.0}};
    EXPECT_THROW(s.validate(), std::invalid_argument);
    auto const d = ScalingSet::device_default(4);
    EXPECT_EQ(d.sigma, (std::vector<double>{1, 1e3, 1e3, 1e2}));
    EXPECT_EQ(d.bar, (std::vector<double>{1, 1e22, 1e22, 1e19}));
    auto const hat = d.scale(std::vector<double>{0.5, 1e22, 3e22, 1e19});
    EXPECT_EQ(hat, (std::vector<double>{0.5, 1.0, 3.0, 1.0}));
    EXPECT_EQ(d.unscale(hat), (std::vector<double>{0.5, 1e22, 3e22, 1e19}));
}

TEST(BdfStage, ImplicitEulerStepOfDecay)
{
    Decay problem;
    double const dt = 0.1;
    std::vector<double> y{1.0};
    BdfStageSystem stage(problem, dt, 1.0 / dt, {-1.0 / dt});
    auto const report = newton_solve(stage, y, ScalingSet::unit(1), NewtonOptions{});
    ASSERT_TRUE(report.converged);
    EXPECT_NEAR(y[0], 1.0 / (1.0 + 3.0 * dt), 1e-12);
    EXPECT_NEAR(stage.derivative(y)[0], -3.0 * y[0], 1e-10);

    std::vector<double> theta{1.0 / dt, -1.0 / dt};
    auto const f = bdf_residual(problem, dt, y, {{1.0}}, theta);
    EXPECT_NEAR(f[0], 0.0, 1e-10);
}

TEST(SteadySystem, SolvesTheStationaryEquation)
{
    Decay problem;
    std::vector<double> y{0.7};
    auto const report = newton_solve(SteadySystem(problem), y, ScalingSet::unit(1), NewtonOptions{});
    ASSERT_TRUE(report.converged);
    EXPECT_NEAR(y[0], 0.0, 1e-12);
}
