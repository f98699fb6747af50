#include "oscsim/newton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oscsim
{
ScalingSet ScalingSet::device_default(std::size_t block_size)
{
    ScalingSet s{{1.0, 1e3, 1e3, 1e2}, {1.0, 1e22, 1e22, 1e19}};
    if (block_size > 4 || block_size == 0)
        throw std::invalid_argument("device scaling covers at most 4 components");
    s.sigma.resize(block_size);
    s.bar.resize(block_size);
    return s;
}

ScalingSet ScalingSet::unit(std::size_t block_size)
{
    return {std::vector<double>(block_size, 1.0), std::vector<double>(block_size, 1.0)};
}

void ScalingSet::validate() const
{
    if (sigma.size() != bar.size() || bar.empty())
        throw std::invalid_argument("scaling.sigma and scaling.bar must have one entry per component");
    for (double v : sigma)
        if (!(v > 0.0))
            throw std::invalid_argument("scaling.sigma entries must be > 0");
    for (double v : bar)
        if (!(v > 0.0))
            throw std::invalid_argument("scaling.bar entries must be > 0");
}

std::vector<double> ScalingSet::scale(std::span<double const> y) const
{
    std::vector<double> out(y.size());
    for (std::size_t k = 0; k < y.size(); ++k)
        out[k] = y[k] / bar[k % bar.size()];
    return out;
}

std::vector<double> ScalingSet::unscale(std::span<double const> y_hat) const
{
    std::vector<double> out(y_hat.size());
    for (std::size_t k = 0; k < y_hat.size(); ++k)
        out[k] = y_hat[k] * bar[k % bar.size()];
    return out;
}

void NewtonOptions::validate() const
{
    if (max_iterations < 1)
        throw std::invalid_argument("newton.max_iterations must be >= 1");
    if (!(atol > 0.0) || !(rtol > 0.0) || !(ftol > 0.0))
        throw std::invalid_argument("newton tolerances must be > 0");
    if (!(backtrack > 0.0 && backtrack < 1.0))
        throw std::invalid_argument("newton.backtrack must lie in (0, 1)");
    if (!(damping_min > 0.0 && damping_min <= damping_initial && damping_initial <= 1.0))
        throw std::invalid_argument("newton damping factors must satisfy 0 < min <= initial <= 1");
    if (!(density_floor > 0.0))
        throw std::invalid_argument("newton.density_floor must be > 0");
}

double NewtonReport::damping_min() const
{
    return damping.empty() ? 1.0 : *std::min_element(damping.begin(), damping.end());
}

BdfStageSystem::BdfStageSystem(DaeProblem const& problem,
                               double t,
                               double theta0,
                               std::vector<double> history)
    : problem_(problem), t_(t), theta0_(theta0), history_(std::move(history))
{
    if (history_.size() != problem_.size())
        throw std::invalid_argument("stage history does not match the problem size");
}

std::vector<double> BdfStageSystem::derivative(std::span<double const> y) const
{
    std::vector<double> ydot(y.size());
    for (std::size_t k = 0; k < y.size(); ++k)
        ydot[k] = theta0_ * y[k] + history_[k];
    return ydot;
}

void BdfStageSystem::evaluate(std::span<double const> y,
                              std::span<double> f,
                              std::span<double> magnitude) const
{
    auto const ydot = derivative(y);
    problem_.residual(t_, y, ydot, f, magnitude);
    // y' is a difference of theta0 y and the history; its rounding scales with both.
    if (!magnitude.empty())
        for (std::size_t k = 0; k < y.size(); ++k)
            if (problem_.is_differential(k))
                magnitude[k] += std::abs(theta0_ * y[k]) + std::abs(history_[k]);
}

void BdfStageSystem::jacobian(std::span<double const> y, BandedMatrix& jac) const
{
    problem_.jacobian(t_, y, theta0_, jac);
}

void SteadySystem::evaluate(std::span<double const> y,
                            std::span<double> f,
                            std::span<double> magnitude) const
{
    std::vector<double> const zero(y.size(), 0.0);
    problem_.residual(t_, y, zero, f, magnitude);
}

void SteadySystem::jacobian(std::span<double const> y, BandedMatrix& jac) const
{
    problem_.jacobian(t_, y, 0.0, jac);
}

std::vector<double> bdf_residual(DaeProblem const& problem,
                                 double t,
                                 std::span<double const> y,
                                 std::vector<std::vector<double>> const& past,
                                 std::span<double const> theta)
{
    if (theta.size() != past.size() + 1)
        throw std::invalid_argument("need one past state per coefficient beyond theta_0");
    std::vector<double> history(y.size(), 0.0);
    for (std::size_t k = 0; k < past.size(); ++k)
        for (std::size_t i = 0; i < y.size(); ++i)
            history[i] += theta[k + 1] * past[k][i];
    BdfStageSystem stage(problem, t, theta[0], std::move(history));
    std::vector<double> f(y.size());
    stage.evaluate(y, f, {});
    return f;
}

namespace
{
double scaled_norm2(std::span<double const> f, std::vector<double> const& sigma)
{
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k)
    {
        double const v = f[k] / sigma[k % sigma.size()];
        s += v * v;
    }
    return std::sqrt(s);
}

double relative_residual(std::span<double const> f, std::span<double const> mag)
{
    double worst = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k)
    {
        double const m = std::max(mag[k], std::numeric_limits<double>::min());
        double const r = std::abs(f[k]) / m;
        if (!std::isfinite(r))
            return std::numeric_limits<double>::infinity();
        worst = std::max(worst, r);
    }
    return worst;
}

bool all_finite(std::span<double const> v)
{
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}
}  // namespace

NewtonReport newton_solve(NonlinearSystem const& system,
                          std::vector<double>& y,
                          ScalingSet const& scaling,
                          NewtonOptions const& options)
{
    options.validate();
    scaling.validate();
    std::size_t const n = system.size();
    std::size_t const b = system.block_size();
    if (y.size() != n)
        throw std::invalid_argument("initial guess does not match the system size");
    if (scaling.block_size() != b)
        throw std::invalid_argument("scaling set does not match the block size");

    NewtonReport report;
    std::vector<double> f(n), mag(n), f_trial(n), mag_trial(n), y_trial(n);
    std::vector<double> row_scale(n), col_scale(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        row_scale[k] = 1.0 / scaling.sigma[k % b];
        col_scale[k] = scaling.bar[k % b];
    }

    system.evaluate(y, f, mag);
    if (!all_finite(f))
    {
        report.message = "residual not finite at the initial guess";
        return report;
    }
    double merit = scaled_norm2(f, scaling.sigma);
    report.residual_norm = relative_residual(f, mag);
    report.residual_history.push_back(report.residual_norm);

    BandedMatrix jac;
    for (int it = 1; it <= options.max_iterations; ++it)
    {
        report.iterations = it;
        system.jacobian(y, jac);
        jac.scale_rows(row_scale);
        jac.scale_columns(col_scale);
        auto const equil = jac.equilibrate_rows();
        std::vector<double> step(n);
        for (std::size_t k = 0; k < n; ++k)
            step[k] = -f[k] * row_scale[k] * equil[k];
        try
        {
            BandedLU lu(jac);
            lu.solve_in_place(step);
        }
        catch (SingularMatrixError const& e)
        {
            report.message = e.what();
            return report;
        }
        if (!all_finite(step))
        {
            report.message = "linear solve produced non-finite update";
            return report;
        }

        double lambda = options.damping_initial;
        bool accepted = false;
        bool floor_hit = false;
        double trial_residual = 0.0;
        while (lambda >= options.damping_min)
        {
            floor_hit = false;
            for (std::size_t k = 0; k < n; ++k)
            {
                y_trial[k] = y[k] + lambda * step[k] * col_scale[k];
                if (system.is_positive(k) && !(y_trial[k] >= options.density_floor))
                {
                    y_trial[k] = options.density_floor;
                    floor_hit = true;
                }
            }
            system.evaluate(y_trial, f_trial, mag_trial);
            if (all_finite(f_trial))
            {
                double const m = scaled_norm2(f_trial, scaling.sigma);
                trial_residual = relative_residual(f_trial, mag_trial);
                if (m <= (1.0 - 1e-4 * lambda) * merit || trial_residual <= options.ftol)
                {
                    accepted = true;
                    merit = m;
                    break;
                }
            }
            lambda *= options.backtrack;
        }
        if (!accepted)
        {
            report.damping.push_back(lambda);
            report.message = "line search failed below the minimum damping factor";
            return report;
        }

        double update = 0.0;
        for (std::size_t k = 0; k < n; ++k)
        {
            double const dy_hat = (y_trial[k] - y[k]) / col_scale[k];
            double const y_hat = y_trial[k] / col_scale[k];
            update = std::max(update, std::abs(dy_hat) / (options.atol + options.rtol * std::abs(y_hat)));
        }
        y.swap(y_trial);
        f.swap(f_trial);
        mag.swap(mag_trial);
        report.damping.push_back(lambda);
        report.residual_norm = trial_residual;
        report.residual_history.push_back(trial_residual);
        report.update_norm = update;
        report.floor_active = floor_hit;

        if (update <= 1.0 && trial_residual <= options.ftol && !floor_hit)
        {
            report.converged = true;
            return report;
        }
    }
    report.message = "no convergence within the iteration limit";
    return report;
}

}  // namespace oscsim
