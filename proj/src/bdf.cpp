#include "oscsim/bdf.hpp"

#include <algorithm>
#include <cmath>

namespace oscsim
{
namespace
{
void check_times(std::span<double const> times)
{
    for (std::size_t a = 0; a < times.size(); ++a)
        for (std::size_t b = a + 1; b < times.size(); ++b)
            if (times[a] == times[b])
                throw std::invalid_argument("interpolation stencil has duplicate times");
}

double leading_coefficient(std::span<double const> times)
{
    double theta0 = 0.0;
    for (std::size_t j = 1; j < times.size(); ++j)
        theta0 += 1.0 / (times[0] - times[j]);
    return theta0;
}

double wrms(std::span<double const> v,
            std::span<double const> y,
            std::span<double const> atol,
            double rtol,
            std::vector<bool> const& mask)
{
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < v.size(); ++k)
    {
        if (!mask[k])
            continue;
        double const w = atol[k] + rtol * std::abs(y[k]);
        double const r = v[k] / w;
        sum += r * r;
        ++count;
    }
    return count ? std::sqrt(sum / static_cast<double>(count)) : 0.0;
}

//! Keeps differential unknowns at their given values and solves the rest.
class AlgebraicSystem final : public NonlinearSystem
{
  public:
    AlgebraicSystem(DaeProblem const& problem,
                    double t,
                    std::vector<double> fixed,
                    std::vector<bool> const& differential)
        : problem_(problem), t_(t), fixed_(std::move(fixed)), differential_(differential),
          zero_(fixed_.size(), 0.0)
    {
    }
    std::size_t size() const override { return problem_.size(); }
    std::size_t block_size() const override { return problem_.block_size(); }
    std::size_t bandwidth() const override { return problem_.bandwidth(); }
    bool is_positive(std::size_t k) const override { return problem_.is_positive(k); }
    void evaluate(std::span<double const> y,
                  std::span<double> f,
                  std::span<double> magnitude) const override
    {
        problem_.residual(t_, y, zero_, f, magnitude);
        for (std::size_t k = 0; k < f.size(); ++k)
        {
            if (!differential_[k])
                continue;
            f[k] = y[k] - fixed_[k];
            if (!magnitude.empty())
                magnitude[k] = std::abs(y[k]) + std::abs(fixed_[k]);
        }
    }
    void jacobian(std::span<double const> y, BandedMatrix& jac) const override
    {
        problem_.jacobian(t_, y, 0.0, jac);
        for (std::size_t k = 0; k < y.size(); ++k)
            if (differential_[k])
                jac.set_identity_row(k);
    }

  private:
    DaeProblem const& problem_;
    double t_;
    std::vector<double> fixed_;
    std::vector<bool> const& differential_;
    std::vector<double> zero_;
};
}  // namespace

std::vector<double> bdf_coefficients(std::span<double const> times)
{
    if (times.size() < 2 || times.size() > 6)
        throw std::invalid_argument("BDF order must lie in [1, 5]");
    check_times(times);
    std::size_t const m = times.size() - 1;
    std::vector<double> theta(m + 1);
    theta[0] = leading_coefficient(times);
    for (std::size_t k = 1; k <= m; ++k)
    {
        double num = 1.0;
        double den = 1.0;
        for (std::size_t j = 0; j <= m; ++j)
        {
            if (j == k)
                continue;
            if (j != 0)
                num *= times[0] - times[j];
            den *= times[k] - times[j];
        }
        theta[k] = num / den;
    }
    return theta;
}

std::vector<double> extrapolate(std::span<double const> times,
                                std::vector<std::vector<double> const*> const& values,
                                double t)
{
    if (times.empty() || times.size() != values.size())
        throw std::invalid_argument("extrapolation needs matching, non-empty stencils");
    check_times(times);
    std::size_t const n = values.front()->size();
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k < times.size(); ++k)
    {
        double w = 1.0;
        for (std::size_t j = 0; j < times.size(); ++j)
            if (j != k)
                w *= (t - times[j]) / (times[k] - times[j]);
        auto const& v = *values[k];
        for (std::size_t i = 0; i < n; ++i)
            out[i] += w * v[i];
    }
    return out;
}

namespace
{
std::vector<double> predict_with_order(BdfState const& state, double t, int order)
{
    if (state.history.empty())
        throw std::invalid_argument("prediction needs at least one history entry");
    std::size_t const H = state.history.size();
    if (H == 1)
    {
        std::vector<double> y = state.history.front().y;
        if (state.ydot_valid)
        {
            double const dt = t - state.history.front().t;
            for (std::size_t i = 0; i < y.size(); ++i)
                y[i] += dt * state.ydot[i];
        }
        return y;
    }
    std::size_t const count = std::min<std::size_t>(static_cast<std::size_t>(order) + 1, H);
    std::vector<double> times(count);
    std::vector<std::vector<double> const*> values(count);
    for (std::size_t k = 0; k < count; ++k)
    {
        times[k] = state.history[k].t;
        values[k] = &state.history[k].y;
    }
    return extrapolate(times, values, t);
}
}  // namespace

std::vector<double> predict(BdfState const& state, double t)
{
    return predict_with_order(state, t, state.order);
}

double error_estimate(std::span<double const> corrected,
                      std::span<double const> predicted,
                      double constant,
                      std::span<double const> atol,
                      double rtol,
                      std::vector<bool> const& mask)
{
    if (corrected.size() != predicted.size() || atol.size() != corrected.size()
        || mask.size() != corrected.size())
        throw std::invalid_argument("error estimate operands differ in size");
    std::vector<double> diff(corrected.size());
    for (std::size_t k = 0; k < diff.size(); ++k)
        diff[k] = corrected[k] - predicted[k];
    return constant * wrms(diff, corrected, atol, rtol, mask);
}

void IntegratorOptions::validate(std::size_t block_size) const
{
    if (order_cap < 1 || order_cap > 5)
        throw std::invalid_argument("integrator.order_cap must lie in [1, 5]");
    if (!(rtol > 0.0))
        throw std::invalid_argument("integrator.rtol must be > 0");
    if (!atol.empty() && atol.size() != block_size)
        throw std::invalid_argument("integrator.atol needs one entry per component");
    for (double a : atol)
        if (!(a > 0.0))
            throw std::invalid_argument("integrator.atol entries must be > 0");
    if (!(dt_init > 0.0) || !(dt_min > 0.0) || !(dt_max > dt_min))
        throw std::invalid_argument("integrator step bounds must satisfy 0 < dt_min < dt_max");
    if (!(growth_cap > 1.0) || !(safety > 0.0 && safety <= 1.0))
        throw std::invalid_argument("integrator.growth_cap must be > 1 and safety in (0, 1]");
    if (fixed_dt < 0.0 || fixed_order < 1 || fixed_order > 5)
        throw std::invalid_argument("integrator fixed-step settings out of range");
    newton.validate();
    scaling.validate();
}

BdfIntegrator::BdfIntegrator(DaeProblem const& problem, IntegratorOptions options)
    : problem_(problem), options_(std::move(options))
{
    std::size_t const b = problem_.block_size();
    if (options_.scaling.bar.empty())
        options_.scaling = ScalingSet::unit(b);
    options_.validate(b);
    differential_.resize(problem_.size());
    for (std::size_t k = 0; k < problem_.size(); ++k)
        differential_[k] = problem_.is_differential(k);
    state_.atol.resize(problem_.size());
    for (std::size_t k = 0; k < problem_.size(); ++k)
    {
        std::size_t const c = k % b;
        state_.atol[k] = options_.atol.empty() ? 1e-6 * options_.scaling.bar[c] : options_.atol[c];
    }
    state_.rtol = options_.rtol;
}

void BdfIntegrator::initialize(double t0, std::vector<double> y0)
{
    std::size_t const n = problem_.size();
    if (y0.size() != n)
        throw std::invalid_argument("initial state does not match the problem size");
    std::vector<double> const zero(n, 0.0);
    std::vector<double> f(n), mag(n);
    problem_.residual(t0, y0, zero, f, mag);
    bool consistent = true;
    for (std::size_t k = 0; k < n; ++k)
        if (!differential_[k] && std::abs(f[k]) > options_.newton.ftol * mag[k])
            consistent = false;
    if (!consistent)
    {
        AlgebraicSystem sys(problem_, t0, y0, differential_);
        auto const report = newton_solve(sys, y0, options_.scaling, options_.newton);
        if (!report.converged)
            throw IntegrationError("consistent initialization failed: " + report.message);
        problem_.residual(t0, y0, zero, f, mag);
    }
    state_.history.clear();
    state_.history.push_front({t0, std::move(y0)});
    state_.ydot.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        if (differential_[k])
            state_.ydot[k] = -f[k];
    state_.ydot_valid = true;
    state_.order = 1;
    state_.dt = options_.fixed_dt > 0.0 ? options_.fixed_dt : options_.dt_init;
    state_.steps = state_.rejections = state_.newton_failures = 0;
    state_.steps_at_order = 0;
    state_.consecutive_failures = 0;
}

void BdfIntegrator::seed_history(std::vector<HistoryEntry> entries, int order)
{
    if (entries.empty() || order < 1 || static_cast<std::size_t>(order) > entries.size())
        throw std::invalid_argument("seeded history must hold at least `order` entries");
    state_.history.assign(entries.begin(), entries.end());
    while (state_.history.size() > BdfState::max_history)
        state_.history.pop_back();
    state_.ydot_valid = false;
    state_.order = order;
    state_.steps_at_order = 0;
}

double BdfIntegrator::order_error(std::vector<HistoryEntry const*> const& points, int k) const
{
    // (k+1)-th divided difference over points[0..k+1], scaled to the
    // local truncation error of order k.
    std::size_t const count = static_cast<std::size_t>(k) + 2;
    std::size_t const n = points.front()->y.size();
    std::vector<double> dd(n, 0.0);
    for (std::size_t i = 0; i < count; ++i)
    {
        double den = 1.0;
        for (std::size_t j = 0; j < count; ++j)
            if (j != i)
                den *= points[i]->t - points[j]->t;
        for (std::size_t c = 0; c < n; ++c)
            dd[c] += points[i]->y[c] / den;
    }
    double span = 1.0;
    double theta0 = 0.0;
    for (std::size_t j = 1; j <= static_cast<std::size_t>(k); ++j)
    {
        span *= points[0]->t - points[j]->t;
        theta0 += 1.0 / (points[0]->t - points[j]->t);
    }
    for (double& v : dd)
        v *= span / theta0;
    return wrms(dd, points.front()->y, state_.atol, state_.rtol, differential_);
}

void BdfIntegrator::propose_next(StepResult& result, double dt, int order) const
{
    auto factor = [&](double est, int k) {
        if (!(est > 0.0))
            return options_.growth_cap;
        return std::min(options_.growth_cap,
                        options_.safety * std::pow(est, -1.0 / static_cast<double>(k + 1)));
    };
    std::vector<HistoryEntry const*> points;
    for (auto const& e : state_.history)
        points.push_back(&e);
    std::size_t const H = points.size();

    int best = order;
    double best_factor = factor(result.error, order);
    if (order > 1 && H >= static_cast<std::size_t>(order) + 1)
    {
        double const f = factor(order_error(points, order - 1), order - 1);
        if (f >= best_factor)
        {
            best = order - 1;
            best_factor = f;
        }
    }
    if (best == order && order < options_.order_cap
        && H >= static_cast<std::size_t>(order) + 3
        && state_.steps_at_order >= order + 1)
    {
        double const f = factor(order_error(points, order + 1), order + 1);
        if (f > 1.2 * best_factor)
        {
            best = order + 1;
            best_factor = f;
        }
    }
    result.order_next = best;
    result.dt_next = dt * std::max(0.5, best_factor);
}

StepResult BdfIntegrator::step(double dt)
{
    if (state_.history.empty())
        throw IntegrationError("integrator used before initialize()");
    std::size_t const n = problem_.size();
    std::size_t const H = state_.history.size();
    int const order = std::max(1, std::min<int>(state_.order, static_cast<int>(H)));
    double const t_old = state_.t();
    double const t_new = t_old + dt;

    auto y_pred = predict_with_order(state_, t_new, order);
    std::vector<double> times(static_cast<std::size_t>(order) + 1);
    times[0] = t_new;
    for (int k = 1; k <= order; ++k)
        times[k] = state_.history[k - 1].t;
    auto const theta = bdf_coefficients(times);
    std::vector<double> hist(n, 0.0);
    for (int k = 1; k <= order; ++k)
    {
        auto const& yk = state_.history[k - 1].y;
        for (std::size_t i = 0; i < n; ++i)
            hist[i] += theta[k] * yk[i];
    }

    StepResult result;
    result.t = t_new;
    result.order = order;
    result.order_next = order;
    result.y = y_pred;
    for (std::size_t k = 0; k < n; ++k)
        if (problem_.is_positive(k) && !(result.y[k] > 0.0))
            result.y[k] = state_.y()[k];

    BdfStageSystem stage(problem_, t_new, theta[0], hist);
    result.newton = newton_solve(stage, result.y, options_.scaling, options_.newton);
    bool const fixed = options_.fixed_dt > 0.0;
    if (!result.newton.converged)
    {
        if (fixed)
            throw IntegrationError("Newton failed in fixed-step mode at t = " + std::to_string(t_new)
                                   + ": " + result.newton.message);
        ++state_.newton_failures;
        ++state_.consecutive_failures;
        result.dt_next = dt / 4.0;
        result.order_next = std::max(1, order - 1);
        state_.order = result.order_next;
        state_.steps_at_order = 0;
        return result;
    }

    double oldest;
    if (H == 1)
        oldest = t_old;
    else
        oldest = state_.history[std::min<std::size_t>(order, H - 1)].t;
    double const constant = 1.0 / (1.0 + theta[0] * (t_new - oldest));
    result.error = error_estimate(result.y, y_pred, constant, state_.atol, state_.rtol, differential_);

    if (!fixed && result.error > 1.0)
    {
        ++state_.rejections;
        ++state_.consecutive_failures;
        double const shrink = options_.safety
                              * std::pow(result.error, -1.0 / static_cast<double>(order + 1));
        result.dt_next = dt * std::clamp(shrink, 0.25, 0.9);
        result.order_next = state_.consecutive_failures >= 2 ? 1 : order;
        if (result.order_next != order)
            state_.steps_at_order = 0;
        state_.order = result.order_next;
        return result;
    }

    result.accepted = true;
    auto ydot = stage.derivative(result.y);
    accept(result, std::move(ydot), dt);
    if (fixed)
    {
        result.dt_next = options_.fixed_dt;
        int const next = std::min<int>(options_.fixed_order, static_cast<int>(state_.history.size()));
        result.order_next = next;
    }
    else
    {
        propose_next(result, dt, order);
    }
    if (result.order_next != state_.order)
        state_.steps_at_order = 0;
    state_.order = result.order_next;
    state_.dt = result.dt_next;
    return result;
}

void BdfIntegrator::accept(StepResult const& result, std::vector<double> ydot, double dt)
{
    state_.history.push_front({result.t, result.y});
    while (state_.history.size() > BdfState::max_history)
        state_.history.pop_back();
    state_.ydot = std::move(ydot);
    state_.ydot_valid = true;
    state_.dt = dt;
    ++state_.steps;
    ++state_.steps_at_order;
    state_.consecutive_failures = 0;
}

void BdfIntegrator::integrate(double t_end, std::span<double const> output_times, StepSink const& sink)
{
    if (state_.history.empty())
        throw IntegrationError("integrator used before initialize()");
    double t = state_.t();
    StepStats stats;
    stats.t = t;
    stats.order = state_.order;
    sink(t, state_.y(), state_.ydot, true, stats);
    if (!(t_end > t))
        return;

    std::vector<double> targets;
    for (double o : output_times)
        if (o > t && o < t_end)
            targets.push_back(o);
    targets.push_back(t_end);
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

    bool const fixed = options_.fixed_dt > 0.0;
    double dt = state_.dt;
    std::size_t next = 0;
    long attempts = 0;
    while (next < targets.size())
    {
        if (++attempts > options_.max_steps)
            throw IntegrationError("step limit reached at t = " + std::to_string(t));
        double const target = targets[next];
        double const proposal = std::min(dt, options_.dt_max);
        double step_dt = proposal;
        bool hit = false;
        if (t + step_dt * (fixed ? 1.0 + 1e-3 : 1.05) >= target)
        {
            step_dt = target - t;
            hit = true;
        }
        auto result = step(step_dt);
        if (!result.accepted)
        {
            dt = result.dt_next;
            if (dt < options_.dt_min)
                throw IntegrationError("step size underflow at t = " + std::to_string(t));
            continue;
        }
        if (hit)
        {
            state_.history.front().t = target;
            result.t = target;
        }
        t = result.t;
        stats.step = state_.steps;
        stats.t = t;
        stats.dt = step_dt;
        stats.order = result.order;
        stats.newton_iters = result.newton.iterations;
        stats.damping_min = result.newton.damping_min();
        stats.error = result.error;
        sink(t, state_.y(), state_.ydot, hit, stats);
        dt = hit && !fixed ? std::max(result.dt_next, std::min(proposal, result.dt_next * 4.0))
                           : result.dt_next;
        if (hit)
            ++next;
    }
}

}  // namespace oscsim
