#pragma once

#include <deque>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "oscsim/dae.hpp"
#include "oscsim/newton.hpp"

namespace oscsim
{
class IntegrationError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/*!
 * Coefficients theta_0..theta_m of the derivative at times[0] of the
 * polynomial interpolating the values at times[0..m] (newest first).
 */
std::vector<double> bdf_coefficients(std::span<double const> times);

//! Evaluate at t the polynomial through (times[k], values[k]).
std::vector<double> extrapolate(std::span<double const> times,
                                std::vector<std::vector<double> const*> const& values,
                                double t);

struct HistoryEntry
{
    double t;
    std::vector<double> y;
};

struct BdfState
{
    static constexpr std::size_t max_history = 6;

    std::deque<HistoryEntry> history;  //!< newest first
    std::vector<double> ydot;          //!< derivative at history.front()
    bool ydot_valid = false;
    int order = 1;
    double dt = 0.0;
    std::vector<double> atol;          //!< per unknown
    double rtol = 1e-6;
    long steps = 0;
    long rejections = 0;
    long newton_failures = 0;
    int steps_at_order = 0;
    int consecutive_failures = 0;

    double t() const { return history.front().t; }
    std::vector<double> const& y() const { return history.front().y; }
};

/*!
 * Predictor at t: the polynomial through the newest min(order + 1, size)
 * history entries. With a single entry the stored derivative is used when
 * available, otherwise the value is held constant.
 */
std::vector<double> predict(BdfState const& state, double t);

/*!
 * C * ||corrected - predicted||_WRMS with weights 1/(atol_k + rtol |y_k|),
 * restricted to entries where `mask` is true.
 */
double error_estimate(std::span<double const> corrected,
                      std::span<double const> predicted,
                      double constant,
                      std::span<double const> atol,
                      double rtol,
                      std::vector<bool> const& mask);

struct IntegratorOptions
{
    int order_cap = 2;
    double rtol = 1e-6;
    std::vector<double> atol;  //!< per block component; empty means 1e-6 * scaling.bar
    double dt_init = 1e-12;
    double dt_min = 1e-20;
    double dt_max = std::numeric_limits<double>::infinity();
    double growth_cap = 2.0;
    double safety = 0.9;
    long max_steps = 200000;
    //! When positive: constant step, fixed order, no error test.
    double fixed_dt = 0.0;
    int fixed_order = 1;
    NewtonOptions newton;
    ScalingSet scaling;

    void validate(std::size_t block_size) const;
};

struct StepStats
{
    long step = 0;
    double t = 0.0;
    double dt = 0.0;
    int order = 0;
    int newton_iters = 0;
    double damping_min = 1.0;
    double error = 0.0;
};

struct StepResult
{
    bool accepted = false;
    double t = 0.0;
    int order = 1;  //!< order used for this step
    std::vector<double> y;
    double error = 0.0;
    double dt_next = 0.0;
    int order_next = 1;
    NewtonReport newton;
};

/*!
 * Called for the initial state and after every accepted step. `is_output`
 * marks the requested output times (and t = 0).
 */
using StepSink = std::function<void(double t,
                                    std::span<double const> y,
                                    std::span<double const> ydot,
                                    bool is_output,
                                    StepStats const& stats)>;

/*!
 * Variable-order, variable-step BDF integrator for a semi-explicit DAE.
 *
 * Each step extrapolates a predictor from the history, solves the implicit
 * stage with newton_solve, and accepts it when the weighted local error
 * estimate is at most one. Step size and order for the next step follow
 * the error estimates at orders m-1, m and m+1.
 */
class BdfIntegrator
{
  public:
    BdfIntegrator(DaeProblem const& problem, IntegratorOptions options);

    /*!
     * Start from (t0, y0). Algebraic unknowns are re-solved when the
     * constraints are not met; the initial derivative follows from the
     * semi-explicit form.
     */
    void initialize(double t0, std::vector<double> y0);
    //! Replace the history with exact past values (newest first).
    void seed_history(std::vector<HistoryEntry> entries, int order);

    //! Attempt one step of size dt from the newest history entry.
    StepResult step(double dt);

    void integrate(double t_end, std::span<double const> output_times, StepSink const& sink);

    BdfState const& state() const { return state_; }
    IntegratorOptions const& options() const { return options_; }

  private:
    void accept(StepResult const& result, std::vector<double> ydot, double dt);
    void propose_next(StepResult& result, double dt, int order) const;
    double order_error(std::vector<HistoryEntry const*> const& points, int k) const;

    DaeProblem const& problem_;
    IntegratorOptions options_;
    std::vector<bool> differential_;
    BdfState state_;
};

}  // namespace oscsim
