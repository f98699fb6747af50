#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "oscsim/banded.hpp"
#include "oscsim/dae.hpp"

namespace oscsim
{
/*!
 * Per-equation residual scales sigma and per-unknown variable scales (bars),
 * one entry per component of a node block.
 */
struct ScalingSet
{
    std::vector<double> sigma;
    std::vector<double> bar;

    //! sigma = (1, 1e3, 1e3, 1e2), bars = (1, 1e22, 1e22, 1e19).
    static ScalingSet device_default(std::size_t block_size);
    static ScalingSet unit(std::size_t block_size);

    std::size_t block_size() const { return bar.size(); }
    void validate() const;

    std::vector<double> scale(std::span<double const> y) const;
    std::vector<double> unscale(std::span<double const> y_hat) const;
};

struct NewtonOptions
{
    int max_iterations = 12;
    double atol = 1e-10;  //!< scaled update, absolute part
    double rtol = 1e-8;   //!< scaled update, relative part
    double ftol = 1e-8;   //!< residual relative to its term magnitudes
    double damping_initial = 1.0;
    double backtrack = 0.5;
    double damping_min = 1.0 / 1024.0;
    double density_floor = 1.0;  //!< [1/m^3]

    void validate() const;
};

struct NewtonReport
{
    bool converged = false;
    int iterations = 0;
    double residual_norm = 0.0;  //!< max_k |F_k| / magnitude_k
    double update_norm = 0.0;    //!< max_k |dy_k| / (atol + rtol |y_k|), scaled
    std::vector<double> damping;
    std::vector<double> residual_history;
    bool floor_active = false;
    std::string message;

    double damping_min() const;
};

//! F(y) = 0 with magnitudes, on the same banded layout as a DaeProblem.
class NonlinearSystem
{
  public:
    virtual ~NonlinearSystem() = default;
    virtual std::size_t size() const = 0;
    virtual std::size_t block_size() const = 0;
    virtual std::size_t bandwidth() const = 0;
    virtual bool is_positive(std::size_t k) const = 0;
    virtual void evaluate(std::span<double const> y,
                          std::span<double> f,
                          std::span<double> magnitude) const = 0;
    virtual void jacobian(std::span<double const> y, BandedMatrix& jac) const = 0;
};

/*!
 * One implicit BDF stage: F(t, y, theta0 y + history) = 0 where
 * history = sum_{k>=1} theta_k y_{K-k}.
 */
class BdfStageSystem final : public NonlinearSystem
{
  public:
    BdfStageSystem(DaeProblem const& problem, double t, double theta0, std::vector<double> history);

    std::size_t size() const override { return problem_.size(); }
    std::size_t block_size() const override { return problem_.block_size(); }
    std::size_t bandwidth() const override { return problem_.bandwidth(); }
    bool is_positive(std::size_t k) const override { return problem_.is_positive(k); }
    void evaluate(std::span<double const> y,
                  std::span<double> f,
                  std::span<double> magnitude) const override;
    void jacobian(std::span<double const> y, BandedMatrix& jac) const override;

    //! y' implied by the stage formula at y.
    std::vector<double> derivative(std::span<double const> y) const;

  private:
    DaeProblem const& problem_;
    double t_;
    double theta0_;
    std::vector<double> history_;
};

//! Stationary problem F(t, y, 0) = 0.
class SteadySystem final : public NonlinearSystem
{
  public:
    SteadySystem(DaeProblem const& problem, double t = 0.0) : problem_(problem), t_(t) {}

    std::size_t size() const override { return problem_.size(); }
    std::size_t block_size() const override { return problem_.block_size(); }
    std::size_t bandwidth() const override { return problem_.bandwidth(); }
    bool is_positive(std::size_t k) const override { return problem_.is_positive(k); }
    void evaluate(std::span<double const> y,
                  std::span<double> f,
                  std::span<double> magnitude) const override;
    void jacobian(std::span<double const> y, BandedMatrix& jac) const override;

  private:
    DaeProblem const& problem_;
    double t_;
};

/*!
 * BDF stage residual at y given past states y_{K-1}, ..., y_{K-m} and the
 * coefficients theta_0..theta_m.
 */
std::vector<double> bdf_residual(DaeProblem const& problem,
                                 double t,
                                 std::span<double const> y,
                                 std::vector<std::vector<double>> const& past,
                                 std::span<double const> theta);

/*!
 * Damped Newton iteration in scaled variables. The Jacobian is rebuilt at
 * every iterate. Densities are clipped at the floor inside the iteration;
 * a solve that ends with the floor active is not reported as converged.
 */
NewtonReport newton_solve(NonlinearSystem const& system,
                          std::vector<double>& y,
                          ScalingSet const& scaling,
                          NewtonOptions const& options);

}  // namespace oscsim
