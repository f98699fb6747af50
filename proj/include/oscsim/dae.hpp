#pragma once

#include <cstddef>
#include <span>

#include "oscsim/banded.hpp"

namespace oscsim
{
/*!
 * Semi-explicit DAE F(t, y, y') = 0 on a node-major banded layout.
 *
 * Differential rows have the form y'_k - g_k(t, y) so that the mass matrix is
 * the identity on them; algebraic rows do not depend on y'. Each residual
 * row also reports a magnitude (sum of absolute term sizes) used to judge
 * convergence relative to the scale of the terms that cancel.
 */
class DaeProblem
{
  public:
    virtual ~DaeProblem() = default;

    virtual std::size_t size() const = 0;
    virtual std::size_t block_size() const = 0;
    //! Lower and upper bandwidth of the Jacobian.
    virtual std::size_t bandwidth() const = 0;
    virtual bool is_differential(std::size_t k) const = 0;
    //! Unknowns that must stay positive (densities).
    virtual bool is_positive(std::size_t k) const = 0;

    /*!
     * Evaluate F. `magnitude` may be empty; otherwise it receives the row
     * term magnitudes.
     */
    virtual void residual(double t,
                          std::span<double const> y,
                          std::span<double const> ydot,
                          std::span<double> f,
                          std::span<double> magnitude) const = 0;

    //! dF/dy + cj dF/dy' at (t, y), approximations allowed.
    virtual void jacobian(double t,
                          std::span<double const> y,
                          double cj,
                          BandedMatrix& jac) const = 0;
};

}  // namespace oscsim
