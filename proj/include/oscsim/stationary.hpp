#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "oscsim/mesh.hpp"
#include "oscsim/model.hpp"

namespace oscsim
{
class ConvergenceError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! X = tau G + gamma tau p n, node by node.
std::vector<double> stationary_x(std::span<double const> n,
                                 std::span<double const> p,
                                 double generation,
                                 double gamma,
                                 std::span<double const> tau);

//! U = tau (k_diss G - gamma k_rec p n), shared by both carrier equations.
std::vector<double> stationary_rates(std::span<double const> n,
                                     std::span<double const> p,
                                     double generation,
                                     std::span<double const> kdiss,
                                     double gamma,
                                     double k_rec);

/*!
 * Reference density n_r. With light, gamma k_rec n_r^2 = k_diss G; in the
 * dark, the geometric mean of the contact products sqrt(n_D p_D).
 */
double reference_density(double generation,
                         double kdiss,
                         double gamma,
                         double k_rec,
                         ContactParams const& contacts);

/*!
 * Slotboom variables: n = n_r u e^{phi/Vth}, p = n_r v e^{-phi/Vth}.
 */
struct SlotboomState
{
    std::vector<double> phi;
    std::vector<double> u;
    std::vector<double> v;
    double n_r = 1.0;

    static SlotboomState from_densities(std::span<double const> phi,
                                        std::span<double const> n,
                                        std::span<double const> p,
                                        double n_r,
                                        double vth);
    std::vector<double> electrons(double vth) const;
    std::vector<double> holes(double vth) const;
};

/*!
 * A priori bounds of the stationary solution built from the Dirichlet data.
 *
 * The exponential family n_r e^{+-psi_hat_plus/Vth} bounds the densities and
 * the family min(inf psi_D, -psi_plus) .. max(sup psi_D, psi_plus) bounds the
 * potential.
 */
struct StationaryBounds
{
    std::array<double, 2> phi_nD{};  //!< cathode, anode
    std::array<double, 2> phi_pD{};
    double psi_plus = 0.0;
    double psi_hat_plus = 0.0;
    double density_lower = 0.0;
    double density_upper = 0.0;
    double potential_lower = 0.0;
    double potential_upper = 0.0;

    //! Empty when the state lies inside, otherwise a description of the first violation.
    std::string check(StateVector const& state, double rel_slack = 1e-10) const;
    std::string describe() const;
};

StationaryBounds stationary_bounds(ContactParams const& contacts, double n_r, double vth);

struct GummelOptions
{
    double tolerance = 1e-7;  //!< potential update, in units of Vth
    int max_iterations = 1000;
    int poisson_iterations = 50;
};

struct SteadyReport
{
    bool converged = false;
    int iterations = 0;
    std::vector<double> updates;  //!< potential update per outer iteration [V]
    std::string bounds_violation;
};

struct SteadyResult
{
    StateVector state;
    SlotboomState slotboom;
    StationaryBounds bounds;
    SteadyReport report;
};

/*!
 * Stationary solution with X eliminated, by decoupled iteration: nonlinear
 * Poisson for phi at fixed (u, v), then the linear u and v equations at fixed
 * phi, repeated until the potential settles. Needs Dirichlet contacts.
 */
SteadyResult steady_solve(Mesh1D const& mesh,
                          RateModel const& rates,
                          ContactParams const& contacts,
                          GummelOptions const& options = {},
                          StateVector const* initial = nullptr);

}  // namespace oscsim
