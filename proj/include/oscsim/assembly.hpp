#pragma once

#include <optional>
#include <span>
#include <vector>

#include "oscsim/banded.hpp"
#include "oscsim/mesh.hpp"
#include "oscsim/model.hpp"
#include "oscsim/sg.hpp"

namespace oscsim
{
/*!
 * Poisson problem -div(eps grad phi) = q (p - n) with phi = psi at both
 * contacts. Interior rows are written per unit volume of the dual cell.
 */
BandedSystem assemble_poisson(Mesh1D const& mesh,
                              std::span<double const> n,
                              std::span<double const> p,
                              ContactParams const& contacts,
                              double permittivity);

//! Transport coefficients of one carrier species.
struct CarrierTransport
{
    Carrier carrier = Carrier::electron;
    double mobility = 0.0;
    double thermal_voltage = 0.0;
    std::optional<double> v_max;
};

/*!
 * Linear continuity problem for one carrier at fixed potential:
 *
 *   theta0 eta - div J(eta) + R eta = S - history_sum
 *
 * with exponentially fitted fluxes, per unit volume. Contacts either pin
 * eta = beta / alpha or add the Robin flux kappa J.nu = beta - alpha eta.
 */
BandedSystem assemble_continuity(Mesh1D const& mesh,
                                 std::span<double const> phi,
                                 CarrierTransport const& transport,
                                 std::span<double const> reaction,
                                 std::span<double const> source,
                                 double theta0,
                                 std::span<double const> history_sum,
                                 ContactParams const& contacts);

//! Edge current densities [A/m^2] in the J = q (J_p - J_n) convention.
struct CurrentProfile
{
    std::vector<double> conduction;  //!< per edge
    std::vector<double> total;       //!< conduction - eps dE/dt
    double contact = 0.0;            //!< total current on the cathode edge

    //! Photocurrent delivered to the external circuit (positive when lit).
    double photocurrent() const { return -contact; }
    //! max_e |total_e - contact| / |contact|
    double relative_variation() const;
};

/*!
 * Evaluate the current from a state. When `phi_rate` (d phi / dt at the
 * nodes) is given the displacement term is added so the total is
 * divergence free mid-transient.
 */
CurrentProfile compute_current(Mesh1D const& mesh,
                               StateVector const& state,
                               MaterialParams const& params,
                               std::span<double const> phi_rate = {});

}  // namespace oscsim
