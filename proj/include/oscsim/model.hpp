#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace oscsim
{
//---------------------------------------------------------------------------//
// Physical constants (CODATA 2018, exact SI definitions where applicable)
//---------------------------------------------------------------------------//
struct PhysicalConstants
{
    static constexpr double q = 1.602176634e-19;     //!< elementary charge [C]
    static constexpr double kB = 1.380649e-23;       //!< Boltzmann [J/K]
    static constexpr double eps0 = 8.8541878128e-12; //!< vacuum permittivity [F/m]
};

inline constexpr double pi = 3.14159265358979323846;

//! Raised when a constitutive law is evaluated outside its domain.
class DomainError : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

//---------------------------------------------------------------------------//
/*!
 * Device thickness and mesh resolution.
 *
 * The cathode sits at x = 0 and the anode at x = length. A grading ratio
 * above one produces geometrically refined cells toward both contacts.
 */
struct DeviceGeometry
{
    double length = 70e-9;
    std::size_t node_count = 201;
    double grading = 1.0;

    void validate() const;
};

//---------------------------------------------------------------------------//
/*!
 * Material and kinetic parameters of the donor/acceptor blend.
 *
 * Every quantity is SI. The optional overrides pin the bimolecular
 * coefficient and the dissociation rate to constants, which is how the
 * constant-coefficient regime is reproduced.
 */
struct MaterialParams
{
    double mu_n = 2e-8;            //!< [m^2/(V s)]
    double mu_p = 2e-8;            //!< [m^2/(V s)]
    double eps_r = 4.0;            //!< relative permittivity
    double temperature = 300.0;    //!< [K]
    double k_rec = 1e5;            //!< geminate recombination rate [1/s]
    double pair_distance = 1.5e-9; //!< initial geminate pair separation [m]
    double generation = 0.0;       //!< photon absorption rate G [1/(m^3 s)]
    std::optional<double> gamma_override;  //!< [m^3/s]
    std::optional<double> kdiss_override;  //!< [1/s]
    std::optional<double> v_max;           //!< drift velocity clamp [m/s]

    double permittivity() const;
    double thermal_voltage() const;
    void validate() const;
};

//---------------------------------------------------------------------------//
// Contacts
//---------------------------------------------------------------------------//
enum class BoundaryMode
{
    robin,
    dirichlet
};

/*!
 * Boundary data of one metal/blend interface.
 *
 * Carrier conditions have the Robin form kappa J.nu = beta - alpha eta. In
 * dirichlet mode (or whenever kappa = 0) they pin eta = beta / alpha.
 */
struct Contact
{
    double psi = 0.0;      //!< electrostatic potential [V]
    double kappa_n = 0.0;
    double kappa_p = 0.0;
    double alpha_n = 1e5;  //!< surface recombination velocity [m/s]
    double alpha_p = 1e5;
    double beta_n = 0.0;   //!< injection rate [1/(m^2 s)]
    double beta_p = 0.0;

    double n_eq() const { return beta_n / alpha_n; }
    double p_eq() const { return beta_p / alpha_p; }

    //! Contact with equilibrium densities n, p and recombination velocity s.
    static Contact
    with_densities(double psi, double n, double p, double s = 1e5);
};

struct ContactParams
{
    Contact cathode;  //!< x = 0
    Contact anode;    //!< x = L
    BoundaryMode mode = BoundaryMode::dirichlet;

    //! Whether the carrier equation is pinned (Dirichlet) at a contact.
    bool pins_n(Contact const& c) const
    {
        return mode == BoundaryMode::dirichlet || c.kappa_n == 0.0;
    }
    bool pins_p(Contact const& c) const
    {
        return mode == BoundaryMode::dirichlet || c.kappa_p == 0.0;
    }
    void validate() const;
};

//! Work-function derived contacts with symmetric injection barriers.
ContactParams
default_contacts(double built_in, double thermal_voltage,
                 double barrier = 0.3, double effective_dos = 2.5e25);

//---------------------------------------------------------------------------//
/*!
 * Nodal fields (phi, n, p, X) at one instant.
 */
struct StateVector
{
    std::vector<double> phi;
    std::vector<double> n;
    std::vector<double> p;
    std::vector<double> X;
    double t = 0.0;

    StateVector() = default;
    explicit StateVector(std::size_t nodes)
        : phi(nodes, 0.0), n(nodes, 0.0), p(nodes, 0.0), X(nodes, 0.0)
    {
    }

    std::size_t size() const { return phi.size(); }
    bool is_positive() const;
};

//---------------------------------------------------------------------------//
// Constitutive laws
//---------------------------------------------------------------------------//
double thermal_voltage(double temperature);
double einstein_diffusion(double mobility, double vth);
double langevin_gamma(double mu_n, double mu_p, double permittivity);

//! Zero-field dissociation series S(b) = J1(2 sqrt(-2b)) / sqrt(-2b).
double onsager_series(double b, double rel_tol = 1e-12);
//! Geminate pair binding energy [J].
double pair_binding_energy(MaterialParams const& params);
//! Field-dependent dissociation rate [1/s].
double braun_onsager_kdiss(double field_magnitude,
                           MaterialParams const& params,
                           double gamma);

double exciton_tau(double k_diss, double k_rec);
double xi(double t, double x0, double generation, double tau);

//---------------------------------------------------------------------------//
/*!
 * Resolved kinetic coefficients for one simulation.
 *
 * Holds gamma (Langevin or override) and evaluates k_diss either from the
 * local field or, when frozen, as a single constant.
 */
class RateModel
{
  public:
    explicit RateModel(MaterialParams const& params);

    //! Evaluate every k_diss at the given field instead of the local one.
    void freeze_at(double field_magnitude);

    double gamma() const { return gamma_; }
    double k_rec() const { return params_.k_rec; }
    double generation() const { return params_.generation; }
    bool is_constant() const
    {
        return frozen_.has_value() || params_.kdiss_override.has_value();
    }
    double kdiss(double field_magnitude) const;
    double tau(double field_magnitude) const;

    MaterialParams const& params() const { return params_; }

  private:
    MaterialParams params_;
    double gamma_;
    std::optional<double> frozen_;
};

}  // namespace oscsim
