#include "oscsim/model.hpp"

#include <algorithm>
#include <cmath>

namespace oscsim
{
namespace
{
void require_positive(double value, char const* name)
{
    if (!(value > 0.0) || !std::isfinite(value))
    {
        throw std::invalid_argument(std::string(name) + " must be > 0");
    }
}
}  // namespace

void DeviceGeometry::validate() const
{
    require_positive(length, "device.length");
    if (node_count < 3)
    {
        throw std::invalid_argument("device.nodes must be >= 3");
    }
    if (!(grading >= 1.0 && grading <= 1.1))
    {
        throw std::invalid_argument("device.grading must lie in [1, 1.1]");
    }
}

double MaterialParams::permittivity() const
{
    return eps_r * PhysicalConstants::eps0;
}

double MaterialParams::thermal_voltage() const
{
    return oscsim::thermal_voltage(temperature);
}

void MaterialParams::validate() const
{
    require_positive(mu_n, "material.mu_n");
    require_positive(mu_p, "material.mu_p");
    require_positive(eps_r, "material.eps_r");
    require_positive(temperature, "material.temperature");
    require_positive(k_rec, "material.k_rec");
    require_positive(pair_distance, "material.pair_distance");
    if (!(generation >= 0.0) || !std::isfinite(generation))
    {
        throw std::invalid_argument("illumination.G must be >= 0");
    }
    if (gamma_override)
        require_positive(*gamma_override, "material.gamma");
    if (kdiss_override)
        require_positive(*kdiss_override, "material.k_diss");
    if (v_max)
        require_positive(*v_max, "material.v_max");
}

Contact Contact::with_densities(double psi, double n, double p, double s)
{
    Contact c;
    c.psi = psi;
    c.alpha_n = s;
    c.alpha_p = s;
    c.beta_n = s * n;
    c.beta_p = s * p;
    return c;
}

void ContactParams::validate() const
{
    for (auto const* c : {&cathode, &anode})
    {
        char const* name = (c == &cathode) ? "contacts.cathode" : "contacts.anode";
        auto field = [name](char const* f) {
            return std::string(name) + "." + f;
        };
        if (!(c->kappa_n >= 0.0) || !(c->kappa_p >= 0.0))
            throw std::invalid_argument(field("kappa") + " must be >= 0");
        require_positive(c->alpha_n, field("alpha_n").c_str());
        require_positive(c->alpha_p, field("alpha_p").c_str());
        if (!(c->beta_n >= 0.0) || !(c->beta_p >= 0.0))
            throw std::invalid_argument(field("beta") + " must be >= 0");
        if (pins_n(*c))
            require_positive(c->n_eq(), field("n_eq").c_str());
        if (pins_p(*c))
            require_positive(c->p_eq(), field("p_eq").c_str());
        if (!std::isfinite(c->psi))
            throw std::invalid_argument(field("psi") + " must be finite");
    }
}

ContactParams default_contacts(double built_in,
                               double vth,
                               double barrier,
                               double effective_dos)
{
    double const gap = built_in + 2 * barrier;
    double const majority = effective_dos * std::exp(-barrier / vth);
    double const minority = effective_dos * std::exp(-(gap - barrier) / vth);
    ContactParams contacts;
    contacts.cathode = Contact::with_densities(built_in, majority, minority);
    contacts.anode = Contact::with_densities(0.0, minority, majority);
    contacts.mode = BoundaryMode::dirichlet;
    return contacts;
}

bool StateVector::is_positive() const
{
    auto positive = [](std::vector<double> const& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; });
    };
    return positive(n) && positive(p) && positive(X);
}

//---------------------------------------------------------------------------//
double thermal_voltage(double temperature)
{
    if (!(temperature > 0.0))
    {
        throw DomainError("temperature must be positive");
    }
    return PhysicalConstants::kB * temperature / PhysicalConstants::q;
}

double einstein_diffusion(double mobility, double vth)
{
    if (!(mobility > 0.0) || !(vth > 0.0))
    {
        throw DomainError("Einstein relation needs positive mobility and Vth");
    }
    return vth * mobility;
}

double langevin_gamma(double mu_n, double mu_p, double permittivity)
{
    if (!(mu_n > 0.0) || !(mu_p > 0.0) || !(permittivity > 0.0))
    {
        throw DomainError("Langevin coefficient needs positive inputs");
    }
    return PhysicalConstants::q * (mu_n + mu_p) / permittivity;
}

double onsager_series(double b, double rel_tol)
{
    if (b < 0.0)
    {
        throw DomainError("Onsager series argument must be >= 0");
    }
    // term_k = (2b)^k / (k! (k+1)!)
    double sum = 1.0;
    double term = 1.0;
    for (int k = 1; k < 500; ++k)
    {
        term *= 2.0 * b / (static_cast<double>(k) * (k + 1));
        sum += term;
        if (term < rel_tol * sum)
            break;
    }
    return sum;
}

double pair_binding_energy(MaterialParams const& params)
{
    constexpr double q = PhysicalConstants::q;
    return q * q / (4 * pi * params.permittivity() * params.pair_distance);
}

double braun_onsager_kdiss(double field_magnitude,
                           MaterialParams const& params,
                           double gamma)
{
    if (params.kdiss_override)
    {
        return *params.kdiss_override;
    }
    if (!(field_magnitude >= 0.0))
    {
        throw DomainError("field magnitude must be >= 0");
    }
    constexpr double q = PhysicalConstants::q;
    double const kT = PhysicalConstants::kB * params.temperature;
    double const eps = params.permittivity();
    double const a = params.pair_distance;

    double const prefactor = 3 * gamma / (4 * pi * a * a * a);
    double const b = q * q * q * field_magnitude / (8 * pi * eps * kT * kT);
    return prefactor * std::exp(-pair_binding_energy(params) / kT)
           * onsager_series(b);
}

double exciton_tau(double k_diss, double k_rec)
{
    if (!(k_diss >= 0.0) || !(k_rec >= 0.0) || !(k_diss + k_rec > 0.0))
    {
        throw DomainError("exciton lifetime needs k_diss + k_rec > 0");
    }
    return 1.0 / (k_diss + k_rec);
}

double xi(double t, double x0, double generation, double tau)
{
    double const decay = std::exp(-t / tau);
    return x0 * decay - tau * generation * std::expm1(-t / tau);
}

//---------------------------------------------------------------------------//
RateModel::RateModel(MaterialParams const& params)
    : params_(params)
    , gamma_(params.gamma_override
                 ? *params.gamma_override
                 : langevin_gamma(params.mu_n, params.mu_p, params.permittivity()))
{
}

void RateModel::freeze_at(double field_magnitude)
{
    frozen_ = braun_onsager_kdiss(field_magnitude, params_, gamma_);
}

double RateModel::kdiss(double field_magnitude) const
{
    if (frozen_)
        return *frozen_;
    return braun_onsager_kdiss(field_magnitude, params_, gamma_);
}

double RateModel::tau(double field_magnitude) const
{
    return exciton_tau(kdiss(field_magnitude), params_.k_rec);
}

}  // namespace oscsim
