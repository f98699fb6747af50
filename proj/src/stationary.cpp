#include "oscsim/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oscsim/banded.hpp"
#include "oscsim/sg.hpp"

namespace oscsim
{
std::vector<double> stationary_x(std::span<double const> n,
                                 std::span<double const> p,
                                 double generation,
                                 double gamma,
                                 std::span<double const> tau)
{
    std::vector<double> x(n.size());
    for (std::size_t i = 0; i < n.size(); ++i)
        x[i] = tau[i] * (generation + gamma * p[i] * n[i]);
    return x;
}

std::vector<double> stationary_rates(std::span<double const> n,
                                     std::span<double const> p,
                                     double generation,
                                     std::span<double const> kdiss,
                                     double gamma,
                                     double k_rec)
{
    std::vector<double> u(n.size());
    for (std::size_t i = 0; i < n.size(); ++i)
    {
        double const tau = exciton_tau(kdiss[i], k_rec);
        u[i] = tau * (kdiss[i] * generation - gamma * k_rec * p[i] * n[i]);
    }
    return u;
}

double reference_density(double generation,
                         double kdiss,
                         double gamma,
                         double k_rec,
                         ContactParams const& contacts)
{
    if (generation > 0.0)
        return std::sqrt(kdiss * generation / (gamma * k_rec));
    double const c = contacts.cathode.n_eq() * contacts.cathode.p_eq();
    double const a = contacts.anode.n_eq() * contacts.anode.p_eq();
    return std::pow(c * a, 0.25);
}

SlotboomState SlotboomState::from_densities(std::span<double const> phi,
                                            std::span<double const> n,
                                            std::span<double const> p,
                                            double n_r,
                                            double vth)
{
    SlotboomState s;
    s.n_r = n_r;
    s.phi.assign(phi.begin(), phi.end());
    s.u.resize(phi.size());
    s.v.resize(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i)
    {
        s.u[i] = n[i] / n_r * std::exp(-phi[i] / vth);
        s.v[i] = p[i] / n_r * std::exp(phi[i] / vth);
    }
    return s;
}

std::vector<double> SlotboomState::electrons(double vth) const
{
    std::vector<double> n(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i)
        n[i] = n_r * u[i] * std::exp(phi[i] / vth);
    return n;
}

std::vector<double> SlotboomState::holes(double vth) const
{
    std::vector<double> p(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i)
        p[i] = n_r * v[i] * std::exp(-phi[i] / vth);
    return p;
}

StationaryBounds stationary_bounds(ContactParams const& contacts, double n_r, double vth)
{
    StationaryBounds b;
    Contact const* cs[2] = {&contacts.cathode, &contacts.anode};
    double sup_psi = -1e300;
    double inf_psi = 1e300;
    double sup_abs_psi = 0.0;
    for (int k = 0; k < 2; ++k)
    {
        Contact const& c = *cs[k];
        b.phi_nD[k] = c.psi - vth * std::log(c.n_eq() / n_r);
        b.phi_pD[k] = c.psi + vth * std::log(c.p_eq() / n_r);
        sup_psi = std::max(sup_psi, c.psi);
        inf_psi = std::min(inf_psi, c.psi);
        sup_abs_psi = std::max(sup_abs_psi, std::abs(c.psi));
    }
    double const sup_part = std::max(std::max(-b.phi_nD[0], -b.phi_nD[1]),
                                     std::max(b.phi_pD[0], b.phi_pD[1]));
    double const inf_part = std::min(std::min(-b.phi_nD[0], -b.phi_nD[1]),
                                     std::min(b.phi_pD[0], b.phi_pD[1]));
    b.psi_plus = std::max(sup_part, -inf_part);
    b.psi_hat_plus = sup_abs_psi + b.psi_plus;
    b.density_lower = n_r * std::exp(-b.psi_hat_plus / vth);
    b.density_upper = n_r * std::exp(b.psi_hat_plus / vth);
    b.potential_lower = std::min(inf_psi, -b.psi_plus);
    b.potential_upper = std::max(sup_psi, b.psi_plus);
    return b;
}

std::string StationaryBounds::check(StateVector const& state, double rel_slack) const
{
    std::ostringstream msg;
    double const lo = density_lower * (1.0 - rel_slack);
    double const hi = density_upper * (1.0 + rel_slack);
    double const plo = potential_lower - rel_slack * std::abs(potential_lower);
    double const phi_hi = potential_upper + rel_slack * std::abs(potential_upper);
    for (std::size_t i = 0; i < state.size(); ++i)
    {
        for (auto [name, value] : {std::pair{"n", state.n[i]}, std::pair{"p", state.p[i]}})
        {
            if (value < lo || value > hi)
            {
                msg << name << "[" << i << "] = " << value << " outside [" << density_lower << ", "
                    << density_upper << "]";
                return msg.str();
            }
        }
        if (state.phi[i] < plo || state.phi[i] > phi_hi)
        {
            msg << "phi[" << i << "] = " << state.phi[i] << " outside [" << potential_lower << ", "
                << potential_upper << "]";
            return msg.str();
        }
    }
    return {};
}

std::string StationaryBounds::describe() const
{
    std::ostringstream out;
    out.precision(10);
    out << "phi_nD = (" << phi_nD[0] << ", " << phi_nD[1] << ") V\n"
        << "phi_pD = (" << phi_pD[0] << ", " << phi_pD[1] << ") V\n"
        << "psi_plus = " << psi_plus << " V\n"
        << "psi_hat_plus = " << psi_hat_plus << " V\n"
        << "density bounds = [" << density_lower << ", " << density_upper << "] 1/m^3\n"
        << "potential bounds = [" << potential_lower << ", " << potential_upper << "] V\n";
    return out.str();
}

namespace
{
//! Nonlinear Poisson with n, p following phi through the Boltzmann factors.
void solve_poisson(Mesh1D const& mesh,
                   SlotboomState& s,
                   ContactParams const& contacts,
                   double eps,
                   double vth,
                   int max_iterations,
                   double tolerance)
{
    constexpr double q = PhysicalConstants::q;
    std::size_t const N = mesh.size();
    s.phi.front() = contacts.cathode.psi;
    s.phi.back() = contacts.anode.psi;
    for (int it = 0; it < max_iterations; ++it)
    {
        BandedMatrix jac(N, 1, 1);
        std::vector<double> rhs(N, 0.0);
        jac.set_identity_row(0);
        jac.set_identity_row(N - 1);
        for (std::size_t i = 1; i + 1 < N; ++i)
        {
            double const vol = mesh.volume(i);
            double const left = eps / (mesh.h(i - 1) * vol);
            double const right = eps / (mesh.h(i) * vol);
            double const en = s.n_r * s.u[i] * std::exp(s.phi[i] / vth);
            double const ep = s.n_r * s.v[i] * std::exp(-s.phi[i] / vth);
            double const f = -right * (s.phi[i + 1] - s.phi[i]) + left * (s.phi[i] - s.phi[i - 1])
                             + q * (en - ep);
            jac.add(i, i - 1, -left);
            jac.add(i, i, left + right + q * (en + ep) / vth);
            jac.add(i, i + 1, -right);
            rhs[i] = -f;
        }
        BandedLU(jac).solve_in_place(rhs);
        double worst = 0.0;
        for (std::size_t i = 1; i + 1 < N; ++i)
        {
            // Logarithmic damping of large steps keeps the Boltzmann terms bounded.
            double const d = rhs[i];
            double const step = std::abs(d) > vth ? std::copysign(vth * (1.0 + std::log(std::abs(d) / vth)), d) : d;
            s.phi[i] += step;
            worst = std::max(worst, std::abs(step));
        }
        if (worst < tolerance)
            return;
    }
}

//! -div J(w) / n_r + c w = s at fixed phi, J in Slotboom form, Dirichlet ends.
std::vector<double> solve_slotboom(Mesh1D const& mesh,
                                   SlotboomState const& s,
                                   Carrier carrier,
                                   double mu,
                                   double vth,
                                   std::span<double const> reaction,
                                   std::span<double const> source,
                                   double left_value,
                                   double right_value)
{
    std::size_t const N = mesh.size();
    bool const electron = carrier == Carrier::electron;
    BandedMatrix a(N, 1, 1);
    std::vector<double> rhs(N, 0.0);
    for (std::size_t i = 1; i + 1 < N; ++i)
    {
        a.add(i, i, reaction[i]);
        rhs[i] = source[i];
    }
    for (std::size_t e = 0; e + 1 < N; ++e)
    {
        auto const flux = sg_edge_flux(1.0, 1.0, s.phi[e], s.phi[e + 1], mu, vth, mesh.h(e), carrier);
        // density / n_r = w e^{+-phi/Vth}
        double const sgn = electron ? 1.0 : -1.0;
        double const ci = flux.coeff_i * std::exp(sgn * s.phi[e] / vth);
        double const cj = flux.coeff_j * std::exp(sgn * s.phi[e + 1] / vth);
        double const vl = mesh.volume(e);
        double const vr = mesh.volume(e + 1);
        a.add(e, e, -ci / vl);
        a.add(e, e + 1, -cj / vl);
        a.add(e + 1, e, ci / vr);
        a.add(e + 1, e + 1, cj / vr);
    }
    a.set_identity_row(0);
    a.set_identity_row(N - 1);
    rhs[0] = left_value;
    rhs[N - 1] = right_value;
    auto const equil = a.equilibrate_rows();
    for (std::size_t i = 0; i < N; ++i)
        rhs[i] *= equil[i];
    BandedLU(a).solve_in_place(rhs);
    return rhs;
}
}  // namespace

SteadyResult steady_solve(Mesh1D const& mesh,
                          RateModel const& rates,
                          ContactParams const& contacts,
                          GummelOptions const& options,
                          StateVector const* initial)
{
    contacts.validate();
    if (!contacts.pins_n(contacts.cathode) || !contacts.pins_n(contacts.anode)
        || !contacts.pins_p(contacts.cathode) || !contacts.pins_p(contacts.anode))
    {
        throw std::invalid_argument("steady_solve needs Dirichlet carrier contacts");
    }
    auto const& params = rates.params();
    double const vth = params.thermal_voltage();
    double const eps = params.permittivity();
    double const G = rates.generation();
    double const gamma = rates.gamma();
    double const krec = rates.k_rec();
    std::size_t const N = mesh.size();
    double const mean_field = std::abs(contacts.anode.psi - contacts.cathode.psi) / mesh.length();

    SteadyResult out;
    double const n_r = reference_density(G, rates.kdiss(mean_field), gamma, krec, contacts);
    out.bounds = stationary_bounds(contacts, n_r, vth);

    SlotboomState& s = out.slotboom;
    double const u0 = contacts.cathode.n_eq() / n_r * std::exp(-contacts.cathode.psi / vth);
    double const u1 = contacts.anode.n_eq() / n_r * std::exp(-contacts.anode.psi / vth);
    double const v0 = contacts.cathode.p_eq() / n_r * std::exp(contacts.cathode.psi / vth);
    double const v1 = contacts.anode.p_eq() / n_r * std::exp(contacts.anode.psi / vth);
    if (initial)
    {
        s = SlotboomState::from_densities(initial->phi, initial->n, initial->p, n_r, vth);
    }
    else
    {
        s.n_r = n_r;
        s.phi.resize(N);
        s.u.resize(N);
        s.v.resize(N);
        for (std::size_t i = 0; i < N; ++i)
        {
            double const w = mesh.x(i) / mesh.length();
            s.phi[i] = (1.0 - w) * contacts.cathode.psi + w * contacts.anode.psi;
            s.u[i] = std::exp((1.0 - w) * std::log(u0) + w * std::log(u1));
            s.v[i] = std::exp((1.0 - w) * std::log(v0) + w * std::log(v1));
        }
    }

    std::vector<double> kd(N), tau(N), reaction(N), source(N);
    double const tol = options.tolerance * vth;
    for (int it = 1; it <= options.max_iterations; ++it)
    {
        std::vector<double> const phi_old = s.phi;
        solve_poisson(mesh, s, contacts, eps, vth, options.poisson_iterations, 1e-3 * tol);

        auto const field = mesh.node_field(s.phi);
        for (std::size_t i = 0; i < N; ++i)
        {
            kd[i] = rates.kdiss(field[i]);
            tau[i] = exciton_tau(kd[i], krec);
            source[i] = tau[i] * kd[i] * G / n_r;
        }
        // U / n_r = tau k_diss G / n_r - tau gamma k_rec n_r u v
        for (std::size_t i = 0; i < N; ++i)
            reaction[i] = tau[i] * gamma * krec * n_r * s.v[i];
        s.u = solve_slotboom(mesh, s, Carrier::electron, params.mu_n, vth, reaction, source, u0, u1);
        for (std::size_t i = 0; i < N; ++i)
            reaction[i] = tau[i] * gamma * krec * n_r * s.u[i];
        s.v = solve_slotboom(mesh, s, Carrier::hole, params.mu_p, vth, reaction, source, v0, v1);

        double update = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            update = std::max(update, std::abs(s.phi[i] - phi_old[i]));
        out.report.updates.push_back(update);
        out.report.iterations = it;
        if (update < tol && it > 1)
        {
            out.report.converged = true;
            break;
        }
    }
    if (!out.report.converged)
        throw ConvergenceError("steady_solve: no convergence after "
                               + std::to_string(options.max_iterations) + " outer iterations");

    // Final Poisson pass so phi matches the converged densities.
    solve_poisson(mesh, s, contacts, eps, vth, options.poisson_iterations, 1e-3 * tol);
    StateVector& st = out.state;
    st = StateVector(N);
    st.phi = s.phi;
    st.n = s.electrons(vth);
    st.p = s.holes(vth);
    auto const field = mesh.node_field(s.phi);
    for (std::size_t i = 0; i < N; ++i)
        tau[i] = rates.tau(field[i]);
    st.X = stationary_x(st.n, st.p, G, gamma, tau);
    out.report.bounds_violation = out.bounds.check(st);
    return out;
}

}  // namespace oscsim
