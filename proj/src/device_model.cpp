#include "oscsim/device_model.hpp"

#include <cmath>
#include <stdexcept>

#include "oscsim/reduced_transient.hpp"
#include "oscsim/sg.hpp"

namespace oscsim
{
namespace
{
ReducedKinetics kinetics_of(RateModel const& rates)
{
    return {rates.generation(), rates.gamma(), rates.kdiss(0.0), rates.k_rec()};
}
}  // namespace

DeviceModel::DeviceModel(Mesh1D mesh, RateModel rates, ContactParams contacts)
    : mesh_(std::move(mesh)),
      rates_(std::move(rates)),
      contacts_(std::move(contacts)),
      kind_(ModelKind::full),
      block_(4)
{
    contacts_.validate();
}

DeviceModel::DeviceModel(Mesh1D mesh,
                         RateModel rates,
                         ContactParams contacts,
                         ReducedInitialData initial)
    : mesh_(std::move(mesh)),
      rates_(std::move(rates)),
      contacts_(std::move(contacts)),
      kind_(ModelKind::reduced),
      block_(3),
      initial_(std::move(initial))
{
    contacts_.validate();
    if (!rates_.is_constant())
        throw std::invalid_argument("reduced model requires constant k_diss (freeze or override)");
    if (initial_->X0.size() != mesh_.size() || initial_->pn0.size() != mesh_.size())
        throw std::invalid_argument("reduced model initial fields do not match the mesh");
}

bool DeviceModel::is_differential(std::size_t k) const
{
    std::size_t const node = k / block_;
    std::size_t const c = k % block_;
    if (c == phi_c)
        return false;
    if (c == x_c)
        return true;
    Contact const* contact = nullptr;
    if (node == 0)
        contact = &contacts_.cathode;
    else if (node + 1 == mesh_.size())
        contact = &contacts_.anode;
    if (!contact)
        return true;
    return c == n_c ? !contacts_.pins_n(*contact) : !contacts_.pins_p(*contact);
}

std::vector<double> DeviceModel::kdiss_field(std::span<double const> y) const
{
    std::size_t const N = mesh_.size();
    if (rates_.is_constant())
        return std::vector<double>(N, rates_.kdiss(0.0));
    std::vector<double> phi(N);
    for (std::size_t i = 0; i < N; ++i)
        phi[i] = y[index(i, phi_c)];
    auto field = mesh_.node_field(phi);
    for (double& e : field)
        e = rates_.kdiss(e);
    return field;
}

DeviceModel::Rates DeviceModel::evaluate_rates(double t, std::span<double const> y) const
{
    Rates r;
    r.kdiss = kdiss_field(y);
    if (kind_ == ModelKind::full)
    {
        r.recombination = rates_.gamma();
        return r;
    }
    auto const mod = modified_rates(t, initial_->X0, initial_->pn0, kinetics_of(rates_));
    r.source = mod.generation;
    r.recombination = mod.recombination;
    return r;
}

void DeviceModel::residual(double t,
                           std::span<double const> y,
                           std::span<double const> ydot,
                           std::span<double> f,
                           std::span<double> magnitude) const
{
    if (y.size() != size() || ydot.size() != size() || f.size() != size())
        throw std::invalid_argument("residual vectors do not match the model size");
    bool const want_mag = !magnitude.empty();
    std::size_t const N = mesh_.size();
    auto const& params = rates_.params();
    double const eps = params.permittivity();
    double const vth = params.thermal_voltage();
    double const G = rates_.generation();
    constexpr double q = PhysicalConstants::q;
    Rates const r = evaluate_rates(t, y);

    std::fill(f.begin(), f.end(), 0.0);
    if (want_mag)
        std::fill(magnitude.begin(), magnitude.end(), 0.0);
    auto mag = [&](std::size_t k, double v) {
        if (want_mag)
            magnitude[k] += std::abs(v);
    };

    for (std::size_t i = 0; i < N; ++i)
    {
        double const phi = y[index(i, phi_c)];
        double const n = y[index(i, n_c)];
        double const p = y[index(i, p_c)];
        std::size_t const kphi = index(i, phi_c);
        if (i == 0 || i + 1 == N)
        {
            double const psi = i == 0 ? contacts_.cathode.psi : contacts_.anode.psi;
            f[kphi] = phi - psi;
            mag(kphi, phi);
            mag(kphi, psi);
        }
        else
        {
            double const vol = mesh_.volume(i);
            double const left = (phi - y[index(i - 1, phi_c)]) / mesh_.h(i - 1);
            double const right = (y[index(i + 1, phi_c)] - phi) / mesh_.h(i);
            f[kphi] = -eps * (right - left) / vol + q * (n - p);
            mag(kphi, eps * left / vol);
            mag(kphi, eps * right / vol);
            mag(kphi, q * n);
            mag(kphi, q * p);
        }

        double const pn = p * n;
        double gain;
        double loss;
        if (kind_ == ModelKind::full)
        {
            double const X = y[index(i, x_c)];
            gain = r.kdiss[i] * X;
            loss = r.recombination * pn;
            std::size_t const kx = index(i, x_c);
            double const decay = (r.kdiss[i] + params.k_rec) * X;
            f[kx] = ydot[kx] - (G + loss - decay);
            mag(kx, ydot[kx]);
            mag(kx, G);
            mag(kx, loss);
            mag(kx, decay);
        }
        else
        {
            gain = r.source[i];
            loss = r.recombination * pn;
        }
        for (std::size_t c : {n_c, p_c})
        {
            std::size_t const k = index(i, c);
            f[k] = ydot[k] - (gain - loss);
            mag(k, ydot[k]);
            mag(k, gain);
            mag(k, loss);
        }
    }

    for (std::size_t e = 0; e + 1 < N; ++e)
    {
        double const phi_i = y[index(e, phi_c)];
        double const phi_j = y[index(e + 1, phi_c)];
        double const vl = mesh_.volume(e);
        double const vr = mesh_.volume(e + 1);
        for (std::size_t c : {n_c, p_c})
        {
            bool const electron = c == n_c;
            double const eta_i = y[index(e, c)];
            double const eta_j = y[index(e + 1, c)];
            auto const flux = sg_edge_flux(eta_i, eta_j, phi_i, phi_j,
                                           electron ? params.mu_n : params.mu_p, vth,
                                           mesh_.h(e),
                                           electron ? Carrier::electron : Carrier::hole,
                                           params.v_max);
            f[index(e, c)] -= flux.value / vl;
            f[index(e + 1, c)] += flux.value / vr;
            double const size = std::abs(flux.coeff_i * eta_i) + std::abs(flux.coeff_j * eta_j);
            mag(index(e, c), size / vl);
            mag(index(e + 1, c), size / vr);
        }
    }

    auto boundary = [&](Contact const& contact, std::size_t node) {
        for (std::size_t c : {n_c, p_c})
        {
            bool const electron = c == n_c;
            std::size_t const k = index(node, c);
            double const eta = y[k];
            double const alpha = electron ? contact.alpha_n : contact.alpha_p;
            double const beta = electron ? contact.beta_n : contact.beta_p;
            if (electron ? contacts_.pins_n(contact) : contacts_.pins_p(contact))
            {
                double const target = beta / alpha;
                f[k] = eta - target;
                if (want_mag)
                    magnitude[k] = std::abs(eta) + std::abs(target);
                continue;
            }
            double const kappa = electron ? contact.kappa_n : contact.kappa_p;
            double const vol = mesh_.volume(node);
            f[k] += (alpha * eta - beta) / (kappa * vol);
            mag(k, alpha * eta / (kappa * vol));
            mag(k, beta / (kappa * vol));
        }
    };
    boundary(contacts_.cathode, 0);
    boundary(contacts_.anode, N - 1);
}

void DeviceModel::jacobian(double t,
                           std::span<double const> y,
                           double cj,
                           BandedMatrix& jac) const
{
    if (jac.size() != size() || jac.lower() < bandwidth() || jac.upper() < bandwidth())
        jac = BandedMatrix(size(), bandwidth(), bandwidth());
    else
        jac.fill_zero();

    std::size_t const N = mesh_.size();
    auto const& params = rates_.params();
    double const eps = params.permittivity();
    double const vth = params.thermal_voltage();
    constexpr double q = PhysicalConstants::q;
    Rates const r = evaluate_rates(t, y);

    for (std::size_t i = 0; i < N; ++i)
    {
        std::size_t const kphi = index(i, phi_c);
        std::size_t const kn = index(i, n_c);
        std::size_t const kp = index(i, p_c);
        if (i == 0 || i + 1 == N)
        {
            jac.add(kphi, kphi, 1.0);
        }
        else
        {
            double const vol = mesh_.volume(i);
            double const left = eps / (mesh_.h(i - 1) * vol);
            double const right = eps / (mesh_.h(i) * vol);
            jac.add(kphi, index(i - 1, phi_c), -left);
            jac.add(kphi, kphi, left + right);
            jac.add(kphi, index(i + 1, phi_c), -right);
            jac.add(kphi, kn, q);
            jac.add(kphi, kp, -q);
        }

        double const n = y[kn];
        double const p = y[kp];
        double const R = r.recombination;
        for (std::size_t k : {kn, kp})
        {
            jac.add(k, k, cj);
            jac.add(k, kn, R * p);
            jac.add(k, kp, R * n);
            if (kind_ == ModelKind::full)
                jac.add(k, index(i, x_c), -r.kdiss[i]);
        }
        if (kind_ == ModelKind::full)
        {
            std::size_t const kx = index(i, x_c);
            jac.add(kx, kx, cj + r.kdiss[i] + params.k_rec);
            jac.add(kx, kn, -R * p);
            jac.add(kx, kp, -R * n);
        }
        if (kind_ == ModelKind::full && !rates_.is_constant())
        {
            // k_diss follows the nodal field |phi_hi - phi_lo| / (x_hi - x_lo).
            std::size_t const lo = i == 0 ? 0 : (i + 1 == N ? N - 2 : i - 1);
            std::size_t const hi = i == 0 ? 1 : (i + 1 == N ? N - 1 : i + 1);
            double const dx = mesh_.x(hi) - mesh_.x(lo);
            double const diff = y[index(hi, phi_c)] - y[index(lo, phi_c)];
            double const field = std::abs(diff / dx);
            double const step = 1e-6 * std::max(field, 1.0);
            double const dkd = (rates_.kdiss(field + step) - rates_.kdiss(std::max(field - step, 0.0)))
                               / (field + step - std::max(field - step, 0.0));
            double const dfield = (diff >= 0.0 ? 1.0 : -1.0) / dx;
            double const g = y[index(i, x_c)] * dkd * dfield;
            for (std::size_t k : {kn, kp})
            {
                jac.add(k, index(hi, phi_c), -g);
                jac.add(k, index(lo, phi_c), g);
            }
            jac.add(index(i, x_c), index(hi, phi_c), g);
            jac.add(index(i, x_c), index(lo, phi_c), -g);
        }
    }

    for (std::size_t e = 0; e + 1 < N; ++e)
    {
        double const phi_i = y[index(e, phi_c)];
        double const phi_j = y[index(e + 1, phi_c)];
        double const vl = mesh_.volume(e);
        double const vr = mesh_.volume(e + 1);
        for (std::size_t c : {n_c, p_c})
        {
            bool const electron = c == n_c;
            auto const flux = sg_edge_flux(y[index(e, c)], y[index(e + 1, c)], phi_i, phi_j,
                                           electron ? params.mu_n : params.mu_p, vth,
                                           mesh_.h(e),
                                           electron ? Carrier::electron : Carrier::hole,
                                           params.v_max);
            double const dphi = flux.d_delta * flux.delta_slope;
            // dJ/d eta_i, dJ/d eta_j, dJ/d phi_i, dJ/d phi_j
            double const dj[4] = {flux.coeff_i, flux.coeff_j, -dphi, dphi};
            std::size_t const cols[4] = {index(e, c), index(e + 1, c), index(e, phi_c),
                                         index(e + 1, phi_c)};
            for (int m = 0; m < 4; ++m)
            {
                jac.add(index(e, c), cols[m], -dj[m] / vl);
                jac.add(index(e + 1, c), cols[m], dj[m] / vr);
            }
        }
    }

    auto boundary = [&](Contact const& contact, std::size_t node) {
        for (std::size_t c : {n_c, p_c})
        {
            bool const electron = c == n_c;
            std::size_t const k = index(node, c);
            if (electron ? contacts_.pins_n(contact) : contacts_.pins_p(contact))
            {
                jac.set_identity_row(k);
                continue;
            }
            double const alpha = electron ? contact.alpha_n : contact.alpha_p;
            double const kappa = electron ? contact.kappa_n : contact.kappa_p;
            jac.add(k, k, alpha / (kappa * mesh_.volume(node)));
        }
    };
    boundary(contacts_.cathode, 0);
    boundary(contacts_.anode, N - 1);
}

std::vector<double> DeviceModel::pack(StateVector const& state) const
{
    std::size_t const N = mesh_.size();
    if (state.size() != N)
        throw std::invalid_argument("state does not match the mesh");
    std::vector<double> y(size());
    for (std::size_t i = 0; i < N; ++i)
    {
        y[index(i, phi_c)] = state.phi[i];
        y[index(i, n_c)] = state.n[i];
        y[index(i, p_c)] = state.p[i];
        if (kind_ == ModelKind::full)
            y[index(i, x_c)] = state.X[i];
    }
    return y;
}

StateVector DeviceModel::unpack(std::span<double const> y, double t) const
{
    std::size_t const N = mesh_.size();
    StateVector s(N);
    s.t = t;
    ReducedKinetics k{};
    if (kind_ == ModelKind::reduced)
        k = kinetics_of(rates_);
    for (std::size_t i = 0; i < N; ++i)
    {
        s.phi[i] = y[index(i, phi_c)];
        s.n[i] = y[index(i, n_c)];
        s.p[i] = y[index(i, p_c)];
        if (kind_ == ModelKind::full)
            s.X[i] = y[index(i, x_c)];
        else
            s.X[i] = reconstruct_x(t, initial_->X0[i], initial_->pn0[i], s.n[i] * s.p[i], k);
    }
    return s;
}

}  // namespace oscsim
