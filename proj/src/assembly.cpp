#include "oscsim/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oscsim
{
namespace
{
void require_size(std::span<double const> field, Mesh1D const& mesh, char const* what)
{
    if (field.size() != mesh.size())
    {
        throw std::invalid_argument(std::string(what) + " does not match the mesh size");
    }
}
}  // namespace

BandedSystem assemble_poisson(Mesh1D const& mesh,
                              std::span<double const> n,
                              std::span<double const> p,
                              ContactParams const& contacts,
                              double permittivity)
{
    require_size(n, mesh, "electron density");
    require_size(p, mesh, "hole density");
    std::size_t const N = mesh.size();
    BandedSystem sys{BandedMatrix(N, 1, 1), std::vector<double>(N, 0.0)};
    constexpr double q = PhysicalConstants::q;

    for (std::size_t i = 1; i + 1 < N; ++i)
    {
        double const vol = mesh.volume(i);
        double const left = permittivity / (mesh.h(i - 1) * vol);
        double const right = permittivity / (mesh.h(i) * vol);
        sys.matrix.add(i, i - 1, -left);
        sys.matrix.add(i, i, left + right);
        sys.matrix.add(i, i + 1, -right);
        sys.rhs[i] = q * (p[i] - n[i]);
    }
    sys.matrix.set_identity_row(0);
    sys.rhs[0] = contacts.cathode.psi;
    sys.matrix.set_identity_row(N - 1);
    sys.rhs[N - 1] = contacts.anode.psi;
    return sys;
}

BandedSystem assemble_continuity(Mesh1D const& mesh,
                                 std::span<double const> phi,
                                 CarrierTransport const& transport,
                                 std::span<double const> reaction,
                                 std::span<double const> source,
                                 double theta0,
                                 std::span<double const> history_sum,
                                 ContactParams const& contacts)
{
    require_size(phi, mesh, "potential");
    require_size(reaction, mesh, "reaction coefficient");
    require_size(source, mesh, "source");
    if (!history_sum.empty())
        require_size(history_sum, mesh, "history sum");
    if (std::any_of(reaction.begin(), reaction.end(), [](double r) { return r < 0.0; }))
    {
        throw std::invalid_argument("negative reaction coefficient breaks the M-matrix property");
    }

    std::size_t const N = mesh.size();
    BandedSystem sys{BandedMatrix(N, 1, 1), std::vector<double>(N, 0.0)};
    bool const electron = transport.carrier == Carrier::electron;

    for (std::size_t i = 0; i < N; ++i)
    {
        sys.matrix.add(i, i, theta0 + reaction[i]);
        sys.rhs[i] = source[i] - (history_sum.empty() ? 0.0 : history_sum[i]);
    }
    // -div J: edge e contributes -J_e / V_e to its left node and +J_e / V
    // to its right node.
    for (std::size_t e = 0; e + 1 < N; ++e)
    {
        // Densities do not enter the coefficients; unit values suffice.
        auto const flux = sg_edge_flux(1.0, 1.0, phi[e], phi[e + 1],
                                       transport.mobility,
                                       transport.thermal_voltage, mesh.h(e),
                                       transport.carrier, transport.v_max);
        double const vl = mesh.volume(e);
        double const vr = mesh.volume(e + 1);
        sys.matrix.add(e, e, -flux.coeff_i / vl);
        sys.matrix.add(e, e + 1, -flux.coeff_j / vl);
        sys.matrix.add(e + 1, e, flux.coeff_i / vr);
        sys.matrix.add(e + 1, e + 1, flux.coeff_j / vr);
    }

    auto apply_contact = [&](Contact const& c, std::size_t node) {
        bool const pinned = electron ? contacts.pins_n(c) : contacts.pins_p(c);
        double const alpha = electron ? c.alpha_n : c.alpha_p;
        double const beta = electron ? c.beta_n : c.beta_p;
        if (pinned)
        {
            sys.matrix.set_identity_row(node);
            sys.rhs[node] = beta / alpha;
            return;
        }
        double const kappa = electron ? c.kappa_n : c.kappa_p;
        double const vol = mesh.volume(node);
        sys.matrix.add(node, node, alpha / (kappa * vol));
        sys.rhs[node] += beta / (kappa * vol);
    };
    apply_contact(contacts.cathode, 0);
    apply_contact(contacts.anode, N - 1);
    return sys;
}

double CurrentProfile::relative_variation() const
{
    double worst = 0.0;
    for (double j : total)
        worst = std::max(worst, std::abs(j - contact));
    return contact != 0.0 ? worst / std::abs(contact) : worst;
}

CurrentProfile compute_current(Mesh1D const& mesh,
                               StateVector const& state,
                               MaterialParams const& params,
                               std::span<double const> phi_rate)
{
    constexpr double q = PhysicalConstants::q;
    double const vth = params.thermal_voltage();
    double const eps = params.permittivity();
    std::size_t const edges = mesh.edges();

    CurrentProfile out;
    out.conduction.resize(edges);
    out.total.resize(edges);
    for (std::size_t e = 0; e < edges; ++e)
    {
        auto const jn = sg_edge_flux(state.n[e], state.n[e + 1], state.phi[e],
                                     state.phi[e + 1], params.mu_n, vth,
                                     mesh.h(e), Carrier::electron, params.v_max);
        auto const jp = sg_edge_flux(state.p[e], state.p[e + 1], state.phi[e],
                                     state.phi[e + 1], params.mu_p, vth,
                                     mesh.h(e), Carrier::hole, params.v_max);
        out.conduction[e] = q * (jp.value - jn.value);
        double displacement = 0.0;
        if (!phi_rate.empty())
        {
            double const field_rate = -(phi_rate[e + 1] - phi_rate[e]) / mesh.h(e);
            displacement = -eps * field_rate;
        }
        out.total[e] = out.conduction[e] + displacement;
    }
    out.contact = out.total.front();
    return out;
}

}  // namespace oscsim
