#pragma once

#include <optional>
#include <span>
#include <vector>

#include "oscsim/dae.hpp"
#include "oscsim/mesh.hpp"
#include "oscsim/model.hpp"

namespace oscsim
{
enum class ModelKind
{
    full,     //!< phi, n, p, X per node
    reduced,  //!< phi, n, p per node with X eliminated
};

//! Initial fields the reduced model's memory terms refer back to.
struct ReducedInitialData
{
    std::vector<double> X0;
    std::vector<double> pn0;  //!< p(0) n(0)
};

/*!
 * Semi-discrete device equations on a mesh.
 *
 * Rows are written per unit volume:
 *
 *   f_phi = -div(eps grad phi) + q (n - p)
 *   f_n   = n' - div J_n - U
 *   f_p   = p' - div J_p - U
 *   f_X   = X' - (G + gamma p n - (k_diss + k_rec) X)
 *
 * with U = k_diss X - gamma p n in the full model, and the modified rates
 * U = G~(t) - R~(t) p n in the reduced one.
 */
class DeviceModel final : public DaeProblem
{
  public:
    static constexpr std::size_t phi_c = 0;
    static constexpr std::size_t n_c = 1;
    static constexpr std::size_t p_c = 2;
    static constexpr std::size_t x_c = 3;

    DeviceModel(Mesh1D mesh, RateModel rates, ContactParams contacts);
    //! Reduced model; `rates` must have constant coefficients.
    DeviceModel(Mesh1D mesh,
                RateModel rates,
                ContactParams contacts,
                ReducedInitialData initial);

    std::size_t size() const override { return mesh_.size() * block_; }
    std::size_t block_size() const override { return block_; }
    std::size_t bandwidth() const override { return 2 * block_ - 1; }
    bool is_differential(std::size_t k) const override;
    bool is_positive(std::size_t k) const override { return k % block_ != phi_c; }

    void residual(double t,
                  std::span<double const> y,
                  std::span<double const> ydot,
                  std::span<double> f,
                  std::span<double> magnitude) const override;
    void jacobian(double t,
                  std::span<double const> y,
                  double cj,
                  BandedMatrix& jac) const override;

    ModelKind kind() const { return kind_; }
    Mesh1D const& mesh() const { return mesh_; }
    RateModel const& rates() const { return rates_; }
    ContactParams const& contacts() const { return contacts_; }
    MaterialParams const& params() const { return rates_.params(); }

    std::size_t index(std::size_t node, std::size_t component) const
    {
        return node * block_ + component;
    }
    std::vector<double> pack(StateVector const& state) const;
    //! Reduced model: X is rebuilt from the lumped memory representation.
    StateVector unpack(std::span<double const> y, double t) const;
    //! Nodal k_diss at the given unknowns.
    std::vector<double> kdiss_field(std::span<double const> y) const;

  private:
    struct Rates
    {
        std::vector<double> kdiss;
        std::vector<double> source;  //!< reduced G~ per node
        double recombination = 0.0;  //!< gamma (full) or R~ (reduced)
    };
    Rates evaluate_rates(double t, std::span<double const> y) const;

    Mesh1D mesh_;
    RateModel rates_;
    ContactParams contacts_;
    ModelKind kind_;
    std::size_t block_;
    std::optional<ReducedInitialData> initial_;
};

}  // namespace oscsim
