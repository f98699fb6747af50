#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace oscsim
{
//---------------------------------------------------------------------------//
/*!
 * Strictly increasing 1D node set on [0, L].
 *
 * Node i owns the dual cell [x_{i-1/2}, x_{i+1/2}] of width volume(i); edge i
 * joins nodes i and i+1 and has length h(i).
 */
class Mesh1D
{
  public:
    //! Uniform mesh with the given node count.
    static Mesh1D uniform(double length, std::size_t nodes);
    //! Geometric refinement toward both contacts; ratio in [1, 1.1].
    static Mesh1D graded(double length, std::size_t nodes, double ratio);

    explicit Mesh1D(std::vector<double> coordinates);

    std::size_t size() const { return x_.size(); }
    std::size_t edges() const { return h_.size(); }
    double length() const { return x_.back(); }
    double x(std::size_t i) const { return x_[i]; }
    double h(std::size_t i) const { return h_[i]; }
    double volume(std::size_t i) const { return vol_[i]; }
    std::span<double const> coordinates() const { return x_; }

    //! Node-centred field magnitude from the potential.
    std::vector<double> node_field(std::span<double const> phi) const;
    //! Edge field E = -dphi/dx.
    std::vector<double> edge_field(std::span<double const> phi) const;

  private:
    std::vector<double> x_;
    std::vector<double> h_;
    std::vector<double> vol_;
};

}  // namespace oscsim
