#include "oscsim/mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace oscsim
{
Mesh1D Mesh1D::uniform(double length, std::size_t nodes)
{
    return graded(length, nodes, 1.0);
}

Mesh1D Mesh1D::graded(double length, std::size_t nodes, double ratio)
{
    if (nodes < 3 || !(length > 0.0))
    {
        throw std::invalid_argument("mesh needs >= 3 nodes and positive length");
    }
    if (!(ratio >= 1.0 && ratio <= 1.1))
    {
        throw std::invalid_argument("mesh grading ratio must lie in [1, 1.1]");
    }
    std::size_t const cells = nodes - 1;
    std::vector<double> width(cells);
    for (std::size_t k = 0; k < cells; ++k)
    {
        auto const from_contact = std::min(k, cells - 1 - k);
        width[k] = std::pow(ratio, static_cast<double>(from_contact));
    }
    // Accumulate from both ends so the node set is mirror symmetric.
    double total = 0.0;
    for (double w : width)
        total += w;
    std::vector<double> x(nodes);
    x.front() = 0.0;
    x.back() = length;
    double left = 0.0;
    double right = 0.0;
    for (std::size_t k = 0; k < cells / 2; ++k)
    {
        left += width[k];
        right += width[cells - 1 - k];
        x[k + 1] = length * (left / total);
        x[cells - 1 - k] = length - length * (right / total);
    }
    if (cells % 2 == 0)
        x[cells / 2] = 0.5 * length;
    return Mesh1D(std::move(x));
}

Mesh1D::Mesh1D(std::vector<double> coordinates) : x_(std::move(coordinates))
{
    if (x_.size() < 3)
        throw std::invalid_argument("mesh needs at least 3 nodes");
    if (x_.front() != 0.0)
        throw std::invalid_argument("mesh must start at x = 0");
    h_.resize(x_.size() - 1);
    for (std::size_t i = 0; i + 1 < x_.size(); ++i)
    {
        h_[i] = x_[i + 1] - x_[i];
        if (!(h_[i] > 0.0))
            throw std::invalid_argument("mesh nodes must be strictly increasing");
    }
    vol_.assign(x_.size(), 0.0);
    for (std::size_t i = 0; i < h_.size(); ++i)
    {
        vol_[i] += 0.5 * h_[i];
        vol_[i + 1] += 0.5 * h_[i];
    }
}

std::vector<double> Mesh1D::edge_field(std::span<double const> phi) const
{
    std::vector<double> field(h_.size());
    for (std::size_t i = 0; i < h_.size(); ++i)
        field[i] = -(phi[i + 1] - phi[i]) / h_[i];
    return field;
}

std::vector<double> Mesh1D::node_field(std::span<double const> phi) const
{
    std::size_t const n = x_.size();
    std::vector<double> field(n);
    field[0] = std::abs((phi[1] - phi[0]) / h_[0]);
    field[n - 1] = std::abs((phi[n - 1] - phi[n - 2]) / h_[n - 2]);
    for (std::size_t i = 1; i + 1 < n; ++i)
        field[i] = std::abs((phi[i + 1] - phi[i - 1]) / (x_[i + 1] - x_[i - 1]));
    return field;
}

}  // namespace oscsim
