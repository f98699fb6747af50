#include "oscsim/banded.hpp"

#include <algorithm>
#include <cmath>
#include <string>

extern "C" {
void dgbtrf_(int const* m, int const* n, int const* kl, int const* ku,
             double* ab, int const* ldab, int* ipiv, int* info);
void dgbtrs_(char const* trans, int const* n, int const* kl, int const* ku,
             int const* nrhs, double const* ab, int const* ldab,
             int const* ipiv, double* b, int const* ldb, int* info);
}

namespace oscsim
{
BandedMatrix::BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku)
    : n_(n), kl_(kl), ku_(ku), ab_(leading_dimension() * n, 0.0)
{
}

double BandedMatrix::operator()(std::size_t i, std::size_t j) const
{
    return in_band(i, j) ? ab_[index(i, j)] : 0.0;
}

void BandedMatrix::add(std::size_t i, std::size_t j, double value)
{
    if (!in_band(i, j))
        throw std::out_of_range("banded entry outside the band");
    ab_[index(i, j)] += value;
}

void BandedMatrix::set(std::size_t i, std::size_t j, double value)
{
    if (!in_band(i, j))
        throw std::out_of_range("banded entry outside the band");
    ab_[index(i, j)] = value;
}

void BandedMatrix::set_identity_row(std::size_t i, double diagonal)
{
    std::size_t const lo = i > kl_ ? i - kl_ : 0;
    std::size_t const hi = std::min(n_ - 1, i + ku_);
    for (std::size_t j = lo; j <= hi; ++j)
        ab_[index(i, j)] = 0.0;
    ab_[index(i, i)] = diagonal;
}

void BandedMatrix::scale_rows(std::span<double const> factors)
{
    for (std::size_t j = 0; j < n_; ++j)
    {
        std::size_t const lo = j > ku_ ? j - ku_ : 0;
        std::size_t const hi = std::min(n_ - 1, j + kl_);
        for (std::size_t i = lo; i <= hi; ++i)
            ab_[index(i, j)] *= factors[i];
    }
}

void BandedMatrix::scale_columns(std::span<double const> factors)
{
    for (std::size_t j = 0; j < n_; ++j)
    {
        std::size_t const lo = j > ku_ ? j - ku_ : 0;
        std::size_t const hi = std::min(n_ - 1, j + kl_);
        for (std::size_t i = lo; i <= hi; ++i)
            ab_[index(i, j)] *= factors[j];
    }
}

std::vector<double> BandedMatrix::equilibrate_rows()
{
    std::vector<double> factors(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j)
    {
        std::size_t const lo = j > ku_ ? j - ku_ : 0;
        std::size_t const hi = std::min(n_ - 1, j + kl_);
        for (std::size_t i = lo; i <= hi; ++i)
            factors[i] = std::max(factors[i], std::abs(ab_[index(i, j)]));
    }
    for (double& f : factors)
        f = f > 0.0 ? 1.0 / f : 1.0;
    scale_rows(factors);
    return factors;
}

void BandedMatrix::fill_zero()
{
    std::fill(ab_.begin(), ab_.end(), 0.0);
}

std::vector<double> BandedMatrix::multiply(std::span<double const> x) const
{
    std::vector<double> y(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j)
    {
        std::size_t const lo = j > ku_ ? j - ku_ : 0;
        std::size_t const hi = std::min(n_ - 1, j + kl_);
        for (std::size_t i = lo; i <= hi; ++i)
            y[i] += ab_[index(i, j)] * x[j];
    }
    return y;
}

std::vector<double> BandedMatrix::to_dense() const
{
    std::vector<double> dense(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j)
            dense[i * n_ + j] = (*this)(i, j);
    return dense;
}

//---------------------------------------------------------------------------//
BandedLU::BandedLU(BandedMatrix matrix)
    : lu_(std::move(matrix)), pivots_(lu_.size())
{
    int const n = static_cast<int>(lu_.size());
    int const kl = static_cast<int>(lu_.lower());
    int const ku = static_cast<int>(lu_.upper());
    int const ldab = static_cast<int>(lu_.leading_dimension());
    int info = 0;
    dgbtrf_(&n, &n, &kl, &ku, lu_.storage().data(), &ldab, pivots_.data(), &info);
    if (info != 0)
    {
        throw SingularMatrixError("banded LU failed (info = "
                                  + std::to_string(info) + ")");
    }
}

void BandedLU::solve_in_place(std::span<double> rhs) const
{
    int const n = static_cast<int>(lu_.size());
    int const kl = static_cast<int>(lu_.lower());
    int const ku = static_cast<int>(lu_.upper());
    int const ldab = static_cast<int>(lu_.leading_dimension());
    int const nrhs = 1;
    int info = 0;
    char const trans = 'N';
    auto& storage = const_cast<BandedMatrix&>(lu_).storage();
    dgbtrs_(&trans, &n, &kl, &ku, &nrhs, storage.data(), &ldab, pivots_.data(),
            rhs.data(), &n, &info);
    if (info != 0)
        throw SingularMatrixError("banded solve failed");
}

std::vector<double> BandedSystem::solve() const
{
    BandedMatrix scaled = matrix;
    auto const factors = scaled.equilibrate_rows();
    BandedLU lu(scaled);
    std::vector<double> x = rhs;
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] *= factors[i];
    lu.solve_in_place(x);
    return x;
}

std::vector<double> BandedSystem::residual(std::span<double const> x) const
{
    auto r = matrix.multiply(x);
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] -= rhs[i];
    return r;
}

}  // namespace oscsim
