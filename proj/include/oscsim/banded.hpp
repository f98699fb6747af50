#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace oscsim
{
class SingularMatrixError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//---------------------------------------------------------------------------//
/*!
 * Square band matrix in LAPACK general-band storage.
 *
 * The storage reserves kl extra super-diagonals for the fill-in produced by
 * partial pivoting, so a factorization can run in place on a copy.
 */
class BandedMatrix
{
  public:
    BandedMatrix() = default;
    BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku);

    std::size_t size() const { return n_; }
    std::size_t lower() const { return kl_; }
    std::size_t upper() const { return ku_; }

    bool in_band(std::size_t i, std::size_t j) const
    {
        return (j <= i + ku_) && (i <= j + kl_);
    }
    double operator()(std::size_t i, std::size_t j) const;
    void add(std::size_t i, std::size_t j, double value);
    void set(std::size_t i, std::size_t j, double value);
    //! Zero row i and put `diagonal` on its diagonal.
    void set_identity_row(std::size_t i, double diagonal = 1.0);

    void scale_rows(std::span<double const> factors);
    void scale_columns(std::span<double const> factors);
    //! Scale every row to unit max norm; returns the factors applied.
    std::vector<double> equilibrate_rows();
    void fill_zero();

    std::vector<double> multiply(std::span<double const> x) const;
    std::vector<double> to_dense() const;  //!< row-major n*n copy

    std::vector<double>& storage() { return ab_; }
    std::size_t leading_dimension() const { return 2 * kl_ + ku_ + 1; }

  private:
    std::size_t index(std::size_t i, std::size_t j) const
    {
        return (kl_ + ku_ + i - j) + j * leading_dimension();
    }

    std::size_t n_ = 0;
    std::size_t kl_ = 0;
    std::size_t ku_ = 0;
    std::vector<double> ab_;
};

//! LU factors of a BandedMatrix (partial pivoting, LAPACK dgbtrf).
class BandedLU
{
  public:
    explicit BandedLU(BandedMatrix matrix);
    void solve_in_place(std::span<double> rhs) const;

  private:
    BandedMatrix lu_;
    std::vector<int> pivots_;
};

//! Linear problem A x = b over a banded A.
struct BandedSystem
{
    BandedMatrix matrix;
    std::vector<double> rhs;

    std::vector<double> solve() const;
    std::vector<double> residual(std::span<double const> x) const;
};

}  // namespace oscsim
