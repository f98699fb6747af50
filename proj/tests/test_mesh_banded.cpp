#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oscsim/banded.hpp"
#include "oscsim/mesh.hpp"

using namespace oscsim;

namespace
{
// Dense Gaussian elimination with partial pivoting, row-major.
std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b)
{
    std::size_t const n = b.size();
    for (std::size_t k = 0; k < n; ++k)
    {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k]))
                piv = i;
        for (std::size_t j = 0; j < n; ++j)
            std::swap(a[k * n + j], a[piv * n + j]);
        std::swap(b[k], b[piv]);
        for (std::size_t i = k + 1; i < n; ++i)
        {
            double const m = a[i * n + k] / a[k * n + k];
            for (std::size_t j = k; j < n; ++j)
                a[i * n + j] -= m * a[k * n + j];
            b[i] -= m * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;)
    {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j)
            s -= a[i * n + j] * x[j];
        x[i] = s / a[i * n + i];
    }
    return x;
}

BandedMatrix random_band(std::size_t n, std::size_t kl, std::size_t ku, std::mt19937& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    BandedMatrix m(n, kl, ku);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = (i > kl ? i - kl : 0); j < std::min(n, i + ku + 1); ++j)
            m.set(i, j, u(rng));
    return m;
}
}  // namespace

TEST(Mesh, UniformSpacingAndVolumes)
{
    auto const m = Mesh1D::uniform(70e-9, 8);
    EXPECT_EQ(m.size(), 8u);
    EXPECT_EQ(m.edges(), 7u);
    EXPECT_DOUBLE_EQ(m.length(), 70e-9);
    for (std::size_t e = 0; e < m.edges(); ++e)
        EXPECT_NEAR(m.h(e), 10e-9, 1e-22);
    double total = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
        total += m.volume(i);
    EXPECT_NEAR(total, 70e-9, 1e-22);
    EXPECT_NEAR(m.volume(0), 5e-9, 1e-22);
}

TEST(Mesh, GradedMeshIsMirrorSymmetricAndRefinedAtContacts)
{
    auto const m = Mesh1D::graded(1.0, 41, 1.05);
    for (std::size_t i = 0; i < m.size(); ++i)
        EXPECT_NEAR(m.x(i) + m.x(m.size() - 1 - i), 1.0, 1e-14);
    EXPECT_LT(m.h(0), m.h(20));
    EXPECT_NEAR(m.h(1) / m.h(0), 1.05, 1e-12);
    EXPECT_THROW(Mesh1D::graded(1.0, 41, 1.5), std::invalid_argument);
    EXPECT_THROW(Mesh1D(std::vector<double>{0.0, 1.0, 1.0}), std::invalid_argument);
}

TEST(Mesh, FieldsOfALinearPotential)
{
    auto const m = Mesh1D::graded(2.0, 11, 1.08);
    std::vector<double> phi(m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        phi[i] = 3.0 - 1.5 * m.x(i);
    for (double e : m.edge_field(phi))
        EXPECT_NEAR(e, 1.5, 1e-12);
    for (double e : m.node_field(phi))
        EXPECT_NEAR(e, 1.5, 1e-12);
}

TEST(Banded, StorageRoundTripAndMultiply)
{
    std::mt19937 rng(7);
    auto const a = random_band(9, 2, 3, rng);
    auto const dense = a.to_dense();
    std::vector<double> x(9);
    std::iota(x.begin(), x.end(), 1.0);
    auto const y = a.multiply(x);
    for (std::size_t i = 0; i < 9; ++i)
    {
        double s = 0.0;
        for (std::size_t j = 0; j < 9; ++j)
            s += dense[i * 9 + j] * x[j];
        EXPECT_NEAR(y[i], s, 1e-12);
    }
    EXPECT_EQ(a(0, 5), 0.0);
    EXPECT_FALSE(a.in_band(0, 5));
}

TEST(Banded, LuMatchesDenseElimination)
{
    std::mt19937 rng(11);
    for (auto [kl, ku] : {std::pair<std::size_t, std::size_t>{1, 1}, {3, 2}, {7, 7}})
    {
        auto a = random_band(40, kl, ku, rng);
        for (std::size_t i = 0; i < 40; ++i)
            a.add(i, i, 4.0);
        std::vector<double> b(40);
        for (auto& v : b)
            v = std::uniform_real_distribution<double>(-1, 1)(rng);
        BandedSystem sys{a, b};
        auto const x = sys.solve();
        auto const ref = dense_solve(a.to_dense(), b);
        for (std::size_t i = 0; i < 40; ++i)
            EXPECT_NEAR(x[i], ref[i], 1e-11 * (1 + std::abs(ref[i])));
        for (double r : sys.residual(x))
            EXPECT_LT(std::abs(r), 1e-12);
    }
}

TEST(Banded, IdentityRowAndScaling)
{
    BandedMatrix a(4, 1, 1);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = (i ? i - 1 : 0); j < std::min<std::size_t>(4, i + 2); ++j)
            a.set(i, j, 1.0 + i + j);
    a.set_identity_row(2, 5.0);
    EXPECT_EQ(a(2, 1), 0.0);
    EXPECT_EQ(a(2, 2), 5.0);
    EXPECT_EQ(a(2, 3), 0.0);
    std::vector<double> r{1, 2, 3, 4};
    a.scale_rows(r);
    EXPECT_EQ(a(3, 3), 4.0 * 7.0);
    a.scale_columns(r);
    EXPECT_EQ(a(3, 3), 16.0 * 7.0);
    EXPECT_EQ(a(0, 1), 2.0 * 2.0);
}

TEST(Banded, SingularMatrixIsReported)
{
    BandedMatrix a(3, 1, 1);
    a.set(0, 0, 1.0);
    a.set(2, 2, 1.0);
    EXPECT_THROW(BandedLU{a}, SingularMatrixError);
}
