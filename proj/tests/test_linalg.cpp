#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lmidom/linalg.hpp"
#include "oracles.hpp"

using namespace lmidom;

TEST(Linalg, EigenReconstructs) {
  std::mt19937_64 gen(3);
  for (std::size_t d : {1u, 2u, 5u, 9u}) {
    const Matrix a = oracle::random_symmetric(d, gen);
    const auto e = sym_eig(a);
    const Matrix back = e.vectors * Matrix::diagonal(e.values) * e.vectors.transpose();
    EXPECT_LT((back - a).frobenius_norm(), 1e-12 * (1 + a.frobenius_norm()));
    EXPECT_LT((e.vectors.transpose() * e.vectors - Matrix::identity(d)).frobenius_norm(), 1e-12);
    for (std::size_t k = 1; k < d; ++k) EXPECT_LE(e.values[k - 1], e.values[k]);
  }
}

TEST(Linalg, KnownEigenvalues) {
  const auto e = sym_eig(Matrix{{2, 1}, {1, 2}});
  EXPECT_NEAR(e.values[0], 1.0, 1e-14);
  EXPECT_NEAR(e.values[1], 3.0, 1e-14);
  EXPECT_NEAR(min_eigenvalue(Matrix{{0, 1, 0}, {1, 0, 0}, {0, 0, 0}}), -1.0, 1e-14);
}

TEST(Linalg, SvecIsAnIsometry) {
  std::mt19937_64 gen(5);
  const Matrix a = oracle::random_symmetric(4, gen), b = oracle::random_symmetric(4, gen);
  const auto va = svec(a), vb = svec(b);
  EXPECT_EQ(va.size(), svec_size(4));
  EXPECT_NEAR(dot(va, vb), trace_product(a, b), 1e-12);
  EXPECT_LT((smat(va) - a).max_abs(), 1e-15);
}

TEST(Linalg, NullspaceAndRank) {
  const Matrix m{{1, 2, 3}, {2, 4, 6}};
  const Matrix ns = nullspace(m);
  EXPECT_EQ(ns.cols(), 2u);
  EXPECT_LT((m * ns).max_abs(), 1e-12);
  EXPECT_EQ(numerical_rank(m), 1u);
  EXPECT_EQ(nullspace(Matrix(0, 3)).cols(), 3u);
}

TEST(Linalg, NullspaceOfWideRankDeficientStack) {
  // Commutation equations for two Pauli-type matrices: 2 rows, 3 unknowns.
  const Matrix m{{0, -2, 0}, {-1.4142135623730951, 0, 1.4142135623730951}};
  EXPECT_EQ(nullspace(m).cols(), 1u);
}

TEST(Linalg, CholeskyAndPsdFactor) {
  const Matrix a{{4, 2}, {2, 3}};
  const Matrix l = cholesky(a);
  EXPECT_LT((l * l.transpose() - a).max_abs(), 1e-14);
  EXPECT_THROW(cholesky(Matrix{{1, 2}, {2, 1}}), NotPsdError);

  const Matrix r{{1, 1, 0}, {1, 1, 0}, {0, 0, 0}};
  const Matrix w = psd_factor(r);
  EXPECT_EQ(w.rows(), 1u);
  EXPECT_LT((w.transpose() * w - r).max_abs(), 1e-12);
  try {
    psd_factor(Matrix{{1, 0}, {0, -0.5}});
    FAIL();
  } catch (const NotPsdError& e) {
    EXPECT_NEAR(e.eigenvalue(), -0.5, 1e-12);
  }
}

TEST(Linalg, LuSolves) {
  const Matrix a{{0, 2, 1}, {1, 1, 0}, {3, 0, 1}};
  LuFactorization lu(a);
  ASSERT_FALSE(lu.singular());
  const Vector x = lu.solve(Vector{1, 2, 3});
  const Vector r = a * std::span<const double>(x);
  EXPECT_NEAR(r[0], 1, 1e-13);
  EXPECT_NEAR(r[1], 2, 1e-13);
  EXPECT_NEAR(r[2], 3, 1e-13);
  EXPECT_TRUE(LuFactorization(Matrix{{1, 2}, {2, 4}}).singular());
}

TEST(Linalg, PolarFactorIsOrthogonal) {
  std::mt19937_64 gen(11);
  const Matrix q = oracle::random_orthogonal(4, gen);
  const Matrix p = oracle::random_symmetric(4, gen) * 0.1 + Matrix::identity(4);
  const Matrix u = polar_orthogonal(q * p);
  EXPECT_LT((u - q).max_abs(), 1e-10);
  EXPECT_THROW(polar_orthogonal(Matrix{{1, 0}, {0, 0}}), Error);
}

TEST(Linalg, KronMatchesDefinition) {
  const Matrix a{{1, 2}, {3, 4}}, b{{0, 1}, {1, 0}};
  const Matrix k = kron(a, b);
  EXPECT_EQ(k(0, 1), 1.0);
  EXPECT_EQ(k(2, 3), 4.0);
  EXPECT_EQ(k(3, 0), 3.0);
}

TEST(Linalg, BlockDiagonalAndSymmetry) {
  const Matrix m = block_diagonal(std::vector<Matrix>{Matrix{{1}}, Matrix{{2, 3}, {3, 4}}});
  EXPECT_EQ(m.rows(), 3u);
  EXPECT_EQ(m(2, 1), 3.0);
  EXPECT_EQ(m(0, 2), 0.0);
  EXPECT_TRUE(is_symmetric(m));
  EXPECT_FALSE(is_symmetric(Matrix{{1, 2}, {0, 1}}));
}
