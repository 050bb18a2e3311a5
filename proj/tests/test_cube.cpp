#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lmidom/cube.hpp"
#include "oracles.hpp"

using namespace lmidom;

namespace {

const double kHalfSqrt2 = std::sqrt(0.5);

void expect_corners_inside(const LinearPencil& l, double rho) {
  const std::size_t g = l.num_vars();
  for (std::size_t mask = 0; mask < (std::size_t{1} << g); ++mask) {
    std::vector<double> x(g);
    for (std::size_t j = 0; j < g; ++j) x[j] = (mask >> j & 1) ? rho : -rho;
    EXPECT_GE(min_eigenvalue(l.at(x)), -1e-6);
  }
}

void expect_mc_invariants(const CubeReport& r, const LinearPencil& l, double tol) {
  const auto blocks = premc_blocks(r, l);
  for (const auto& b : blocks) EXPECT_GE(min_eigenvalue(b), -tol);
}

void expect_s_invariants(const std::vector<Matrix>& bs, double rho, const LinearPencil& l, double tol) {
  Matrix slack = Matrix::identity(l.size());
  for (std::size_t j = 0; j < bs.size(); ++j) {
    EXPECT_GE(min_eigenvalue(bs[j] - l.coeff(j)), -tol);
    EXPECT_GE(min_eigenvalue(bs[j] + l.coeff(j)), -tol);
    slack -= bs[j] * rho;
  }
  EXPECT_GE(min_eigenvalue(slack), -tol);
}

}  // namespace

TEST(Cube, DiskExampleValues) {
  EXPECT_NEAR(matrix_cube_rho(fixtures::delta()).rho, kHalfSqrt2, 1e-6);
  EXPECT_NEAR(matrix_cube_rho(fixtures::gamma()).rho, 0.5, 1e-6);
  EXPECT_NEAR(bental_nemirovski_rho(fixtures::delta()).rho, kHalfSqrt2, 1e-6);
  EXPECT_NEAR(bental_nemirovski_rho(fixtures::gamma()).rho, 0.5, 1e-6);
}

TEST(Cube, CubeInItself) {
  for (double r : {0.3, 1.0, 2.0}) {
    EXPECT_NEAR(matrix_cube_rho(cube_pencil(2, r)).rho, r, 1e-6 * (1 + r));
    EXPECT_NEAR(matrix_cube_rho(cube_pencil(3, r)).rho, r, 1e-6 * (1 + r));
  }
  const auto bn = bental_nemirovski_rho(cube_pencil(1, 1.0));
  EXPECT_NEAR(bn.rho, 1.0, 1e-6);
  ASSERT_EQ(bn.bs.size(), 1u);
  expect_s_invariants(bn.bs, bn.rho, cube_pencil(1, 1.0), 1e-6);
}

TEST(Cube, SingleVariableClosedForm) {
  const auto l = LinearPencil::monic({Matrix{{2, 0}, {0, -1}}});
  const auto r = matrix_cube_rho(l);
  EXPECT_NEAR(r.rho, 0.5, 1e-7);
  EXPECT_TRUE(r.c_blocks.empty());
}

TEST(Cube, McSdpVariableCount) {
  // (g−1) C blocks, (g−1) slacks and two (MC3) slacks; one free ρ.
  const auto p = build_matrix_cube_sdp(fixtures::delta());
  EXPECT_EQ(p.block_dims.size(), 4u);
  EXPECT_EQ(p.n_free, 1u);
}

TEST(Cube, ConversionsBetweenSystems) {
  for (const auto& l : {fixtures::delta(), fixtures::gamma()}) {
    const auto mc = matrix_cube_rho(l);
    expect_mc_invariants(mc, l, 1e-7);
    const auto bs = mc_to_s(mc, l);
    expect_s_invariants(bs, mc.rho, l, 1e-7);
    const auto back = s_to_mc(bs, mc.rho, l);
    for (std::size_t j = 0; j < mc.c_blocks.size(); ++j)
      EXPECT_LT((back.c_blocks[j] - mc.c_blocks[j]).max_abs(), 1e-12);

    const auto bn = bental_nemirovski_rho(l);
    const auto from_bn = s_to_mc(bn.bs, bn.rho, l);
    expect_mc_invariants(from_bn, l, 1e-7);
  }
}

TEST(Cube, ConversionRejectsInvalidInput) {
  const auto l = fixtures::gamma();
  std::vector<Matrix> bad{Matrix::identity(2) * 0.1, Matrix::identity(2) * 0.1};
  EXPECT_THROW(s_to_mc(bad, 0.5, l), NotPsdError);
  CubeReport r;
  r.rho = 0.0;
  r.c_blocks = {Matrix::identity(2)};
  EXPECT_THROW(mc_to_s(r, l), Error);
}

TEST(Cube, ZeroCoefficientGivesAnyPsdSplit) {
  const auto l = LinearPencil::monic({Matrix{{0, 1}, {1, 0}}, Matrix(2, 2)});
  const std::vector<Matrix> bs{Matrix::identity(2), Matrix::identity(2) * 0.5};
  const auto mc = s_to_mc(bs, 0.5, l);
  const auto back = mc_to_s(mc, l);
  const auto pre = premc_blocks(mc, l);
  EXPECT_LT((back[1] - (pre[1] + pre[3]) * 2.0).max_abs(), 1e-12);
}

TEST(Cube, RelaxationsAgreeOnRandomPencils) {
  std::mt19937_64 gen(51);
  for (int trial = 0; trial < 15; ++trial) {
    const auto l = oracle::random_bounded(3, 2 + trial % 2, gen);
    const auto mc = matrix_cube_rho(l);
    const auto bn = bental_nemirovski_rho(l);
    EXPECT_NEAR(mc.rho, bn.rho, 1e-5) << "trial " << trial;
    expect_corners_inside(l, mc.rho);
  }
}

TEST(Cube, TighteningExamples) {
  const auto g = fixtures::gamma();
  EXPECT_NEAR(tightened_cube_rho(g, {{kHalfSqrt2, kHalfSqrt2}}).rho, kHalfSqrt2, 1e-6);
  EXPECT_NEAR(tightened_cube_rho(g, std::vector<std::pair<double, double>>{}).rho, 0.5, 1e-6);
  double sum = 0.0;
  for (const auto& eta : random_etas(100, 2013)) sum += tightened_cube_rho(g, {eta}).rho;
  EXPECT_NEAR(sum / 100.0, 0.6, 0.05);
}

TEST(Cube, TighteningNeverHurts) {
  std::mt19937_64 gen(52);
  for (int trial = 0; trial < 5; ++trial) {
    const auto l = oracle::random_bounded(3, 2, gen);
    const double base = matrix_cube_rho(l).rho;
    double prev = base;
    std::vector<std::pair<double, double>> etas;
    for (const auto& eta : random_etas(4, 100 + trial)) {
      etas.push_back(eta);
      const double r = tightened_cube_rho(l, etas).rho;
      EXPECT_GE(r, prev - 1e-7);
      prev = r;
    }
    EXPECT_GE(prev, base - 1e-7);
  }
}

TEST(Cube, TighteningNeedsTwoVariables) {
  try {
    (void)tightened_cube_rho(cube_pencil(3, 1.0), {{1.0, 0.0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsupported);
  }
}

TEST(Cube, RandomEtasAreSeededUnitVectors) {
  const auto a = random_etas(5, 9), b = random_etas(5, 9);
  EXPECT_EQ(a, b);
  for (const auto& [s, t] : a) EXPECT_NEAR(s * s + t * t, 1.0, 1e-15);
  EXPECT_NE(random_etas(5, 10), a);
  const auto r = tightened_cube_rho(fixtures::gamma(), 3, 7);
  ASSERT_TRUE(r.seed.has_value());
  EXPECT_EQ(*r.seed, 7u);
  EXPECT_EQ(r.etas.size(), 3u);
}

TEST(Cube, CubePencilIsMinimalAmongSquareContainedSets) {
  // Any monic M whose scalar set sits in the unit square has D_M ⊆ D_{C_1}.
  std::mt19937_64 gen(53);
  int tested = 0;
  for (int trial = 0; trial < 200 && tested < 10; ++trial) {
    auto m = oracle::random_bounded(3, 2, gen);
    // Rescale so the scalar set touches the square from inside.
    double r = 0.0;
    oracle::for_each_grid_point(2, 41, 3.0, [&](const std::vector<double>& x) {
      if (min_eigenvalue(m.at(x)) >= 0) r = std::max(r, std::max(std::abs(x[0]), std::abs(x[1])));
    });
    if (r == 0.0 || r >= 3.0) continue;
    m = oracle::scaled(m, r * 1.1);
    bool inside = true;
    oracle::for_each_grid_point(2, 81, 1.5, [&](const std::vector<double>& x) {
      if (min_eigenvalue(m.at(x)) >= 0 && (std::abs(x[0]) > 1 || std::abs(x[1]) > 1)) inside = false;
    });
    if (!inside) continue;
    ++tested;
    EXPECT_TRUE(check_inclusion(m, cube_pencil(2, 1.0)).included) << "trial " << trial;
  }
  EXPECT_GE(tested, 5);
}
