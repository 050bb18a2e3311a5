#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "lmidom/inclusion.hpp"
#include "lmidom/sdp.hpp"
#include "oracles.hpp"

using namespace lmidom;

namespace {

// max t with diag(1 - t, 2 - t) ⪰ 0, written as X = diag(1,2) - tI, X ⪰ 0.
SdpProblem min_eigenvalue_problem() {
  SdpBuilder b;
  const auto x = b.add_block(2);
  const auto t = b.add_free();
  const Matrix target{{1, 0}, {0, 2}};
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = i; j < 2; ++j) {
      auto row = b.new_row();
      b.add_entry(row, x, i, j, 1.0);
      if (i == j) b.add_free_term(row, t, 1.0);
      b.add_constraint(std::move(row), target(i, j));
    }
  auto obj = b.new_row();
  b.add_free_term(obj, t, 1.0);
  b.set_objective(std::move(obj));
  return std::move(b).build();
}

SdpProblem scalar_equals(double v) {
  SdpBuilder b;
  const auto x = b.add_block(1);
  auto row = b.new_row();
  b.add_entry(row, x, 0, 0, 1.0);
  b.add_constraint(std::move(row), v);
  return std::move(b).build();
}

}  // namespace

TEST(Sdp, MaximizesMinimumEigenvalue) {
  const auto s = solve(min_eigenvalue_problem());
  ASSERT_EQ(s.status, SdpStatus::kOptimal);
  EXPECT_NEAR(s.free[0], 1.0, 1e-7);
  EXPECT_LE(s.primal_residual, 1e-8);
  EXPECT_LE(s.gap, 1e-8);
  EXPECT_LE(s.objective_value, s.dual_objective + 1e-8);
}

TEST(Sdp, DetectsInfeasibleEquality) {
  EXPECT_EQ(solve(scalar_equals(-1.0)).status, SdpStatus::kPrimalInfeasible);
  const auto f = feasibility(scalar_equals(-1.0));
  EXPECT_EQ(f.status, FeasibilityStatus::kInfeasible);
  EXPECT_GT(f.certificate_gap, 0.0);
}

TEST(Sdp, InconsistentRowsAreInfeasible) {
  SdpBuilder b;
  const auto x = b.add_block(1);
  for (double v : {1.0, 2.0}) {
    auto row = b.new_row();
    b.add_entry(row, x, 0, 0, 1.0);
    b.add_constraint(std::move(row), v);
  }
  EXPECT_EQ(solve(std::move(b).build()).status, SdpStatus::kPrimalInfeasible);
}

TEST(Sdp, TraceOneFeasibilityHasSlackOneHalf) {
  SdpBuilder b;
  const auto c = b.add_block(2);
  auto row = b.new_row();
  b.add_entry(row, c, 0, 0, 1.0);
  b.add_entry(row, c, 1, 1, 1.0);
  b.add_constraint(std::move(row), 1.0);
  const auto f = feasibility(std::move(b).build());
  ASSERT_EQ(f.status, FeasibilityStatus::kFeasible);
  EXPECT_GE(f.slack, 0.5 - 1e-8);
  EXPECT_LE(f.slack, 0.5 + 1e-6);
}

TEST(Sdp, UnboundedObjectiveIsReported) {
  SdpBuilder b;
  const auto x = b.add_block(1);
  auto row = b.new_row();
  b.add_entry(row, x, 0, 0, 1.0);
  b.set_objective(std::move(row));
  EXPECT_EQ(solve(std::move(b).build()).status, SdpStatus::kDualUnbounded);
}

TEST(Sdp, ChoiSystemsForTheDiskExample) {
  const auto s = solve(build_choi_sdp(fixtures::gamma(), fixtures::delta()));
  EXPECT_EQ(s.status, SdpStatus::kOptimal);
  EXPECT_GE(s.margin, -1e-8);
  EXPECT_EQ(feasibility(build_choi_sdp(fixtures::delta(), fixtures::gamma())).status, FeasibilityStatus::kInfeasible);
}

TEST(Sdp, DeterministicForIdenticalInput) {
  const auto p = build_choi_sdp(fixtures::gamma(), fixtures::delta());
  const auto a = solve(p), b = solve(p);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.blocks[0], b.blocks[0]);
}

TEST(Sdp, RandomInteriorPointsAreFeasible) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 20; ++trial) {
    // Equalities ⟨A_i, X⟩ = ⟨A_i, X0⟩ for a random X0 ≻ 0.
    const std::size_t n = 3;
    const Matrix r = oracle::random_symmetric(n, gen);
    const Matrix x0 = r * r + Matrix::identity(n) * 0.1;
    SdpBuilder b;
    const auto x = b.add_block(n);
    for (int i = 0; i < 4; ++i) {
      const Matrix a = oracle::random_symmetric(n, gen);
      auto row = b.new_row();
      b.add_inner(row, x, a);
      b.add_constraint(std::move(row), trace_product(a, x0));
    }
    EXPECT_EQ(feasibility(std::move(b).build()).status, FeasibilityStatus::kFeasible) << "trial " << trial;
  }
}

TEST(Sdp, FarkasConstructedProblemsAreInfeasible) {
  std::mt19937_64 gen(22);
  for (int trial = 0; trial < 20; ++trial) {
    // The last row ⟨P, X⟩ = b < 0 with P ≻ 0 rules out every X ⪰ 0.
    const std::size_t n = 3;
    std::vector<Matrix> as;
    for (int i = 0; i < 3; ++i) as.push_back(oracle::random_symmetric(n, gen));
    const Matrix r = oracle::random_symmetric(n, gen);
    const Matrix p = r * r + Matrix::identity(n);
    as.push_back(p);
    SdpBuilder b;
    const auto x = b.add_block(n);
    std::normal_distribution<double> nd;
    for (std::size_t i = 0; i < as.size(); ++i) {
      auto row = b.new_row();
      b.add_inner(row, x, as[i]);
      b.add_constraint(std::move(row), i + 1 == as.size() ? -1.0 - std::abs(nd(gen)) : nd(gen));
    }
    EXPECT_EQ(feasibility(std::move(b).build()).status, FeasibilityStatus::kInfeasible) << "trial " << trial;
  }
}

TEST(Sdp, WeakDualityAtOptimum) {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 10; ++trial) {
    const auto l = oracle::random_bounded(3, 2, gen);
    const auto s = solve(build_radius_sdp(l));
    ASSERT_EQ(s.status, SdpStatus::kOptimal);
    EXPECT_LE(s.objective_value, s.dual_objective + 1e-8 * (1 + std::abs(s.dual_objective)));
  }
}

TEST(Sdp, SdpaExportListsNonzeros) {
  std::ostringstream os;
  write_sdpa(os, min_eigenvalue_problem());
  const std::string s = os.str();
  EXPECT_NE(s.find("\n3\n2\n2 -2\n"), std::string::npos) << s;
  EXPECT_NE(s.find("1 1 1 1 1"), std::string::npos);
}

TEST(Sdp, ValidateRejectsShapeErrors) {
  SdpProblem p;
  p.block_dims = {2};
  p.constraints = {Vector(2, 0.0)};
  p.rhs = {0.0};
  EXPECT_THROW(solve(p), Error);
}
