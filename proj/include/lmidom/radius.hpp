#pragma once

// Boundedness of matricial LMI sets and the matricial radius: the largest b
// with a unital completely positive map sending A_ℓ to b (E_{1,ℓ+1} + E_{ℓ+1,1}),
// i.e. D_L ⊆ D_{J_{1/b}}, which gives ‖Σ X_j²‖^{1/2} ≤ 1/b on D_L.

#include <limits>

#include "lmidom/error.hpp"
#include "lmidom/pencil.hpp"
#include "lmidom/sdp.hpp"

namespace lmidom {

struct RadiusReport {
  double b_star = 0.0;
  double radius_bound = std::numeric_limits<double>::infinity();
  bool bounded = false;
  SdpStatus status = SdpStatus::kIterLimit;
};

inline constexpr double kBoundedThreshold = 1e-7;

namespace detail {

inline void require_monic_nondegenerate(const LinearPencil& l, const char* who) {
  if (!l.is_monic(1e-12)) throw Error(ErrorCode::kNotMonic, std::string(who) + ": pencil is not monic");
  if (!is_nondegenerate(l)) {
    throw Error(ErrorCode::kDegenerate, std::string(who) + ": coefficients are linearly dependent");
  }
}

}  // namespace detail

/// Recession system of L: S = Σ A_j x_j ⪰ 0, trace S = 1 (one PSD block,
/// g free scalars). Feasible exactly when D_L(1) is unbounded.
inline SdpProblem build_recession_sdp(const LinearPencil& l) {
  const std::size_t d = l.size();
  const std::size_t g = l.num_vars();
  SdpBuilder b;
  const auto s = b.add_block(d);
  std::vector<std::size_t> x;
  for (std::size_t j = 0; j < g; ++j) x.push_back(b.add_free());
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = i; k < d; ++k) {
      auto row = b.new_row();
      b.add_entry(row, s, i, k, 1.0);
      for (std::size_t j = 0; j < g; ++j) b.add_free_term(row, x[j], -l.coeff(j)(i, k));
      b.add_constraint(std::move(row), 0.0);
    }
  auto row = b.new_row();
  for (std::size_t i = 0; i < d; ++i) b.add_entry(row, s, i, i, 1.0);
  b.add_constraint(std::move(row), 1.0);
  return std::move(b).build();
}

/// Bounded iff the recession system is infeasible. Bounded at level one is
/// equivalent to bounded at every level. Throws kIndeterminate when the
/// solver cannot decide.
inline bool is_bounded(const LinearPencil& l, const SdpOptions& opts = {}) {
  detail::require_monic_nondegenerate(l, "is_bounded");
  const auto r = feasibility(build_recession_sdp(l), opts);
  if (r.status == FeasibilityStatus::kIndeterminate) {
    throw Error(ErrorCode::kIndeterminate, "is_bounded: recession SDP undecided");
  }
  return r.status == FeasibilityStatus::kInfeasible;
}

/// Choi system for D_L ⊆ D_{J_{1/b}}: C = (c_rs) with (g+1)×(g+1) blocks,
/// Σ c_rr = I, Σ α^ℓ_rs c_rs = b (E_{1,ℓ+1} + E_{ℓ+1,1}). The designated
/// entries share the single free variable b, which is maximized.
inline SdpProblem build_radius_sdp(const LinearPencil& l) {
  const std::size_t d = l.size();
  const std::size_t g = l.num_vars();
  const std::size_t h = g + 1;
  SdpBuilder b;
  const auto c = b.add_block(d * h);
  const auto bvar = b.add_free();
  auto at = [h](std::size_t r, std::size_t p) { return r * h + p; };

  for (std::size_t p = 0; p < h; ++p)
    for (std::size_t q = p; q < h; ++q) {
      auto row = b.new_row();
      for (std::size_t r = 0; r < d; ++r) b.add_entry(row, c, at(r, p), at(r, q), 1.0);
      b.add_constraint(std::move(row), p == q ? 1.0 : 0.0);
    }
  for (std::size_t ell = 0; ell < g; ++ell) {
    const Matrix& a = l.coeff(ell);
    for (std::size_t p = 0; p < h; ++p)
      for (std::size_t q = p; q < h; ++q) {
        auto row = b.new_row();
        for (std::size_t r = 0; r < d; ++r)
          for (std::size_t s = 0; s < d; ++s)
            if (a(r, s) != 0.0) b.add_entry(row, c, at(r, p), at(s, q), a(r, s));
        if (p == 0 && q == ell + 1) b.add_free_term(row, bvar, -1.0);
        b.add_constraint(std::move(row), 0.0);
      }
  }
  auto obj = b.new_row();
  b.add_free_term(obj, bvar, 1.0);
  b.set_objective(std::move(obj));
  return std::move(b).build();
}

/// Matricial radius bound 1/b* (sharp for the matricial set).
inline RadiusReport matricial_radius(const LinearPencil& l, const SdpOptions& opts = {}) {
  detail::require_monic_nondegenerate(l, "matricial_radius");
  const auto sol = solve(build_radius_sdp(l), opts);
  RadiusReport r;
  r.status = sol.status;
  if (sol.status == SdpStatus::kDualUnbounded) {
    r.b_star = std::numeric_limits<double>::infinity();
    r.radius_bound = 0.0;
    r.bounded = true;
    return r;
  }
  // Infeasible only when some Σ y_j A_j ≻ 0, i.e. D_L contains a ray.
  if (sol.status == SdpStatus::kPrimalInfeasible) {
    r.b_star = 0.0;
    r.radius_bound = std::numeric_limits<double>::infinity();
    r.bounded = false;
    return r;
  }
  if (sol.status != SdpStatus::kOptimal) {
    throw Error(ErrorCode::kIndeterminate,
                std::string("matricial_radius: solver returned ") + to_string(sol.status));
  }
  r.b_star = sol.free.at(0);
  r.bounded = r.b_star > kBoundedThreshold;
  r.radius_bound = r.bounded ? 1.0 / r.b_star : std::numeric_limits<double>::infinity();
  return r;
}

}  // namespace lmidom
