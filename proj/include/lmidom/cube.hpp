#pragma once

// Matricial matrix cube: the largest ρ with D_{C_ρ} ⊆ D_L, from the reduced
// (MC) system or from the Ben-Tal–Nemirovski system (S), conversion between
// the two, and tightening with the 2×2 pencils L_η.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lmidom/error.hpp"
#include "lmidom/inclusion.hpp"
#include "lmidom/pencil.hpp"
#include "lmidom/sdp.hpp"

namespace lmidom {

struct CubeReport {
  double rho = 0.0;
  /// The g−1 matrices C^j of (MC); empty for g = 1 and for tightened runs.
  std::vector<Matrix> c_blocks;
  std::string method = "mc";
  std::vector<std::pair<double, double>> etas;
  std::optional<std::uint64_t> seed;
  SdpStatus status = SdpStatus::kIterLimit;
};

struct BenTalNemirovskiReport {
  double rho = 0.0;
  std::vector<Matrix> bs;
  SdpStatus status = SdpStatus::kIterLimit;
};

namespace detail {

inline void require_cube_input(const LinearPencil& l, const char* who) {
  if (!l.is_monic()) throw Error(ErrorCode::kNotMonic, std::string(who) + ": pencil is not monic");
  if (l.num_vars() == 0) throw Error(ErrorCode::kInvalidArgument, std::string(who) + ": need g ≥ 1");
}

inline void add_matrix_rows(SdpBuilder& b, std::size_t d,
                            const std::function<void(Vector&, std::size_t, std::size_t)>& fill,
                            const Matrix& rhs) {
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = i; k < d; ++k) {
      auto row = b.new_row();
      fill(row, i, k);
      b.add_constraint(std::move(row), rhs(i, k));
    }
}

inline double rho_from(const SdpSolution& sol, std::size_t idx, const char* who) {
  switch (sol.status) {
    case SdpStatus::kOptimal: return std::max(sol.free.at(idx), 0.0);
    case SdpStatus::kDualUnbounded: return std::numeric_limits<double>::infinity();
    default:
      throw Error(ErrorCode::kIndeterminate, std::string(who) + ": solver returned " + to_string(sol.status));
  }
}

}  // namespace detail

/// (MC): maximize ρ over C^j ⪰ 0, C^j − ρA_j ⪰ 0 (j < g) and
/// I − 2ΣC^j + ρΣ_{j<g}A_j ± ρA_g ⪰ 0. The inequalities are carried by PSD
/// slack blocks tied to C^j and ρ by equality rows.
inline SdpProblem build_matrix_cube_sdp(const LinearPencil& l) {
  const std::size_t d = l.size();
  const std::size_t g = l.num_vars();
  SdpBuilder b;
  std::vector<std::size_t> c, s;
  for (std::size_t j = 0; j + 1 < g; ++j) c.push_back(b.add_block(d));
  for (std::size_t j = 0; j + 1 < g; ++j) s.push_back(b.add_block(d));
  const auto tp = b.add_block(d);
  const auto tm = b.add_block(d);
  const auto rho = b.add_free();
  const Matrix zero(d, d);

  for (std::size_t j = 0; j + 1 < g; ++j) {
    const Matrix& a = l.coeff(j);
    detail::add_matrix_rows(b, d, [&](Vector& row, std::size_t i, std::size_t k) {
      b.add_entry(row, s[j], i, k, 1.0);
      b.add_entry(row, c[j], i, k, -1.0);
      b.add_free_term(row, rho, a(i, k));
    }, zero);
  }
  const Matrix& last = l.coeff(g - 1);
  for (double sign : {1.0, -1.0}) {
    const auto t = sign > 0 ? tp : tm;
    detail::add_matrix_rows(b, d, [&](Vector& row, std::size_t i, std::size_t k) {
      b.add_entry(row, t, i, k, 1.0);
      double coef = sign * last(i, k);
      for (std::size_t j = 0; j + 1 < g; ++j) {
        b.add_entry(row, c[j], i, k, 2.0);
        coef += l.coeff(j)(i, k);
      }
      b.add_free_term(row, rho, -coef);
    }, Matrix::identity(d));
  }
  auto obj = b.new_row();
  b.add_free_term(obj, rho, 1.0);
  b.set_objective(std::move(obj));
  return std::move(b).build();
}

inline CubeReport matrix_cube_rho(const LinearPencil& l, const SdpOptions& opts = {}) {
  detail::require_cube_input(l, "matrix_cube_rho");
  const auto p = build_matrix_cube_sdp(l);
  const auto sol = solve(p, opts);
  CubeReport r;
  r.method = "mc";
  r.status = sol.status;
  r.rho = detail::rho_from(sol, 0, "matrix_cube_rho");
  if (sol.status == SdpStatus::kOptimal) {
    for (std::size_t j = 0; j + 1 < l.num_vars(); ++j) r.c_blocks.push_back(sol.blocks[j]);
  }
  return r;
}

/// (S) with P_j = ρB_j as free symmetric variables: P_j ∓ ρA_j ⪰ 0,
/// I − ΣP_j ⪰ 0, maximize ρ. Free scalars: ρ first, then svec(P_j).
inline SdpProblem build_bental_nemirovski_sdp(const LinearPencil& l) {
  const std::size_t d = l.size();
  const std::size_t g = l.num_vars();
  SdpBuilder b;
  std::vector<std::size_t> up, vp;
  for (std::size_t j = 0; j < g; ++j) up.push_back(b.add_block(d));
  for (std::size_t j = 0; j < g; ++j) vp.push_back(b.add_block(d));
  const auto w = b.add_block(d);
  const auto rho = b.add_free();
  std::vector<std::size_t> pbase;
  for (std::size_t j = 0; j < g; ++j) {
    pbase.push_back(b.add_free());
    for (std::size_t k = 1; k < svec_size(d); ++k) b.add_free();
  }
  auto pv = [&](std::size_t j, std::size_t i, std::size_t k) { return pbase[j] + svec_index(d, i, k); };
  const Matrix zero(d, d);

  for (std::size_t j = 0; j < g; ++j)
    for (double sign : {1.0, -1.0}) {
      const auto blk = sign > 0 ? vp[j] : up[j];
      detail::add_matrix_rows(b, d, [&](Vector& row, std::size_t i, std::size_t k) {
        b.add_entry(row, blk, i, k, 1.0);
        b.add_free_term(row, pv(j, i, k), -1.0);
        b.add_free_term(row, rho, -sign * l.coeff(j)(i, k));
      }, zero);
    }
  detail::add_matrix_rows(b, d, [&](Vector& row, std::size_t i, std::size_t k) {
    b.add_entry(row, w, i, k, 1.0);
    for (std::size_t j = 0; j < g; ++j) b.add_free_term(row, pv(j, i, k), 1.0);
  }, Matrix::identity(d));

  auto obj = b.new_row();
  b.add_free_term(obj, rho, 1.0);
  b.set_objective(std::move(obj));
  return std::move(b).build();
}

inline BenTalNemirovskiReport bental_nemirovski_rho(const LinearPencil& l, const SdpOptions& opts = {}) {
  detail::require_cube_input(l, "bental_nemirovski_rho");
  const std::size_t d = l.size();
  const auto sol = solve(build_bental_nemirovski_sdp(l), opts);
  BenTalNemirovskiReport r;
  r.status = sol.status;
  r.rho = detail::rho_from(sol, 0, "bental_nemirovski_rho");
  if (sol.status == SdpStatus::kOptimal && r.rho > 0.0) {
    for (std::size_t j = 0; j < l.num_vars(); ++j) {
      Matrix p(d, d);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = i; k < d; ++k) p(i, k) = p(k, i) = sol.free[1 + j * svec_size(d) + svec_index(d, i, k)];
      r.bs.push_back(p * (1.0 / r.rho));
    }
  }
  return r;
}

/// The 2g blocks of the unreduced system, ordered like cube_pencil_blocks:
/// C^j pairs with +x_j and C^{g+j} with −x_j, so C^j − C^{g+j} = ρA_j and
/// ΣC = I.
inline std::vector<Matrix> premc_blocks(const CubeReport& r, const LinearPencil& l) {
  const std::size_t g = l.num_vars(), d = l.size();
  if (r.c_blocks.size() + 1 != g) throw Error(ErrorCode::kInvalidArgument, "premc_blocks: need g−1 C blocks");
  std::vector<Matrix> out(2 * g);
  Matrix last = Matrix::identity(d);
  for (std::size_t j = 0; j + 1 < g; ++j) {
    out[j] = r.c_blocks[j];
    out[g + j] = r.c_blocks[j] - l.coeff(j) * r.rho;
    last -= r.c_blocks[j] * 2.0;
  }
  for (std::size_t j = 0; j < g; ++j) last += l.coeff(j) * r.rho;
  out[g - 1] = last * 0.5;
  out[2 * g - 1] = out[g - 1] - l.coeff(g - 1) * r.rho;
  return out;
}

namespace detail {

inline void require_psd(const Matrix& m, double tol, const std::string& what) {
  const double lmin = min_eigenvalue(m);
  if (lmin < -tol) throw NotPsdError(lmin, what + " is not positive semidefinite");
}

}  // namespace detail

/// B^j = (C^j + C^{g+j})/ρ. Throws when the report violates (MC) by more than tol.
inline std::vector<Matrix> mc_to_s(const CubeReport& r, const LinearPencil& l, double tol = 1e-6) {
  if (!(r.rho > 0.0) || !std::isfinite(r.rho)) {
    throw Error(ErrorCode::kInvalidArgument, "mc_to_s: needs a finite positive rho");
  }
  const auto blocks = premc_blocks(r, l);
  for (std::size_t k = 0; k < blocks.size(); ++k)
    detail::require_psd(blocks[k], tol, "mc_to_s: block C^" + std::to_string(k + 1));
  const std::size_t g = l.num_vars();
  std::vector<Matrix> bs;
  for (std::size_t j = 0; j < g; ++j) bs.push_back((blocks[j] + blocks[g + j]) * (1.0 / r.rho));
  return bs;
}

/// C^j = ρ(B^j + A_j)/2, C^{g+j} = ρ(B^j − A_j)/2, with the slack
/// I − ρΣB^j spread evenly over all 2g blocks. Returns the (MC) report.
inline CubeReport s_to_mc(const std::vector<Matrix>& bs, double rho, const LinearPencil& l, double tol = 1e-6) {
  const std::size_t g = l.num_vars(), d = l.size();
  if (bs.size() != g) throw Error(ErrorCode::kDimensionMismatch, "s_to_mc: need one B per variable");
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw Error(ErrorCode::kInvalidArgument, "s_to_mc: bad rho");
  Matrix slack = Matrix::identity(d);
  for (std::size_t j = 0; j < g; ++j) {
    detail::require_psd(bs[j] - l.coeff(j), tol, "s_to_mc: B^" + std::to_string(j + 1) + " - A");
    detail::require_psd(bs[j] + l.coeff(j), tol, "s_to_mc: B^" + std::to_string(j + 1) + " + A");
    slack -= bs[j] * rho;
  }
  detail::require_psd(slack, tol, "s_to_mc: I - rho sum B");
  CubeReport r;
  r.rho = rho;
  r.method = "mc";
  r.status = SdpStatus::kOptimal;
  const Matrix share = slack * (1.0 / (2.0 * static_cast<double>(g)));
  for (std::size_t j = 0; j + 1 < g; ++j) r.c_blocks.push_back((bs[j] + l.coeff(j)) * (rho / 2.0) + share);
  return r;
}

/// Uniform angles on [0, 2π) from a seeded generator.
inline std::vector<std::pair<double, double>> random_etas(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 0; k < count; ++k) {
    const double th = angle(gen);
    out.emplace_back(std::cos(th), std::sin(th));
  }
  return out;
}

/// max ρ with ρ D_M ⊆ D_L for M = C_1 ⊕ ⊕_η L_η. Every D_{L_η}(1) contains
/// the unit square, so ρ still bounds the true scalar cube from below.
inline CubeReport tightened_cube_rho(const LinearPencil& l, const std::vector<std::pair<double, double>>& etas,
                                     const SdpOptions& opts = {}) {
  detail::require_cube_input(l, "tightened_cube_rho");
  if (!etas.empty() && l.num_vars() != 2) {
    throw Error(ErrorCode::kUnsupported, "tightened_cube_rho: eta pencils need g = 2");
  }
  PencilSum m = cube_pencil_blocks(l.num_vars(), 1.0);
  for (const auto& [s, t] : etas) m.push_back(eta_pencil(s, t));
  const auto res = max_scale_inclusion(m, l, opts);
  CubeReport r;
  r.method = etas.empty() ? "mc" : "tightened";
  r.status = res.status;
  if (res.status != SdpStatus::kOptimal && res.status != SdpStatus::kDualUnbounded) {
    throw Error(ErrorCode::kIndeterminate, std::string("tightened_cube_rho: solver returned ") + to_string(res.status));
  }
  r.rho = res.rho;
  r.etas = etas;
  return r;
}

inline CubeReport tightened_cube_rho(const LinearPencil& l, std::size_t count, std::uint64_t seed,
                                     const SdpOptions& opts = {}) {
  auto r = tightened_cube_rho(l, random_etas(count, seed), opts);
  r.seed = seed;
  return r;
}

}  // namespace lmidom
