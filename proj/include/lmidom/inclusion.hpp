#pragma once

// Deciding D_{L1} ⊆ D_{L2} through the Choi matrix of the unital map
// τ : A_{1,ℓ} ↦ A_{2,ℓ}, and extracting the isometry certificate
// L2(x) = Σ V_kᵀ L1(x) V_k from a feasible Choi matrix.

#include <optional>
#include <string>
#include <vector>

#include "lmidom/error.hpp"
#include "lmidom/linalg.hpp"
#include "lmidom/pencil.hpp"
#include "lmidom/radius.hpp"
#include "lmidom/sdp.hpp"

namespace lmidom {

/// A pencil given as the direct sum of its blocks.
using PencilSum = std::vector<LinearPencil>;

/// C of size d1·d2; entry ((p,i),(q,j)) sits at (p·d2 + i, q·d2 + j) and is
/// (c_pq)_ij.
struct ChoiSolution {
  Matrix c;
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  double margin = 0.0;

  Matrix block(std::size_t p, std::size_t q) const { return c.block(p * d2, q * d2, d2, d2); }
};

struct Certificate {
  std::vector<Matrix> vs;  // each d1×d2
  std::size_t mu() const { return vs.size(); }
};

enum class InclusionVerdict { kIncluded, kNotIncluded, kIndeterminate };

inline const char* to_string(InclusionVerdict v) {
  switch (v) {
    case InclusionVerdict::kIncluded: return "Included";
    case InclusionVerdict::kNotIncluded: return "NotIncluded";
    case InclusionVerdict::kIndeterminate: return "Indeterminate";
  }
  return "Unknown";
}

struct InclusionOptions {
  SdpOptions sdp;
  /// included ⇔ slack ≥ -threshold; |slack| < threshold is reported Marginal.
  double threshold = 1e-7;
  /// Replace Σ c_pp = I by Σ c_pp ⪯ I when every A_{1,ℓ} is traceless.
  bool trace_zero_relaxation = false;
  /// Check monic / nondegenerate / bounded before building.
  bool check_preconditions = true;
};

struct InclusionReport {
  InclusionVerdict verdict = InclusionVerdict::kIndeterminate;
  bool included = false;
  bool marginal = false;
  double margin = 0.0;
  std::optional<ChoiSolution> choi;
  std::string diagnostics;
};

namespace detail {

inline void check_same_arity(std::size_t g1, std::size_t g2) {
  if (g1 != g2) {
    throw Error(ErrorCode::kDimensionMismatch,
                "pencils have " + std::to_string(g1) + " and " + std::to_string(g2) + " variables");
  }
}

inline bool all_traceless(const LinearPencil& l, double tol = 1e-12) {
  for (const auto& a : l.coeffs())
    if (std::abs(a.trace()) > tol * (1.0 + a.max_abs())) return false;
  return true;
}

struct ChoiLayout {
  std::vector<std::size_t> blocks;
  std::optional<std::size_t> slack;
  std::optional<std::size_t> scale;
};

// Domain blocks M_μ (sizes δ_μ), one Choi block of size δ_μ·d2 each:
//   Σ_μ Σ_p c^μ_pp (+ S) = I,   Σ_μ Σ_pq α^{ℓμ}_pq c^μ_pq = A_{2,ℓ} (or ρ A_{2,ℓ}).
inline ChoiLayout add_domain_sum_system(SdpBuilder& b, const PencilSum& dom, const LinearPencil& l2,
                                        bool slack, bool scaled) {
  const std::size_t d2 = l2.size();
  ChoiLayout lay;
  for (const auto& m : dom) lay.blocks.push_back(b.add_block(m.size() * d2));
  if (slack) lay.slack = b.add_block(d2);
  if (scaled) lay.scale = b.add_free();

  for (std::size_t i = 0; i < d2; ++i)
    for (std::size_t j = i; j < d2; ++j) {
      auto row = b.new_row();
      for (std::size_t mu = 0; mu < dom.size(); ++mu)
        for (std::size_t p = 0; p < dom[mu].size(); ++p)
          b.add_entry(row, lay.blocks[mu], p * d2 + i, p * d2 + j, 1.0);
      if (lay.slack) b.add_entry(row, *lay.slack, i, j, 1.0);
      b.add_constraint(std::move(row), i == j ? 1.0 : 0.0);
    }
  for (std::size_t ell = 0; ell < l2.num_vars(); ++ell) {
    const Matrix& target = l2.coeff(ell);
    for (std::size_t i = 0; i < d2; ++i)
      for (std::size_t j = i; j < d2; ++j) {
        auto row = b.new_row();
        for (std::size_t mu = 0; mu < dom.size(); ++mu) {
          const Matrix& a = dom[mu].coeff(ell);
          const std::size_t n = a.rows();
          for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = 0; q < n; ++q)
              if (a(p, q) != 0.0) b.add_entry(row, lay.blocks[mu], p * d2 + i, q * d2 + j, a(p, q));
        }
        double rhs = target(i, j);
        if (lay.scale) {
          b.add_free_term(row, *lay.scale, -target(i, j));
          rhs = 0.0;
        }
        b.add_constraint(std::move(row), rhs);
      }
  }
  return lay;
}

inline void check_choi_inputs(const PencilSum& dom, const LinearPencil& l2) {
  if (dom.empty()) throw Error(ErrorCode::kInvalidArgument, "empty domain pencil");
  for (const auto& m : dom) {
    check_same_arity(m.num_vars(), l2.num_vars());
    if (!m.is_monic()) throw Error(ErrorCode::kNotMonic, "domain pencil is not monic");
  }
  if (!l2.is_monic()) throw Error(ErrorCode::kNotMonic, "range pencil is not monic");
}

inline void check_domain_nondegenerate(const PencilSum& dom) {
  const auto l1 = direct_sum(std::span<const LinearPencil>(dom));
  if (!is_nondegenerate(l1)) {
    throw Error(ErrorCode::kDegenerate, "domain pencil coefficients are linearly dependent");
  }
}

}  // namespace detail

/// The Choi SDP: one PSD block of size d1·d2 and (1+g)·d2(d2+1)/2 rows.
inline SdpProblem build_choi_sdp(const LinearPencil& l1, const LinearPencil& l2,
                                 bool trace_zero_relaxation = false) {
  const PencilSum dom{l1};
  detail::check_choi_inputs(dom, l2);
  detail::check_domain_nondegenerate(dom);
  SdpBuilder b;
  detail::add_domain_sum_system(b, dom, l2, trace_zero_relaxation, false);
  return std::move(b).build();
}

/// L1 = ⊕ M_μ: the Choi matrix may be taken block diagonal, one block per summand.
inline SdpProblem build_choi_sdp_domain_sum(const PencilSum& blocks, const LinearPencil& l2,
                                            bool trace_zero_relaxation = false) {
  detail::check_choi_inputs(blocks, l2);
  detail::check_domain_nondegenerate(blocks);
  SdpBuilder b;
  detail::add_domain_sum_system(b, blocks, l2, trace_zero_relaxation, false);
  return std::move(b).build();
}

/// L2 = ⊕ B_μ: independent Choi systems D_{L1} ⊆ D_{B_μ}, one block of size
/// d1·δ_μ each.
inline SdpProblem build_choi_sdp_range_sum(const LinearPencil& l1, const PencilSum& blocks,
                                           bool trace_zero_relaxation = false) {
  if (blocks.empty()) throw Error(ErrorCode::kInvalidArgument, "empty range pencil");
  const PencilSum dom{l1};
  for (const auto& r : blocks) detail::check_choi_inputs(dom, r);
  detail::check_domain_nondegenerate(dom);

  // Each summand's system uses only its own variables, so build them one at
  // a time and concatenate.
  SdpProblem out;
  std::vector<SdpProblem> parts;
  for (const auto& r : blocks) {
    SdpBuilder b;
    detail::add_domain_sum_system(b, dom, r, trace_zero_relaxation, false);
    parts.push_back(std::move(b).build());
  }
  for (const auto& part : parts)
    out.block_dims.insert(out.block_dims.end(), part.block_dims.begin(), part.block_dims.end());
  const std::size_t nv = out.num_vars();
  std::size_t offset = 0;
  for (const auto& part : parts) {
    const std::size_t width = part.num_vars();
    for (std::size_t i = 0; i < part.num_constraints(); ++i) {
      Vector row(nv, 0.0);
      std::copy(part.constraints[i].begin(), part.constraints[i].end(),
                row.begin() + static_cast<std::ptrdiff_t>(offset));
      out.constraints.push_back(std::move(row));
      out.rhs.push_back(part.rhs[i]);
    }
    offset += width;
  }
  return out;
}

namespace detail {

// Assembles the full d1·d2 Choi matrix from domain-sum blocks C^μ.
inline Matrix assemble_domain_choi(const PencilSum& dom, std::size_t /*d2*/, const std::vector<Matrix>& cs) {
  std::vector<Matrix> parts(cs.begin(), cs.begin() + static_cast<std::ptrdiff_t>(dom.size()));
  return block_diagonal(parts);
}

// Scatters range-sum blocks (indexed (p, i_μ)) into (p, i) ordering.
inline Matrix assemble_range_choi(std::size_t d1, const PencilSum& rng, const std::vector<Matrix>& cs) {
  std::size_t d2 = 0;
  for (const auto& r : rng) d2 += r.size();
  Matrix c(d1 * d2, d1 * d2);
  std::size_t base = 0;
  for (std::size_t mu = 0; mu < rng.size(); ++mu) {
    const std::size_t dm = rng[mu].size();
    const Matrix& cm = cs[mu];
    for (std::size_t p = 0; p < d1; ++p)
      for (std::size_t i = 0; i < dm; ++i)
        for (std::size_t q = 0; q < d1; ++q)
          for (std::size_t j = 0; j < dm; ++j)
            c(p * d2 + base + i, q * d2 + base + j) = cm(p * dm + i, q * dm + j);
    base += dm;
  }
  return c;
}

inline double choi_margin(const Matrix& c) { return c.rows() ? min_eigenvalue(c) : 0.0; }

inline InclusionReport report_from_feasibility(const FeasibilityResult& r, const InclusionOptions& opts) {
  InclusionReport rep;
  rep.margin = r.slack;
  switch (r.status) {
    case FeasibilityStatus::kIndeterminate:
      rep.verdict = InclusionVerdict::kIndeterminate;
      rep.diagnostics = std::string("solver stopped with status ") + to_string(r.phase1.status) +
                        " after " + std::to_string(r.phase1.iterations) + " iterations";
      return rep;
    case FeasibilityStatus::kFeasible:
    case FeasibilityStatus::kInfeasible:
      break;
  }
  rep.included = r.slack >= -opts.threshold;
  rep.marginal = std::abs(r.slack) < opts.threshold;
  rep.verdict = rep.included ? InclusionVerdict::kIncluded : InclusionVerdict::kNotIncluded;
  return rep;
}

inline void check_inclusion_preconditions(const PencilSum& dom, const SdpOptions& sdp) {
  const auto l1 = dom.size() == 1 ? dom.front() : direct_sum(std::span<const LinearPencil>(dom));
  require_monic_nondegenerate(l1, "check_inclusion");
  if (!is_bounded(l1, sdp)) {
    throw Error(ErrorCode::kUnbounded, "check_inclusion: D_{L1} is unbounded");
  }
}

inline bool use_relaxation(const PencilSum& dom, const InclusionOptions& opts) {
  if (!opts.trace_zero_relaxation) return false;
  for (const auto& m : dom)
    if (!all_traceless(m)) return false;
  return true;
}

inline InclusionReport check_domain_sum(const PencilSum& dom, const LinearPencil& l2,
                                        const InclusionOptions& opts) {
  const bool relax = use_relaxation(dom, opts);
  const auto p = dom.size() == 1 ? build_choi_sdp(dom.front(), l2, relax)
                                 : build_choi_sdp_domain_sum(dom, l2, relax);
  const auto r = feasibility(p, opts.sdp);
  auto rep = report_from_feasibility(r, opts);
  if (rep.included && !r.blocks.empty()) {
    ChoiSolution ch;
    ch.d1 = 0;
    for (const auto& m : dom) ch.d1 += m.size();
    ch.d2 = l2.size();
    ch.c = assemble_domain_choi(dom, ch.d2, r.blocks);
    ch.margin = choi_margin(ch.c);
    rep.choi = std::move(ch);
  }
  return rep;
}

}  // namespace detail

/// Decides D_{⊕dom} ⊆ D_{⊕rng}. A range given as several blocks is split into
/// independent per-block tests; the verdict is their conjunction.
inline InclusionReport check_inclusion(const PencilSum& dom, const PencilSum& rng,
                                       const InclusionOptions& opts = {}) {
  if (dom.empty() || rng.empty()) throw Error(ErrorCode::kInvalidArgument, "check_inclusion: empty pencil");
  for (const auto& r : rng) detail::check_choi_inputs(dom, r);
  if (opts.check_preconditions) detail::check_inclusion_preconditions(dom, opts.sdp);

  std::vector<InclusionReport> parts;
  for (const auto& r : rng) {
    parts.push_back(detail::check_domain_sum(dom, r, opts));
    if (parts.back().verdict == InclusionVerdict::kNotIncluded) break;
  }
  if (parts.size() == 1) return std::move(parts.front());

  InclusionReport rep;
  rep.margin = std::numeric_limits<double>::infinity();
  rep.verdict = InclusionVerdict::kIncluded;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& part = parts[k];
    rep.margin = std::min(rep.margin, part.margin);
    rep.marginal = rep.marginal || part.marginal;
    if (part.verdict == InclusionVerdict::kNotIncluded) rep.verdict = InclusionVerdict::kNotIncluded;
    if (part.verdict == InclusionVerdict::kIndeterminate && rep.verdict == InclusionVerdict::kIncluded) {
      rep.verdict = InclusionVerdict::kIndeterminate;
      rep.diagnostics = "range block " + std::to_string(k) + ": " + part.diagnostics;
    }
  }
  rep.included = rep.verdict == InclusionVerdict::kIncluded;
  if (rep.included) {
    std::size_t d1 = 0;
    for (const auto& m : dom) d1 += m.size();
    std::vector<Matrix> cs;
    for (const auto& part : parts) cs.push_back(part.choi->c);
    ChoiSolution ch;
    ch.d1 = d1;
    ch.d2 = 0;
    for (const auto& r : rng) ch.d2 += r.size();
    ch.c = detail::assemble_range_choi(d1, rng, cs);
    ch.margin = detail::choi_margin(ch.c);
    rep.choi = std::move(ch);
  }
  return rep;
}

inline InclusionReport check_inclusion(const LinearPencil& l1, const LinearPencil& l2,
                                       const InclusionOptions& opts = {}) {
  return check_inclusion(PencilSum{l1}, PencilSum{l2}, opts);
}

inline InclusionReport check_inclusion(const LinearPencil& l1, const PencilSum& rng,
                                       const InclusionOptions& opts = {}) {
  return check_inclusion(PencilSum{l1}, rng, opts);
}

inline InclusionReport check_inclusion(const PencilSum& dom, const LinearPencil& l2,
                                       const InclusionOptions& opts = {}) {
  return check_inclusion(dom, PencilSum{l2}, opts);
}

/// Factor C = WᵀW after dropping eigenvalues below 1e-8·trace(C); row k of W
/// reshaped as V_k(p, i) = W(k, p·d2 + i).
inline Certificate extract_certificate(const ChoiSolution& choi) {
  const std::size_t d1 = choi.d1, d2 = choi.d2;
  if (choi.c.rows() != d1 * d2 || choi.c.cols() != d1 * d2) {
    throw Error(ErrorCode::kDimensionMismatch, "extract_certificate: C is not d1·d2 square");
  }
  const Matrix c = symmetrize(choi.c);
  const double tr = std::max(c.trace(), 0.0);
  const Matrix w = psd_factor(c, std::max(1e-8 * tr, 1e-12));
  Certificate cert;
  for (std::size_t k = 0; k < w.rows(); ++k) {
    Matrix v(d1, d2);
    for (std::size_t p = 0; p < d1; ++p)
      for (std::size_t i = 0; i < d2; ++i) v(p, i) = w(k, p * d2 + i);
    cert.vs.push_back(std::move(v));
  }
  return cert;
}

struct CertificateCheck {
  bool ok = false;
  double max_residual = 0.0;
  /// residuals[0]: ‖Σ VᵀV − I‖_F; residuals[ℓ]: ‖Σ Vᵀ A_{1,ℓ} V − A_{2,ℓ}‖_F.
  std::vector<double> residuals;
};

inline CertificateCheck verify_certificate(const LinearPencil& l1, const LinearPencil& l2,
                                           const Certificate& cert, double tol = 1e-6) {
  detail::check_same_arity(l1.num_vars(), l2.num_vars());
  const std::size_t d1 = l1.size(), d2 = l2.size();
  for (const auto& v : cert.vs) {
    if (v.rows() != d1 || v.cols() != d2) {
      throw Error(ErrorCode::kDimensionMismatch, "verify_certificate: V has the wrong shape");
    }
  }
  CertificateCheck out;
  Matrix iso(d2, d2);
  for (const auto& v : cert.vs) iso += v.transpose() * v;
  out.residuals.push_back((iso - Matrix::identity(d2)).frobenius_norm());
  for (std::size_t ell = 0; ell < l1.num_vars(); ++ell) {
    Matrix s(d2, d2);
    for (const auto& v : cert.vs) s += congruence(v, l1.coeff(ell));
    out.residuals.push_back((s - l2.coeff(ell)).frobenius_norm());
  }
  for (double r : out.residuals) out.max_residual = std::max(out.max_residual, r);
  out.ok = out.max_residual <= tol;
  return out;
}

/// Certificates for L1 → L2 and L2 → L3 give {V_i W_j} for L1 → L3.
inline Certificate compose(const Certificate& c12, const Certificate& c23) {
  Certificate out;
  for (const auto& v : c12.vs)
    for (const auto& w : c23.vs) out.vs.push_back(v * w);
  return out;
}

struct ScaleResult {
  SdpStatus status = SdpStatus::kIterLimit;
  double rho = 0.0;
  ChoiSolution choi;
};

/// Largest ρ with τ(M_ℓ) = ρ A_ℓ unital completely positive, i.e. ρ D_M ⊆ D_L.
inline ScaleResult max_scale_inclusion(const PencilSum& m, const LinearPencil& l,
                                       const SdpOptions& opts = {}) {
  detail::check_choi_inputs(m, l);
  detail::check_domain_nondegenerate(m);
  SdpBuilder b;
  const auto lay = detail::add_domain_sum_system(b, m, l, false, true);
  auto obj = b.new_row();
  b.add_free_term(obj, *lay.scale, 1.0);
  b.set_objective(std::move(obj));
  const auto sol = solve(std::move(b).build(), opts);

  ScaleResult out;
  out.status = sol.status;
  out.choi.d2 = l.size();
  for (const auto& blk : m) out.choi.d1 += blk.size();
  if (sol.status == SdpStatus::kDualUnbounded) {
    out.rho = std::numeric_limits<double>::infinity();
    return out;
  }
  if (sol.status == SdpStatus::kPrimalInfeasible) {
    throw Error(ErrorCode::kIndeterminate, "max_scale_inclusion: system reported infeasible at rho = 0");
  }
  out.rho = std::max(sol.free.at(*lay.scale), 0.0);
  out.choi.c = detail::assemble_domain_choi(m, l.size(), sol.blocks);
  out.choi.margin = detail::choi_margin(out.choi.c);
  return out;
}

inline ScaleResult max_scale_inclusion(const LinearPencil& m, const LinearPencil& l,
                                       const SdpOptions& opts = {}) {
  return max_scale_inclusion(PencilSum{m}, l, opts);
}

}  // namespace lmidom
