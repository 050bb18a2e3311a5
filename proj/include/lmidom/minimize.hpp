#pragma once

// Minimal defining pencils: split L into irreducible blocks with a random
// element of the commutant, drop blocks whose constraint is implied by the
// others, and compare minimal pencils up to orthogonal conjugation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lmidom/error.hpp"
#include "lmidom/inclusion.hpp"
#include "lmidom/linalg.hpp"
#include "lmidom/pencil.hpp"
#include "lmidom/radius.hpp"

namespace lmidom {

/// Frobenius-orthonormal basis of {X = Xᵀ : A_ℓX = XA_ℓ for all ℓ}.
inline std::vector<Matrix> commutant_basis(std::span<const Matrix> a, std::size_t d, double tol = 1e-9) {
  const std::size_t n = svec_size(d);
  const std::size_t per = d * (d - 1) / 2;
  Matrix m(a.size() * per, n);
  Vector unit(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    unit[k] = 1.0;
    const Matrix e = smat(unit);
    unit[k] = 0.0;
    std::size_t r = 0;
    for (const auto& al : a) {
      // A E − E A is antisymmetric; its strict upper triangle determines it.
      const Matrix c = al * e - e * al;
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) m(r++, k) = c(i, j);
    }
  }
  const Matrix ns = nullspace(m, tol);
  std::vector<Matrix> basis;
  for (std::size_t c = 0; c < ns.cols(); ++c) {
    const auto col = ns.col(c);
    basis.push_back(smat(col));
  }
  return basis;
}

inline std::vector<Matrix> commutant_basis(const LinearPencil& l, double tol = 1e-9) {
  return commutant_basis(l.coeffs(), l.size(), tol);
}

/// Dimension of the full (not necessarily symmetric) commutant.
inline std::size_t full_commutant_dimension(std::span<const Matrix> a, std::size_t d, double tol = 1e-9) {
  Matrix m(a.size() * d * d, d * d);
  for (std::size_t p = 0; p < d; ++p)
    for (std::size_t q = 0; q < d; ++q) {
      Matrix e(d, d);
      e(p, q) = 1.0;
      std::size_t r = 0;
      for (const auto& al : a) {
        const Matrix c = al * e - e * al;
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t j = 0; j < d; ++j) m(r++, p * d + q) = c(i, j);
      }
    }
  return nullspace(m, tol).cols();
}

struct BlockDecomposition {
  Matrix u;
  std::vector<std::size_t> block_sizes;
  /// blocks[ℓ][j] = B_ℓ^j.
  std::vector<std::vector<Matrix>> blocks;
  std::uint64_t seed = 0;

  std::size_t num_blocks() const { return block_sizes.size(); }
  std::size_t offset(std::size_t j) const {
    return std::accumulate(block_sizes.begin(), block_sizes.begin() + static_cast<std::ptrdiff_t>(j),
                           std::size_t{0});
  }
  LinearPencil block_pencil(std::size_t j) const {
    std::vector<Matrix> cs;
    for (const auto& per_var : blocks) cs.push_back(per_var[j]);
    return LinearPencil(Matrix::identity(block_sizes[j]), std::move(cs));
  }
};

namespace detail {

struct Splitter {
  const std::vector<Matrix>& a;
  std::mt19937_64 gen;
  int max_depth = 5;
  int attempts = 3;

  std::vector<Matrix> split(const Matrix& v, int depth) {
    const std::size_t k = v.cols();
    std::vector<Matrix> local;
    for (const auto& al : a) local.push_back(congruence(v, al));
    const auto basis = commutant_basis(local, k);
    if (basis.size() <= 1) return {v};
    if (depth >= max_depth) {
      throw Error(ErrorCode::kNoConvergence, "block_diagonalize: recursion depth cap reached");
    }
    std::normal_distribution<double> normal;
    for (int attempt = 0; attempt < attempts; ++attempt) {
      Matrix s(k, k);
      for (const auto& b : basis) s.axpy(normal(gen), b);
      const auto e = sym_eig(s);
      const double spread = e.values.back() - e.values.front();
      if (!(spread > 0.0)) continue;
      // Gaps below 1e-6·spread join eigenvalues; gaps in (1e-6, 1e-4)·spread
      // are too close to call.
      bool ambiguous = false;
      std::vector<std::vector<std::size_t>> groups{{0}};
      for (std::size_t i = 1; i < k; ++i) {
        const double gap = e.values[i] - e.values[i - 1];
        if (gap > 1e-6 * spread && gap < 1e-4 * spread) ambiguous = true;
        if (gap > 1e-6 * spread) groups.emplace_back();
        groups.back().push_back(i);
      }
      if (ambiguous || groups.size() < 2) continue;
      std::vector<Matrix> out;
      for (const auto& g : groups) {
        auto parts = split(v * e.vectors.columns(g), depth + 1);
        out.insert(out.end(), parts.begin(), parts.end());
      }
      return out;
    }
    throw Error(ErrorCode::kDegenerateSample,
                "block_diagonalize: no well-separated commutant sample after " + std::to_string(attempts) +
                    " attempts");
  }
};

inline double center_of_mass(const Matrix& v) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t c = 0; c < v.cols(); ++c) {
      num += static_cast<double>(i) * v(i, c) * v(i, c);
      den += v(i, c) * v(i, c);
    }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace detail

/// Orthogonal U with UᵀA_ℓU block diagonal and every block irreducible
/// (symmetric commutant spanned by the identity).
inline BlockDecomposition block_diagonalize(const LinearPencil& l, std::uint64_t seed = 0) {
  if (!l.is_monic()) throw Error(ErrorCode::kNotMonic, "block_diagonalize: pencil is not monic");
  const std::size_t d = l.size();
  detail::Splitter sp{l.coeffs(), std::mt19937_64(seed)};
  auto parts = sp.split(Matrix::identity(d), 0);
  std::stable_sort(parts.begin(), parts.end(), [](const Matrix& x, const Matrix& y) {
    return detail::center_of_mass(x) < detail::center_of_mass(y);
  });

  BlockDecomposition dec;
  dec.seed = seed;
  dec.u = Matrix(d, d);
  std::size_t col = 0;
  for (const auto& p : parts) {
    dec.u.set_block(0, col, p);
    dec.block_sizes.push_back(p.cols());
    col += p.cols();
  }
  for (const auto& a : l.coeffs()) {
    std::vector<Matrix> per_block;
    for (const auto& p : parts) per_block.push_back(symmetrize(congruence(p, a)));
    const Matrix full = congruence(dec.u, a);
    const double err = (full - block_diagonal(per_block)).frobenius_norm();
    if (err > 1e-7 * (1.0 + a.frobenius_norm())) {
      throw Error(ErrorCode::kDegenerateSample,
                  "block_diagonalize: off-block residual " + std::to_string(err));
    }
    dec.blocks.push_back(std::move(per_block));
  }
  for (std::size_t j = 0; j < dec.num_blocks(); ++j) {
    std::vector<Matrix> fam;
    for (const auto& per_var : dec.blocks) fam.push_back(per_var[j]);
    const auto dim = full_commutant_dimension(fam, dec.block_sizes[j]);
    if (dim != 1 && dim != 2 && dim != 4) {
      throw Error(ErrorCode::kDegenerateSample,
                  "block_diagonalize: block " + std::to_string(j) + " has commutant dimension " + std::to_string(dim));
    }
  }
  return dec;
}

struct MinimalPencilReport {
  LinearPencil minimal;
  Matrix u;
  BlockDecomposition decomposition;
  std::vector<std::size_t> kept;
  std::vector<std::size_t> removed;
  /// Orthogonal projection onto the coordinates of the removed blocks.
  Matrix silov_projection;
  /// Both inclusions between the minimal pencil and U*LU held.
  bool certified = false;
};

struct MinimizeOptions {
  InclusionOptions inclusion;
  std::uint64_t seed = 0;
};

namespace detail {

inline PencilSum pick_blocks(const BlockDecomposition& dec, const std::vector<std::size_t>& idx) {
  PencilSum out;
  for (auto j : idx) out.push_back(dec.block_pencil(j));
  return out;
}

// Whether the constraint of block j follows from the listed others. A
// degenerate sum of the others has a line in its set that block j cuts, so
// block j is needed.
inline bool implied_by(const BlockDecomposition& dec, const std::vector<std::size_t>& others, std::size_t j,
                       const InclusionOptions& opts) {
  if (others.empty()) return false;
  const PencilSum dom = pick_blocks(dec, others);
  if (!is_nondegenerate(direct_sum(std::span<const LinearPencil>(dom)))) return false;
  InclusionOptions o = opts;
  o.check_preconditions = false;
  const auto rep = check_inclusion(dom, dec.block_pencil(j), o);
  if (rep.verdict == InclusionVerdict::kIndeterminate) {
    throw Error(ErrorCode::kIndeterminate,
                "minimal_pencil: redundancy test for block " + std::to_string(j) + " undecided: " + rep.diagnostics);
  }
  return rep.included;
}

}  // namespace detail

inline MinimalPencilReport minimal_pencil(const LinearPencil& l, const MinimizeOptions& opts = {}) {
  detail::require_monic_nondegenerate(l, "minimal_pencil");
  if (!is_bounded(l, opts.inclusion.sdp)) throw Error(ErrorCode::kUnbounded, "minimal_pencil: D_L is unbounded");

  MinimalPencilReport r;
  r.decomposition = block_diagonalize(l, opts.seed);
  const auto& dec = r.decomposition;
  r.u = dec.u;
  std::vector<std::size_t> kept(dec.num_blocks());
  std::iota(kept.begin(), kept.end(), std::size_t{0});

  bool changed = true;
  while (changed && kept.size() > 1) {
    changed = false;
    for (std::size_t pos = 0; pos < kept.size(); ++pos) {
      std::vector<std::size_t> others = kept;
      others.erase(others.begin() + static_cast<std::ptrdiff_t>(pos));
      if (detail::implied_by(dec, others, kept[pos], opts.inclusion)) {
        r.removed.push_back(kept[pos]);
        kept = std::move(others);
        changed = true;
        break;
      }
    }
  }
  std::sort(r.removed.begin(), r.removed.end());
  r.kept = kept;
  const PencilSum kept_blocks = detail::pick_blocks(dec, kept);
  r.minimal = direct_sum(std::span<const LinearPencil>(kept_blocks));

  const std::size_t d = l.size();
  r.silov_projection = Matrix(d, d);
  for (auto j : r.removed) {
    const Matrix p = dec.u.block(0, dec.offset(j), d, dec.block_sizes[j]);
    r.silov_projection += p * p.transpose();
  }

  std::vector<std::size_t> all(dec.num_blocks());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const PencilSum all_blocks = detail::pick_blocks(dec, all);
  InclusionOptions o = opts.inclusion;
  o.check_preconditions = false;
  const auto fwd = check_inclusion(kept_blocks, all_blocks, o);
  const auto bwd = check_inclusion(all_blocks, kept_blocks, o);
  if (fwd.verdict == InclusionVerdict::kIndeterminate || bwd.verdict == InclusionVerdict::kIndeterminate) {
    throw Error(ErrorCode::kIndeterminate, "minimal_pencil: final set-equality check undecided");
  }
  r.certified = fwd.included && bwd.included;
  return r;
}

struct EquivalenceResult {
  std::optional<Matrix> u;
  double residual = 0.0;
  /// False when the search gave up without proving non-equivalence.
  bool conclusive = true;
  std::string diagnostics;
};

namespace detail {

// Traces of all words of length ≤ max_len in the coefficients; a mismatch
// rules out simultaneous orthogonal similarity.
inline std::optional<std::string> word_trace_mismatch(const LinearPencil& l1, const LinearPencil& l2,
                                                      std::size_t max_len, double tol) {
  const std::size_t g = l1.num_vars();
  struct Node {
    Matrix w1, w2;
    std::string word;
  };
  std::vector<Node> level{{Matrix::identity(l1.size()), Matrix::identity(l2.size()), ""}};
  std::size_t budget = 20000;
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<Node> next;
    for (const auto& n : level) {
      for (std::size_t j = 0; j < g; ++j) {
        if (budget == 0) return std::nullopt;
        --budget;
        Node m{n.w1 * l1.coeff(j), n.w2 * l2.coeff(j), n.word + "x" + std::to_string(j + 1)};
        const double t1 = m.w1.trace(), t2 = m.w2.trace();
        if (std::abs(t1 - t2) > tol * (1.0 + std::abs(t1) + std::abs(t2))) {
          return "trace of word " + m.word + " differs (" + std::to_string(t1) + " vs " + std::to_string(t2) + ")";
        }
        next.push_back(std::move(m));
      }
    }
    level = std::move(next);
  }
  return std::nullopt;
}

}  // namespace detail

/// Orthogonal U with Uᵀ A_{1,ℓ} U = A_{2,ℓ} for all ℓ, if one is found.
inline EquivalenceResult unitary_equivalent(const LinearPencil& l1, const LinearPencil& l2, double tol = 1e-6,
                                            std::uint64_t seed = 0) {
  EquivalenceResult out;
  if (l1.size() != l2.size() || l1.num_vars() != l2.num_vars()) {
    out.diagnostics = "sizes differ";
    return out;
  }
  if (!l1.is_monic() || !l2.is_monic()) throw Error(ErrorCode::kNotMonic, "unitary_equivalent: pencils must be monic");
  if (auto why = detail::word_trace_mismatch(l1, l2, 6, 1e-8)) {
    out.diagnostics = *why;
    return out;
  }
  const std::size_t d = l1.size(), g = l1.num_vars();
  // A1 T − T A2 = 0, T = Σ t_pq E_pq.
  Matrix m(g * d * d, d * d);
  for (std::size_t p = 0; p < d; ++p)
    for (std::size_t q = 0; q < d; ++q) {
      Matrix e(d, d);
      e(p, q) = 1.0;
      std::size_t r = 0;
      for (std::size_t j = 0; j < g; ++j) {
        const Matrix c = l1.coeff(j) * e - e * l2.coeff(j);
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t k = 0; k < d; ++k) m(r++, p * d + q) = c(i, k);
      }
    }
  const Matrix ns = nullspace(m, 1e-9);
  if (ns.cols() == 0) {
    out.diagnostics = "no intertwiner";
    return out;
  }
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  for (int attempt = 0; attempt < 3; ++attempt) {
    Vector t(d * d, 0.0);
    for (std::size_t c = 0; c < ns.cols(); ++c) {
      const double w = normal(gen);
      for (std::size_t k = 0; k < d * d; ++k) t[k] += w * ns(k, c);
    }
    Matrix tm(d, d);
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = 0; q < d; ++q) tm(p, q) = t[p * d + q];
    Matrix u;
    try {
      u = polar_orthogonal(tm, 1e-8);
    } catch (const Error&) {
      continue;
    }
    double res = 0.0;
    for (std::size_t j = 0; j < g; ++j)
      res = std::max(res, (congruence(u, l1.coeff(j)) - l2.coeff(j)).frobenius_norm());
    if (res <= tol) {
      out.u = std::move(u);
      out.residual = res;
      return out;
    }
  }
  out.conclusive = false;
  out.diagnostics = "no invertible intertwiner sample found";
  return out;
}

enum class EqualityVerdict { kEqual, kNotEqual, kIndeterminate };

inline const char* to_string(EqualityVerdict v) {
  switch (v) {
    case EqualityVerdict::kEqual: return "Equal";
    case EqualityVerdict::kNotEqual: return "NotEqual";
    case EqualityVerdict::kIndeterminate: return "Indeterminate";
  }
  return "Unknown";
}

struct EqualityReport {
  EqualityVerdict verdict = EqualityVerdict::kIndeterminate;
  /// Maps the minimal pencil of L1 onto that of L2.
  std::optional<Matrix> u;
  bool l1_in_l2 = false;
  bool l2_in_l1 = false;
  std::string direction;
  MinimalPencilReport min1, min2;
};

/// D_{L1} = D_{L2} iff their minimal pencils are orthogonally equivalent.
inline EqualityReport gleichstellensatz_check(const LinearPencil& l1, const LinearPencil& l2,
                                              const MinimizeOptions& opts = {}) {
  EqualityReport r;
  r.min1 = minimal_pencil(l1, opts);
  r.min2 = minimal_pencil(l2, opts);
  const auto eq = unitary_equivalent(r.min1.minimal, r.min2.minimal, 1e-6, opts.seed);
  if (eq.u) {
    r.verdict = EqualityVerdict::kEqual;
    r.u = eq.u;
    r.l1_in_l2 = r.l2_in_l1 = true;
    return r;
  }
  InclusionOptions o = opts.inclusion;
  o.check_preconditions = false;
  const auto a = check_inclusion(l1, l2, o);
  const auto b = check_inclusion(l2, l1, o);
  r.l1_in_l2 = a.included;
  r.l2_in_l1 = b.included;
  r.verdict = (a.verdict == InclusionVerdict::kNotIncluded || b.verdict == InclusionVerdict::kNotIncluded)
                  ? EqualityVerdict::kNotEqual
                  : EqualityVerdict::kIndeterminate;
  if (!a.included) r.direction = "D_L1 not contained in D_L2";
  if (!b.included) r.direction += std::string(r.direction.empty() ? "" : "; ") + "D_L2 not contained in D_L1";
  if (r.direction.empty()) r.direction = eq.diagnostics;
  return r;
}

struct SilovReport {
  BlockDecomposition decomposition;
  std::vector<std::size_t> kept;
  std::vector<std::size_t> removed;
  Matrix projection;
  std::size_t rank = 0;
};

/// The kernel of A_ℓ ↦ Ã_ℓ: matrices supported on the removed blocks in the U basis.
inline SilovReport silov_ideal(const std::vector<Matrix>& a, const MinimizeOptions& opts = {}) {
  auto m = minimal_pencil(LinearPencil::monic(a), opts);
  SilovReport r;
  r.decomposition = std::move(m.decomposition);
  r.kept = std::move(m.kept);
  r.removed = std::move(m.removed);
  r.projection = std::move(m.silov_projection);
  for (auto j : r.removed) r.rank += r.decomposition.block_sizes[j];
  return r;
}

}  // namespace lmidom
