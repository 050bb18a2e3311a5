#pragma once

// Linear pencils L(x) = A0 + Σ_j A_j x_j with symmetric d×d coefficients,
// their matricial evaluation, and the named pencils the algorithms use.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "lmidom/error.hpp"
#include "lmidom/linalg.hpp"
#include "lmidom/matrix.hpp"

namespace lmidom {

/// A point of level n: g symmetric n×n matrices.
using MatrixTuple = std::vector<Matrix>;

class LinearPencil {
 public:
  LinearPencil() = default;

  /// Throws when coefficients are not square, symmetric (1e-9) or of equal size.
  LinearPencil(Matrix a0, std::vector<Matrix> coeffs)
      : a0_(std::move(a0)), coeffs_(std::move(coeffs)) {
    validate(1e-9);
    a0_ = symmetrize(a0_);
    for (auto& a : coeffs_) a = symmetrize(a);
  }

  /// I + Σ A_j x_j.
  static LinearPencil monic(std::vector<Matrix> coeffs) {
    if (coeffs.empty()) throw Error(ErrorCode::kInvalidArgument, "monic(): need at least one coefficient to infer the size");
    const std::size_t d = coeffs.front().rows();
    return LinearPencil(Matrix::identity(d), std::move(coeffs));
  }

  std::size_t size() const noexcept { return a0_.rows(); }
  std::size_t num_vars() const noexcept { return coeffs_.size(); }

  const Matrix& a0() const noexcept { return a0_; }
  const Matrix& coeff(std::size_t j) const { return coeffs_.at(j); }
  const std::vector<Matrix>& coeffs() const noexcept { return coeffs_; }

  bool is_monic(double tol = 1e-12) const {
    return (a0_ - Matrix::identity(size())).frobenius_norm() <= tol;
  }

  /// L evaluated at a scalar point x ∈ ℝ^g.
  Matrix at(std::span<const double> x) const {
    if (x.size() != num_vars()) throw Error(ErrorCode::kDimensionMismatch, "pencil arity");
    Matrix out = a0_;
    for (std::size_t j = 0; j < x.size(); ++j) out.axpy(x[j], coeffs_[j]);
    return out;
  }

  /// The pencil U* L U, for U with d rows.
  LinearPencil conjugated(const Matrix& u) const {
    std::vector<Matrix> cs;
    cs.reserve(coeffs_.size());
    for (const auto& a : coeffs_) cs.push_back(congruence(u, a));
    return LinearPencil(congruence(u, a0_), std::move(cs));
  }

  /// Homogeneous part Σ A_j x_j (A0 replaced by zero).
  LinearPencil linear_part() const { return LinearPencil(Matrix(size(), size()), coeffs_); }

 private:
  void validate(double tol) const {
    if (!a0_.square()) throw Error(ErrorCode::kDimensionMismatch, "A0 must be square");
    if (!is_symmetric(a0_, tol)) throw Error(ErrorCode::kNotSymmetric, "A0 is not symmetric");
    for (std::size_t j = 0; j < coeffs_.size(); ++j) {
      const auto& a = coeffs_[j];
      if (a.rows() != a0_.rows() || a.cols() != a0_.cols()) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "coefficient A" + std::to_string(j + 1) + " has the wrong size");
      }
      if (!is_symmetric(a, tol)) {
        throw Error(ErrorCode::kNotSymmetric,
                    "coefficient A" + std::to_string(j + 1) + " is not symmetric");
      }
    }
  }

  Matrix a0_;
  std::vector<Matrix> coeffs_;
};

/// L(X) = A0 ⊗ I_n + Σ A_j ⊗ X_j.
inline Matrix evaluate(const LinearPencil& l, const MatrixTuple& x) {
  if (x.size() != l.num_vars()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "evaluate: pencil has " + std::to_string(l.num_vars()) + " variables, tuple has " +
                    std::to_string(x.size()));
  }
  const std::size_t n = x.empty() ? 1 : x.front().rows();
  for (const auto& xi : x) {
    if (xi.rows() != n || xi.cols() != n) {
      throw Error(ErrorCode::kDimensionMismatch, "evaluate: tuple entries must share one square size");
    }
  }
  Matrix out = kron(l.a0(), Matrix::identity(n));
  for (std::size_t j = 0; j < x.size(); ++j) out += kron(l.coeff(j), x[j]);
  return out;
}

/// Scalar tuple of level 1 from a point in ℝ^g.
inline MatrixTuple scalar_tuple(std::span<const double> x) {
  MatrixTuple t;
  for (double v : x) t.push_back(Matrix{{v}});
  return t;
}

/// True when every A_j (j ≥ 1) is linearly independent of the others.
inline bool is_nondegenerate(const LinearPencil& l, double tol = 1e-9) {
  const std::size_t g = l.num_vars();
  if (g == 0) return true;
  Matrix stack(g, svec_size(l.size()));
  for (std::size_t j = 0; j < g; ++j) {
    const auto v = svec(l.coeff(j));
    std::copy(v.begin(), v.end(), stack.row(j).begin());
  }
  return numerical_rank(stack.transpose(), tol) == g;
}

/// Monic pencil with the same matricial LMI set, obtained by restricting to
/// Range(A0) and congruence with A0^{-1/2}. Requires A0 ⪰ 0 and
/// Range(A_j) ⊆ Range(A0).
inline LinearPencil monicize(const LinearPencil& l, double tol = 1e-9) {
  if (l.is_monic()) return l;
  const auto e = sym_eig(l.a0());
  const double scale = std::max(1.0, e.values.empty() ? 0.0 : std::abs(e.values.back()));
  const double cutoff = tol * scale;
  if (!e.values.empty() && e.values.front() < -cutoff) {
    throw NotPsdError(e.values.front(), "monicize: A0 is not positive semidefinite");
  }
  std::vector<std::size_t> range_idx, kernel_idx;
  for (std::size_t k = 0; k < e.values.size(); ++k)
    (e.values[k] > cutoff ? range_idx : kernel_idx).push_back(k);
  if (range_idx.empty()) throw Error(ErrorCode::kZeroNotInterior, "monicize: A0 = 0");

  const Matrix range = e.vectors.columns(range_idx);
  const Matrix kernel = e.vectors.columns(kernel_idx);
  for (std::size_t j = 0; j < l.num_vars(); ++j) {
    if (kernel.cols() > 0) {
      const Matrix leak = l.coeff(j) * kernel;
      if (leak.frobenius_norm() > tol * (1.0 + l.coeff(j).frobenius_norm())) {
        throw Error(ErrorCode::kZeroNotInterior,
                    "monicize: Range(A" + std::to_string(j + 1) + ") is not inside Range(A0)");
      }
    }
  }
  // A0 restricted to its range is diag(λ) in the eigenbasis; B = diag(√λ).
  Matrix scale_inv(range_idx.size(), range_idx.size());
  for (std::size_t k = 0; k < range_idx.size(); ++k)
    scale_inv(k, k) = 1.0 / std::sqrt(e.values[range_idx[k]]);
  const Matrix t = range * scale_inv;
  std::vector<Matrix> coeffs;
  for (const auto& a : l.coeffs()) coeffs.push_back(congruence(t, a));
  return LinearPencil(Matrix::identity(range_idx.size()), std::move(coeffs));
}

/// Block-diagonal stacking of pencils with a common number of variables.
inline LinearPencil direct_sum(std::span<const LinearPencil> pencils) {
  if (pencils.empty()) throw Error(ErrorCode::kInvalidArgument, "direct_sum of nothing");
  const std::size_t g = pencils.front().num_vars();
  std::vector<Matrix> a0s;
  std::vector<std::vector<Matrix>> per_var(g);
  for (const auto& p : pencils) {
    if (p.num_vars() != g) throw Error(ErrorCode::kDimensionMismatch, "direct_sum: variable counts differ");
    a0s.push_back(p.a0());
    for (std::size_t j = 0; j < g; ++j) per_var[j].push_back(p.coeff(j));
  }
  std::vector<Matrix> coeffs;
  for (const auto& blocks : per_var) coeffs.push_back(block_diagonal(blocks));
  return LinearPencil(block_diagonal(a0s), std::move(coeffs));
}

inline LinearPencil direct_sum(std::initializer_list<LinearPencil> pencils) {
  std::vector<LinearPencil> v(pencils);
  return direct_sum(std::span<const LinearPencil>(v));
}

/// The 2g scalar summands 1 + x_j/ρ and 1 - x_j/ρ of the cube pencil, in the
/// order used by cube_pencil().
inline std::vector<LinearPencil> cube_pencil_blocks(std::size_t g, double rho) {
  if (!(rho > 0.0)) throw Error(ErrorCode::kInvalidArgument, "cube_pencil: rho must be positive");
  std::vector<LinearPencil> blocks;
  for (double sign : {1.0, -1.0}) {
    for (std::size_t j = 0; j < g; ++j) {
      std::vector<Matrix> cs(g, Matrix(1, 1));
      cs[j](0, 0) = sign / rho;
      blocks.push_back(LinearPencil::monic(std::move(cs)));
    }
  }
  return blocks;
}

/// C_ρ(x) = I + (1/ρ) Σ (E_jj - E_{g+j,g+j}) x_j; its set is {X : ‖X_j‖ ≤ ρ}.
inline LinearPencil cube_pencil(std::size_t g, double rho) {
  const auto blocks = cube_pencil_blocks(g, rho);
  return direct_sum(std::span<const LinearPencil>(blocks));
}

/// J_N(x) = I + (1/N) Σ (E_{1,j+1} + E_{j+1,1}) x_j; PSD iff Σ X_j² ⪯ N² I.
inline LinearPencil ball_pencil(std::size_t g, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::kInvalidArgument, "ball_pencil: N must be positive");
  std::vector<Matrix> cs;
  for (std::size_t j = 0; j < g; ++j) {
    Matrix a(g + 1, g + 1);
    a(0, j + 1) = a(j + 1, 0) = 1.0 / radius;
    cs.push_back(std::move(a));
  }
  return LinearPencil::monic(std::move(cs));
}

/// L' = [[I, L], [L, I]], whose set is {X : ‖L(X)‖ ≤ 1}.
inline LinearPencil norm_pencil(const LinearPencil& l) {
  const std::size_t d = l.size();
  auto embed = [d](const Matrix& a, bool with_identity) {
    Matrix out(2 * d, 2 * d);
    if (with_identity) {
      for (std::size_t i = 0; i < 2 * d; ++i) out(i, i) = 1.0;
    }
    out.set_block(0, d, a);
    out.set_block(d, 0, a);
    return out;
  };
  std::vector<Matrix> cs;
  for (const auto& a : l.coeffs()) cs.push_back(embed(a, false));
  return LinearPencil(embed(l.a0(), true), std::move(cs));
}

/// L_η = I + diag(s, -s) x1 + [[0, t], [t, 0]] x2 with s² + t² = 1.
inline LinearPencil eta_pencil(double s, double t) {
  if (std::abs(s * s + t * t - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "eta_pencil: (s, t) must be a unit vector");
  }
  return LinearPencil::monic({Matrix{{s, 0.0}, {0.0, -s}}, Matrix{{0.0, t}, {t, 0.0}}});
}

/// The two pencils of the classic disk example: both describe the unit disk
/// at level one, but only Γ's matricial set sits inside Δ's.
namespace fixtures {

inline LinearPencil delta() {
  return LinearPencil::monic({Matrix{{0, 1, 0}, {1, 0, 0}, {0, 0, 0}},
                              Matrix{{0, 0, 1}, {0, 0, 0}, {1, 0, 0}}});
}

inline LinearPencil gamma() {
  return LinearPencil::monic({Matrix{{1, 0}, {0, -1}}, Matrix{{0, 1}, {1, 0}}});
}

}  // namespace fixtures

}  // namespace lmidom
