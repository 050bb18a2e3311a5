#pragma once

// Dense symmetric kernel: cyclic Jacobi eigensolver, one-sided Jacobi SVD,
// PSD factorization, Kronecker products, svec/smat, nullspaces, polar factors
// and small direct solvers.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "lmidom/error.hpp"
#include "lmidom/matrix.hpp"

namespace lmidom {

struct EigenDecomposition {
  Vector values;   // ascending
  Matrix vectors;  // column k pairs with values[k]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Throws kNoConvergence when `max_sweeps` sweeps do not annihilate the
/// off-diagonal part.
inline EigenDecomposition sym_eig(const Matrix& a, int max_sweeps = 100) {
  if (!a.square()) throw Error(ErrorCode::kDimensionMismatch, "sym_eig needs a square matrix");
  const std::size_t n = a.rows();
  Matrix w = symmetrize(a);
  Matrix q = Matrix::identity(n);

  const double scale = w.frobenius_norm();
  bool converged = (n <= 1) || scale == 0.0;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t r = p + 1; r < n; ++r) off += w(p, r) * w(p, r);
    if (std::sqrt(2.0 * off) <= 1e-15 * scale) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t r = p + 1; r < n; ++r) {
        const double apr = w(p, r);
        if (std::abs(apr) <= std::numeric_limits<double>::min()) continue;
        const double app = w(p, p);
        const double arr = w(r, r);
        // Skip rotations that cannot change the diagonal in floating point.
        if (sweep > 3 && std::abs(apr) < 1e-18 * (std::abs(app) + std::abs(arr))) {
          w(p, r) = w(r, p) = 0.0;
          continue;
        }
        const double theta = (arr - app) / (2.0 * apr);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double wkp = w(k, p);
          const double wkr = w(k, r);
          w(k, p) = c * wkp - s * wkr;
          w(k, r) = s * wkp + c * wkr;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double wpk = w(p, k);
          const double wrk = w(r, k);
          w(p, k) = c * wpk - s * wrk;
          w(r, k) = s * wpk + c * wrk;
        }
        w(p, r) = w(r, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double qkp = q(k, p);
          const double qkr = q(k, r);
          q(k, p) = c * qkp - s * qkr;
          q(k, r) = s * qkp + c * qkr;
        }
      }
    }
  }
  if (!converged) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t r = p + 1; r < n; ++r) off += w(p, r) * w(p, r);
    if (std::sqrt(2.0 * off) > 1e-13 * scale) {
      throw Error(ErrorCode::kNoConvergence,
                  "Jacobi eigensolver did not converge in " + std::to_string(max_sweeps) +
                      " sweeps");
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return w(i, i) < w(j, j); });
  EigenDecomposition out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = w(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = q(i, order[k]);
  }
  return out;
}

inline double min_eigenvalue(const Matrix& a) {
  if (a.rows() == 0) return std::numeric_limits<double>::infinity();
  return sym_eig(a).values.front();
}

inline double max_eigenvalue(const Matrix& a) {
  if (a.rows() == 0) return -std::numeric_limits<double>::infinity();
  return sym_eig(a).values.back();
}

/// Spectral norm of a symmetric matrix.
inline double sym_norm(const Matrix& a) {
  if (a.rows() == 0) return 0.0;
  const auto ev = sym_eig(a).values;
  return std::max(std::abs(ev.front()), std::abs(ev.back()));
}

/// Q diag(f(λ)) Qᵀ.
template <typename F>
Matrix sym_function(const EigenDecomposition& e, F&& f) {
  const std::size_t n = e.values.size();
  Matrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double fk = f(e.values[k]);
    if (fk == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const double qik = e.vectors(i, k) * fk;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += qik * e.vectors(j, k);
    }
  }
  return out;
}

struct SingularValueDecomposition {
  Vector values;  // descending
  Matrix v;       // right singular vectors as columns (n×n)
};

/// One-sided (Hestenes) Jacobi SVD; only the right factor is kept. Small
/// singular values are resolved to high relative accuracy, which is what
/// nullspace extraction needs.
inline SingularValueDecomposition svd_right(const Matrix& a, int max_sweeps = 100) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Matrix u = a;
  Matrix v = Matrix::identity(n);
  // Columns at round-off level relative to ‖A‖ are left alone; rotating them
  // against each other never settles.
  const double floor = std::pow(1e-15 * a.frobenius_norm(), 2);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += u(i, p) * u(i, p);
          beta += u(i, q) * u(i, q);
          gamma += u(i, p) * u(i, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta)) continue;
        if (std::min(alpha, beta) <= floor) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double up = u(i, p);
          const double uq = u(i, q);
          u(i, p) = c * up - s * uq;
          u(i, q) = s * up + c * uq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v(i, p);
          const double vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) {
      Vector sv(n);
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += u(i, j) * u(i, j);
        sv[j] = std::sqrt(s);
      }
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t i, std::size_t j) { return sv[i] > sv[j]; });
      SingularValueDecomposition out{Vector(n), Matrix(n, n)};
      for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = sv[order[k]];
        for (std::size_t i = 0; i < n; ++i) out.v(i, k) = v(i, order[k]);
      }
      return out;
    }
  }
  throw Error(ErrorCode::kNoConvergence, "one-sided Jacobi SVD did not converge");
}

/// Orthonormal columns spanning {v : M v ≈ 0}; a singular value counts as zero
/// when it is at most tol·(1 + ‖M‖_F).
inline Matrix nullspace(const Matrix& m, double tol = 1e-10) {
  const std::size_t n = m.cols();
  if (n == 0) return Matrix(0, 0);
  if (m.rows() == 0) return Matrix::identity(n);
  const auto svd = svd_right(m);
  const double cutoff = tol * (1.0 + m.frobenius_norm());
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < n; ++k)
    if (svd.values[k] <= cutoff) keep.push_back(k);
  return svd.v.columns(keep);
}

/// Numerical rank with the same cutoff convention as nullspace().
inline std::size_t numerical_rank(const Matrix& m, double tol = 1e-9) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  return m.cols() - nullspace(m, tol).cols();
}

/// Kronecker product: (A⊗B)[(i,k),(j,l)] = A[i][j]·B[k][l].
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      if (aij == 0.0) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return out;
}

inline std::size_t svec_size(std::size_t n) { return n * (n + 1) / 2; }

/// Position of entry (i, j), i <= j, inside svec(A). Upper triangle, row by row.
inline std::size_t svec_index(std::size_t n, std::size_t i, std::size_t j) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i - 1) / 2 + (j - i);
}

/// Isometric symmetric vectorization: off-diagonal entries carry √2 so that
/// ⟨svec A, svec B⟩ = trace(AB).
inline Vector svec(const Matrix& a) {
  const std::size_t n = a.rows();
  Vector v(svec_size(n));
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      v[k++] = (i == j) ? a(i, i) : std::sqrt(2.0) * 0.5 * (a(i, j) + a(j, i));
  return v;
}

inline Matrix smat(std::span<const double> v) {
  // n(n+1)/2 = size
  const auto n = static_cast<std::size_t>(
      std::llround((std::sqrt(8.0 * static_cast<double>(v.size()) + 1.0) - 1.0) / 2.0));
  if (svec_size(n) != v.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "smat: length is not triangular");
  }
  Matrix a(n, n);
  std::size_t k = 0;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double x = (i == j) ? v[k] : v[k] * inv_sqrt2;
      a(i, j) = a(j, i) = x;
      ++k;
    }
  return a;
}

/// Lower-triangular L with A = L Lᵀ. Throws NotPsdError when a pivot is not
/// positive.
inline Matrix cholesky(const Matrix& a) {
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) throw NotPsdError(d, "cholesky: matrix is not positive definite");
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

/// Inverse of a lower-triangular matrix.
inline Matrix lower_inverse(const Matrix& l) {
  const std::size_t n = l.rows();
  Matrix inv(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    inv(j, j) = 1.0 / l(j, j);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = j; k < i; ++k) s -= l(i, k) * inv(k, j);
      inv(i, j) = s / l(i, i);
    }
  }
  return inv;
}

/// LU factorization with partial pivoting, kept for repeated solves.
class LuFactorization {
 public:
  explicit LuFactorization(Matrix a) : lu_(std::move(a)), perm_(lu_.rows()) {
    const std::size_t n = lu_.rows();
    if (!lu_.square()) throw Error(ErrorCode::kDimensionMismatch, "LU needs a square matrix");
    std::iota(perm_.begin(), perm_.end(), 0);
    const double scale = std::max(1e-300, lu_.max_abs());
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t piv = k;
      for (std::size_t i = k + 1; i < n; ++i)
        if (std::abs(lu_(i, k)) > std::abs(lu_(piv, k))) piv = i;
      if (std::abs(lu_(piv, k)) <= 1e-300 * scale || !std::isfinite(lu_(piv, k))) {
        singular_ = true;
        return;
      }
      if (piv != k) {
        for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
        std::swap(perm_[k], perm_[piv]);
      }
      const double pivot = lu_(k, k);
      for (std::size_t i = k + 1; i < n; ++i) {
        const double f = lu_(i, k) / pivot;
        lu_(i, k) = f;
        if (f == 0.0) continue;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
      }
    }
  }

  bool singular() const noexcept { return singular_; }

  Vector solve(std::span<const double> b) const {
    if (singular_) throw Error(ErrorCode::kNearSingular, "LU solve with singular matrix");
    const std::size_t n = lu_.rows();
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < i; ++k) x[i] -= lu_(i, k) * x[k];
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t k = i + 1; k < n; ++k) x[i] -= lu_(i, k) * x[k];
      x[i] /= lu_(i, i);
    }
    return x;
  }

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
  bool singular_ = false;
};

/// Rank-truncated factor W (r×n) with A ≈ WᵀW. Eigenvalues in [-tol, tol]
/// are dropped; anything below -tol raises NotPsdError.
inline Matrix psd_factor(const Matrix& a, double tol = 1e-9) {
  const auto e = sym_eig(a);
  const std::size_t n = a.rows();
  if (n > 0 && e.values.front() < -tol) {
    throw NotPsdError(e.values.front(),
                      "psd_factor: eigenvalue " + std::to_string(e.values.front()) +
                          " below -tol");
  }
  std::vector<std::size_t> keep;
  for (std::size_t k = n; k-- > 0;)
    if (e.values[k] > tol) keep.push_back(k);
  Matrix w(keep.size(), n);
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const double s = std::sqrt(e.values[keep[r]]);
    for (std::size_t i = 0; i < n; ++i) w(r, i) = s * e.vectors(i, keep[r]);
  }
  return w;
}

/// Orthogonal polar factor U = T (TᵀT)^{-1/2}. Throws kNearSingular when the
/// smallest singular value of T is at most tol·max(1, σ_max).
inline Matrix polar_orthogonal(const Matrix& t, double tol = 1e-10) {
  if (!t.square()) throw Error(ErrorCode::kDimensionMismatch, "polar factor needs a square matrix");
  const auto e = sym_eig(t.transpose() * t);
  const double smax = std::sqrt(std::max(0.0, e.values.back()));
  const double smin = std::sqrt(std::max(0.0, e.values.front()));
  if (smin <= tol * std::max(1.0, smax)) {
    throw Error(ErrorCode::kNearSingular,
                "polar_orthogonal: smallest singular value " + std::to_string(smin));
  }
  return t * sym_function(e, [](double l) { return 1.0 / std::sqrt(l); });
}

/// Q₁ᵀ A Q₂ with Q given by columns.
inline Matrix congruence(const Matrix& q, const Matrix& a) { return q.transpose() * a * q; }

}  // namespace lmidom
