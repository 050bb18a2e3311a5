#pragma once

// Dense semidefinite programming.
//
// Problems are stored in primal standard form
//
//     maximize    ⟨C, X⟩ + c_fᵀ x_f
//     subject to  ⟨A_i, X⟩ + f_iᵀ x_f = b_i,   i = 1..m
//                 X = diag(X_1, …, X_k) ⪰ 0,   x_f free,
//
// with every coefficient row written in svec coordinates (blocks in order,
// then free scalars). The dual is
//
//     minimize bᵀy  subject to  Σ y_i A_i − C = Z ⪰ 0,  Σ y_i f_i = c_f.
//
// solve() runs an infeasible primal-dual path-following method with
// Nesterov–Todd scaling and a Mehrotra predictor–corrector. feasibility()
// decides a constraint system through a phase-I margin problem.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lmidom/error.hpp"
#include "lmidom/linalg.hpp"
#include "lmidom/matrix.hpp"

namespace lmidom {

struct SdpProblem {
  std::vector<std::size_t> block_dims;
  std::size_t n_free = 0;
  Vector objective;                 // maximized; empty means zero
  std::vector<Vector> constraints;  // each of length num_vars()
  Vector rhs;

  std::size_t num_block_vars() const {
    std::size_t n = 0;
    for (auto d : block_dims) n += svec_size(d);
    return n;
  }
  std::size_t num_vars() const { return num_block_vars() + n_free; }
  std::size_t num_constraints() const { return constraints.size(); }

  std::size_t block_offset(std::size_t k) const {
    std::size_t off = 0;
    for (std::size_t b = 0; b < k; ++b) off += svec_size(block_dims[b]);
    return off;
  }
  std::size_t free_offset(std::size_t j) const { return num_block_vars() + j; }

  /// Throws kDimensionMismatch when row lengths disagree with the layout.
  void validate() const {
    const std::size_t n = num_vars();
    if (!objective.empty() && objective.size() != n) {
      throw Error(ErrorCode::kDimensionMismatch, "objective length does not match variables");
    }
    if (rhs.size() != constraints.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "rhs length does not match constraint count");
    }
    for (const auto& row : constraints) {
      if (row.size() != n) {
        throw Error(ErrorCode::kDimensionMismatch, "constraint row length does not match variables");
      }
    }
    for (auto d : block_dims) {
      if (d == 0) throw Error(ErrorCode::kInvalidArgument, "PSD blocks must have positive size");
    }
  }
};

/// Incremental construction of an SdpProblem. Declare all variables before
/// adding constraints.
class SdpBuilder {
 public:
  std::size_t add_block(std::size_t dim) {
    if (frozen_) throw Error(ErrorCode::kInvalidArgument, "declare variables before constraints");
    problem_.block_dims.push_back(dim);
    return problem_.block_dims.size() - 1;
  }

  std::size_t add_free() {
    if (frozen_) throw Error(ErrorCode::kInvalidArgument, "declare variables before constraints");
    return problem_.n_free++;
  }

  std::size_t block_dim(std::size_t block) const { return problem_.block_dims.at(block); }

  Vector new_row() {
    frozen_ = true;
    return Vector(problem_.num_vars(), 0.0);
  }

  /// row += coef · X_block(i, j) for the symmetric block variable.
  void add_entry(Vector& row, std::size_t block, std::size_t i, std::size_t j, double coef) const {
    const std::size_t n = problem_.block_dims.at(block);
    const std::size_t idx = problem_.block_offset(block) + svec_index(n, i, j);
    row[idx] += (i == j) ? coef : coef / std::sqrt(2.0);
  }

  /// row += ⟨S, X_block⟩ for a symmetric coefficient matrix S.
  void add_inner(Vector& row, std::size_t block, const Matrix& s) const {
    const std::size_t off = problem_.block_offset(block);
    const auto v = svec(s);
    for (std::size_t k = 0; k < v.size(); ++k) row[off + k] += v[k];
  }

  void add_free_term(Vector& row, std::size_t var, double coef) const {
    row[problem_.free_offset(var)] += coef;
  }

  void add_constraint(Vector row, double rhs) {
    problem_.constraints.push_back(std::move(row));
    problem_.rhs.push_back(rhs);
  }

  void set_objective(Vector objective) { problem_.objective = std::move(objective); }

  const SdpProblem& problem() const { return problem_; }
  SdpProblem build() && { return std::move(problem_); }

 private:
  SdpProblem problem_;
  bool frozen_ = false;
};

enum class SdpStatus { kOptimal, kPrimalInfeasible, kDualUnbounded, kIterLimit };

inline const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::kOptimal: return "Optimal";
    case SdpStatus::kPrimalInfeasible: return "PrimalInfeasible";
    case SdpStatus::kDualUnbounded: return "DualUnbounded";
    case SdpStatus::kIterLimit: return "IterLimit";
  }
  return "Unknown";
}

struct SdpOptions {
  double feastol = 1e-8;
  double gaptol = 1e-8;
  int max_iterations = 200;
  /// A stalled phase-I solve still decides feasibility when its residuals
  /// and gap are below this; degenerate Choi systems stall just short of
  /// feastol.
  double stalled_tol = 1e-6;
  /// Row dependency cutoff during preprocessing.
  double rank_tol = 1e-10;
  bool verbose = false;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::kIterLimit;
  std::vector<Matrix> blocks;      // primal X_k
  Vector free;                     // primal x_f
  Vector dual;                     // y, one entry per original constraint
  std::vector<Matrix> dual_slack;  // Z_k
  double objective_value = 0.0;    // primal objective
  double dual_objective = 0.0;
  double margin = 0.0;             // min over blocks of λ_min(X_k)
  double primal_residual = 0.0;    // ‖A x − b‖∞ / (1 + ‖b‖∞)
  double dual_residual = 0.0;
  double gap = 0.0;                // relative duality gap
  double certificate_residual = 0.0;
  int iterations = 0;
};

namespace detail {

// Constraint data expanded into per-block symmetric matrices.
struct ExpandedProblem {
  std::vector<std::size_t> dims;
  std::size_t n_free = 0;
  std::vector<std::vector<Matrix>> a;       // a[i][k]
  std::vector<std::vector<char>> touches;   // touches[i][k]
  std::vector<Vector> f;                    // f[i] (length n_free)
  Vector b;
  std::vector<Matrix> c;
  Vector cf;
  std::vector<std::size_t> kept_rows;       // original indices of rows in a
  std::vector<double> row_scale;            // row i was divided by row_scale[i]
};

struct RowReduction {
  std::vector<std::size_t> kept;
  bool inconsistent = false;
  double worst_residual = 0.0;
};

// Gram–Schmidt on augmented rows [a_i | b_i]; rows whose a-part is dependent
// are dropped, and flagged inconsistent when their b-part is not.
inline RowReduction reduce_rows(const std::vector<Vector>& rows, const Vector& rhs, double tol) {
  RowReduction out;
  std::vector<Vector> basis;
  std::vector<double> basis_rhs;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Vector r = rows[i];
    double rb = rhs[i];
    const double norm0 = norm2(r);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < basis.size(); ++k) {
        const double c = dot(basis[k], r);
        for (std::size_t t = 0; t < r.size(); ++t) r[t] -= c * basis[k][t];
        rb -= c * basis_rhs[k];
      }
    }
    const double nr = norm2(r);
    if (nr <= tol * std::max(1.0, norm0)) {
      const double resid = std::abs(rb) / (1.0 + std::abs(rhs[i]));
      out.worst_residual = std::max(out.worst_residual, resid);
      if (resid > 1e-8) out.inconsistent = true;
      continue;
    }
    for (double& v : r) v /= nr;
    basis.push_back(std::move(r));
    basis_rhs.push_back(rb / nr);
    out.kept.push_back(i);
  }
  return out;
}

inline ExpandedProblem expand(const SdpProblem& p, const std::vector<std::size_t>& kept) {
  ExpandedProblem e;
  e.dims = p.block_dims;
  e.n_free = p.n_free;
  const std::size_t nb = p.block_dims.size();
  std::vector<std::size_t> offsets(nb);
  for (std::size_t k = 0; k < nb; ++k) offsets[k] = p.block_offset(k);
  const std::size_t fo = p.num_block_vars();

  auto unpack = [&](const Vector& row, std::size_t k) {
    const std::size_t n = p.block_dims[k];
    return smat(std::span<const double>(row.data() + offsets[k], svec_size(n)));
  };

  for (std::size_t i : kept) {
    const Vector& row = p.constraints[i];
    const double scale = std::max(norm2(row), 1e-300);
    Vector scaled = row;
    for (double& v : scaled) v /= scale;
    std::vector<Matrix> blocks;
    std::vector<char> touch;
    for (std::size_t k = 0; k < nb; ++k) {
      Matrix m = unpack(scaled, k);
      touch.push_back(m.max_abs() > 0.0 ? 1 : 0);
      blocks.push_back(std::move(m));
    }
    e.a.push_back(std::move(blocks));
    e.touches.push_back(std::move(touch));
    e.f.emplace_back(scaled.begin() + static_cast<std::ptrdiff_t>(fo), scaled.end());
    e.b.push_back(p.rhs[i] / scale);
    e.kept_rows.push_back(i);
    e.row_scale.push_back(scale);
  }
  const Vector obj = p.objective.empty() ? Vector(p.num_vars(), 0.0) : p.objective;
  for (std::size_t k = 0; k < nb; ++k) e.c.push_back(unpack(obj, k));
  e.cf.assign(obj.begin() + static_cast<std::ptrdiff_t>(fo), obj.end());
  return e;
}

inline double inner(const std::vector<Matrix>& x, const std::vector<Matrix>& z) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += trace_product(x[k], z[k]);
  return s;
}

inline double frob(const std::vector<Matrix>& x) {
  double s = 0.0;
  for (const auto& m : x) {
    const double f = m.frobenius_norm();
    s += f * f;
  }
  return std::sqrt(s);
}

// Factor F with X = F Fᵀ; Cholesky when possible, symmetric square root
// otherwise.
inline Matrix psd_root(const Matrix& x) {
  try {
    return cholesky(x);
  } catch (const NotPsdError&) {
    const auto e = sym_eig(x);
    return e.vectors * Matrix::diagonal(Vector([&] {
             Vector s(e.values.size());
             for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sqrt(std::max(e.values[i], 1e-300));
             return s;
           }()));
  }
}

// Nesterov–Todd scaling of one block: G with G⁻¹XG⁻ᵀ = GᵀZG = diag(λ).
struct NtScaling {
  Matrix g;
  Matrix g_inv;
  Matrix w;  // G Gᵀ
  Vector lambda;
};

inline NtScaling nt_scaling(const Matrix& x, const Matrix& z) {
  const Matrix l = psd_root(x);
  const auto e = sym_eig(l.transpose() * z * l);
  const std::size_t n = x.rows();
  NtScaling s;
  s.lambda.resize(n);
  Vector inv_sqrt(n), sqrt_l(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.lambda[i] = std::sqrt(std::max(e.values[i], 1e-300));
    inv_sqrt[i] = 1.0 / std::sqrt(s.lambda[i]);
    sqrt_l[i] = std::sqrt(s.lambda[i]);
  }
  s.g = l * e.vectors * Matrix::diagonal(inv_sqrt);
  // G⁻¹ = Λ^{1/2} Vᵀ L⁻¹; L may be a non-triangular root, so invert generally.
  Matrix l_inv;
  bool lower = true;
  for (std::size_t i = 0; i < n && lower; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (l(i, j) != 0.0) {
        lower = false;
        break;
      }
  if (lower) {
    l_inv = lower_inverse(l);
  } else {
    LuFactorization lu(l);
    l_inv = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
      Vector ej(n, 0.0);
      ej[j] = 1.0;
      const auto c = lu.solve(ej);
      for (std::size_t i = 0; i < n; ++i) l_inv(i, j) = c[i];
    }
  }
  s.g_inv = Matrix::diagonal(sqrt_l) * e.vectors.transpose() * l_inv;
  s.w = s.g * s.g.transpose();
  return s;
}

// Largest α ≤ cap with diag(λ) + α D ⪰ 0, D symmetric (scaled direction).
inline double max_step(const Vector& lambda, const Matrix& d) {
  const std::size_t n = lambda.size();
  Matrix t(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      t(i, j) = d(i, j) / std::sqrt(lambda[i] * lambda[j]);
  const double lmin = min_eigenvalue(t);
  return lmin < 0.0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

struct Iterate {
  std::vector<Matrix> x, z;
  Vector xf, y;
};

class InteriorPointSolver {
 public:
  InteriorPointSolver(const ExpandedProblem& e, const SdpOptions& opts) : e_(e), opts_(opts) {}

  SdpSolution run() {
    const std::size_t nb = e_.dims.size();
    const std::size_t m = e_.b.size();
    const std::size_t nf = e_.n_free;

    // Deterministic scaled-identity start.
    double normb = 0.0, normc = 0.0;
    for (double v : e_.b) normb = std::max(normb, std::abs(v));
    for (const auto& c : e_.c) normc = std::max(normc, c.frobenius_norm());
    for (double v : e_.cf) normc = std::max(normc, std::abs(v));
    std::size_t ntot = 0;
    for (auto d : e_.dims) ntot += d;
    const double xi = std::max({1.0, std::sqrt(static_cast<double>(ntot)), normb * std::sqrt(double(ntot))});
    const double eta = std::max({1.0, std::sqrt(static_cast<double>(ntot)), normc});

    Iterate it;
    for (auto d : e_.dims) {
      it.x.push_back(Matrix::identity(d) * xi);
      it.z.push_back(Matrix::identity(d) * eta);
    }
    it.xf.assign(nf, 0.0);
    it.y.assign(m, 0.0);

    double normb2 = norm2(e_.b);
    double normc2 = std::sqrt(frob(e_.c) * frob(e_.c) + dot(e_.cf, e_.cf));

    SdpSolution best;
    double best_merit = std::numeric_limits<double>::infinity();
    Iterate best_it = it;
    int stall = 0;

    for (int iter = 0; iter <= opts_.max_iterations; ++iter) {
      // Residuals.
      Vector rp = e_.b;
      for (std::size_t i = 0; i < m; ++i) rp[i] -= apply_row(i, it.x, it.xf);
      std::vector<Matrix> rd = adjoint(it.y);
      for (std::size_t k = 0; k < nb; ++k) {
        rd[k] -= it.z[k];
        rd[k] -= e_.c[k];
      }
      Vector rf = e_.cf;
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < nf; ++j) rf[j] -= it.y[i] * e_.f[i][j];

      const double pobj = inner(e_.c, it.x) + dot(e_.cf, it.xf);
      const double dobj = dot(e_.b, it.y);
      const double xz = inner(it.x, it.z);
      const double pinf = norm2(rp) / (1.0 + normb2);
      const double dinf = std::sqrt(frob(rd) * frob(rd) + dot(rf, rf)) / (1.0 + normc2);
      const double relgap = std::max(std::abs(pobj - dobj), xz) / (1.0 + std::abs(pobj) + std::abs(dobj));

      if (opts_.verbose) {
        std::fprintf(stderr, "%3d  pobj %+.10e  dobj %+.10e  pinf %.2e  dinf %.2e  gap %.2e\n", iter,
                     pobj, dobj, pinf, dinf, relgap);
      }
      if (!std::isfinite(pobj) || !std::isfinite(dobj)) break;

      const double merit = std::max({pinf, dinf, relgap});
      if (merit < best_merit) {
        best_merit = merit;
        best_it = it;
        best.iterations = iter;
      }

      if (pinf <= opts_.feastol && dinf <= opts_.feastol && relgap <= opts_.gaptol) {
        return finish(it, SdpStatus::kOptimal, iter);
      }

      // Farkas-type certificates on the current iterate.
      if (auto cert = primal_infeasibility_certificate(it.y)) {
        auto sol = finish(it, SdpStatus::kPrimalInfeasible, iter);
        sol.certificate_residual = *cert;
        return sol;
      }
      if (auto cert = dual_infeasibility_certificate(it, pobj)) {
        auto sol = finish(it, SdpStatus::kDualUnbounded, iter);
        sol.certificate_residual = *cert;
        return sol;
      }
      if (iter == opts_.max_iterations) break;

      // Newton system.
      std::vector<NtScaling> nt;
      nt.reserve(nb);
      try {
        for (std::size_t k = 0; k < nb; ++k) nt.push_back(nt_scaling(it.x[k], it.z[k]));
      } catch (const Error&) {
        break;
      }
      const double mu = xz / static_cast<double>(ntot);

      Matrix kkt = schur_matrix(nt);
      LuFactorization lu(kkt);
      if (lu.singular()) break;

      std::vector<Matrix> wrdw(nb);
      for (std::size_t k = 0; k < nb; ++k) wrdw[k] = nt[k].w * rd[k] * nt[k].w;

      auto direction = [&](const std::vector<Matrix>& rc, std::vector<Matrix>& dx, Vector& dxf,
                           Vector& dy, std::vector<Matrix>& dz) {
        std::vector<Matrix> grg(nb);
        for (std::size_t k = 0; k < nb; ++k) grg[k] = nt[k].g * rc[k] * nt[k].g.transpose();
        Vector rhs(m + nf, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
          double s = 0.0;
          for (std::size_t k = 0; k < nb; ++k)
            if (e_.touches[i][k]) s += trace_product(e_.a[i][k], grg[k]) - trace_product(e_.a[i][k], wrdw[k]);
          rhs[i] = s - rp[i];
        }
        for (std::size_t j = 0; j < nf; ++j) rhs[m + j] = -rf[j];
        Vector sol = lu.solve(rhs);
        // One step of iterative refinement.
        Vector res = rhs;
        const Vector ks = kkt * std::span<const double>(sol);
        for (std::size_t i = 0; i < res.size(); ++i) res[i] -= ks[i];
        const Vector corr = lu.solve(res);
        for (std::size_t i = 0; i < sol.size(); ++i) sol[i] += corr[i];

        dy.assign(sol.begin(), sol.begin() + static_cast<std::ptrdiff_t>(m));
        dxf.assign(sol.begin() + static_cast<std::ptrdiff_t>(m), sol.end());
        dz = adjoint(dy);
        dx.resize(nb);
        for (std::size_t k = 0; k < nb; ++k) {
          dz[k] += rd[k];
          dx[k] = symmetrize(grg[k] - nt[k].w * dz[k] * nt[k].w);
        }
      };

      // Predictor.
      std::vector<Matrix> rc(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        const std::size_t n = e_.dims[k];
        rc[k] = Matrix(n, n);
        for (std::size_t i = 0; i < n; ++i) rc[k](i, i) = -nt[k].lambda[i];
      }
      std::vector<Matrix> dx, dz;
      Vector dxf, dy;
      direction(rc, dx, dxf, dy, dz);

      std::vector<Matrix> dxs(nb), dzs(nb);
      auto scaled_steps = [&](double& ap, double& ad) {
        ap = ad = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < nb; ++k) {
          dxs[k] = symmetrize(nt[k].g_inv * dx[k] * nt[k].g_inv.transpose());
          dzs[k] = symmetrize(nt[k].g.transpose() * dz[k] * nt[k].g);
          ap = std::min(ap, max_step(nt[k].lambda, dxs[k]));
          ad = std::min(ad, max_step(nt[k].lambda, dzs[k]));
        }
      };
      double ap = 0, ad = 0;
      scaled_steps(ap, ad);
      const double ap_aff = std::min(1.0, ap);
      const double ad_aff = std::min(1.0, ad);
      double xz_aff = 0.0;
      for (std::size_t k = 0; k < nb; ++k) {
        xz_aff += trace_product(it.x[k] + dx[k] * ap_aff, it.z[k] + dz[k] * ad_aff);
      }
      double sigma = std::pow(std::max(0.0, xz_aff) / xz, 3.0);
      sigma = std::clamp(sigma, 0.0, 1.0);

      // Corrector.
      for (std::size_t k = 0; k < nb; ++k) {
        const std::size_t n = e_.dims[k];
        const Matrix cross = dxs[k] * dzs[k];
        const auto& lam = nt[k].lambda;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) {
            double v = -(cross(i, j) + cross(j, i));
            if (i == j) v += 2.0 * sigma * mu - 2.0 * lam[i] * lam[i];
            rc[k](i, j) = v / (lam[i] + lam[j]);
          }
      }
      direction(rc, dx, dxf, dy, dz);
      scaled_steps(ap, ad);
      const double gamma = 0.9 + 0.09 * std::min({1.0, ap, ad});
      ap = std::min(1.0, gamma * ap);
      ad = std::min(1.0, gamma * ad);

      for (std::size_t k = 0; k < nb; ++k) {
        it.x[k].axpy(ap, dx[k]);
        it.z[k].axpy(ad, dz[k]);
        it.x[k] = symmetrize(it.x[k]);
        it.z[k] = symmetrize(it.z[k]);
      }
      for (std::size_t j = 0; j < nf; ++j) it.xf[j] += ap * dxf[j];
      for (std::size_t i = 0; i < m; ++i) it.y[i] += ad * dy[i];

      if (std::max(ap, ad) < 1e-9) {
        if (++stall >= 5) break;
      } else {
        stall = 0;
      }
    }
    return finish(best_it, SdpStatus::kIterLimit, best.iterations);
  }

 private:
  double apply_row(std::size_t i, const std::vector<Matrix>& x, const Vector& xf) const {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k)
      if (e_.touches[i][k]) s += trace_product(e_.a[i][k], x[k]);
    for (std::size_t j = 0; j < xf.size(); ++j) s += e_.f[i][j] * xf[j];
    return s;
  }

  std::vector<Matrix> adjoint(const Vector& y) const {
    std::vector<Matrix> out;
    for (auto d : e_.dims) out.emplace_back(d, d);
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == 0.0) continue;
      for (std::size_t k = 0; k < out.size(); ++k)
        if (e_.touches[i][k]) out[k].axpy(y[i], e_.a[i][k]);
    }
    return out;
  }

  // [[M, -F], [-Fᵀ, 0]] with M_ij = Σ_k ⟨A_ik, W_k A_jk W_k⟩.
  Matrix schur_matrix(const std::vector<NtScaling>& nt) const {
    const std::size_t m = e_.b.size();
    const std::size_t nf = e_.n_free;
    const std::size_t nb = e_.dims.size();
    Matrix k(m + nf, m + nf);
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t b = 0; b < nb; ++b) {
        if (!e_.touches[j][b]) continue;
        const Matrix p = nt[b].w * e_.a[j][b] * nt[b].w;
        for (std::size_t i = 0; i <= j; ++i) {
          if (!e_.touches[i][b]) continue;
          const double v = trace_product(e_.a[i][b], p);
          k(i, j) += v;
          if (i != j) k(j, i) += v;
        }
      }
      for (std::size_t f = 0; f < nf; ++f) {
        k(j, m + f) = -e_.f[j][f];
        k(m + f, j) = -e_.f[j][f];
      }
    }
    return k;
  }

  // y with bᵀy < 0, Aᵀy ⪰ 0 and Fᵀy = 0 (after normalizing bᵀy = -1).
  std::optional<double> primal_infeasibility_certificate(const Vector& y) const {
    const double by = dot(e_.b, y);
    if (!(by < 0.0)) return std::nullopt;
    Vector yn = y;
    for (double& v : yn) v /= -by;
    const auto aty = adjoint(yn);
    double worst = 0.0;
    for (const auto& m : aty) worst = std::max(worst, -min_eigenvalue(m));
    for (std::size_t j = 0; j < e_.n_free; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < yn.size(); ++i) s += yn[i] * e_.f[i][j];
      worst = std::max(worst, std::abs(s));
    }
    if (worst <= opts_.feastol) return worst;
    return std::nullopt;
  }

  // (X, x_f) with A(X) + F x_f ≈ 0, X ⪰ 0 and positive objective.
  std::optional<double> dual_infeasibility_certificate(const Iterate& it, double pobj) const {
    if (!(pobj > opts_.feastol)) return std::nullopt;
    const std::size_t m = e_.b.size();
    Vector r(m);
    for (std::size_t i = 0; i < m; ++i) r[i] = apply_row(i, it.x, it.xf) / pobj;
    const double worst = norm_inf(r);
    if (worst <= opts_.feastol) return worst;
    return std::nullopt;
  }

  SdpSolution finish(const Iterate& it, SdpStatus status, int iterations) const {
    SdpSolution s;
    s.status = status;
    s.iterations = iterations;
    s.blocks = it.x;
    s.dual_slack = it.z;
    s.free = it.xf;
    s.objective_value = inner(e_.c, it.x) + dot(e_.cf, it.xf);
    s.dual_objective = dot(e_.b, it.y);
    s.dual = it.y;  // scaled-row multipliers; mapped back by the caller
    s.margin = std::numeric_limits<double>::infinity();
    for (const auto& x : it.x) s.margin = std::min(s.margin, min_eigenvalue(x));
    return s;
  }

  const ExpandedProblem& e_;
  SdpOptions opts_;
};

}  // namespace detail

/// Solves a standard-form SDP. Deterministic for identical inputs.
inline SdpSolution solve(const SdpProblem& p, const SdpOptions& opts = {}) {
  p.validate();
  const auto red = detail::reduce_rows(p.constraints, p.rhs, opts.rank_tol);
  if (red.inconsistent) {
    SdpSolution s;
    s.status = SdpStatus::kPrimalInfeasible;
    s.certificate_residual = red.worst_residual;
    for (auto d : p.block_dims) {
      s.blocks.emplace_back(d, d);
      s.dual_slack.emplace_back(d, d);
    }
    s.free.assign(p.n_free, 0.0);
    s.dual.assign(p.num_constraints(), 0.0);
    s.margin = 0.0;
    s.objective_value = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  const auto e = detail::expand(p, red.kept);
  detail::InteriorPointSolver ipm(e, opts);
  SdpSolution s = ipm.run();

  // Map multipliers back to the original rows.
  Vector y(p.num_constraints(), 0.0);
  for (std::size_t r = 0; r < e.kept_rows.size(); ++r) y[e.kept_rows[r]] = s.dual[r] / e.row_scale[r];
  s.dual = std::move(y);

  // Residual of the original system at the returned point.
  double res = 0.0, bmax = 0.0;
  Vector x(p.num_vars(), 0.0);
  for (std::size_t k = 0; k < p.block_dims.size(); ++k) {
    const auto v = svec(s.blocks[k]);
    std::copy(v.begin(), v.end(), x.begin() + static_cast<std::ptrdiff_t>(p.block_offset(k)));
  }
  std::copy(s.free.begin(), s.free.end(), x.begin() + static_cast<std::ptrdiff_t>(p.num_block_vars()));
  for (std::size_t i = 0; i < p.num_constraints(); ++i) {
    res = std::max(res, std::abs(dot(p.constraints[i], x) - p.rhs[i]));
    bmax = std::max(bmax, std::abs(p.rhs[i]));
  }
  s.primal_residual = res / (1.0 + bmax);
  s.gap = std::abs(s.objective_value - s.dual_objective) /
          (1.0 + std::abs(s.objective_value) + std::abs(s.dual_objective));
  return s;
}

/// Stacks a solution's blocks and free values into svec coordinates.
inline Vector primal_vector(const SdpProblem& p, const SdpSolution& s) {
  Vector x(p.num_vars(), 0.0);
  for (std::size_t k = 0; k < p.block_dims.size(); ++k) {
    const auto v = svec(s.blocks[k]);
    std::copy(v.begin(), v.end(), x.begin() + static_cast<std::ptrdiff_t>(p.block_offset(k)));
  }
  std::copy(s.free.begin(), s.free.end(), x.begin() + static_cast<std::ptrdiff_t>(p.num_block_vars()));
  return x;
}

enum class FeasibilityStatus { kFeasible, kInfeasible, kIndeterminate };

inline const char* to_string(FeasibilityStatus s) {
  switch (s) {
    case FeasibilityStatus::kFeasible: return "Feasible";
    case FeasibilityStatus::kInfeasible: return "Infeasible";
    case FeasibilityStatus::kIndeterminate: return "Indeterminate";
  }
  return "Unknown";
}

struct FeasibilityResult {
  FeasibilityStatus status = FeasibilityStatus::kIndeterminate;
  /// Phase-I optimum t*: the largest uniform shift every PSD block tolerates.
  /// +inf when the shift is unbounded.
  double slack = 0.0;
  /// |t*| when infeasible.
  double certificate_gap = 0.0;
  /// Original-coordinate point X = S + t*I, free values.
  std::vector<Matrix> blocks;
  Vector free;
  SdpSolution phase1;
};

/// Phase-I problem: maximize t subject to the original equalities with every
/// block written as X_k = S_k + t I, S_k ⪰ 0. The last free variable is t.
inline SdpProblem phase_one_problem(const SdpProblem& p) {
  SdpProblem q;
  q.block_dims = p.block_dims;
  q.n_free = p.n_free + 1;
  const std::size_t nv = q.num_vars();
  const std::size_t t_idx = nv - 1;
  for (std::size_t i = 0; i < p.num_constraints(); ++i) {
    Vector row(nv, 0.0);
    std::copy(p.constraints[i].begin(), p.constraints[i].end(), row.begin());
    double tcoef = 0.0;
    for (std::size_t k = 0; k < p.block_dims.size(); ++k) {
      const std::size_t n = p.block_dims[k];
      const std::size_t off = p.block_offset(k);
      for (std::size_t d = 0; d < n; ++d) tcoef += p.constraints[i][off + svec_index(n, d, d)];
    }
    row[t_idx] = tcoef;
    q.constraints.push_back(std::move(row));
  }
  q.rhs = p.rhs;
  q.objective.assign(nv, 0.0);
  q.objective[t_idx] = 1.0;
  return q;
}

/// Decides whether the constraint system of `p` (objective ignored) has a
/// PSD solution. Feasible iff t* ≥ -feastol.
inline FeasibilityResult feasibility(const SdpProblem& p, const SdpOptions& opts = {}) {
  p.validate();
  FeasibilityResult r;
  if (p.block_dims.empty()) {
    // Pure linear system: consistent or not.
    const auto red = detail::reduce_rows(p.constraints, p.rhs, opts.rank_tol);
    r.status = red.inconsistent ? FeasibilityStatus::kInfeasible : FeasibilityStatus::kFeasible;
    r.slack = red.inconsistent ? -red.worst_residual : std::numeric_limits<double>::infinity();
    r.certificate_gap = red.worst_residual;
    return r;
  }
  const SdpProblem q = phase_one_problem(p);
  r.phase1 = solve(q, opts);
  const auto& s = r.phase1;
  const bool near_optimal = s.status == SdpStatus::kIterLimit && !s.free.empty() &&
                            std::max({s.primal_residual, s.dual_residual, s.gap}) <= opts.stalled_tol;
  switch (near_optimal ? SdpStatus::kOptimal : s.status) {
    case SdpStatus::kOptimal: {
      const double t = s.free.back();
      r.slack = t;
      r.status = t >= -opts.feastol ? FeasibilityStatus::kFeasible : FeasibilityStatus::kInfeasible;
      r.certificate_gap = t < 0 ? -t : 0.0;
      break;
    }
    case SdpStatus::kDualUnbounded:
      r.slack = std::numeric_limits<double>::infinity();
      r.status = FeasibilityStatus::kFeasible;
      break;
    case SdpStatus::kPrimalInfeasible:
      r.slack = -std::max(s.certificate_residual, opts.feastol);
      r.certificate_gap = std::max(s.certificate_residual, opts.feastol);
      r.status = FeasibilityStatus::kInfeasible;
      break;
    case SdpStatus::kIterLimit:
      r.slack = s.free.empty() ? 0.0 : s.free.back();
      r.status = FeasibilityStatus::kIndeterminate;
      break;
  }
  if (!s.blocks.empty() && !s.free.empty()) {
    const double t = std::isfinite(r.slack) ? s.free.back() : 0.0;
    for (const auto& b : s.blocks) r.blocks.push_back(b + Matrix::identity(b.rows()) * t);
    r.free.assign(s.free.begin(), s.free.end() - 1);
  }
  return r;
}

/// Writes the problem in SDPA sparse format. The maximization form here is
/// SDPA's dual: F0 = C, F_i = A_i, c = b. Free scalars become an LP block of
/// split pairs x_f = u - v.
inline void write_sdpa(std::ostream& os, const SdpProblem& p) {
  p.validate();
  const std::size_t m = p.num_constraints();
  const std::size_t nb = p.block_dims.size() + (p.n_free > 0 ? 1 : 0);
  os << "* lmidom SDP export: maximize <F0,X> s.t. <Fi,X> = ci\n";
  os << m << "\n" << nb << "\n";
  for (std::size_t k = 0; k < p.block_dims.size(); ++k) os << (k ? " " : "") << p.block_dims[k];
  if (p.n_free > 0) os << (p.block_dims.empty() ? "" : " ") << "-" << 2 * p.n_free;
  os << "\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < m; ++i) os << (i ? " " : "") << num(p.rhs[i]);
  os << "\n";
  auto emit = [&](std::size_t matno, const Vector& row) {
    if (row.empty()) return;
    for (std::size_t k = 0; k < p.block_dims.size(); ++k) {
      const std::size_t n = p.block_dims[k];
      const std::size_t off = p.block_offset(k);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
          const double v = row[off + svec_index(n, i, j)];
          if (v == 0.0) continue;
          const double entry = (i == j) ? v : v / std::sqrt(2.0);
          os << matno << " " << k + 1 << " " << i + 1 << " " << j + 1 << " " << num(entry) << "\n";
        }
    }
    for (std::size_t j = 0; j < p.n_free; ++j) {
      const double v = row[p.free_offset(j)];
      if (v == 0.0) continue;
      os << matno << " " << nb << " " << 2 * j + 1 << " " << 2 * j + 1 << " " << num(v) << "\n";
      os << matno << " " << nb << " " << 2 * j + 2 << " " << 2 * j + 2 << " " << num(-v) << "\n";
    }
  };
  emit(0, p.objective);
  for (std::size_t i = 0; i < m; ++i) emit(i + 1, p.constraints[i]);
}

}  // namespace lmidom
