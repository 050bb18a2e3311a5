#pragma once

// Independent checks used by the tests: random instance generators and
// brute-force evaluation that does not go through any SDP.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "lmidom/lmidom.hpp"

namespace oracle {

using lmidom::LinearPencil;
using lmidom::Matrix;

inline Matrix random_symmetric(std::size_t d, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix a(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) a(i, j) = a(j, i) = n(gen);
  return a;
}

/// Haar-ish orthogonal matrix: Gram–Schmidt on a Gaussian matrix.
inline Matrix random_orthogonal(std::size_t d, std::mt19937_64& gen) {
  std::normal_distribution<double> n;
  Matrix q(d, d);
  for (std::size_t c = 0; c < d; ++c) {
    std::vector<double> v(d);
    for (auto& x : v) x = n(gen);
    for (std::size_t k = 0; k < c; ++k) {
      double dot = 0.0;
      for (std::size_t i = 0; i < d; ++i) dot += v[i] * q(i, k);
      for (std::size_t i = 0; i < d; ++i) v[i] -= dot * q(i, k);
    }
    double nrm = 0.0;
    for (double x : v) nrm += x * x;
    nrm = std::sqrt(nrm);
    for (std::size_t i = 0; i < d; ++i) q(i, c) = v[i] / nrm;
  }
  return q;
}

inline LinearPencil random_monic(std::size_t d, std::size_t g, std::mt19937_64& gen) {
  std::vector<Matrix> cs;
  for (std::size_t j = 0; j < g; ++j) cs.push_back(random_symmetric(d, gen));
  return LinearPencil::monic(std::move(cs));
}

/// Rejection-samples a monic pencil that is nondegenerate and bounded.
inline LinearPencil random_bounded(std::size_t d, std::size_t g, std::mt19937_64& gen) {
  for (;;) {
    auto l = random_monic(d, g, gen);
    if (lmidom::is_nondegenerate(l) && lmidom::is_bounded(l)) return l;
  }
}

/// Σ V_kᵀ L1 V_k for random V_k normalized so Σ V_kᵀV_k = I; its set
/// contains D_{L1}.
inline LinearPencil random_compression(const LinearPencil& l1, std::size_t d2, std::size_t mu,
                                       std::mt19937_64& gen) {
  std::normal_distribution<double> n;
  const std::size_t d1 = l1.size();
  std::vector<Matrix> vs;
  Matrix s(d2, d2);
  for (std::size_t k = 0; k < mu; ++k) {
    Matrix v(d1, d2);
    for (std::size_t i = 0; i < d1; ++i)
      for (std::size_t j = 0; j < d2; ++j) v(i, j) = n(gen);
    s += v.transpose() * v;
    vs.push_back(std::move(v));
  }
  const auto e = lmidom::sym_eig(s);
  const Matrix inv_sqrt = lmidom::sym_function(e, [](double x) { return 1.0 / std::sqrt(x); });
  std::vector<Matrix> cs(l1.num_vars(), Matrix(d2, d2));
  for (auto& v : vs) {
    v = v * inv_sqrt;
    for (std::size_t j = 0; j < l1.num_vars(); ++j) cs[j] += lmidom::congruence(v, l1.coeff(j));
  }
  return LinearPencil::monic(std::move(cs));
}

inline LinearPencil scaled(const LinearPencil& l, double c) {
  std::vector<Matrix> cs;
  for (const auto& a : l.coeffs()) cs.push_back(a * c);
  return LinearPencil(l.a0(), std::move(cs));
}

/// Calls f on every point of an n^g grid over [-r, r]^g.
inline void for_each_grid_point(std::size_t g, std::size_t n, double r,
                                const std::function<void(const std::vector<double>&)>& f) {
  std::vector<std::size_t> idx(g, 0);
  std::vector<double> x(g);
  for (;;) {
    for (std::size_t j = 0; j < g; ++j) x[j] = -r + 2.0 * r * static_cast<double>(idx[j]) / static_cast<double>(n - 1);
    f(x);
    std::size_t j = 0;
    while (j < g && ++idx[j] == n) idx[j++] = 0;
    if (j == g) return;
  }
}

/// A point of D_{L1}(1) outside D_{L2}(1) on the grid, if any.
inline bool grid_finds_violation(const LinearPencil& l1, const LinearPencil& l2, double r, std::size_t n = 41,
                                 double tol = 1e-7) {
  bool found = false;
  for_each_grid_point(l1.num_vars(), n, r, [&](const std::vector<double>& x) {
    if (found) return;
    if (lmidom::min_eigenvalue(l1.at(x)) >= 0.0 && lmidom::min_eigenvalue(l2.at(x)) < -tol) found = true;
  });
  return found;
}

/// Whether L(X) ⪰ -tol·I.
inline bool in_set(const LinearPencil& l, const lmidom::MatrixTuple& x, double tol = 0.0) {
  return lmidom::min_eigenvalue(lmidom::evaluate(l, x)) >= -tol;
}


/// A conjugated direct sum of k random blocks of sizes 1..3 in g = 2
/// variables; returns the pencil and the planted sizes, sorted.
struct Planted {
  LinearPencil pencil;
  std::vector<std::size_t> sizes;
};

inline Planted planted_pencil(std::mt19937_64& gen) {
  std::uniform_int_distribution<std::size_t> kk(1, 3), ss(1, 3);
  const std::size_t k = kk(gen);
  std::vector<LinearPencil> parts;
  Planted out{LinearPencil::monic({Matrix{{1.0}}}), {}};
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t s = ss(gen);
    parts.push_back(random_monic(s, 2, gen));
    out.sizes.push_back(s);
  }
  std::sort(out.sizes.begin(), out.sizes.end());
  const auto sum = lmidom::direct_sum(std::span<const LinearPencil>(parts));
  out.pencil = sum.conjugated(random_orthogonal(sum.size(), gen));
  return out;
}

inline bool recovers_planted(const Planted& p, std::uint64_t seed) {
  auto sizes = lmidom::block_diagonalize(p.pencil, seed).block_sizes;
  std::sort(sizes.begin(), sizes.end());
  return sizes == p.sizes;
}

}  // namespace oracle
