#pragma once

// Randomized property suites shared by the unit tests and the acceptance
// binary. Each returns how many of its instances passed.

#include <random>
#include <string>

#include "oracles.hpp"

namespace oracle {

struct SuiteResult {
  int passed = 0;
  int total = 0;
  std::string first_failure;

  bool all() const { return passed == total; }
  void record(bool ok, const std::string& what) {
    ++total;
    if (ok) {
      ++passed;
    } else if (first_failure.empty()) {
      first_failure = what;
    }
  }
};

/// L ⊆ L, L ⊆ QᵀLQ, QᵀLQ ⊆ L, and the verdict for (L, 2L) survives
/// conjugating either side.
inline SuiteResult reflexivity_and_invariance(int count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<std::size_t> dd(2, 4), gg(1, 3);
  SuiteResult r;
  for (int t = 0; t < count; ++t) {
    // Three 2×2 coefficients always span I, so g = 3 needs d ≥ 3.
    const std::size_t g = gg(gen);
    const auto l = random_bounded(std::max<std::size_t>(dd(gen), g == 3 ? 3 : 2), g, gen);
    const Matrix q = random_orthogonal(l.size(), gen);
    const auto lq = l.conjugated(q);
    const auto shrunk = scaled(l, 2.0);
    const bool ok = lmidom::check_inclusion(l, l).included && lmidom::check_inclusion(l, lq).included &&
                    lmidom::check_inclusion(lq, l).included &&
                    lmidom::check_inclusion(l, shrunk).verdict ==
                        lmidom::check_inclusion(lq, shrunk.conjugated(q)).verdict &&
                    !lmidom::check_inclusion(l, shrunk).included;
    r.record(ok, "instance " + std::to_string(t));
  }
  return r;
}

/// Feasibility of the split domain-sum and range-sum systems against the
/// Choi system of the assembled direct sum.
inline SuiteResult direct_sum_agreement(int count, std::uint64_t seed) {
  using lmidom::feasibility;
  std::mt19937_64 gen(seed);
  SuiteResult r;
  for (int t = 0; t < count; ++t) {
    const auto a = random_bounded(2, 2, gen), b = random_bounded(2, 2, gen);
    const auto ab = lmidom::direct_sum({a, b});
    // Half the targets contain D_{A⊕B} by construction.
    const auto target = t % 2 == 0 ? random_compression(ab, 3, 3, gen) : random_bounded(3, 2, gen);
    const auto dom_split = feasibility(lmidom::build_choi_sdp_domain_sum({a, b}, target)).status;
    const auto dom_full = feasibility(lmidom::build_choi_sdp(ab, target)).status;
    const auto rng_split = feasibility(lmidom::build_choi_sdp_range_sum(target, {a, b})).status;
    const auto rng_full = feasibility(lmidom::build_choi_sdp(target, ab)).status;
    const bool ok = dom_split == dom_full && rng_split == rng_full &&
                    dom_full != lmidom::FeasibilityStatus::kIndeterminate &&
                    rng_full != lmidom::FeasibilityStatus::kIndeterminate;
    r.record(ok, "instance " + std::to_string(t) + ": domain " + lmidom::to_string(dom_split) + "/" +
                     lmidom::to_string(dom_full) + ", range " + lmidom::to_string(rng_split) + "/" +
                     lmidom::to_string(rng_full));
  }
  return r;
}

/// A positive verdict is never contradicted by a scalar point on a grid
/// covering D_{L1}(1). Also reports how many verdicts were positive.
inline SuiteResult grid_never_contradicts(int count, std::uint64_t seed, int* positives = nullptr) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<std::size_t> gg(1, 3);
  SuiteResult r;
  int pos = 0;
  for (int t = 0; t < count; ++t) {
    const std::size_t g = gg(gen);
    const auto l1 = random_bounded(3, g, gen);
    const auto l2 = t % 2 == 0 ? random_compression(l1, 3, 2, gen) : random_bounded(3, g, gen);
    const auto rep = lmidom::check_inclusion(l1, l2);
    if (!rep.included) {
      r.record(true, "");
      continue;
    }
    ++pos;
    const double rad = lmidom::matricial_radius(l1).radius_bound * 1.01;
    const std::size_t n = g == 3 ? 25 : 61;
    r.record(!grid_finds_violation(l1, l2, rad, n), "instance " + std::to_string(t));
  }
  if (positives) *positives = pos;
  return r;
}

}  // namespace oracle
