#pragma once

// Command-line front end. Exit codes: 0 affirmative, 1 negative,
// 2 indeterminate or solver failure, 64 usage or input error.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lmidom/io.hpp"
#include "lmidom/lmidom.hpp"

namespace lmidom::cli {

inline constexpr int kAffirmative = 0;
inline constexpr int kNegative = 1;
inline constexpr int kIndeterminate = 2;
inline constexpr int kUsage = 64;

struct Context {
  double tol = 1e-7;
  bool json = false;
  std::uint64_t seed = 0;
  std::ostream& out;
};

namespace detail {

inline LinearPencil load_monic(const std::string& path) {
  const auto l = load_pencil(path);
  return l.is_monic() ? l : monicize(l);
}

inline InclusionOptions inclusion_options(const Context& c) {
  InclusionOptions o;
  o.threshold = c.tol;
  return o;
}

inline void emit(const Context& c, const Json& j, const std::string& human) {
  if (c.json) {
    c.out << j.dump(2) << "\n";
  } else {
    c.out << human << "\n";
  }
}

inline std::string fmt(double v) { return lmidom::detail::format_double(v); }

inline int check_inclusion_cmd(const Context& c, const std::string& p1, const std::string& p2,
                               const std::string& cert_out) {
  const auto l1 = load_monic(p1), l2 = load_monic(p2);
  const auto rep = check_inclusion(l1, l2, inclusion_options(c));
  Json j = to_json(rep);
  std::string human = std::string(to_string(rep.verdict)) + " (margin " + fmt(rep.margin) +
                      (rep.marginal ? ", marginal" : "") + ")";
  if (rep.included && !cert_out.empty()) {
    const auto cert = extract_certificate(*rep.choi);
    const auto chk = verify_certificate(l1, l2, cert, 1e-6);
    save_certificate(cert_out, cert);
    j["certificate"] = {{"path", cert_out}, {"mu", cert.mu()}, {"max_residual", chk.max_residual}};
    human += "\ncertificate: " + std::to_string(cert.mu()) + " matrices, residual " + fmt(chk.max_residual) +
             " -> " + cert_out;
  }
  if (!rep.diagnostics.empty()) human += "\n" + rep.diagnostics;
  emit(c, j, human);
  switch (rep.verdict) {
    case InclusionVerdict::kIncluded: return kAffirmative;
    case InclusionVerdict::kNotIncluded: return kNegative;
    case InclusionVerdict::kIndeterminate: return kIndeterminate;
  }
  return kIndeterminate;
}

inline int radius_cmd(const Context& c, const std::string& p) {
  const auto rep = matricial_radius(load_monic(p));
  emit(c, to_json(rep),
       rep.bounded ? "radius bound " + fmt(rep.radius_bound) + " (b* = " + fmt(rep.b_star) + ")"
                   : "unbounded (b* = " + fmt(rep.b_star) + ")");
  return rep.bounded ? kAffirmative : kNegative;
}

inline int bounded_cmd(const Context& c, const std::string& p) {
  const bool b = is_bounded(load_monic(p));
  emit(c, Json{{"bounded", b}}, b ? "bounded" : "unbounded");
  return b ? kAffirmative : kNegative;
}

inline int cube_cmd(const Context& c, const std::string& p, std::size_t tighten) {
  const auto l = load_monic(p);
  const auto rep = tighten > 0 ? tightened_cube_rho(l, tighten, c.seed) : matrix_cube_rho(l);
  emit(c, to_json(rep), "rho " + fmt(rep.rho) + " (" + rep.method + ")");
  return kAffirmative;
}

inline int minimize_cmd(const Context& c, const std::string& p) {
  MinimizeOptions o;
  o.inclusion = inclusion_options(c);
  o.seed = c.seed;
  const auto rep = minimal_pencil(load_monic(p), o);
  std::string human = "minimal size " + std::to_string(rep.minimal.size()) + ", kept " +
                      std::to_string(rep.kept.size()) + " of " + std::to_string(rep.decomposition.num_blocks()) +
                      " blocks\n" + pencil_to_string(rep.minimal);
  emit(c, to_json(rep), human);
  return rep.certified ? kAffirmative : kIndeterminate;
}

inline int equal_cmd(const Context& c, const std::string& p1, const std::string& p2) {
  MinimizeOptions o;
  o.inclusion = inclusion_options(c);
  o.seed = c.seed;
  const auto rep = gleichstellensatz_check(load_monic(p1), load_monic(p2), o);
  Json j{{"verdict", to_string(rep.verdict)}};
  if (rep.u) j["U"] = matrix_to_json(*rep.u);
  if (!rep.direction.empty()) j["direction"] = rep.direction;
  emit(c, j, std::string(to_string(rep.verdict)) + (rep.direction.empty() ? "" : ": " + rep.direction));
  switch (rep.verdict) {
    case EqualityVerdict::kEqual: return kAffirmative;
    case EqualityVerdict::kNotEqual: return kNegative;
    case EqualityVerdict::kIndeterminate: return kIndeterminate;
  }
  return kIndeterminate;
}

inline int verify_cmd(const Context& c, const std::string& p1, const std::string& p2, const std::string& pc) {
  const auto l1 = load_monic(p1), l2 = load_monic(p2);
  const auto cert = load_certificate(pc);
  const auto chk = verify_certificate(l1, l2, cert, c.tol);
  emit(c, to_json(chk), (chk.ok ? "verified" : "not verified") + std::string(", max residual ") + fmt(chk.max_residual));
  return chk.ok ? kAffirmative : kNegative;
}

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kNotSymmetric:
    case ErrorCode::kNotPsd:
    case ErrorCode::kZeroNotInterior:
    case ErrorCode::kNotMonic:
    case ErrorCode::kDegenerate:
    case ErrorCode::kUnsupported:
      return kUsage;
    default:
      return kIndeterminate;
  }
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Matricial LMI domination, certificates, radius, matrix cube and minimal pencils"};
  app.name("lmidom");
  app.require_subcommand(1);
  app.fallthrough();
  double tol = 1e-7;
  bool json = false;
  std::uint64_t seed = 0;
  app.add_option("--tol", tol, "Decision tolerance")->check(CLI::PositiveNumber);
  app.add_flag("--json", json, "Print a JSON report");
  app.add_option("--seed", seed, "Seed for randomized steps");

  std::string p1, p2, pc, cert_out;
  std::size_t tighten = 0;
  auto* inc = app.add_subcommand("check-inclusion", "Decide D_L1 ⊆ D_L2");
  inc->add_option("L1", p1)->required()->check(CLI::ExistingFile);
  inc->add_option("L2", p2)->required()->check(CLI::ExistingFile);
  inc->add_option("--cert", cert_out, "Write the certificate here when included");
  auto* rad = app.add_subcommand("radius", "Matricial radius bound");
  rad->add_option("L", p1)->required()->check(CLI::ExistingFile);
  auto* bnd = app.add_subcommand("bounded", "Is D_L bounded");
  bnd->add_option("L", p1)->required()->check(CLI::ExistingFile);
  auto* cub = app.add_subcommand("cube", "Largest matricial cube inside D_L");
  cub->add_option("L", p1)->required()->check(CLI::ExistingFile);
  cub->add_option("--tighten", tighten, "Number of random eta pencils (g = 2)");
  auto* min = app.add_subcommand("minimize", "Minimal defining pencil");
  min->add_option("L", p1)->required()->check(CLI::ExistingFile);
  auto* eq = app.add_subcommand("equal", "Decide D_L1 = D_L2 and find the unitary");
  eq->add_option("L1", p1)->required()->check(CLI::ExistingFile);
  eq->add_option("L2", p2)->required()->check(CLI::ExistingFile);
  auto* ver = app.add_subcommand("verify", "Check a certificate for D_L1 ⊆ D_L2");
  ver->add_option("L1", p1)->required()->check(CLI::ExistingFile);
  ver->add_option("L2", p2)->required()->check(CLI::ExistingFile);
  ver->add_option("CERT", pc)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kAffirmative;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kUsage;
  }

  const Context c{tol, json, seed, out};
  try {
    if (*inc) return detail::check_inclusion_cmd(c, p1, p2, cert_out);
    if (*rad) return detail::radius_cmd(c, p1);
    if (*bnd) return detail::bounded_cmd(c, p1);
    if (*cub) return detail::cube_cmd(c, p1, tighten);
    if (*min) return detail::minimize_cmd(c, p1);
    if (*eq) return detail::equal_cmd(c, p1, p2);
    if (*ver) return detail::verify_cmd(c, p1, p2, pc);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return detail::exit_code_for(e.code());
  }
  return kUsage;
}

}  // namespace lmidom::cli
