// Two pencils for the unit disk: the 2×2 pencil Γ and the 3×3 pencil Δ.
// Their scalar sets agree, but D_Γ ⊆ D_Δ holds at every matrix level while
// the reverse fails.

#include <cstdio>

#include "lmidom/lmidom.hpp"

using namespace lmidom;

int main() {
  const auto gamma = fixtures::gamma(), delta = fixtures::delta();

  const auto fwd = check_inclusion(gamma, delta);
  const auto back = check_inclusion(delta, gamma);
  std::printf("Γ ⊆ Δ: %s (margin %.2e)\n", to_string(fwd.verdict), fwd.margin);
  std::printf("Δ ⊆ Γ: %s (margin %.2e)\n", to_string(back.verdict), back.margin);

  const auto cert = extract_certificate(*fwd.choi);
  const auto chk = verify_certificate(gamma, delta, cert);
  std::printf("certificate: %zu matrices, residual %.1e\n", cert.mu(), chk.max_residual);
  for (std::size_t k = 0; k < cert.mu(); ++k) {
    const Matrix& v = cert.vs[k];
    for (std::size_t i = 0; i < v.rows(); ++i) {
      std::printf(i ? "      " : "  V%zu = ", k + 1);
      for (std::size_t j = 0; j < v.cols(); ++j) std::printf(" %+.4f", v(i, j));
      std::printf("\n");
    }
  }

  std::printf("matrix cube: ρ(Δ) = %.6f, ρ(Γ) = %.6f\n", matrix_cube_rho(delta).rho, matrix_cube_rho(gamma).rho);
  std::printf("radius bound of Δ: %.6f\n", matricial_radius(delta).radius_bound);

  const auto padded = direct_sum({gamma, LinearPencil::monic({gamma.coeff(0) * 0.5, gamma.coeff(1) * 0.5})});
  const auto m = minimal_pencil(padded);
  std::printf("Γ ⊕ ½Γ: minimal size %zu, removed %zu block(s), certified %s\n", m.minimal.size(), m.removed.size(),
              m.certified ? "yes" : "no");
}
