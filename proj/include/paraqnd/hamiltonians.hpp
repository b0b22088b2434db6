#pragma once

// Hamiltonians of the phase-mismatched OPA on signal (x) pump. Constant
// energy offsets are dropped throughout.

#include "paraqnd/fock.hpp"
#include "paraqnd/params.hpp"

namespace paraqnd {

enum class HamiltonianVariant { lab, displaced, bogoliubov_form, effective };

/// g (a^dag^2 b + a^2 b^dag) + delta a^dag a
ModeOperator build_H_lab(const SystemParams& params, const ModeSpace& space);

/// Lab Hamiltonian in the frame displaced by the pump mean field:
/// H_lab + (r/2)(a^dag^2 + a^2) with r = 2 g beta.
ModeOperator build_H_displaced(const SystemParams& params, const ModeSpace& space);

/// -2 g~ (N_a + 1/2) x_b + Delta N_a, with N_a = A^dag A.
ModeOperator build_H_eff(const SystemParams& params, const ModeSpace& space);

/// Same as build_H_eff but with explicit Bogoliubov quantities.
ModeOperator build_H_eff(double Delta, double g_tilde, double u, const ModeSpace& space);

struct BogoliubovForm {
  /// The cubic term g(a^dag^2 b + h.c.) written through A: RWA part plus
  /// counter-rotating remainder.
  ModeOperator nonlinear;
  /// -2 g~ (N_a + 1/2) x_b
  ModeOperator rwa_part;
  /// g[(cosh^2 u A^dag^2 + sinh^2 u A^2) b + h.c.]; changes N_a by +-2.
  ModeOperator counter_rotating;
  /// Delta N_a (the quadratic part H_Q without its constant)
  ModeOperator quadratic;
};

BogoliubovForm build_H_bogoliubov_form(const SystemParams& params, const ModeSpace& space);

ModeOperator build_hamiltonian(HamiltonianVariant variant, const SystemParams& params,
                               const ModeSpace& space);

/// Max-abs entry of [x, y] restricted to the leading `keep_signal` signal
/// levels and `keep_pump` pump levels (truncation rows excluded).
double commutator_residual(const SparseMatrix& x, const SparseMatrix& y, const ModeSpace& space,
                           Index keep_signal, Index keep_pump);

/// Projects a joint operator onto the leading signal/pump levels.
CMatrix restrict_joint(const SparseMatrix& op, const ModeSpace& space, Index keep_signal,
                       Index keep_pump);

}  // namespace paraqnd
