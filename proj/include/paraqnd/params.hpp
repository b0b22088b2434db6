#pragma once

// Physical conventions and the Bogoliubov parametrisation of the
// phase-mismatched OPA.
//
// Quadratures are x = (a + a^dag)/2 and p = (a - a^dag)/2i, so the vacuum has
// Var(x) = Var(p) = 1/4 and standard deviation w0 = 1/2. Time is measured in
// units of 1/g.

#include "paraqnd/types.hpp"

namespace paraqnd {

inline constexpr double kVacuumWidth = 0.5;

/// Squeezing in dB for a quadrature standard deviation: positive = squeezed.
double squeezing_db(double width);
/// Inverse of squeezing_db.
double width_from_db(double db);

struct BogoliubovParams {
  double Delta = 0.0;    // sqrt(delta^2 - r^2)
  double u = 0.0;        // atanh(r/delta)/2
  double g_tilde = 0.0;  // g sinh(2u)
};

/// Throws DomainError unless delta > r >= 0 (r == 0 with delta > 0 is allowed).
BogoliubovParams bogoliubov_params(double delta, double r, double g = 1.0);

struct MismatchParams {
  double delta = 0.0;
  double r = 0.0;
};

/// Inverts bogoliubov_params: picks (delta, r) that realise the target
/// Bogoliubov frequency and enhanced coupling.
MismatchParams params_from_targets(double Delta, double g_tilde, double g = 1.0);

struct SystemParams {
  double g = 1.0;
  double delta = 0.0;
  double beta = 0.0;  // real pump displacement, r = 2 g beta
  double kappa_a = 0.0;
  double kappa_b = 0.0;
  double lambda = 0.0;  // pump drive rate

  double r() const { return 2.0 * g * beta; }
  /// Requires delta > r.
  BogoliubovParams bogoliubov() const { return bogoliubov_params(delta, r(), g); }
  double Delta() const { return bogoliubov().Delta; }
  double u() const { return bogoliubov().u; }
  double g_tilde() const { return bogoliubov().g_tilde; }

  /// Parameter set from the Bogoliubov frequency and enhanced coupling.
  static SystemParams from_targets(double Delta, double g_tilde, double g = 1.0);
};

}  // namespace paraqnd
