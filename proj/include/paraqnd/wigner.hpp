#pragma once

// Wigner functions W(x, p) with x = Re(alpha), p = Im(alpha) and the
// normalisation  W = (2/pi) Tr[rho D(alpha) Parity D(alpha)^dag], so the vacuum
// peaks at 2/pi and the integral over dx dp is 1.

#include "paraqnd/types.hpp"

namespace paraqnd {

struct WignerGrid {
  RVector xs;
  RVector ps;
  RMatrix values;  // values(i, j) = W(xs[i], ps[j])

  double integral() const;
  /// Integral over p for each x (and the reverse).
  RVector x_marginal() const;
  RVector p_marginal() const;
};

RVector linspace(double lo, double hi, Index count);

/// Single-mode density matrix in the Fock basis.
WignerGrid wigner(const CMatrix& rho, const RVector& xs, const RVector& ps);
WignerGrid wigner(const CVector& psi, const RVector& xs, const RVector& ps);

/// Pure state sampled on a uniform x grid (spacing dx). Output x points are
/// every `stride`-th grid point inside [x_lo, x_hi].
WignerGrid wigner_from_wavefunction(const RVector& grid, const CVector& psi, const RVector& ps,
                                    double x_lo, double x_hi, Index stride);

/// Throws GridError unless the grid integrates to 1 within tol.
void check_wigner_normalization(const WignerGrid& w, double tol = 1e-3);

}  // namespace paraqnd
