#pragma once

#include "paraqnd/types.hpp"

namespace paraqnd {

SparseMatrix sparse_identity(Index n);
SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b);
SparseMatrix to_sparse(const CMatrix& m, double drop_tol = 0.0);

/// exp(t * m) applied to v by a scaled Taylor series. Intended for generators
/// of modest norm (squeeze and displacement generators).
CVector expm_multiply(const SparseMatrix& m, const CVector& v, double t = 1.0);

/// Dense matrix exponential.
CMatrix expm(const CMatrix& m);

struct SpectralBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Gershgorin enclosure of the spectrum of a Hermitian matrix.
SpectralBounds gershgorin_bounds(const SparseMatrix& h);

/// exp(-i h t) v for Hermitian h via a chunked Chebyshev expansion.
/// `tol` bounds the discarded expansion coefficients per chunk.
CVector propagate_hermitian(const SparseMatrix& h, const CVector& v, double t,
                            double tol = 1e-14);

/// Largest |h - h^dag| entry.
double hermiticity_residual(const SparseMatrix& h);

}  // namespace paraqnd
