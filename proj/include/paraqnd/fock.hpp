#pragma once

// Truncated two-mode Fock space (signal a, pump b). Joint vectors are ordered
// signal-major: index = n_signal_level * n_pump + n_pump_level.

#include <string>
#include <vector>

#include "paraqnd/types.hpp"

namespace paraqnd {

inline constexpr double kDefaultHealthTolerance = 1e-8;

struct ModeSpace {
  Index n_signal = 40;
  Index n_pump = 50;

  ModeSpace() = default;
  /// Throws DimensionError if either truncation is below 2.
  ModeSpace(Index signal, Index pump);
  Index dim() const { return n_signal * n_pump; }
  bool operator==(const ModeSpace&) const = default;
};

enum class ActsOn { signal, pump, joint };

struct ModeOperator {
  SparseMatrix matrix;
  ActsOn acts_on = ActsOn::joint;
  std::string label;

  Index dim() const { return matrix.rows(); }
  CMatrix dense() const { return CMatrix(matrix); }
  ModeOperator adjoint() const;
};

/// Single-mode ladder and quadrature operators on n levels.
struct SingleModeOperators {
  SparseMatrix a, a_dag, x, p, n, identity;
};

/// Throws DimensionError for n < 2.
SingleModeOperators single_mode_operators(Index n);

struct OperatorSet {
  ModeSpace space;
  SingleModeOperators signal;  // on the signal factor alone
  SingleModeOperators pump;    // on the pump factor alone
  // Joint embeddings (op (x) identity, identity (x) op).
  ModeOperator a, a_dag, x_a, p_a, n_a;
  ModeOperator b, b_dag, x_b, p_b, n_b;
};

OperatorSet make_operators(const ModeSpace& space);

SparseMatrix embed_signal(const SparseMatrix& op, Index n_pump);
SparseMatrix embed_pump(Index n_signal, const SparseMatrix& op);

/// Bogoliubov annihilator A = a cosh u + a^dag sinh u on n signal levels.
SparseMatrix bogoliubov_annihilator(Index n, double u);
/// N_a = A^dag A computed from the truncated A.
SparseMatrix bogoliubov_number(Index n, double u);

/// S(zeta) = exp((conj(zeta) a^2 - zeta a^dag^2)/2), built by matrix
/// exponential of the truncated generator (unitary on the truncated space).
CMatrix squeeze_operator(Index n, Complex zeta);
/// D(alpha) = exp(alpha a^dag - conj(alpha) a), dense, truncated generator.
CMatrix displacement_operator(Index n, Complex alpha);

// Single-mode pure states are plain vectors in the Fock basis.

/// Population in the top two Fock levels (squeezed states occupy one parity).
double top_population(const CVector& state);
/// Throws TruncationError when top_population(state) >= tol.
void check_truncation(const CVector& state, double tol, const std::string& what);

CVector fock_state(Index n, Index level);
/// Ordinary coherent state from Poisson amplitudes.
CVector coherent_state(Index n, Complex alpha, double tol = kDefaultHealthTolerance);

/// |N_a> = S(u)|N>: eigenvector of N_a = A^dag A with eigenvalue N.
CVector squeezed_number_state(Index n, double u, Index level, double tol = kDefaultHealthTolerance);
/// Columns are |N_a> for N = 0 .. count-1; orthonormal to machine precision.
CMatrix squeezed_number_basis(Index n, double u, Index count);
/// Eigenstate of A with eigenvalue `amplitude`: S(u) D(amplitude) |0>.
CVector bogoliubov_coherent_state(Index n, double u, Complex amplitude,
                                  double tol = kDefaultHealthTolerance);
/// Vacuum squeezed so that the p quadrature has standard deviation `width`
/// (width > 1/2 anti-squeezes p).
CVector squeezed_vacuum_pump(Index n, double width, double tol = kDefaultHealthTolerance);
/// Vacuum squeezed so that the x quadrature has standard deviation `width`.
CVector x_squeezed_vacuum(Index n, double width, double tol = kDefaultHealthTolerance);

/// Joint pure state on signal (x) pump.
class TwoModeState {
 public:
  TwoModeState(ModeSpace space, CVector amplitudes);
  static TwoModeState product(const CVector& signal, const CVector& pump);

  const ModeSpace& space() const { return space_; }
  const CVector& amplitudes() const { return amplitudes_; }
  /// Row-major view: rows = signal level, columns = pump level.
  CMatrix as_matrix() const;
  double norm() const { return amplitudes_.norm(); }

 private:
  ModeSpace space_;
  CVector amplitudes_;
};

/// Joint mixed state. Invariants checked on construction.
class DensityMatrix {
 public:
  DensityMatrix(ModeSpace space, CMatrix matrix, bool validate = true);
  static DensityMatrix from_pure(const TwoModeState& psi);

  const ModeSpace& space() const { return space_; }
  const CMatrix& matrix() const { return matrix_; }

 private:
  ModeSpace space_;
  CMatrix matrix_;
};

/// Hermitian to 1e-10, unit trace to 1e-8, eigenvalues >= -1e-8.
void validate_density(const CMatrix& rho, double herm_tol = 1e-10, double trace_tol = 1e-8,
                      double eig_tol = 1e-8);

// Quadrature wavefunctions <q|n> under the x = (a+a^dag)/2 convention.

/// phi_n(q) = <x=q|n>, real.
double quadrature_wavefunction(Index n, double q);
/// All phi_0..phi_{count-1} at q (stable three-term recurrence).
RVector hermite_functions(Index count, double q);
/// <p|n> = (-i)^n phi_n(p).
Complex momentum_wavefunction(Index n, double p);

}  // namespace paraqnd
