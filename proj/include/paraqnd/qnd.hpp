#pragma once

// Photon-number-resolving QND measurement of the Bogoliubov number N_a via a
// pump p-homodyne measurement after evolution under the effective Hamiltonian.

#include <limits>
#include <optional>
#include <vector>

#include "paraqnd/evolution.hpp"
#include "paraqnd/hamiltonians.hpp"
#include "paraqnd/wigner.hpp"

namespace paraqnd {

/// C_N(p) = exp(-i Delta t N) exp(-(p - d(N+1/2))^2 / (4 w^2)) / ((2 pi)^(1/4) w^(1/2))
Complex kraus_amplitude(Index N, double p, double d, double w, double Delta_t);

/// Homodyne outcome grid [-2, d(n_max + 1/2) + 6w] with spacing w/10.
RVector default_outcome_grid(double d, double w, Index n_max);

/// Smallest N with cumulative weight above 1 - tol.
Index choose_n_max(const RVector& weights, double tol = 1e-8);

struct KrausFamily {
  double d = 1.0;        // g~ t
  double w = 0.25;       // pump p width
  double Delta_t = 0.0;  // Delta t
  double u = 0.0;
  Index n_max = 0;
  RVector grid;
  double dp = 0.0;

  static KrausFamily make(double d, double w, double Delta_t, double u, Index n_max);
  /// C_0(p) .. C_{n_max}(p)
  CVector amplitudes(double p) const;
};

/// M(p) = sum_N C_N(p) |N_a><N_a| on n signal levels (Fock basis).
CMatrix kraus_operator(double p, const KrausFamily& family, Index n_signal);
/// F(p) = M^dag M.
CMatrix povm_element(double p, const KrausFamily& family, Index n_signal);
/// sum |C|^4 / (sum |C|^2)^2. Throws DomainError where every amplitude vanishes.
double povm_purity(double p, const KrausFamily& family);
/// Tr(F^2)/Tr(F)^2 from the matrix.
double povm_purity_matrix(const CMatrix& F);

/// Weights |<N_a|psi>|^2 for N = 0 .. count-1.
RVector bogoliubov_weights(const CVector& signal, double u, Index count);

/// P(p) on the family grid for a signal state.
RVector outcome_distribution(const CVector& signal, const KrausFamily& family);

struct QNDOutcome {
  double p = 0.0;
  double probability_density = 0.0;
  RVector posterior;  // over N = 0 .. n_max
  CVector state;      // normalised conditional signal state
  Index nearest = 0;
  double fidelity = 0.0;  // to |N_a = nearest>
};

/// Throws DomainError for a zero-probability outcome.
QNDOutcome apply_measurement(const CVector& signal, double p, const KrausFamily& family);

/// S^dag X S for an operator, S^dag psi for a state. Throws DomainError if S is
/// not unitary.
CMatrix basis_transform_sandwich(const CMatrix& op, const CMatrix& S);
CVector basis_transform_sandwich(const CVector& state, const CMatrix& S);

struct QNDConfig {
  double Delta = 150.0;
  double g_tilde = 1.0;
  double t = 1.0;
  Complex alpha = 0.7;
  double w = 0.25;
  Index n_signal = 40;
  Index n_pump = 50;
  HamiltonianVariant hamiltonian = HamiltonianVariant::effective;
  Index bins = 3;
  double health_tolerance = kDefaultHealthTolerance;
  /// Allowed top-level population of the evolved joint state.
  double evolved_tolerance = 1e-6;
  /// Wigner grid half-width and point count per axis; 0 points disables.
  double wigner_extent = 3.0;
  Index wigner_points = 0;
};

struct QNDBin {
  Index N = 0;
  double p_lo = 0.0, p_hi = 0.0;
  double probability = 0.0;
  CMatrix state;  // conditional ensemble-averaged signal state
  double fidelity = 0.0;
};

struct QNDDataset {
  SystemParams params;
  double u = 0.0;
  RVector grid;
  double dp = 0.0;
  RVector probability;          // P(p) from the joint evolution
  RVector kraus_probability;    // P(p) from the Kraus family
  std::vector<CVector> conditional;  // unnormalised signal states per grid point
  CMatrix signal_initial, signal_final, pump_initial, pump_final;
  std::vector<QNDBin> bins;
  double pump_top_population = 0.0;
  double signal_top_population = 0.0;
  KrausFamily family;
  CVector signal_input;
  std::vector<std::pair<std::string, WignerGrid>> wigner;
};

/// Evolves |alpha> (x) |w> under the chosen Hamiltonian, projects the pump on
/// the p grid and bins the conditional signal states per N_a window
/// [d N, d (N+1)].
QNDDataset run_qnd_protocol(const QNDConfig& config);

struct OracleComparison {
  std::vector<double> outcomes;
  std::vector<double> fidelities;
  double min_fidelity = 1.0;
};

/// Compares conditional states of a dataset against the Kraus prediction at
/// `count` evenly spaced outcomes in [p_lo, p_hi] with P(p) above `min_density`.
OracleComparison compare_with_kraus(const QNDDataset& data, Index count, double min_density = 1e-3,
                                    double p_lo = -std::numeric_limits<double>::infinity(),
                                    double p_hi = std::numeric_limits<double>::infinity());

struct PovmConfig {
  double d = 1.0;  // g~ t
  std::vector<double> widths{0.5, 0.25, 0.125};
  Index n_max = 6;  // completeness is checked on N_a <= n_max
};

struct PovmWidthScan {
  double w = 0.0;
  RVector grid;
  double dp = 0.0;
  RVector purity;
  /// ||sum F(p) dp - I|| on N_a <= n_max at the grid spacing and at half of it.
  double completeness_error = 0.0;
  double completeness_error_half = 0.0;
  RVector peak_purity;      // p = d (N + 1/2), N = 0 .. n_max
  RVector midpoint_purity;  // p = d (N + 1), N = 0 .. n_max - 1
  /// max over the grid of |formula - Tr(F^2)/Tr(F)^2|
  double formula_vs_matrix = 0.0;
};

/// Purity of the POVM against the outcome for each pump width. Throws
/// DomainError for non-positive d or widths.
std::vector<PovmWidthScan> run_povm_scan(const PovmConfig& config);

}  // namespace paraqnd
