#pragma once

// Grid-state (GKP) generation by a modular measurement of the pump x
// quadrature: the signal Bogoliubov amplitude picks up the phase
// 2 g~ t x_b - Delta t, and a general-dyne readout of that phase projects the
// pump onto a comb x_b = x_phi (mod pi / g~ t).
//
// Pump states live on a uniform periodic x grid; psi(x) is normalised so that
// sum |psi|^2 dx = 1.

#include <cstdint>
#include <optional>
#include <vector>

#include "paraqnd/fock.hpp"
#include "paraqnd/params.hpp"
#include "paraqnd/wigner.hpp"

namespace paraqnd {

struct GeneralDyneOutcome {
  double epsilon = 0.0;  // radial deviation from A0
  double phi = 0.0;
  double x_phi = 0.0;  // (phi + Delta t)/(2 g~ t) mod mu, in [0, mu)
  double mu = 0.0;     // pi / (g~ t)

  /// Throws DomainError unless g_tilde_t > 0.
  static GeneralDyneOutcome make(double epsilon, double phi, double g_tilde_t, double Delta_t);
};

struct GKPTarget {
  double w = 0.0;      // pump p width (envelope)
  double kappa = 0.0;  // tooth x width, 1/(2 sqrt(pi) A0)
  double A0 = 0.0;
  double spacing = 0.0;  // sqrt(2 pi)
  double x_phi = 0.0;

  static GKPTarget make(double w, double A0, double x_phi);
  bool symmetric(double tol = 1e-6) const;
};

/// Meter amplitude giving kappa = w.
double symmetric_meter_amplitude(double w);

struct GridState {
  RVector x;  // uniform, periodic (last point excluded)
  CVector psi;

  double dx() const { return x[1] - x[0]; }
  double norm() const;
  void normalize();
  double mean_x() const;
  double variance_x() const;
};

/// N points x_k = -extent + k dx, k < N = 2 extent / dx.
RVector periodic_grid(double extent, double dx);

/// exp{-(A0^2 + (A0+eps)^2 - 2 A0 (A0+eps) e^{i(2 g~t x - Delta t - phi)})/2}.
/// Throws DomainError if A0 + eps < 0.
Complex generaldyne_c_amplitude(double x, double epsilon, double phi, double A0, double g_tilde_t,
                                double Delta_t);

/// Comb of Gaussians approximating the amplitude for |eps| << A0; |n| <= n_terms
/// teeth around x_phi.
Complex generaldyne_c_approx(double x, const GeneralDyneOutcome& outcome, double A0,
                             double g_tilde_t, int n_terms = 12);

/// Diagonal of the Kraus operator in the pump x representation:
/// sqrt((A0+eps)/pi) C_x(eps, phi).
CVector generaldyne_kraus(double epsilon, double phi, double A0, double g_tilde_t, double Delta_t,
                          const RVector& grid);
/// Applies a diagonal Kraus operator; the result is not normalised.
GridState apply_diagonal(const CVector& diagonal, const GridState& state);

/// Outcome density (A0+eps)/pi sum |C_x|^2 |psi(x)|^2 dx.
double generaldyne_density(const GridState& pump, double epsilon, double phi, double A0,
                           double g_tilde_t, double Delta_t);

/// exp(-4 w^2 x^2): p-squeezed vacuum with p width w.
GridState p_squeezed_wavefunction(double w, const RVector& grid);
/// x-squeezed vacuum with x width kappa, centred at x0.
GridState x_squeezed_wavefunction(double kappa, const RVector& grid, double x0 = 0.0);

/// |0~> = sum_n e^{-4 w^2 (n s + x_phi)^2} D(n s)|kappa>, s = sqrt(2 pi); teeth whose
/// envelope weight falls below comb_tol are dropped.
GridState analytic_gkp_wavefunction(const GKPTarget& target, const RVector& grid,
                                    double comb_tol = 1e-10);
/// Number of retained teeth for the same rule.
int gkp_comb_terms(const GKPTarget& target, double comb_tol = 1e-10);

/// Fock coefficients <n|psi> for n < n_levels. Throws TruncationError if the
/// captured norm falls short of 1 - tol or the top two levels exceed tol.
CVector grid_to_fock(const GridState& state, Index n_levels, double tol = kDefaultHealthTolerance);
GridState fock_to_grid(const CVector& fock, const RVector& grid);
/// Fock-space |0~> via the grid construction.
CVector analytic_gkp_state(double w, double kappa, double x_phi, Index n_pump,
                           double tol = kDefaultHealthTolerance);

/// D(alpha) psi(x) = e^{-i p0 x0} e^{2 i p0 x} psi(x - x0), alpha = x0 + i p0; the
/// x translation is spectral. Throws GridError if the state is not negligible
/// at the grid edges.
GridState displace(const GridState& state, Complex alpha);
Complex displacement_expectation(const GridState& state, Complex alpha);

/// D(-i zero_point) D(-x_phi) D(-i sqrt(pi/2) floor(A0^2)).
GridState feedforward_displacement(const GridState& state, double x_phi, double A0,
                                   double zero_point = 0.0);

/// <p|psi> = pi^{-1/2} sum psi(x) e^{-2 i p x} dx on the requested p points.
CVector momentum_amplitudes(const GridState& state, const RVector& ps);

struct ToothFit {
  double center = 0.0;
  double width = 0.0;  // standard deviation of the Gaussian fit
  Index points = 0;
};

/// Quadratic fit of ln P over the contiguous points around the global maximum
/// with P > P_max e^{-1.5}. Throws GridError with fewer than 3 points.
ToothFit fit_largest_tooth(const RVector& q, const RVector& density);

/// Mean distance between adjacent local maxima of the x marginal that exceed
/// rel_height of the largest. Throws GridError with fewer than two teeth.
double tooth_spacing(const GridState& state, double rel_height = 1e-3);

struct SqueezingReport {
  // Modular metric from |<D(sqrt(2 pi))>| (p) and |<D(i sqrt(2 pi))>| (x).
  std::optional<double> modular_x_db, modular_p_db;
  double stabilizer_x = 0.0, stabilizer_p = 0.0;  // magnitudes
  // Tooth-width metric from the marginals.
  ToothFit tooth_x, tooth_p;
  double tooth_x_db = 0.0, tooth_p_db = 0.0;
};

/// p marginal is evaluated on [p_center - p_extent, p_center + p_extent] around
/// <p>, spacing p_step.
SqueezingReport effective_squeezing_db(const GridState& state, double p_extent = 10.0,
                                       double p_step = 0.005);

struct GKPConfig {
  double Delta = 100.0;
  double g_tilde = 1.0;
  double t = 0.0;  // 0 selects g~ t = sqrt(pi/2)
  double w = 0.0;  // 0 selects 15 dB
  double A0 = 0.0; // 0 selects the symmetric amplitude
  double epsilon = 0.1;
  double phi = kPi / 4.0;
  Index n_signal = 120;
  double grid_extent = 20.0;
  double grid_dx = 0.01;
  double health_tolerance = kDefaultHealthTolerance;
  bool zero_point_correction = true;
  /// Wigner panels: points per axis (0 disables), x stride on the pump grid.
  Index wigner_points = 0;
  double wigner_extent = 4.0;
  Index signal_wigner_stride = 4;

  double g_tilde_t() const;
  double width() const;
  double meter_amplitude() const;
};

struct GKPReport {
  SystemParams params;
  double u = 0.0;
  GeneralDyneOutcome outcome;
  GKPTarget target;
  double outcome_density = 0.0;  // per d(eps) d(phi)
  GridState pump_initial;
  GridState post_measurement;  // normalised, before feedforward
  GridState final_state;       // after feedforward
  GridState analytic;
  double fidelity = 0.0;  // final vs analytic
  SqueezingReport squeezing;
  /// max |C_numeric - C_formula e^{i g~t x}| relative to max |C|, over the grid.
  double amplitude_residual = 0.0;
  double signal_top_population = 0.0;
  CVector signal_initial;
  CMatrix signal_final;  // reduced, unconditional
  std::vector<std::pair<std::string, WignerGrid>> wigner;
};

/// Evolves |A0> (x) |w> under the effective Hamiltonian (diagonal in the N_a
/// eigenbasis for each pump x), projects the signal on |e^{i phi}(A0+eps)>,
/// applies the feedforward and compares with |0~>.
GKPReport run_gkp_protocol(const GKPConfig& config);

/// Same pipeline with the comb approximation of the amplitude in place of the
/// exact overlap (no zero-point phase, so no zero-point correction).
GridState run_gkp_approximate(const GKPConfig& config);

struct OutcomeSample {
  double epsilon = 0.0, phi = 0.0;
};

/// Rejection sampling of (eps, phi) from the exact outcome density for the
/// configured pump; sample k uses the RNG stream (seed, k).
std::vector<OutcomeSample> sample_generaldyne_outcomes(const GKPConfig& config, Index count,
                                                       std::uint64_t seed);

}  // namespace paraqnd
