#pragma once

#include <string>
#include <vector>

#include "paraqnd/fock.hpp"
#include "paraqnd/params.hpp"
#include "paraqnd/rng.hpp"

namespace paraqnd {

/// Lindblad operator with its rate folded in (L = sqrt(kappa) ...).
struct LindbladChannel {
  SparseMatrix op;
  bool monitored = false;
  double theta = 0.0;  // homodyne phase of a monitored channel
  std::string label;
};

/// exp(-i H t) psi. Throws DomainError for non-Hermitian H.
CVector evolve_unitary(const SparseMatrix& H, const CVector& psi, double t, double tol = 1e-14);
TwoModeState evolve_unitary(const ModeOperator& H, const TwoModeState& psi, double t);

/// Right-hand side of the Lindblad equation for Hermitian rho.
CMatrix lindblad_rhs(const SparseMatrix& H, const std::vector<LindbladChannel>& channels,
                     const CMatrix& rho);

struct MasterOptions {
  double dt = 1e-3;
  /// Relative difference allowed between one step and two half steps.
  double halving_tol = 1e-8;
  double positivity_tol = 1e-6;
  bool check_positivity = true;
};

/// Fixed-step RK4. Throws StepSizeError when the step-halving or final
/// positivity check fails.
CMatrix evolve_master(const SparseMatrix& H, const std::vector<LindbladChannel>& channels,
                      const CMatrix& rho, double t, const MasterOptions& options = {});
DensityMatrix evolve_master(const ModeOperator& H, const std::vector<LindbladChannel>& channels,
                            const DensityMatrix& rho, double t, const MasterOptions& options = {});

struct Observable {
  std::string name;
  SparseMatrix op;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> series;  // series[k][sample] for names[k]
  /// Homodyne current averaged over each recording interval.
  std::vector<double> current;
  StreamSeed seed;
  double dt = 0.0;

  const std::vector<double>& operator[](const std::string& name) const;
};

struct SmeOptions {
  double dt = 1e-3;
  Index record_every = 1;
  double efficiency = 1.0;
};

/// Diffusive homodyne unravelling of the monitored channel: RK4 for the
/// deterministic Lindblad part and an Euler-Maruyama innovation, with
/// trace renormalisation each step. The final conditional state is written
/// to `final_state` when given.
TrajectoryRecord evolve_sme_homodyne(const SparseMatrix& H, const std::vector<LindbladChannel>& channels,
                                     const CMatrix& rho0, double t, const SmeOptions& options,
                                     const StreamSeed& seed, const std::vector<Observable>& observables,
                                     CMatrix* final_state = nullptr);

/// Column-stacking Liouvillian superoperator (sparse).
SparseMatrix liouvillian(const SparseMatrix& H, const std::vector<SparseMatrix>& lindblads);
/// Largest entry of |a - b|.
double max_abs_difference(const SparseMatrix& a, const SparseMatrix& b);

struct RwaComparison {
  double fidelity = 0.0;
  CVector exact;
  CVector rwa;
};

/// Evolves signal (x) pump under H_D and under H_eff for time t and returns the
/// joint-state fidelity.
RwaComparison compare_exact_vs_rwa(const SystemParams& params, const ModeSpace& space,
                                   const CVector& signal, const CVector& pump, double t);

}  // namespace paraqnd
