#pragma once

// Driven phase-mismatched OPO: pump drive and outcoupling, stationary states
// |N_a>|beta_N>, loss-induced jumps on the squeezed Fock ladder, and pump
// homodyne trajectories.

#include <cstdint>
#include <optional>
#include <vector>

#include "paraqnd/evolution.hpp"
#include "paraqnd/fock.hpp"
#include "paraqnd/hamiltonians.hpp"
#include "paraqnd/params.hpp"

namespace paraqnd {

/// Fig. 4 style parameters: drive lambda = kappa_b beta / 2 for the pump offset.
SystemParams opo_params(double Delta, double g_tilde, double kappa_a, double kappa_b, double g = 1.0);

struct OPOChannels {
  SparseMatrix H_drive;  // i lambda (b^dag - b)
  SparseMatrix L_a;      // sqrt(kappa_a) a
  SparseMatrix L_b;      // sqrt(kappa_b) (b + beta)
};

/// Joint operators. Throws DomainError for negative rates.
OPOChannels build_opo_channels(const SystemParams& params, const ModeSpace& space);

/// beta_N = 2 i g~ (N + 1/2) / kappa_b. Throws DomainError unless kappa_b > 0.
Complex stationary_pump_amplitude(Index N, double g_tilde, double kappa_b);

/// Frobenius norm of the OPO Liouvillian (effective Hamiltonian, drive, pump
/// loss) applied to |N_a><N_a| (x) |beta><beta|. beta defaults to beta_N.
/// Throws DomainError unless kappa_a == 0.
double verify_stationary_state(Index N, const SystemParams& params, const ModeSpace& space,
                               std::optional<Complex> beta = std::nullopt);

/// a|N_a> = down |N_a - 1> + up |N_a + 1>.
struct JumpCoefficients {
  double down = 0.0;  // cosh u sqrt(N)
  double up = 0.0;    // -sinh u sqrt(N + 1)
};
JumpCoefficients photon_subtraction_action(Index N, double u);

struct SplitChannels {
  SparseMatrix plus;   // sqrt(kappa_a) sinh u A^dag
  SparseMatrix minus;  // sqrt(kappa_a) cosh u A
};

/// In the N_a number basis (A is the standard lowering operator on n levels).
SplitChannels rwa_lindblad_split(double u, double kappa_a, Index n);
/// Same operators in the signal Fock basis with the truncated A.
SplitChannels rwa_lindblad_split_fock(double u, double kappa_a, Index n);
/// sqrt(kappa_a) a = sqrt(kappa_a)(cosh u A - sinh u A^dag) in the N_a basis.
SparseMatrix signal_loss_number_basis(double u, double kappa_a, Index n);
/// D[sqrt(kappa_a) a] - D[L+] - D[L-] as a column-stacking superoperator in the N_a basis.
SparseMatrix rwa_residual_superoperator(double u, double kappa_a, Index n);

/// 3 cosh^2 u - 2
double jump_exponent(double u);
/// 1 - exp(-kappa_a (3 cosh^2 u - 2) t). Throws DomainError for t < 0.
double jump_probability(double u, double kappa_a, double t);
/// sqrt(w^2 e^{-kappa_b t} + (1 - e^{-kappa_b t})/4). Throws DomainError for t < 0.
double pump_width_decay(double w, double kappa_b, double t);

struct FeasibilityReport {
  double g = 0.0, kappa_a = 0.0, kappa_b = 0.0, w = 0.0, u = 0.0;
  double g_tilde = 0.0;           // g sinh 2u
  double t_jump = 0.0;            // 1/(cosh^2 u kappa_a)
  double jump_exponent = 0.0;     // 3 cosh^2 u - 2
  double jump_probability = 0.0;  // at t_jump
  double width_at_jump = 0.0;     // w'(t_jump)
  double detailed_ratio = 0.0;    // g~ t_jump / w'(t_jump)
  double headline_ratio = 0.0;    // (g / kappa_a) / w
  double relaxation_factor = 0.0; // w0 / w
  bool pass = false;              // headline_ratio >= 1
};

/// Throws DomainError unless all rates and w are positive.
FeasibilityReport feasibility_check(double g, double kappa_a, double kappa_b, double w, double u);

struct PlateauOptions {
  Index window = 50;           // samples
  double variance_threshold = 0.1;
  double jump_threshold = 0.5;
  Index min_length = 50;       // samples
};

struct Plateau {
  Index begin = 0, end = 0;  // sample range [begin, end)
  double t_begin = 0.0, t_end = 0.0;
  double mean_N = 0.0;
  Index level = 0;
  double mean_p = 0.0;
  double median_p = 0.0;
  double mean_db = 0.0;
  double min_db = 0.0;
};

struct Jump {
  double time = 0.0;
  Index from = 0, to = 0;
  double delta_p = 0.0;  // change of plateau median <p_b>
};

/// Union of all windows with Var(N) below threshold, split where the rounded
/// level changes; pieces shorter than min_length are dropped.
std::vector<Plateau> detect_plateaus(const std::vector<double>& times, const std::vector<double>& N,
                                     const std::vector<double>& p, const std::vector<double>& db,
                                     const PlateauOptions& options = {});
/// Transitions between consecutive plateaus with |mean N change| >= jump_threshold.
std::vector<Jump> detect_jumps(const std::vector<Plateau>& plateaus, const PlateauOptions& options = {});

struct OPOConfig {
  double Delta = 100.0;
  double g_tilde = 1.5;
  double kappa_a = 0.03;
  double kappa_b = 3.0;
  double duration = 100.0;
  double dt = 1e-3;
  Index record_every = 100;
  Index trajectories = 20;
  std::uint64_t seed = 1;
  Index threads = 1;
  Index n_blocks = 9;  // N_a = 0 .. n_blocks - 1
  Index n_pump = 22;   // pump levels per block (comoving frame)
  /// Initial signal populations over N_a (defaults to |initial_N>).
  Index initial_N = 2;
  std::vector<double> initial_weights;
  /// Initial pump coherent amplitude in the displaced frame; defaults to the
  /// stationary beta_N of each block.
  std::optional<Complex> initial_pump;
  Index transfer_every = 50;
  /// Largest allowed population in the top two pump levels (all blocks).
  double health_tolerance = kDefaultHealthTolerance;
  PlateauOptions plateau;

  SystemParams params() const;
  double u() const;
};

/// Block-diagonal conditional state: weight-carrying pump density matrix for
/// each N_a, expressed in the frame displaced by beta_N.
struct BlockState {
  std::vector<CMatrix> pump;
  double weight(Index N) const { return pump[static_cast<std::size_t>(N)].trace().real(); }
};

BlockState opo_initial_state(const OPOConfig& config);

/// Joint density matrix in the N_a (x) pump Fock basis, pump in the displaced
/// (common) frame with n_pump_common levels.
CMatrix block_state_to_joint(const BlockState& state, const OPOConfig& config, Index n_pump_common);

struct OPOTrajectory {
  TrajectoryRecord record;  // N_a, p_b, x_var_db
  std::vector<Plateau> plateaus;
  std::vector<Jump> jumps;
  double leaked_weight = 0.0;       // population pushed above the top block
  double max_pump_top = 0.0;        // largest weighted top-two-level pump population
  bool squeezing_below_3db = false; // some N_a = 0 plateau with mean dB < -3
  double max_plateau_p_error = 0.0; // max |median <p_b> - Im beta_N| / Im beta_N
  double max_plateau_mean_p_error = 0.0;
};

/// One SME trajectory (stream (seed, index)). Pump homodyne at theta = pi/2 is
/// monitored, signal loss is not. Throws TruncationError when a block's pump
/// leaves its truncation.
OPOTrajectory run_opo_trajectory(const OPOConfig& config, Index index, BlockState* final_state = nullptr);

struct OPOSummary {
  Index trajectories = 0;
  Index total_jumps = 0;
  Index min_jumps = 0;
  Index trajectories_with_jump = 0;
  Index correlated_jumps = 0;  // <p_b> moved with N_a
  double max_plateau_p_error = 0.0;
  double max_plateau_mean_p_error = 0.0;
  Index zero_plateaus = 0;
  double min_zero_plateau_db = 0.0;
  bool squeezing_below_3db = false;
  double max_leaked_weight = 0.0;
};

struct OPOResult {
  std::vector<OPOTrajectory> trajectories;
  OPOSummary summary;
};

/// Plateaus, jumps and plateau-level errors of a recorded trajectory (series
/// N_a, p_b, x_var_db).
void analyze_opo_record(OPOTrajectory& trajectory, const OPOConfig& config);
OPOSummary summarize_opo(const std::vector<OPOTrajectory>& trajectories, const OPOConfig& config);

/// Runs config.trajectories trajectories on config.threads threads; results in
/// index order.
OPOResult run_opo_trajectories(const OPOConfig& config);

/// Ensemble mean of final block states over `count` trajectories of length t.
CMatrix opo_ensemble_state(const OPOConfig& config, Index count, double t, Index n_pump_common);

/// Master equation for the same model in the N_a (x) pump Fock basis
/// (effective Hamiltonian, drive, pump loss with offset, split signal loss).
CMatrix opo_master_reference(const OPOConfig& config, double t, Index n_pump_common, double dt = 1e-3);

/// Same trajectory on the generic joint-space SME engine (Fock basis), for any
/// Hamiltonian variant. The effective variant uses the split signal loss, the
/// others the plain sqrt(kappa_a) a. Far slower than the block engine.
TrajectoryRecord run_opo_trajectory_generic(const OPOConfig& config, HamiltonianVariant variant,
                                            const ModeSpace& space, Index index, double efficiency = 1.0);
/// Ensemble on the generic engine (no leakage bookkeeping).
OPOResult run_opo_trajectories_generic(const OPOConfig& config, HamiltonianVariant variant, const ModeSpace& space);

}  // namespace paraqnd
