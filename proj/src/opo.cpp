#include "paraqnd/opo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "paraqnd/hamiltonians.hpp"
#include "paraqnd/linalg.hpp"
#include "paraqnd/rng.hpp"

namespace paraqnd {

namespace {

void require_nonnegative(double value, const char* what) {
  if (!(value >= 0.0) || !std::isfinite(value)) throw DomainError(std::string(what) + " must be >= 0");
}

double pump_offset(double g_tilde, double kappa_b, Index N) {
  return 2.0 * g_tilde * (static_cast<double>(N) + 0.5) / kappa_b;
}

SparseMatrix lowering(Index n) {
  std::vector<Eigen::Triplet<Complex>> t;
  for (Index k = 1; k < n; ++k) t.emplace_back(k - 1, k, std::sqrt(static_cast<double>(k)));
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

SystemParams opo_params(double Delta, double g_tilde, double kappa_a, double kappa_b, double g) {
  require_nonnegative(kappa_a, "kappa_a");
  require_nonnegative(kappa_b, "kappa_b");
  SystemParams p = SystemParams::from_targets(Delta, g_tilde, g);
  p.kappa_a = kappa_a;
  p.kappa_b = kappa_b;
  p.lambda = kappa_b * p.beta / 2.0;
  return p;
}

OPOChannels build_opo_channels(const SystemParams& params, const ModeSpace& space) {
  require_nonnegative(params.kappa_a, "kappa_a");
  require_nonnegative(params.kappa_b, "kappa_b");
  const OperatorSet ops = make_operators(space);
  const SparseMatrix id = sparse_identity(space.dim());
  OPOChannels ch;
  ch.H_drive = (ops.b_dag.matrix - ops.b.matrix) * Complex(0.0, params.lambda);
  ch.L_a = ops.a.matrix * std::sqrt(params.kappa_a);
  ch.L_b = (ops.b.matrix + id * params.beta) * std::sqrt(params.kappa_b);
  return ch;
}

Complex stationary_pump_amplitude(Index N, double g_tilde, double kappa_b) {
  if (!(kappa_b > 0.0)) throw DomainError("stationary pump amplitude needs kappa_b > 0");
  if (N < 0) throw DomainError("N_a must be >= 0");
  return {0.0, pump_offset(g_tilde, kappa_b, N)};
}

double verify_stationary_state(Index N, const SystemParams& params, const ModeSpace& space,
                               std::optional<Complex> beta) {
  if (params.kappa_a != 0.0) throw DomainError("stationary states |N_a>|beta_N> need kappa_a = 0");
  const BogoliubovParams bp = params.bogoliubov();
  const Complex b_N = beta ? *beta : stationary_pump_amplitude(N, bp.g_tilde, params.kappa_b);
  const CVector sig = squeezed_number_state(space.n_signal, bp.u, N);
  const CVector pump = coherent_state(space.n_pump, b_N);
  const CVector psi = TwoModeState::product(sig, pump).amplitudes();

  const OPOChannels ch = build_opo_channels(params, space);
  const SparseMatrix H = build_H_eff(params, space).matrix + ch.H_drive;
  // L(|psi><psi|) = |a><psi| + |psi><a| + |l><l| with a = (-iH - L^dag L/2) psi, l = L psi.
  // Its norm is taken in an orthonormal basis of span{psi, a, l}: a and l are
  // O(lambda) and cancel.
  const CVector l = ch.L_b * psi;
  const CVector a = Complex(0.0, -1.0) * (H * psi) - 0.5 * (ch.L_b.adjoint() * l);
  CMatrix span(psi.size(), 3);
  span << psi, a, l;
  Eigen::HouseholderQR<CMatrix> qr(span);
  const CMatrix R = qr.matrixQR().topRows(3).triangularView<Eigen::Upper>();
  const CMatrix small = R.col(1) * R.col(0).adjoint() + R.col(0) * R.col(1).adjoint() + R.col(2) * R.col(2).adjoint();
  return small.norm();
}

JumpCoefficients photon_subtraction_action(Index N, double u) {
  if (N < 0) throw DomainError("N_a must be >= 0");
  const double n = static_cast<double>(N);
  return {std::cosh(u) * std::sqrt(n), -std::sinh(u) * std::sqrt(n + 1.0)};
}

SplitChannels rwa_lindblad_split(double u, double kappa_a, Index n) {
  require_nonnegative(kappa_a, "kappa_a");
  const SparseMatrix A = lowering(n);
  const double k = std::sqrt(kappa_a);
  return {SparseMatrix(A.adjoint()) * (k * std::sinh(u)), A * (k * std::cosh(u))};
}

SplitChannels rwa_lindblad_split_fock(double u, double kappa_a, Index n) {
  require_nonnegative(kappa_a, "kappa_a");
  const SparseMatrix A = bogoliubov_annihilator(n, u);
  const double k = std::sqrt(kappa_a);
  return {SparseMatrix(A.adjoint()) * (k * std::sinh(u)), A * (k * std::cosh(u))};
}

SparseMatrix signal_loss_number_basis(double u, double kappa_a, Index n) {
  require_nonnegative(kappa_a, "kappa_a");
  const SparseMatrix A = lowering(n);
  return (A * std::cosh(u) - SparseMatrix(A.adjoint()) * std::sinh(u)) * std::sqrt(kappa_a);
}

SparseMatrix rwa_residual_superoperator(double u, double kappa_a, Index n) {
  const SplitChannels s = rwa_lindblad_split(u, kappa_a, n);
  const SparseMatrix zero(n, n);
  return liouvillian(zero, {signal_loss_number_basis(u, kappa_a, n)}) -
         liouvillian(zero, {s.plus, s.minus});
}

double jump_exponent(double u) {
  const double c = std::cosh(u);
  return 3.0 * c * c - 2.0;
}

double jump_probability(double u, double kappa_a, double t) {
  require_nonnegative(kappa_a, "kappa_a");
  require_nonnegative(t, "t");
  return -std::expm1(-kappa_a * jump_exponent(u) * t);
}

double pump_width_decay(double w, double kappa_b, double t) {
  require_nonnegative(kappa_b, "kappa_b");
  require_nonnegative(t, "t");
  if (!(w > 0.0)) throw DomainError("width must be > 0");
  const double e = std::exp(-kappa_b * t);
  return std::sqrt(w * w * e + (1.0 - e) / 4.0);
}

FeasibilityReport feasibility_check(double g, double kappa_a, double kappa_b, double w, double u) {
  if (!(g > 0.0) || !(kappa_a > 0.0) || !(kappa_b > 0.0) || !(w > 0.0))
    throw DomainError("feasibility check needs positive g, kappa_a, kappa_b and w");
  FeasibilityReport r;
  r.g = g;
  r.kappa_a = kappa_a;
  r.kappa_b = kappa_b;
  r.w = w;
  r.u = u;
  r.g_tilde = g * std::sinh(2.0 * u);
  const double c = std::cosh(u);
  r.t_jump = 1.0 / (c * c * kappa_a);
  r.jump_exponent = jump_exponent(u);
  r.jump_probability = jump_probability(u, kappa_a, r.t_jump);
  r.width_at_jump = pump_width_decay(w, kappa_b, r.t_jump);
  r.detailed_ratio = r.g_tilde * r.t_jump / r.width_at_jump;
  r.headline_ratio = (g / kappa_a) / w;
  r.relaxation_factor = kVacuumWidth / w;
  r.pass = r.headline_ratio >= 1.0;
  return r;
}

std::vector<Plateau> detect_plateaus(const std::vector<double>& times, const std::vector<double>& N,
                                     const std::vector<double>& p, const std::vector<double>& db,
                                     const PlateauOptions& options) {
  const Index S = static_cast<Index>(N.size());
  if (static_cast<Index>(times.size()) != S || static_cast<Index>(p.size()) != S ||
      static_cast<Index>(db.size()) != S)
    throw DimensionError("plateau detection needs equally long series");
  if (options.window < 2) throw DomainError("plateau window must be >= 2");
  std::vector<double> s1(S + 1, 0.0), s2(S + 1, 0.0);
  for (Index i = 0; i < S; ++i) {
    s1[i + 1] = s1[i] + N[i];
    s2[i + 1] = s2[i] + N[i] * N[i];
  }
  const Index win = std::min(options.window, S);
  // Union of all qualifying windows
  std::vector<char> mark(S, 0);
  Index covered = 0;
  for (Index lo = 0; lo + win <= S; ++lo) {
    const Index hi = lo + win;
    const double m = (s1[hi] - s1[lo]) / win;
    const double var = (s2[hi] - s2[lo]) / win - m * m;
    if (var >= options.variance_threshold) continue;
    for (Index i = std::max(lo, covered); i < hi; ++i) mark[i] = 1;
    covered = hi;
  }

  std::vector<Plateau> out;
  auto flush = [&](Index b, Index e) {
    if (e - b < options.min_length) return;
    Plateau pl;
    pl.begin = b;
    pl.end = e;
    pl.t_begin = times[b];
    pl.t_end = times[e - 1];
    double sn = 0.0, sp = 0.0, sd = 0.0;
    pl.min_db = db[b];
    for (Index i = b; i < e; ++i) {
      sn += N[i];
      sp += p[i];
      sd += db[i];
      pl.min_db = std::min(pl.min_db, db[i]);
    }
    const double len = static_cast<double>(e - b);
    pl.mean_N = sn / len;
    pl.mean_p = sp / len;
    pl.mean_db = sd / len;
    std::vector<double> ps(p.begin() + b, p.begin() + e);
    std::nth_element(ps.begin(), ps.begin() + ps.size() / 2, ps.end());
    pl.median_p = ps[ps.size() / 2];
    pl.level = std::max<Index>(0, std::llround(pl.mean_N));
    out.push_back(pl);
  };
  Index i = 0;
  while (i < S) {
    if (!mark[i]) {
      ++i;
      continue;
    }
    Index b = i;
    long level = std::lround(N[i]);
    while (i < S && mark[i]) {
      const long l = std::lround(N[i]);
      if (l != level) {
        flush(b, i);
        b = i;
        level = l;
      }
      ++i;
    }
    flush(b, i);
  }
  return out;
}

std::vector<Jump> detect_jumps(const std::vector<Plateau>& plateaus, const PlateauOptions& options) {
  std::vector<Jump> out;
  for (std::size_t k = 1; k < plateaus.size(); ++k) {
    const Plateau& a = plateaus[k - 1];
    const Plateau& b = plateaus[k];
    if (std::abs(b.mean_N - a.mean_N) < options.jump_threshold) continue;
    out.push_back({0.5 * (a.t_end + b.t_begin), a.level, b.level, b.median_p - a.median_p});
  }
  return out;
}

SystemParams OPOConfig::params() const { return opo_params(Delta, g_tilde, kappa_a, kappa_b); }

double OPOConfig::u() const { return 0.5 * std::asinh(g_tilde); }

namespace {

void validate(const OPOConfig& c) {
  if (!(c.kappa_b > 0.0)) throw DomainError("kappa_b must be > 0");
  require_nonnegative(c.kappa_a, "kappa_a");
  if (!(c.dt > 0.0) || !(c.duration >= 0.0)) throw DomainError("need dt > 0 and duration >= 0");
  if (c.record_every < 1 || c.transfer_every < 1) throw DomainError("record/transfer intervals must be >= 1");
  if (c.n_blocks < 1) throw DimensionError("need at least one N_a block");
  if (c.n_pump < 3) throw DimensionError("need at least 3 pump levels");
  if (c.threads < 1) throw DomainError("threads must be >= 1");
  if (!c.initial_weights.empty() && static_cast<Index>(c.initial_weights.size()) > c.n_blocks)
    throw DimensionError("initial weights exceed the number of blocks");
  if (c.initial_weights.empty() && (c.initial_N < 0 || c.initial_N >= c.n_blocks))
    throw DimensionError("initial N_a outside the block range");
}

std::vector<double> initial_weights(const OPOConfig& c) {
  std::vector<double> w(static_cast<std::size_t>(c.n_blocks), 0.0);
  if (c.initial_weights.empty()) {
    w[static_cast<std::size_t>(c.initial_N)] = 1.0;
    return w;
  }
  double total = 0.0;
  for (std::size_t k = 0; k < c.initial_weights.size(); ++k) {
    if (c.initial_weights[k] < 0.0) throw DomainError("initial weights must be >= 0");
    w[k] = c.initial_weights[k];
    total += w[k];
  }
  if (!(total > 0.0)) throw DomainError("initial weights sum to zero");
  for (double& x : w) x /= total;
  return w;
}

// rho <- M rho M^dag for M = diag(d) + e1 b + e2 b^2 (upper band), in place via tmp.
void apply_banded(CMatrix& rho, CMatrix& tmp, const std::vector<Complex>& d, const std::vector<Complex>& e1,
                  const std::vector<Complex>& e2) {
  const Index n = rho.rows();
  for (Index j = 0; j < n; ++j)
    for (Index k = 0; k < n; ++k) {
      Complex v = d[k] * rho(k, j);
      if (k + 1 < n) v += e1[k] * rho(k + 1, j);
      if (k + 2 < n) v += e2[k] * rho(k + 2, j);
      tmp(k, j) = v;
    }
  for (Index k = 0; k < n; ++k)
    for (Index j = 0; j < n; ++j) {
      Complex v = tmp(k, j) * std::conj(d[j]);
      if (j + 1 < n) v += tmp(k, j + 1) * std::conj(e1[j]);
      if (j + 2 < n) v += tmp(k, j + 2) * std::conj(e2[j]);
      rho(k, j) = v;
    }
}

double top_two(const CMatrix& rho) {
  const Index n = rho.rows();
  return rho(n - 1, n - 1).real() + rho(n - 2, n - 2).real();
}

}  // namespace

BlockState opo_initial_state(const OPOConfig& config) {
  validate(config);
  const std::vector<double> w = initial_weights(config);
  BlockState s;
  for (Index N = 0; N < config.n_blocks; ++N) {
    CMatrix rho = CMatrix::Zero(config.n_pump, config.n_pump);
    const double wN = w[static_cast<std::size_t>(N)];
    if (wN > 0.0) {
      const Complex shift = config.initial_pump
                                ? *config.initial_pump -
                                      stationary_pump_amplitude(N, config.g_tilde, config.kappa_b)
                                : Complex(0.0);
      const CVector v = coherent_state(config.n_pump, shift);
      rho = wN * v * v.adjoint();
    }
    s.pump.push_back(rho);
  }
  return s;
}

CMatrix block_state_to_joint(const BlockState& state, const OPOConfig& config, Index n_pump_common) {
  const Index B = static_cast<Index>(state.pump.size());
  if (n_pump_common < config.n_pump) throw DimensionError("common pump space smaller than block space");
  CMatrix out = CMatrix::Zero(B * n_pump_common, B * n_pump_common);
  for (Index N = 0; N < B; ++N) {
    CMatrix big = CMatrix::Zero(n_pump_common, n_pump_common);
    big.topLeftCorner(config.n_pump, config.n_pump) = state.pump[static_cast<std::size_t>(N)];
    const CMatrix D =
        displacement_operator(n_pump_common, stationary_pump_amplitude(N, config.g_tilde, config.kappa_b));
    out.block(N * n_pump_common, N * n_pump_common, n_pump_common, n_pump_common) = D * big * D.adjoint();
  }
  return out;
}

OPOTrajectory run_opo_trajectory(const OPOConfig& config, Index index, BlockState* final_state) {
  validate(config);
  const Index B = config.n_blocks;
  const Index n = config.n_pump;
  const double u = config.u();
  const double c2 = std::cosh(u) * std::cosh(u);
  const double s2 = std::sinh(u) * std::sinh(u);
  const double kb = config.kappa_b;
  const double ka = config.kappa_a;
  const double sk = std::sqrt(kb);
  const double dt = config.dt;
  const double eta = 2.0 * config.g_tilde / kb;
  const double health = config.health_tolerance;

  BlockState state = opo_initial_state(config);
  std::vector<double> y(static_cast<std::size_t>(B)), s(static_cast<std::size_t>(B)),
      gamma(static_cast<std::size_t>(B));
  for (Index N = 0; N < B; ++N) {
    y[N] = pump_offset(config.g_tilde, kb, N);
    s[N] = sk * y[N];
    gamma[N] = ka * (c2 * static_cast<double>(N) + s2 * static_cast<double>(N + 1));
  }
  const CMatrix Ddown = displacement_operator(n, Complex(0.0, eta));   // frame N -> N-1
  const CMatrix Dup = displacement_operator(n, Complex(0.0, -eta));    // frame N -> N+1

  OPOTrajectory out;
  TrajectoryRecord& rec = out.record;
  rec.names = {"N_a", "p_b", "x_var_db"};
  rec.series.assign(3, {});
  rec.seed = seed_policy(config.seed, static_cast<std::uint64_t>(index));
  rec.dt = dt;
  std::mt19937_64 engine = make_engine(rec.seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(dt));

  auto tr_b = [](const CMatrix& rho) {
    Complex acc = 0.0;
    for (Index k = 0; k + 1 < rho.rows(); ++k) acc += std::sqrt(static_cast<double>(k + 1)) * rho(k + 1, k);
    return acc;
  };
  auto record = [&](double t) {
    double nbar = 0.0, pb = 0.0, var = 0.0, edge = 0.0;
    for (Index N = 0; N < B; ++N) {
      const CMatrix& r = state.pump[N];
      const double w = r.trace().real();
      nbar += w * static_cast<double>(N);
      pb += tr_b(r).imag() + w * y[N];
      var += w * (2.0 * static_cast<double>(N) + 1.0) / 4.0;
      edge += top_two(r);
    }
    out.max_pump_top = std::max(out.max_pump_top, edge);
    if (edge > health) throw TruncationError("OPO pump left its truncation; increase n_pump");
    var *= std::exp(-2.0 * u);
    rec.times.push_back(t);
    rec.series[0].push_back(nbar);
    rec.series[1].push_back(pb);
    rec.series[2].push_back(10.0 * std::log10(var / 0.25));
  };

  const long steps = std::lround(config.duration / dt);
  std::vector<Complex> d(n), e1(n), e2(n);
  std::vector<double> sq1(n), sq2(n);
  for (Index k = 0; k < n; ++k) {
    sq1[k] = std::sqrt(static_cast<double>(k + 1));
    sq2[k] = std::sqrt(static_cast<double>((k + 1) * (k + 2)));
  }
  std::vector<double> logF(static_cast<std::size_t>(B));
  CMatrix tmp(n, n);
  double current_acc = 0.0;
  rec.current.push_back(0.0);
  record(0.0);
  for (long step = 1; step <= steps; ++step) {
    double mean = 0.0;  // <c + c^dag>
    for (Index N = 0; N < B; ++N)
      mean += 2.0 * sk * tr_b(state.pump[N]).imag() + 2.0 * s[N] * state.pump[N].trace().real();
    const double dY = mean * dt + normal(engine);
    current_acc += dY / dt;

    double maxlog = -1e300;
    for (Index N = 0; N < B; ++N) {
      logF[N] = 2.0 * s[N] * dY - 2.0 * s[N] * s[N] * dt - gamma[N] * dt;
      maxlog = std::max(maxlog, logF[N]);
    }
    for (Index N = 0; N < B; ++N) {
      // Block record relative to its own mean 2 s_N
      const double dYN = dY - 2.0 * s[N] * dt;
      // sqrt of the scalar factor folded into M
      const double f = std::exp(0.5 * (logF[N] - maxlog));
      const Complex c1 = Complex(0.0, -sk * f) * dYN;
      const double c2k = -0.5 * kb * (dYN * dYN - dt) * f;
      for (Index k = 0; k < n; ++k) {
        d[k] = f * (1.0 - 0.5 * kb * static_cast<double>(k) * dt);
        e1[k] = c1 * sq1[k];
        e2[k] = c2k * sq2[k];
      }
      apply_banded(state.pump[N], tmp, d, e1, e2);
    }

    if (ka > 0.0 && step % config.transfer_every == 0) {
      const double h = dt * static_cast<double>(config.transfer_every);
      std::vector<CMatrix> inflow(static_cast<std::size_t>(B), CMatrix::Zero(n, n));
      for (Index N = 0; N < B; ++N) {
        const CMatrix& r = state.pump[N];
        if (r.trace().real() < 1e-16) continue;
        if (N > 0) inflow[N - 1] += (h * ka * c2 * static_cast<double>(N)) * (Ddown * r * Ddown.adjoint());
        if (N + 1 < B) inflow[N + 1] += (h * ka * s2 * static_cast<double>(N + 1)) * (Dup * r * Dup.adjoint());
      }
      double total = 0.0;
      for (Index N = 0; N < B; ++N) total += state.pump[N].trace().real();
      out.leaked_weight += h * ka * s2 * static_cast<double>(B) * state.pump[B - 1].trace().real() / total;
      for (Index N = 0; N < B; ++N) state.pump[N] += inflow[N];
    }

    double total = 0.0;
    for (Index N = 0; N < B; ++N) total += state.pump[N].trace().real();
    for (Index N = 0; N < B; ++N) state.pump[N] /= total;

    if (step % config.record_every == 0) {
      for (Index N = 0; N < B; ++N) {
        CMatrix& r = state.pump[N];
        r = (0.5 * (r + r.adjoint())).eval();
      }
      rec.current.push_back(current_acc / static_cast<double>(config.record_every));
      current_acc = 0.0;
      record(static_cast<double>(step) * dt);
    }
  }

  analyze_opo_record(out, config);
  if (final_state) *final_state = std::move(state);
  return out;
}

void analyze_opo_record(OPOTrajectory& trajectory, const OPOConfig& config) {
  const TrajectoryRecord& rec = trajectory.record;
  trajectory.plateaus = detect_plateaus(rec.times, rec["N_a"], rec["p_b"], rec["x_var_db"], config.plateau);
  trajectory.jumps = detect_jumps(trajectory.plateaus, config.plateau);
  trajectory.max_plateau_p_error = trajectory.max_plateau_mean_p_error = 0.0;
  trajectory.squeezing_below_3db = false;
  for (const Plateau& p : trajectory.plateaus) {
    const double target = pump_offset(config.g_tilde, config.kappa_b, p.level);
    trajectory.max_plateau_p_error = std::max(trajectory.max_plateau_p_error, std::abs(p.median_p - target) / target);
    trajectory.max_plateau_mean_p_error =
        std::max(trajectory.max_plateau_mean_p_error, std::abs(p.mean_p - target) / target);
    if (p.level == 0 && p.mean_db < -3.0) trajectory.squeezing_below_3db = true;
  }
}

namespace {

template <class Run>
std::vector<OPOTrajectory> run_pool(Index M, Index threads, Run run) {
  std::vector<OPOTrajectory> out(static_cast<std::size_t>(M));
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (Index k = next++; k < M; k = next++) {
      try {
        out[static_cast<std::size_t>(k)] = run(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const Index nt = std::min(threads, std::max<Index>(M, 1));
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (Index t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace

OPOSummary summarize_opo(const std::vector<OPOTrajectory>& trajectories, const OPOConfig& config) {
  OPOSummary sm;
  const Index M = static_cast<Index>(trajectories.size());
  sm.trajectories = M;
  sm.min_jumps = M > 0 ? static_cast<Index>(trajectories[0].jumps.size()) : 0;
  sm.min_zero_plateau_db = 0.0;
  const double eta = 2.0 * config.g_tilde / config.kappa_b;
  for (const OPOTrajectory& tr : trajectories) {
    const Index nj = static_cast<Index>(tr.jumps.size());
    sm.total_jumps += nj;
    sm.min_jumps = std::min(sm.min_jumps, nj);
    if (nj > 0) ++sm.trajectories_with_jump;
    for (const Jump& j : tr.jumps) {
      const double dn = static_cast<double>(j.to - j.from);
      if (dn != 0.0 && j.delta_p * dn > 0.0 && std::abs(j.delta_p - dn * eta) < 0.5 * eta) ++sm.correlated_jumps;
    }
    sm.max_plateau_p_error = std::max(sm.max_plateau_p_error, tr.max_plateau_p_error);
    sm.max_plateau_mean_p_error = std::max(sm.max_plateau_mean_p_error, tr.max_plateau_mean_p_error);
    for (const Plateau& p : tr.plateaus)
      if (p.level == 0) {
        ++sm.zero_plateaus;
        sm.min_zero_plateau_db = std::min(sm.min_zero_plateau_db, p.mean_db);
      }
    sm.squeezing_below_3db = sm.squeezing_below_3db || tr.squeezing_below_3db;
    sm.max_leaked_weight = std::max(sm.max_leaked_weight, tr.leaked_weight);
  }
  return sm;
}

OPOResult run_opo_trajectories(const OPOConfig& config) {
  validate(config);
  OPOResult res;
  res.trajectories =
      run_pool(config.trajectories, config.threads, [&](Index k) { return run_opo_trajectory(config, k); });
  res.summary = summarize_opo(res.trajectories, config);
  return res;
}

OPOResult run_opo_trajectories_generic(const OPOConfig& config, HamiltonianVariant variant, const ModeSpace& space) {
  validate(config);
  OPOResult res;
  res.trajectories = run_pool(config.trajectories, config.threads, [&](Index k) {
    OPOTrajectory tr;
    tr.record = run_opo_trajectory_generic(config, variant, space, k);
    analyze_opo_record(tr, config);
    return tr;
  });
  res.summary = summarize_opo(res.trajectories, config);
  return res;
}

CMatrix opo_ensemble_state(const OPOConfig& config, Index count, double t, Index n_pump_common) {
  if (count < 1) throw DomainError("ensemble needs at least one trajectory");
  OPOConfig c = config;
  c.duration = t;
  c.record_every = std::max<Index>(1, std::lround(t / c.dt));
  BlockState mean;
  for (Index k = 0; k < count; ++k) {
    BlockState fin;
    run_opo_trajectory(c, k, &fin);
    if (mean.pump.empty()) {
      mean = std::move(fin);
    } else {
      for (std::size_t N = 0; N < mean.pump.size(); ++N) mean.pump[N] += fin.pump[N];
    }
  }
  for (CMatrix& r : mean.pump) r /= static_cast<double>(count);
  return block_state_to_joint(mean, c, n_pump_common);
}

CMatrix opo_master_reference(const OPOConfig& config, double t, Index n_pump_common, double dt) {
  validate(config);
  const Index B = config.n_blocks;
  const Index n = n_pump_common;
  const SystemParams params = config.params();
  const double u = config.u();
  const SingleModeOperators pump = single_mode_operators(n);
  const SparseMatrix Ia = sparse_identity(B);
  const SparseMatrix Ib = sparse_identity(n);

  std::vector<Eigen::Triplet<Complex>> tn, th;
  for (Index N = 0; N < B; ++N) {
    tn.emplace_back(N, N, static_cast<double>(N));
    th.emplace_back(N, N, static_cast<double>(N) + 0.5);
  }
  SparseMatrix Na(B, B), Nh(B, B);
  Na.setFromTriplets(tn.begin(), tn.end());
  Nh.setFromTriplets(th.begin(), th.end());

  const SparseMatrix H = kron(Na, Ib) * config.Delta - kron(Nh, pump.x) * (2.0 * config.g_tilde) +
                         kron(Ia, pump.a_dag - pump.a) * Complex(0.0, params.lambda);
  const SplitChannels split = rwa_lindblad_split(u, config.kappa_a, B);
  std::vector<LindbladChannel> channels{
      {kron(Ia, pump.a + Ib * params.beta) * std::sqrt(config.kappa_b), false, 0.0, "pump loss"},
      {kron(split.minus, Ib), false, 0.0, "signal loss -"},
      {kron(split.plus, Ib), false, 0.0, "signal loss +"}};

  const std::vector<double> w = initial_weights(config);
  CMatrix rho = CMatrix::Zero(B * n, B * n);
  for (Index N = 0; N < B; ++N) {
    const double wN = w[static_cast<std::size_t>(N)];
    if (wN == 0.0) continue;
    const Complex alpha = config.initial_pump ? *config.initial_pump
                                              : stationary_pump_amplitude(N, config.g_tilde, config.kappa_b);
    const CVector v = coherent_state(n, alpha);
    rho.block(N * n, N * n, n, n) = wN * v * v.adjoint();
  }
  MasterOptions opts;
  opts.dt = dt;
  return evolve_master(H, channels, rho, t, opts);
}

TrajectoryRecord run_opo_trajectory_generic(const OPOConfig& config, HamiltonianVariant variant,
                                            const ModeSpace& space, Index index, double efficiency) {
  validate(config);
  const SystemParams params = config.params();
  const double u = config.u();
  const OPOChannels ch = build_opo_channels(params, space);
  const SparseMatrix H = build_hamiltonian(variant, params, space).matrix + ch.H_drive;

  std::vector<LindbladChannel> channels{{ch.L_b, true, kPi / 2.0, "pump homodyne"}};
  if (variant == HamiltonianVariant::effective) {
    const SplitChannels split = rwa_lindblad_split_fock(u, config.kappa_a, space.n_signal);
    channels.push_back({embed_signal(split.minus, space.n_pump), false, 0.0, "signal loss -"});
    channels.push_back({embed_signal(split.plus, space.n_pump), false, 0.0, "signal loss +"});
  } else {
    channels.push_back({ch.L_a, false, 0.0, "signal loss"});
  }

  const std::vector<double> w = initial_weights(config);
  CMatrix rho = CMatrix::Zero(space.dim(), space.dim());
  for (Index N = 0; N < config.n_blocks; ++N) {
    const double wN = w[static_cast<std::size_t>(N)];
    if (wN == 0.0) continue;
    const Complex alpha = config.initial_pump ? *config.initial_pump
                                              : stationary_pump_amplitude(N, config.g_tilde, config.kappa_b);
    const CVector psi =
        TwoModeState::product(squeezed_number_state(space.n_signal, u, N), coherent_state(space.n_pump, alpha))
            .amplitudes();
    rho += wN * psi * psi.adjoint();
  }

  const OperatorSet ops = make_operators(space);
  const SparseMatrix x2 = ops.x_a.matrix * ops.x_a.matrix;
  const std::vector<Observable> obs{{"N_a", embed_signal(bogoliubov_number(space.n_signal, u), space.n_pump)},
                                    {"p_b", ops.p_b.matrix},
                                    {"x_a", ops.x_a.matrix},
                                    {"x_a2", x2}};
  SmeOptions opts;
  opts.dt = config.dt;
  opts.record_every = config.record_every;
  opts.efficiency = efficiency;
  TrajectoryRecord raw = evolve_sme_homodyne(H, channels, rho, config.duration, opts,
                                             seed_policy(config.seed, static_cast<std::uint64_t>(index)), obs);
  TrajectoryRecord rec;
  rec.times = raw.times;
  rec.current = raw.current;
  rec.seed = raw.seed;
  rec.dt = raw.dt;
  rec.names = {"N_a", "p_b", "x_var_db"};
  rec.series = {raw["N_a"], raw["p_b"], {}};
  const auto& xa = raw["x_a"];
  const auto& xa2 = raw["x_a2"];
  for (std::size_t i = 0; i < xa.size(); ++i)
    rec.series[2].push_back(10.0 * std::log10((xa2[i] - xa[i] * xa[i]) / 0.25));
  return rec;
}

}  // namespace paraqnd
