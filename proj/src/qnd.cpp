#include "paraqnd/qnd.hpp"

#include <cmath>
#include <sstream>

#include "paraqnd/metrics.hpp"

namespace paraqnd {

Complex kraus_amplitude(Index N, double p, double d, double w, double Delta_t) {
  if (!(w > 0.0)) throw DomainError("kraus_amplitude: w must be positive");
  const double n = static_cast<double>(N);
  const double centre = d * (n + 0.5);
  const double mag = std::exp(-(p - centre) * (p - centre) / (4.0 * w * w)) /
                     (std::pow(2.0 * kPi, 0.25) * std::sqrt(w));
  return std::polar(mag, -Delta_t * n);
}

RVector default_outcome_grid(double d, double w, Index n_max) {
  const double lo = -2.0;
  const double hi = d * (static_cast<double>(n_max) + 0.5) + 6.0 * w;
  const double dp = w / 10.0;
  const Index count = static_cast<Index>(std::floor((hi - lo) / dp + 1e-9)) + 1;
  RVector g(count);
  for (Index i = 0; i < count; ++i) g[i] = lo + dp * static_cast<double>(i);
  return g;
}

Index choose_n_max(const RVector& weights, double tol) {
  double cum = 0.0;
  for (Index n = 0; n < weights.size(); ++n) {
    cum += weights[n];
    if (cum > 1.0 - tol) return n;
  }
  return weights.size() - 1;
}

KrausFamily KrausFamily::make(double d, double w, double Delta_t, double u, Index n_max) {
  if (!(w > 0.0)) throw DomainError("KrausFamily: w must be positive");
  if (n_max < 0) throw DomainError("KrausFamily: n_max must be non-negative");
  KrausFamily f;
  f.d = d;
  f.w = w;
  f.Delta_t = Delta_t;
  f.u = u;
  f.n_max = n_max;
  f.grid = default_outcome_grid(d, w, n_max);
  f.dp = w / 10.0;
  return f;
}

CVector KrausFamily::amplitudes(double p) const {
  CVector c(n_max + 1);
  for (Index N = 0; N <= n_max; ++N) c[N] = kraus_amplitude(N, p, d, w, Delta_t);
  return c;
}

namespace {

// Complete orthonormal basis whose leading columns are the |N_a>.
CMatrix number_basis(Index n_signal, double u) { return squeeze_operator(n_signal, u); }

void require_levels(const KrausFamily& family, Index n_signal) {
  if (family.n_max >= n_signal) throw DimensionError("Kraus family exceeds the signal truncation");
}

}  // namespace

CMatrix kraus_operator(double p, const KrausFamily& family, Index n_signal) {
  require_levels(family, n_signal);
  CMatrix V = number_basis(n_signal, family.u).leftCols(family.n_max + 1);
  return V * family.amplitudes(p).asDiagonal() * V.adjoint();
}

CMatrix povm_element(double p, const KrausFamily& family, Index n_signal) {
  CMatrix M = kraus_operator(p, family, n_signal);
  return M.adjoint() * M;
}

double povm_purity(double p, const KrausFamily& family) {
  CVector c = family.amplitudes(p);
  const double s2 = c.squaredNorm();
  if (!(s2 > 0.0)) throw DomainError("povm_purity: all Kraus amplitudes vanish at this outcome");
  return c.cwiseAbs2().cwiseAbs2().sum() / (s2 * s2);
}

double povm_purity_matrix(const CMatrix& F) {
  const double tr = F.trace().real();
  if (!(tr > 0.0)) throw DomainError("povm_purity_matrix: zero POVM element");
  return (F * F).trace().real() / (tr * tr);
}

RVector bogoliubov_weights(const CVector& signal, double u, Index count) {
  CMatrix V = number_basis(signal.size(), u);
  if (count > signal.size()) count = signal.size();
  return (V.leftCols(count).adjoint() * signal).cwiseAbs2();
}

RVector outcome_distribution(const CVector& signal, const KrausFamily& family) {
  require_levels(family, signal.size());
  RVector weights = bogoliubov_weights(signal, family.u, family.n_max + 1);
  RVector out(family.grid.size());
  for (Index i = 0; i < family.grid.size(); ++i)
    out[i] = family.amplitudes(family.grid[i]).cwiseAbs2().dot(weights);
  return out;
}

QNDOutcome apply_measurement(const CVector& signal, double p, const KrausFamily& family) {
  require_levels(family, signal.size());
  CMatrix V = number_basis(signal.size(), family.u).leftCols(family.n_max + 1);
  CVector coeff = V.adjoint() * signal;
  CVector post = family.amplitudes(p).cwiseProduct(coeff);
  const double prob = post.squaredNorm();
  if (!(prob > 1e-300)) throw DomainError("apply_measurement: zero-probability outcome");
  QNDOutcome out;
  out.p = p;
  out.probability_density = prob;
  out.posterior = post.cwiseAbs2() / prob;
  out.state = V * post / std::sqrt(prob);
  out.posterior.maxCoeff(&out.nearest);
  out.fidelity = out.posterior[out.nearest];
  return out;
}

namespace {

void require_unitary(const CMatrix& S) {
  if (S.rows() != S.cols()) throw DomainError("basis_transform_sandwich: S must be square");
  const double err = (S.adjoint() * S - CMatrix::Identity(S.rows(), S.cols())).cwiseAbs().maxCoeff();
  if (err > 1e-8) throw DomainError("basis_transform_sandwich: S is not unitary");
}

}  // namespace

CMatrix basis_transform_sandwich(const CMatrix& op, const CMatrix& S) {
  require_unitary(S);
  if (op.rows() != S.rows()) throw DimensionError("basis_transform_sandwich: dimension mismatch");
  return S.adjoint() * op * S;
}

CVector basis_transform_sandwich(const CVector& state, const CMatrix& S) {
  require_unitary(S);
  if (state.size() != S.rows()) throw DimensionError("basis_transform_sandwich: dimension mismatch");
  return S.adjoint() * state;
}

QNDDataset run_qnd_protocol(const QNDConfig& config) {
  ModeSpace space(config.n_signal, config.n_pump);
  QNDDataset data;
  data.params = SystemParams::from_targets(config.Delta, config.g_tilde);
  data.u = data.params.u();
  const double d = config.g_tilde * config.t;
  const double Delta_t = config.Delta * config.t;

  CVector signal = coherent_state(config.n_signal, config.alpha, config.health_tolerance);
  CVector pump = squeezed_vacuum_pump(config.n_pump, config.w, config.health_tolerance);
  data.signal_input = signal;
  auto initial = TwoModeState::product(signal, pump);
  auto H = build_hamiltonian(config.hamiltonian, data.params, space);
  CVector evolved = evolve_unitary(H.matrix, initial.amplitudes(), config.t);
  TwoModeState final_state(space, evolved);

  data.signal_initial = signal * signal.adjoint();
  data.pump_initial = pump * pump.adjoint();
  data.signal_final = trace_out_pump(final_state);
  data.pump_final = trace_out_signal(final_state);
  data.pump_top_population = data.pump_final.diagonal().real().tail(2).sum();
  data.signal_top_population = data.signal_final.diagonal().real().tail(2).sum();
  if (data.pump_top_population > config.evolved_tolerance || data.signal_top_population > config.evolved_tolerance) {
    std::ostringstream msg;
    msg << "run_qnd_protocol: evolved state reaches the truncation edge (pump top population "
        << data.pump_top_population << ", signal " << data.signal_top_population << "); increase n_pump/n_signal";
    throw TruncationError(msg.str());
  }

  RVector weights = bogoliubov_weights(signal, data.u, config.n_signal);
  const Index n_max = std::min(choose_n_max(weights, 1e-8), config.n_signal - 1);
  data.family = KrausFamily::make(d, config.w, Delta_t, data.u, n_max);
  data.grid = data.family.grid;
  data.dp = data.family.dp;

  CMatrix psi = final_state.as_matrix();
  const Index ng = data.grid.size();
  data.probability.resize(ng);
  data.conditional.resize(ng);
  static const Complex kPhase[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
  for (Index i = 0; i < ng; ++i) {
    RVector h = hermite_functions(config.n_pump, data.grid[i]);
    CVector bra(config.n_pump);
    for (Index k = 0; k < config.n_pump; ++k) bra[k] = kPhase[k % 4] * h[k];
    data.conditional[i] = psi * bra;
    data.probability[i] = data.conditional[i].squaredNorm();
  }
  data.kraus_probability = outcome_distribution(signal, data.family);

  CMatrix V = number_basis(config.n_signal, data.u);
  for (Index N = 0; N < config.bins; ++N) {
    QNDBin bin;
    bin.N = N;
    bin.p_lo = d * static_cast<double>(N);
    bin.p_hi = d * static_cast<double>(N + 1);
    bin.state = CMatrix::Zero(config.n_signal, config.n_signal);
    for (Index i = 0; i < ng; ++i)
      if (data.grid[i] >= bin.p_lo - 1e-12 && data.grid[i] < bin.p_hi - 1e-12)
        bin.state += data.conditional[i] * data.conditional[i].adjoint() * data.dp;
    bin.probability = bin.state.trace().real();
    if (bin.probability > 0.0) {
      bin.state /= bin.probability;
      bin.fidelity = fidelity(bin.state, CVector(V.col(N)));
    }
    data.bins.push_back(std::move(bin));
  }

  if (config.wigner_points > 0) {
    const double e = config.wigner_extent;
    RVector xs = linspace(-e, e, config.wigner_points);
    RVector pump_ps = linspace(-2.0, d * (config.bins + 1.5), config.wigner_points);
    data.wigner.emplace_back("signal_initial", wigner(data.signal_initial, xs, xs));
    data.wigner.emplace_back("pump_initial", wigner(data.pump_initial, xs, pump_ps));
    data.wigner.emplace_back("signal_final", wigner(data.signal_final, xs, xs));
    data.wigner.emplace_back("pump_final", wigner(data.pump_final, xs, pump_ps));
    for (const auto& bin : data.bins)
      data.wigner.emplace_back("signal_conditional_N" + std::to_string(bin.N), wigner(bin.state, xs, xs));
  }
  return data;
}

OracleComparison compare_with_kraus(const QNDDataset& data, Index count, double min_density, double p_lo,
                                    double p_hi) {
  OracleComparison out;
  std::vector<Index> eligible;
  for (Index i = 0; i < data.grid.size(); ++i)
    if (data.probability[i] > min_density && data.grid[i] >= p_lo && data.grid[i] <= p_hi) eligible.push_back(i);
  if (eligible.empty()) return out;
  const Index n = data.signal_input.size();
  const Index take = std::min<Index>(count, static_cast<Index>(eligible.size()));
  for (Index k = 0; k < take; ++k) {
    const Index pick = take == 1 ? 0 : k * (static_cast<Index>(eligible.size()) - 1) / (take - 1);
    const Index i = eligible[pick];
    CVector predicted = kraus_operator(data.grid[i], data.family, n) * data.signal_input;
    predicted.normalize();
    CVector simulated = data.conditional[i].normalized();
    const double f = fidelity(predicted, simulated);
    out.outcomes.push_back(data.grid[i]);
    out.fidelities.push_back(f);
    out.min_fidelity = std::min(out.min_fidelity, f);
  }
  return out;
}

namespace {

double completeness(const KrausFamily& f, double dp, Index n_max) {
  // Range reaches 10 widths past the outer peaks so the tails are negligible
  // and the error measures the dp discretization alone.
  RVector sums = RVector::Zero(n_max + 1);
  const double lo = std::min(f.grid[0], 0.5 * f.d - 10.0 * f.w);
  const double hi = std::max(f.grid[f.grid.size() - 1], f.d * (static_cast<double>(n_max) + 0.5) + 10.0 * f.w);
  const auto count = static_cast<Index>(std::ceil((hi - lo) / dp));
  for (Index i = 0; i <= count; ++i) sums += f.amplitudes(lo + dp * static_cast<double>(i)).cwiseAbs2() * dp;
  return (sums.array() - 1.0).matrix().norm();
}

}  // namespace

std::vector<PovmWidthScan> run_povm_scan(const PovmConfig& config) {
  if (!(config.d > 0.0)) throw DomainError("run_povm_scan: d must be positive");
  if (config.n_max < 1) throw DomainError("run_povm_scan: n_max must be at least 1");
  std::vector<PovmWidthScan> out;
  for (double w : config.widths) {
    if (!(w > 0.0)) throw DomainError("run_povm_scan: widths must be positive");
    const KrausFamily f = KrausFamily::make(config.d, w, 0.0, 0.0, config.n_max);
    PovmWidthScan s;
    s.w = w;
    s.grid = f.grid;
    s.dp = f.dp;
    s.purity.resize(f.grid.size());
    for (Index i = 0; i < f.grid.size(); ++i) {
      s.purity[i] = povm_purity(f.grid[i], f);
      const double m = povm_purity_matrix(povm_element(f.grid[i], f, config.n_max + 1));
      s.formula_vs_matrix = std::max(s.formula_vs_matrix, std::abs(s.purity[i] - m));
    }
    s.completeness_error = completeness(f, f.dp, config.n_max);
    s.completeness_error_half = completeness(f, f.dp / 2.0, config.n_max);
    s.peak_purity.resize(config.n_max + 1);
    for (Index N = 0; N <= config.n_max; ++N) s.peak_purity[N] = povm_purity(config.d * (N + 0.5), f);
    s.midpoint_purity.resize(config.n_max);
    for (Index N = 0; N < config.n_max; ++N) s.midpoint_purity[N] = povm_purity(config.d * (N + 1.0), f);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace paraqnd
