#include "paraqnd/gkp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/FFT>

#include "paraqnd/fock.hpp"
#include "paraqnd/metrics.hpp"
#include "paraqnd/rng.hpp"

namespace paraqnd {

namespace {

const double kSqrt2Pi = std::sqrt(2.0 * kPi);

double positive_mod(double v, double m) {
  double r = std::fmod(v, m);
  if (r < 0.0) r += m;
  if (r >= m) r -= m;
  return r;
}

Complex grid_overlap(const GridState& a, const GridState& b) {
  if (a.x.size() != b.x.size()) throw DimensionError("grid states on different grids");
  return a.psi.dot(b.psi) * a.dx();
}

double grid_fidelity(const GridState& a, const GridState& b) {
  const Complex o = grid_overlap(a, b);
  return std::norm(o) / (a.norm() * a.norm() * b.norm() * b.norm());
}

// Angular wavenumbers matching Eigen's FFT ordering.
RVector fft_wavenumbers(Index n, double dx) {
  RVector k(n);
  for (Index m = 0; m < n; ++m) {
    const Index s = m < (n + 1) / 2 ? m : m - n;
    k[m] = 2.0 * kPi * static_cast<double>(s) / (static_cast<double>(n) * dx);
  }
  return k;
}

std::vector<Complex> to_std(const CVector& v) { return {v.data(), v.data() + v.size()}; }

double mean_p(const GridState& s) {
  Eigen::FFT<double> fft;
  std::vector<Complex> spectrum;
  fft.fwd(spectrum, to_std(s.psi));
  const RVector k = fft_wavenumbers(s.x.size(), s.dx());
  double num = 0.0, den = 0.0;
  for (Index m = 0; m < k.size(); ++m) {
    const double w = std::norm(spectrum[static_cast<std::size_t>(m)]);
    num += w * k[m] / 2.0;
    den += w;
  }
  return num / den;
}

void check_uniform(const RVector& grid) {
  if (grid.size() < 8) throw GridError("x grid too small");
}

// Evenly strided pump Wigner panel around <x> = x_center, <p>.
WignerGrid pump_panel(const GridState& s, double x_extent, double p_center, double p_extent,
                      Index points) {
  const double dx = s.dx();
  const Index stride = std::max<Index>(1, static_cast<Index>(std::lround(2.0 * x_extent / (points * dx))));
  const RVector ps = linspace(p_center - p_extent, p_center + p_extent, points);
  return wigner_from_wavefunction(s.x, s.psi, ps, -x_extent, x_extent, stride);
}

}  // namespace

GeneralDyneOutcome GeneralDyneOutcome::make(double epsilon, double phi, double g_tilde_t, double Delta_t) {
  if (!(g_tilde_t > 0.0)) throw DomainError("GeneralDyneOutcome: g~t must be positive");
  GeneralDyneOutcome o;
  o.epsilon = epsilon;
  o.phi = phi;
  o.mu = kPi / g_tilde_t;
  o.x_phi = positive_mod((phi + Delta_t) / (2.0 * g_tilde_t), o.mu);
  return o;
}

GKPTarget GKPTarget::make(double w, double A0, double x_phi) {
  if (!(w > 0.0) || !(A0 > 0.0)) throw DomainError("GKPTarget: w and A0 must be positive");
  GKPTarget t;
  t.w = w;
  t.A0 = A0;
  t.kappa = 1.0 / (2.0 * std::sqrt(kPi) * A0);
  t.spacing = kSqrt2Pi;
  t.x_phi = x_phi;
  return t;
}

bool GKPTarget::symmetric(double tol) const { return std::abs(w - kappa) <= tol; }

double symmetric_meter_amplitude(double w) {
  if (!(w > 0.0)) throw DomainError("symmetric_meter_amplitude: w must be positive");
  return 1.0 / (2.0 * std::sqrt(kPi) * w);
}

double GridState::norm() const { return std::sqrt(psi.squaredNorm() * dx()); }

void GridState::normalize() {
  const double n = norm();
  if (!(n > 0.0)) throw DomainError("GridState: zero norm");
  psi /= n;
}

double GridState::mean_x() const {
  return (psi.cwiseAbs2().array() * x.array()).sum() * dx() / (norm() * norm());
}

double GridState::variance_x() const {
  const double m = mean_x();
  return (psi.cwiseAbs2().array() * (x.array() - m).square()).sum() * dx() / (norm() * norm());
}

RVector periodic_grid(double extent, double dx) {
  if (!(extent > 0.0) || !(dx > 0.0)) throw GridError("periodic_grid: extent and dx must be positive");
  const auto n = static_cast<Index>(std::lround(2.0 * extent / dx));
  RVector g(n);
  for (Index k = 0; k < n; ++k) g[k] = -extent + static_cast<double>(k) * dx;
  return g;
}

Complex generaldyne_c_amplitude(double x, double epsilon, double phi, double A0, double g_tilde_t,
                                double Delta_t) {
  const double B = A0 + epsilon;
  if (B < 0.0) throw DomainError("generaldyne_c_amplitude: A0 + eps must be non-negative");
  const double theta = 2.0 * g_tilde_t * x - Delta_t - phi;
  return std::exp(-0.5 * (A0 * A0 + B * B - 2.0 * A0 * B * std::exp(kI * theta)));
}

Complex generaldyne_c_approx(double x, const GeneralDyneOutcome& outcome, double A0, double g_tilde_t,
                             int n_terms) {
  Complex c = 0.0;
  for (int n = -n_terms; n <= n_terms; ++n) {
    const double d = x - n * outcome.mu - outcome.x_phi;
    c += std::exp(-2.0 * A0 * A0 * g_tilde_t * g_tilde_t * d * d) *
         std::exp(kI * (2.0 * A0 * A0 * g_tilde_t * d));
  }
  return c;
}

CVector generaldyne_kraus(double epsilon, double phi, double A0, double g_tilde_t, double Delta_t,
                          const RVector& grid) {
  const double pref = std::sqrt((A0 + epsilon) / kPi);
  CVector d(grid.size());
  for (Index i = 0; i < grid.size(); ++i)
    d[i] = pref * generaldyne_c_amplitude(grid[i], epsilon, phi, A0, g_tilde_t, Delta_t);
  return d;
}

GridState apply_diagonal(const CVector& diagonal, const GridState& state) {
  if (diagonal.size() != state.psi.size()) throw DimensionError("apply_diagonal: size mismatch");
  return {state.x, diagonal.cwiseProduct(state.psi)};
}

double generaldyne_density(const GridState& pump, double epsilon, double phi, double A0, double g_tilde_t,
                           double Delta_t) {
  const double B = A0 + epsilon;
  if (B < 0.0) return 0.0;
  double acc = 0.0;
  for (Index i = 0; i < pump.x.size(); ++i) {
    const double theta = 2.0 * g_tilde_t * pump.x[i] - Delta_t - phi;
    // |C|^2 = exp(-(A0^2 + B^2 - 2 A0 B cos theta))
    acc += std::exp(-(A0 * A0 + B * B - 2.0 * A0 * B * std::cos(theta))) * std::norm(pump.psi[i]);
  }
  return B / kPi * acc * pump.dx();
}

GridState p_squeezed_wavefunction(double w, const RVector& grid) {
  if (!(w > 0.0)) throw DomainError("p_squeezed_wavefunction: w must be positive");
  check_uniform(grid);
  GridState s{grid, CVector(grid.size())};
  for (Index i = 0; i < grid.size(); ++i) s.psi[i] = std::exp(-4.0 * w * w * grid[i] * grid[i]);
  s.normalize();
  return s;
}

GridState x_squeezed_wavefunction(double kappa, const RVector& grid, double x0) {
  if (!(kappa > 0.0)) throw DomainError("x_squeezed_wavefunction: kappa must be positive");
  check_uniform(grid);
  GridState s{grid, CVector(grid.size())};
  for (Index i = 0; i < grid.size(); ++i) {
    const double d = grid[i] - x0;
    s.psi[i] = std::exp(-d * d / (4.0 * kappa * kappa));
  }
  s.normalize();
  return s;
}

namespace {

// Tooth indices n with envelope weight e^{-8 w^2 (n s + x_phi)^2} >= tol relative
// to the heaviest tooth.
std::vector<int> comb_indices(const GKPTarget& t, double tol) {
  const double c = -t.x_phi / t.spacing;
  const int centre = static_cast<int>(std::lround(c));
  auto log_w = [&](int n) {
    const double d = n * t.spacing + t.x_phi;
    return -8.0 * t.w * t.w * d * d;
  };
  const double top = log_w(centre);
  std::vector<int> idx;
  for (int n = centre;; --n) {
    if (log_w(n) - top < std::log(tol)) break;
    idx.push_back(n);
  }
  for (int n = centre + 1;; ++n) {
    if (log_w(n) - top < std::log(tol)) break;
    idx.push_back(n);
  }
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

int gkp_comb_terms(const GKPTarget& target, double comb_tol) {
  return static_cast<int>(comb_indices(target, comb_tol).size());
}

GridState analytic_gkp_wavefunction(const GKPTarget& target, const RVector& grid, double comb_tol) {
  check_uniform(grid);
  const std::vector<int> idx = comb_indices(target, comb_tol);
  GridState s{grid, CVector::Zero(grid.size())};
  const double k2 = 4.0 * target.kappa * target.kappa;
  for (int n : idx) {
    const double xn = n * target.spacing;
    const double env = std::exp(-4.0 * target.w * target.w * (xn + target.x_phi) * (xn + target.x_phi));
    for (Index i = 0; i < grid.size(); ++i) {
      const double d = grid[i] - xn;
      s.psi[i] += env * std::exp(-d * d / k2);
    }
  }
  s.normalize();
  return s;
}

CVector grid_to_fock(const GridState& state, Index n_levels, double tol) {
  if (n_levels < 2) throw DimensionError("grid_to_fock: need at least 2 levels");
  CVector c = CVector::Zero(n_levels);
  const double dx = state.dx();
  for (Index i = 0; i < state.x.size(); ++i) {
    if (state.psi[i] == Complex(0.0)) continue;
    const RVector h = hermite_functions(n_levels, state.x[i]);
    c += h.cast<Complex>() * (state.psi[i] * dx);
  }
  const double total = state.norm() * state.norm();
  const double captured = c.squaredNorm() / total;
  if (captured < 1.0 - tol)
    throw TruncationError("grid_to_fock: " + std::to_string(n_levels) + " levels capture only " +
                          std::to_string(captured) + " of the norm; increase the truncation");
  c /= std::sqrt(total);
  check_truncation(c, tol, "grid_to_fock");
  return c;
}

GridState fock_to_grid(const CVector& fock, const RVector& grid) {
  GridState s{grid, CVector(grid.size())};
  for (Index i = 0; i < grid.size(); ++i) {
    const RVector h = hermite_functions(fock.size(), grid[i]);
    s.psi[i] = h.cast<Complex>().dot(fock);
  }
  return s;
}

CVector analytic_gkp_state(double w, double kappa, double x_phi, Index n_pump, double tol) {
  // kappa = 1/(2 sqrt(pi) A0)
  const GKPTarget t = GKPTarget::make(w, 1.0 / (2.0 * std::sqrt(kPi) * kappa), x_phi);
  const double extent = std::max(25.0, 2.0 * std::sqrt(static_cast<double>(n_pump)));
  const double dx = std::min(0.01, kappa / 20.0);
  return grid_to_fock(analytic_gkp_wavefunction(t, periodic_grid(extent, dx)), n_pump, tol);
}

GridState displace(const GridState& state, Complex alpha) {
  const double x0 = alpha.real(), p0 = alpha.imag();
  GridState out = state;
  if (x0 != 0.0) {
    const double dx = state.dx();
    const Index n = state.x.size();
    const double band = std::abs(x0) + 1.0;
    double edge = 0.0;
    for (Index i = 0; i < n; ++i)
      if (state.x[i] < state.x[0] + band || state.x[i] > state.x[n - 1] - band) edge += std::norm(state.psi[i]);
    const double total = state.psi.squaredNorm();
    if (edge > 1e-6 * total)
      throw GridError("displace: state not negligible within " + std::to_string(band) +
                      " of the grid edge; widen the x grid");
    Eigen::FFT<double> fft;
    std::vector<Complex> spectrum, back;
    fft.fwd(spectrum, to_std(state.psi));
    const RVector k = fft_wavenumbers(n, dx);
    for (Index m = 0; m < n; ++m) spectrum[static_cast<std::size_t>(m)] *= std::exp(-kI * (k[m] * x0));
    fft.inv(back, spectrum);
    for (Index i = 0; i < n; ++i) out.psi[i] = back[static_cast<std::size_t>(i)];
  }
  if (p0 != 0.0) {
    const Complex global = std::exp(-kI * (p0 * x0));
    for (Index i = 0; i < out.psi.size(); ++i) out.psi[i] *= global * std::exp(kI * (2.0 * p0 * out.x[i]));
  }
  return out;
}

Complex displacement_expectation(const GridState& state, Complex alpha) {
  const GridState d = displace(state, alpha);
  return grid_overlap(state, d) / (state.norm() * state.norm());
}

GridState feedforward_displacement(const GridState& state, double x_phi, double A0, double zero_point) {
  GridState s = displace(state, Complex(0.0, -std::sqrt(kPi / 2.0) * std::floor(A0 * A0)));
  s = displace(s, Complex(-x_phi, 0.0));
  if (zero_point != 0.0) s = displace(s, Complex(0.0, -zero_point));
  return s;
}

CVector momentum_amplitudes(const GridState& state, const RVector& ps) {
  const double dx = state.dx();
  const double pref = dx / std::sqrt(kPi);
  CVector out(ps.size());
  for (Index j = 0; j < ps.size(); ++j) {
    // Phasor recurrence over the uniform grid.
    const Complex step = std::exp(-2.0 * kI * ps[j] * dx);
    Complex ph = std::exp(-2.0 * kI * ps[j] * state.x[0]);
    Complex acc = 0.0;
    for (Index i = 0; i < state.x.size(); ++i) {
      acc += state.psi[i] * ph;
      ph *= step;
    }
    out[j] = pref * acc;
  }
  return out;
}

ToothFit fit_largest_tooth(const RVector& q, const RVector& density) {
  if (q.size() != density.size() || q.size() < 3) throw DimensionError("fit_largest_tooth: size mismatch");
  Index imax = 0;
  density.maxCoeff(&imax);
  const double cut = density[imax] * std::exp(-1.5);
  Index lo = imax, hi = imax;
  while (lo > 0 && density[lo - 1] > cut) --lo;
  while (hi + 1 < q.size() && density[hi + 1] > cut) ++hi;
  const Index m = hi - lo + 1;
  if (m < 3) throw GridError("fit_largest_tooth: fewer than 3 points above the fit threshold; refine the grid");
  const double q0 = q[imax];
  RMatrix X(m, 3);
  RVector y(m);
  for (Index i = 0; i < m; ++i) {
    const double d = q[lo + i] - q0;
    X(i, 0) = 1.0;
    X(i, 1) = d;
    X(i, 2) = d * d;
    y[i] = std::log(density[lo + i]);
  }
  const RVector c = X.colPivHouseholderQr().solve(y);
  if (!(c[2] < 0.0)) throw GridError("fit_largest_tooth: marginal is not peaked");
  ToothFit f;
  f.width = std::sqrt(-1.0 / (2.0 * c[2]));
  f.center = q0 - c[1] / (2.0 * c[2]);
  f.points = m;
  return f;
}

double tooth_spacing(const GridState& state, double rel_height) {
  const RVector P = state.psi.cwiseAbs2();
  const double cut = rel_height * P.maxCoeff();
  std::vector<double> peaks;
  for (Index i = 1; i + 1 < P.size(); ++i)
    if (P[i] > cut && P[i] >= P[i - 1] && P[i] > P[i + 1]) {
      // parabolic refinement of the sampled maximum
      const double den = P[i - 1] - 2.0 * P[i] + P[i + 1];
      const double off = den != 0.0 ? 0.5 * (P[i - 1] - P[i + 1]) / den : 0.0;
      peaks.push_back(state.x[i] + off * state.dx());
    }
  if (peaks.size() < 2) throw GridError("tooth_spacing: fewer than two teeth above threshold");
  return (peaks.back() - peaks.front()) / static_cast<double>(peaks.size() - 1);
}

SqueezingReport effective_squeezing_db(const GridState& state, double p_extent, double p_step) {
  SqueezingReport r;
  // |<exp(-2 i a p)>| = exp(-2 a^2 Var), a = sqrt(2 pi)  ->  Var = -ln|.|/(4 pi)
  auto modular = [](double mag) -> std::optional<double> {
    if (!(mag > 1e-12)) return std::nullopt;
    const double var = -std::log(std::min(mag, 1.0)) / (4.0 * kPi);
    if (!(var > 0.0)) return std::nullopt;
    return squeezing_db(std::sqrt(var));
  };
  r.stabilizer_p = std::abs(displacement_expectation(state, Complex(kSqrt2Pi, 0.0)));
  r.stabilizer_x = std::abs(displacement_expectation(state, Complex(0.0, kSqrt2Pi)));
  r.modular_p_db = modular(r.stabilizer_p);
  r.modular_x_db = modular(r.stabilizer_x);

  const double n2 = state.norm() * state.norm();
  r.tooth_x = fit_largest_tooth(state.x, state.psi.cwiseAbs2() / n2);
  r.tooth_x_db = squeezing_db(r.tooth_x.width);

  const double pc = mean_p(state);
  const Index np = static_cast<Index>(std::lround(2.0 * p_extent / p_step)) + 1;
  const RVector ps = linspace(pc - p_extent, pc + p_extent, np);
  const RVector pdens = momentum_amplitudes(state, ps).cwiseAbs2() / n2;
  r.tooth_p = fit_largest_tooth(ps, pdens);
  r.tooth_p_db = squeezing_db(r.tooth_p.width);
  return r;
}

double GKPConfig::g_tilde_t() const {
  if (t > 0.0) return g_tilde * t;
  return std::sqrt(kPi / 2.0);
}

double GKPConfig::width() const { return w > 0.0 ? w : width_from_db(15.0); }

double GKPConfig::meter_amplitude() const { return A0 > 0.0 ? A0 : symmetric_meter_amplitude(width()); }

namespace {

struct Setup {
  SystemParams params;
  double u, gt, t, Dt, A0, w;
  GeneralDyneOutcome outcome;
  RVector grid;
  GridState pump;
};

Setup setup(const GKPConfig& c) {
  if (!(c.g_tilde > 0.0)) throw DomainError("gkp: g~ must be positive");
  Setup s;
  s.params = SystemParams::from_targets(c.Delta, c.g_tilde);
  s.u = s.params.u();
  s.gt = c.g_tilde_t();
  s.t = s.gt / c.g_tilde;
  s.Dt = c.Delta * s.t;
  s.A0 = c.meter_amplitude();
  s.w = c.width();
  if (s.A0 + c.epsilon < 0.0) throw DomainError("gkp: A0 + eps must be non-negative");
  s.outcome = GeneralDyneOutcome::make(c.epsilon, c.phi, s.gt, s.Dt);
  s.grid = periodic_grid(c.grid_extent, c.grid_dx);
  s.pump = p_squeezed_wavefunction(s.w, s.grid);
  return s;
}

}  // namespace

GKPReport run_gkp_protocol(const GKPConfig& c) {
  const Setup s = setup(c);
  GKPReport r;
  r.params = s.params;
  r.u = s.u;
  r.outcome = s.outcome;
  r.target = GKPTarget::make(s.w, s.A0, s.outcome.x_phi);
  r.pump_initial = s.pump;

  // Signal side: N_a eigenbasis of the truncated A^dag A.
  const Index n = c.n_signal;
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(CMatrix(bogoliubov_number(n, s.u)));
  const RVector lam = eig.eigenvalues();
  const CMatrix& V = eig.eigenvectors();
  r.signal_initial = bogoliubov_coherent_state(n, s.u, s.A0, c.health_tolerance);
  const CVector meter = bogoliubov_coherent_state(n, s.u, std::polar(s.A0 + c.epsilon, c.phi), c.health_tolerance);
  r.signal_top_population = std::max(top_population(r.signal_initial), top_population(meter));
  const CVector a = V.adjoint() * r.signal_initial;
  const CVector m = V.adjoint() * meter;
  const CVector ma = m.conjugate().cwiseProduct(a);

  // C(x) = sum_k conj(m_k) a_k exp(-i t (Delta L_k - 2 g~ (L_k + 1/2) x))
  const Index nx = s.grid.size();
  CVector C(nx);
  double cmax = 0.0, resid = 0.0;
  for (Index i = 0; i < nx; ++i) {
    const double x = s.grid[i];
    Complex acc = 0.0;
    for (Index k = 0; k < n; ++k)
      acc += ma[k] * std::exp(-kI * (s.t * (c.Delta * lam[k] - 2.0 * c.g_tilde * (lam[k] + 0.5) * x)));
    C[i] = acc;
    const Complex formula =
        generaldyne_c_amplitude(x, c.epsilon, c.phi, s.A0, s.gt, s.Dt) * std::exp(kI * (s.gt * x));
    cmax = std::max(cmax, std::abs(formula));
    resid = std::max(resid, std::abs(acc - formula));
  }
  r.amplitude_residual = resid / cmax;

  GridState post = apply_diagonal(std::sqrt((s.A0 + c.epsilon) / kPi) * C, s.pump);
  r.outcome_density = post.norm() * post.norm();
  if (!(r.outcome_density > 0.0)) throw DomainError("run_gkp_protocol: zero-probability outcome");
  post.normalize();
  r.post_measurement = post;

  r.final_state = feedforward_displacement(post, s.outcome.x_phi, s.A0, c.zero_point_correction ? s.gt / 2.0 : 0.0);
  r.analytic = analytic_gkp_wavefunction(r.target, s.grid);
  r.fidelity = grid_fidelity(r.final_state, r.analytic);
  r.squeezing = effective_squeezing_db(r.final_state);

  // Unconditional reduced signal state, sampled every stride-th pump x.
  const Index stride = std::max<Index>(1, c.signal_wigner_stride);
  r.signal_final = CMatrix::Zero(n, n);
  for (Index i = 0; i < nx; i += stride) {
    const double x = s.grid[i];
    CVector phase(n);
    for (Index k = 0; k < n; ++k)
      phase[k] = a[k] * std::exp(-kI * (s.t * (c.Delta * lam[k] - 2.0 * c.g_tilde * (lam[k] + 0.5) * x)));
    const CVector psi = V * phase;
    r.signal_final += (std::norm(s.pump.psi[i]) * s.pump.dx() * stride) * psi * psi.adjoint();
  }
  r.signal_final /= r.signal_final.trace().real();

  if (c.wigner_points > 0) {
    const Index P = c.wigner_points;
    const double se = s.A0 * std::exp(s.u) + 2.0;
    const RVector sx = linspace(-se, se, P);
    r.wigner.emplace_back("signal_initial", wigner(r.signal_initial, sx, sx));
    r.wigner.emplace_back("signal_final", wigner(r.signal_final, sx, sx));
    const double xe = 2.0 * c.wigner_extent;
    r.wigner.emplace_back("pump_initial", pump_panel(s.pump, xe, 0.0, c.wigner_extent, P));
    r.wigner.emplace_back("pump_conditional", pump_panel(post, xe, mean_p(post), c.wigner_extent, P));
    r.wigner.emplace_back("gkp", pump_panel(r.final_state, xe, mean_p(r.final_state), c.wigner_extent, P));
  }
  return r;
}

GridState run_gkp_approximate(const GKPConfig& c) {
  const Setup s = setup(c);
  GridState post = s.pump;
  for (Index i = 0; i < post.x.size(); ++i)
    post.psi[i] *= generaldyne_c_approx(post.x[i], s.outcome, s.A0, s.gt);
  post.normalize();
  return feedforward_displacement(post, s.outcome.x_phi, s.A0, 0.0);
}

std::vector<OutcomeSample> sample_generaldyne_outcomes(const GKPConfig& c, Index count, std::uint64_t seed) {
  const Setup s = setup(c);
  const double eps_lo = -s.A0, eps_hi = 6.0;
  auto density = [&](double e, double p) { return generaldyne_density(s.pump, e, p, s.A0, s.gt, s.Dt); };
  double fmax = 0.0;
  for (double e = eps_lo; e <= eps_hi; e += 0.05)
    for (int j = 0; j < 64; ++j) fmax = std::max(fmax, density(e, 2.0 * kPi * j / 64.0));
  fmax *= 1.5;

  std::vector<OutcomeSample> out(static_cast<std::size_t>(count));
  for (Index k = 0; k < count; ++k) {
    auto eng = make_engine(seed_policy(seed, static_cast<std::uint64_t>(k)));
    std::uniform_real_distribution<double> ue(eps_lo, eps_hi), up(0.0, 2.0 * kPi), uy(0.0, fmax);
    for (;;) {
      const double e = ue(eng), p = up(eng);
      const double f = density(e, p);
      if (f > fmax) throw GridError("sample_generaldyne_outcomes: density bound violated");
      if (uy(eng) < f) {
        out[static_cast<std::size_t>(k)] = {e, p};
        break;
      }
    }
  }
  return out;
}

}  // namespace paraqnd
