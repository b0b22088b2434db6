#include "paraqnd/evolution.hpp"

#include <cmath>
#include <sstream>

#include "paraqnd/hamiltonians.hpp"
#include "paraqnd/linalg.hpp"
#include "paraqnd/metrics.hpp"

namespace paraqnd {

namespace {

void require_hermitian(const SparseMatrix& H) {
  if (H.rows() != H.cols()) throw DimensionError("Hamiltonian must be square");
  if (hermiticity_residual(H) > 1e-10) throw DomainError("Hamiltonian is not Hermitian");
}

void hermitize(CMatrix& rho) {
  const Index n = rho.rows();
  for (Index j = 0; j < n; ++j) {
    rho(j, j) = Complex(rho(j, j).real(), 0.0);
    for (Index i = j + 1; i < n; ++i) {
      const Complex v = 0.5 * (rho(i, j) + std::conj(rho(j, i)));
      rho(i, j) = v;
      rho(j, i) = std::conj(v);
    }
  }
}

// Row-major sparse times dense is markedly faster in Eigen.
using RowSparse = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

struct PreparedChannel {
  RowSparse op;
  RowSparse decay;  // L^dag L
};

std::vector<PreparedChannel> prepare(const std::vector<LindbladChannel>& channels) {
  std::vector<PreparedChannel> out;
  for (const auto& c : channels) {
    SparseMatrix op = c.op;
    op.prune(Complex(0.0), 0.0);
    if (op.nonZeros() == 0) continue;
    PreparedChannel p;
    p.op = op;
    p.decay = SparseMatrix(SparseMatrix(op.adjoint()) * op);
    out.push_back(std::move(p));
  }
  return out;
}

// Large dense temporaries go through mmap on every allocation, so the stepper
// reuses its buffers.
struct Workspace {
  CMatrix k1, k2, k3, k4, stage, a, b;
  void resize(Index n) {
    for (CMatrix* m : {&k1, &k2, &k3, &k4, &stage, &a, &b})
      if (m->rows() != n) m->resize(n, n);
  }
};

// Uses rho H = (H rho)^dag and L rho L^dag = L (L rho)^dag for Hermitian rho.
void rhs_into(const RowSparse& H, const std::vector<PreparedChannel>& channels, const CMatrix& rho, CMatrix& out,
              Workspace& ws) {
  const Complex I(0.0, 1.0);
  ws.a.noalias() = H * rho;
  out = -I * ws.a;
  out += I * ws.a.adjoint();
  for (const auto& c : channels) {
    ws.a.noalias() = c.op * rho;
    ws.b = ws.a.adjoint();
    out.noalias() += c.op * ws.b;
    ws.a.noalias() = c.decay * rho;
    out -= 0.5 * ws.a;
    out -= 0.5 * ws.a.adjoint();
  }
}

CMatrix rhs(const RowSparse& H, const std::vector<PreparedChannel>& channels, const CMatrix& rho) {
  Workspace ws;
  ws.resize(rho.rows());
  CMatrix out(rho.rows(), rho.cols());
  rhs_into(H, channels, rho, out, ws);
  return out;
}

// rho <- one RK4 step, hermitized.
void rk4_inplace(const RowSparse& H, const std::vector<PreparedChannel>& channels, CMatrix& rho, double dt,
                 Workspace& ws) {
  ws.resize(rho.rows());
  rhs_into(H, channels, rho, ws.k1, ws);
  ws.stage = rho + (0.5 * dt) * ws.k1;
  rhs_into(H, channels, ws.stage, ws.k2, ws);
  ws.stage = rho + (0.5 * dt) * ws.k2;
  rhs_into(H, channels, ws.stage, ws.k3, ws);
  ws.stage = rho + dt * ws.k3;
  rhs_into(H, channels, ws.stage, ws.k4, ws);
  rho += (dt / 6.0) * (ws.k1 + 2.0 * ws.k2 + 2.0 * ws.k3 + ws.k4);
  hermitize(rho);
}

CMatrix rk4_step(const RowSparse& H, const std::vector<PreparedChannel>& channels, const CMatrix& rho,
                 double dt) {
  Workspace ws;
  CMatrix next = rho;
  rk4_inplace(H, channels, next, dt, ws);
  return next;
}

int step_count(double t, double dt) {
  if (!(dt > 0.0)) throw StepSizeError("time step must be positive");
  if (t < 0.0) throw DomainError("evolution time must be non-negative");
  return std::max(0, static_cast<int>(std::llround(std::ceil(t / dt - 1e-9))));
}

}  // namespace

CVector evolve_unitary(const SparseMatrix& H, const CVector& psi, double t, double tol) {
  require_hermitian(H);
  return propagate_hermitian(H, psi, t, tol);
}

TwoModeState evolve_unitary(const ModeOperator& H, const TwoModeState& psi, double t) {
  return TwoModeState(psi.space(), evolve_unitary(H.matrix, psi.amplitudes(), t));
}

CMatrix lindblad_rhs(const SparseMatrix& H, const std::vector<LindbladChannel>& channels, const CMatrix& rho) {
  return rhs(RowSparse(H), prepare(channels), rho);
}

CMatrix evolve_master(const SparseMatrix& H, const std::vector<LindbladChannel>& channels, const CMatrix& rho,
                      double t, const MasterOptions& options) {
  require_hermitian(H);
  const int steps = step_count(t, options.dt);
  if (steps == 0) return rho;
  const double dt = t / steps;
  auto prepared = prepare(channels);
  const RowSparse Hr = H;

  CMatrix state = rho;
  hermitize(state);
  {
    CMatrix full = rk4_step(Hr, prepared, state, dt);
    CMatrix half = rk4_step(Hr, prepared, rk4_step(Hr, prepared, state, 0.5 * dt), 0.5 * dt);
    const double change = (full - half).norm() / std::max(full.norm(), 1e-300);
    if (change > options.halving_tol) {
      std::ostringstream msg;
      msg << "evolve_master: step-halving check failed (relative change " << change << " at dt=" << dt << ")";
      throw StepSizeError(msg.str());
    }
  }
  Workspace ws;
  for (int s = 0; s < steps; ++s) rk4_inplace(Hr, prepared, state, dt, ws);

  if (options.check_positivity) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(state, Eigen::EigenvaluesOnly);
    const double lowest = es.eigenvalues().minCoeff();
    if (lowest < -options.positivity_tol) {
      std::ostringstream msg;
      msg << "evolve_master: negative eigenvalue " << lowest << "; reduce the time step";
      throw StepSizeError(msg.str());
    }
  }
  return state;
}

DensityMatrix evolve_master(const ModeOperator& H, const std::vector<LindbladChannel>& channels,
                            const DensityMatrix& rho, double t, const MasterOptions& options) {
  return DensityMatrix(rho.space(), evolve_master(H.matrix, channels, rho.matrix(), t, options), false);
}

const std::vector<double>& TrajectoryRecord::operator[](const std::string& name) const {
  for (std::size_t k = 0; k < names.size(); ++k)
    if (names[k] == name) return series[k];
  throw std::out_of_range("TrajectoryRecord: no series named " + name);
}

TrajectoryRecord evolve_sme_homodyne(const SparseMatrix& H, const std::vector<LindbladChannel>& channels,
                                     const CMatrix& rho0, double t, const SmeOptions& options,
                                     const StreamSeed& seed, const std::vector<Observable>& observables,
                                     CMatrix* final_state) {
  require_hermitian(H);
  const LindbladChannel* monitored = nullptr;
  for (const auto& c : channels)
    if (c.monitored) {
      if (monitored) throw DomainError("evolve_sme_homodyne: exactly one monitored channel allowed");
      monitored = &c;
    }
  if (!monitored) throw DomainError("evolve_sme_homodyne: no monitored channel");
  if (options.record_every < 1) throw DomainError("evolve_sme_homodyne: record_every must be positive");

  const int steps = step_count(t, options.dt);
  const double dt = steps ? t / steps : options.dt;
  auto prepared = prepare(channels);
  const RowSparse Hr = H;
  const RowSparse m = SparseMatrix(monitored->op * std::exp(Complex(0.0, -monitored->theta)));
  const double root_eta = std::sqrt(options.efficiency);

  auto engine = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  TrajectoryRecord rec;
  rec.seed = seed;
  rec.dt = dt;
  for (const auto& o : observables) rec.names.push_back(o.name);
  rec.series.resize(observables.size());

  CMatrix rho = rho0;
  hermitize(rho);
  double current_acc = 0.0;
  auto record = [&](double time, double current) {
    rec.times.push_back(time);
    for (std::size_t k = 0; k < observables.size(); ++k)
      rec.series[k].push_back((observables[k].op * rho).trace().real());
    rec.current.push_back(current);
  };
  record(0.0, 0.0);

  Workspace ws;
  CMatrix m_rho(rho.rows(), rho.cols()), innovation(rho.rows(), rho.cols());
  for (int s = 0; s < steps; ++s) {
    m_rho.noalias() = m * rho;
    const double mean = 2.0 * m_rho.trace().real();
    const double dW = normal(engine) * std::sqrt(dt);
    innovation = m_rho + m_rho.adjoint() - mean * rho;
    rk4_inplace(Hr, prepared, rho, dt, ws);
    rho += (root_eta * dW) * innovation;
    hermitize(rho);
    const Complex tr = rho.trace();
    if (!std::isfinite(tr.real()) || tr.real() <= 0.0)
      throw StepSizeError("evolve_sme_homodyne: non-finite conditional state; reduce dt");
    rho /= tr.real();
    current_acc += root_eta * mean * dt + dW;
    if ((s + 1) % options.record_every == 0) {
      record((s + 1) * dt, current_acc / (options.record_every * dt));
      current_acc = 0.0;
    }
  }
  if (final_state) *final_state = rho;
  return rec;
}

SparseMatrix liouvillian(const SparseMatrix& H, const std::vector<SparseMatrix>& lindblads) {
  const Index d = H.rows();
  const SparseMatrix id = sparse_identity(d);
  // vec(X rho Y) = (Y^T (x) X) vec(rho)
  SparseMatrix out = (kron(id, H) - kron(SparseMatrix(H.transpose()), id)) * Complex(0.0, -1.0);
  for (const auto& L : lindblads) {
    SparseMatrix LdL = SparseMatrix(L.adjoint()) * L;
    SparseMatrix Lconj = L.conjugate();
    out += kron(Lconj, L);
    out -= kron(id, LdL) * 0.5;
    out -= kron(SparseMatrix(LdL.transpose()), id) * 0.5;
  }
  out.prune(Complex(0.0), 0.0);
  out.makeCompressed();
  return out;
}

double max_abs_difference(const SparseMatrix& a, const SparseMatrix& b) {
  SparseMatrix d = a - b;
  double worst = 0.0;
  for (Index k = 0; k < d.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(d, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

RwaComparison compare_exact_vs_rwa(const SystemParams& params, const ModeSpace& space, const CVector& signal,
                                   const CVector& pump, double t) {
  auto initial = TwoModeState::product(signal, pump);
  if (!(initial.space() == space)) throw DimensionError("compare_exact_vs_rwa: state does not match space");
  RwaComparison out;
  out.exact = evolve_unitary(build_H_displaced(params, space).matrix, initial.amplitudes(), t);
  out.rwa = evolve_unitary(build_H_eff(params, space).matrix, initial.amplitudes(), t);
  out.fidelity = fidelity(out.exact, out.rwa);
  return out;
}

}  // namespace paraqnd
