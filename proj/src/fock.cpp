#include "paraqnd/fock.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "paraqnd/linalg.hpp"

namespace paraqnd {

ModeSpace::ModeSpace(Index signal, Index pump) : n_signal(signal), n_pump(pump) {
  if (signal < 2 || pump < 2) {
    std::ostringstream msg;
    msg << "ModeSpace: truncations must be >= 2 (got " << signal << ", " << pump << ")";
    throw DimensionError(msg.str());
  }
}

ModeOperator ModeOperator::adjoint() const {
  return {SparseMatrix(matrix.adjoint()), acts_on, label + "^dag"};
}

SingleModeOperators single_mode_operators(Index n) {
  if (n < 2) throw DimensionError("single_mode_operators: need at least 2 levels");
  SingleModeOperators ops;
  std::vector<Eigen::Triplet<Complex>> trips;
  for (Index k = 1; k < n; ++k) trips.emplace_back(k - 1, k, std::sqrt(static_cast<double>(k)));
  ops.a.resize(n, n);
  ops.a.setFromTriplets(trips.begin(), trips.end());
  ops.a_dag = ops.a.adjoint();
  ops.x = (ops.a + ops.a_dag) * 0.5;
  ops.p = (ops.a - ops.a_dag) * Complex(0.0, -0.5);
  ops.n = ops.a_dag * ops.a;
  ops.identity = sparse_identity(n);
  return ops;
}

SparseMatrix embed_signal(const SparseMatrix& op, Index n_pump) {
  return kron(op, sparse_identity(n_pump));
}

SparseMatrix embed_pump(Index n_signal, const SparseMatrix& op) {
  return kron(sparse_identity(n_signal), op);
}

OperatorSet make_operators(const ModeSpace& space) {
  ModeSpace checked(space.n_signal, space.n_pump);
  OperatorSet s;
  s.space = checked;
  s.signal = single_mode_operators(checked.n_signal);
  s.pump = single_mode_operators(checked.n_pump);
  auto sig = [&](const SparseMatrix& m, const char* label) {
    return ModeOperator{embed_signal(m, checked.n_pump), ActsOn::joint, label};
  };
  auto pmp = [&](const SparseMatrix& m, const char* label) {
    return ModeOperator{embed_pump(checked.n_signal, m), ActsOn::joint, label};
  };
  s.a = sig(s.signal.a, "a");
  s.a_dag = sig(s.signal.a_dag, "a^dag");
  s.x_a = sig(s.signal.x, "x_a");
  s.p_a = sig(s.signal.p, "p_a");
  s.n_a = sig(s.signal.n, "n_a");
  s.b = pmp(s.pump.a, "b");
  s.b_dag = pmp(s.pump.a_dag, "b^dag");
  s.x_b = pmp(s.pump.x, "x_b");
  s.p_b = pmp(s.pump.p, "p_b");
  s.n_b = pmp(s.pump.n, "n_b");
  return s;
}

SparseMatrix bogoliubov_annihilator(Index n, double u) {
  auto ops = single_mode_operators(n);
  SparseMatrix A = ops.a * std::cosh(u) + ops.a_dag * std::sinh(u);
  A.makeCompressed();
  return A;
}

SparseMatrix bogoliubov_number(Index n, double u) {
  SparseMatrix A = bogoliubov_annihilator(n, u);
  SparseMatrix N = SparseMatrix(A.adjoint()) * A;
  N.makeCompressed();
  return N;
}

namespace {

SparseMatrix squeeze_generator(Index n, Complex zeta) {
  auto ops = single_mode_operators(n);
  SparseMatrix a2 = ops.a * ops.a;
  SparseMatrix ad2 = ops.a_dag * ops.a_dag;
  return (a2 * std::conj(zeta) - ad2 * zeta) * 0.5;
}

SparseMatrix displacement_generator(Index n, Complex alpha) {
  auto ops = single_mode_operators(n);
  return ops.a_dag * alpha - ops.a * std::conj(alpha);
}

CVector finish_state(CVector v, double tol, const std::string& what) {
  check_truncation(v, tol, what);
  v.normalize();
  return v;
}

}  // namespace

CMatrix squeeze_operator(Index n, Complex zeta) { return expm(CMatrix(squeeze_generator(n, zeta))); }

CMatrix displacement_operator(Index n, Complex alpha) {
  return expm(CMatrix(displacement_generator(n, alpha)));
}

double top_population(const CVector& state) {
  const Index n = state.size();
  double top = 0.0;
  for (Index k = std::max<Index>(0, n - 2); k < n; ++k) top += std::norm(state[k]);
  const double total = state.squaredNorm();
  return total > 0.0 ? top / total : 0.0;
}

void check_truncation(const CVector& state, double tol, const std::string& what) {
  const double top = top_population(state);
  if (!(top < tol)) {
    std::ostringstream msg;
    msg << what << ": top-level population " << top << " exceeds " << tol << " at " << state.size()
        << " levels; increase the truncation";
    throw TruncationError(msg.str());
  }
}

CVector fock_state(Index n, Index level) {
  if (level < 0 || level >= n) throw DimensionError("fock_state: level outside truncation");
  CVector v = CVector::Zero(n);
  v[level] = 1.0;
  return v;
}

CVector coherent_state(Index n, Complex alpha, double tol) {
  CVector v(n);
  v[0] = std::exp(-0.5 * std::norm(alpha));
  for (Index k = 1; k < n; ++k) v[k] = v[k - 1] * alpha / std::sqrt(static_cast<double>(k));
  return finish_state(std::move(v), tol, "coherent_state");
}

CVector squeezed_number_state(Index n, double u, Index level, double tol) {
  CVector v = expm_multiply(squeeze_generator(n, u), fock_state(n, level));
  return finish_state(std::move(v), tol, "squeezed_number_state");
}

CMatrix squeezed_number_basis(Index n, double u, Index count) {
  if (count > n) throw DimensionError("squeezed_number_basis: more states than levels");
  CMatrix s = squeeze_operator(n, u);
  for (Index k = 0; k < count; ++k) check_truncation(s.col(k), kDefaultHealthTolerance, "squeezed_number_basis");
  return s.leftCols(count);
}

CVector bogoliubov_coherent_state(Index n, double u, Complex amplitude, double tol) {
  CVector alpha = coherent_state(n, amplitude, tol);
  CVector v = expm_multiply(squeeze_generator(n, u), alpha);
  return finish_state(std::move(v), tol, "bogoliubov_coherent_state");
}

CVector squeezed_vacuum_pump(Index n, double width, double tol) {
  if (!(width > 0.0)) throw DomainError("squeezed_vacuum_pump: width must be positive");
  const double s = std::log(2.0 * width);
  CVector v = expm_multiply(squeeze_generator(n, s), fock_state(n, 0));
  return finish_state(std::move(v), tol, "squeezed_vacuum_pump");
}

CVector x_squeezed_vacuum(Index n, double width, double tol) {
  if (!(width > 0.0)) throw DomainError("x_squeezed_vacuum: width must be positive");
  const double s = -std::log(2.0 * width);
  CVector v = expm_multiply(squeeze_generator(n, s), fock_state(n, 0));
  return finish_state(std::move(v), tol, "x_squeezed_vacuum");
}

TwoModeState::TwoModeState(ModeSpace space, CVector amplitudes)
    : space_(space), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != space_.dim()) throw DimensionError("TwoModeState: amplitude length mismatch");
}

TwoModeState TwoModeState::product(const CVector& signal, const CVector& pump) {
  ModeSpace space(signal.size(), pump.size());
  CVector joint(space.dim());
  for (Index i = 0; i < signal.size(); ++i) joint.segment(i * pump.size(), pump.size()) = signal[i] * pump;
  return TwoModeState(space, std::move(joint));
}

CMatrix TwoModeState::as_matrix() const {
  // Row-major reshape of the signal-major vector.
  CMatrix m(space_.n_signal, space_.n_pump);
  for (Index i = 0; i < space_.n_signal; ++i)
    m.row(i) = amplitudes_.segment(i * space_.n_pump, space_.n_pump).transpose();
  return m;
}

void validate_density(const CMatrix& rho, double herm_tol, double trace_tol, double eig_tol) {
  if (rho.rows() != rho.cols()) throw DimensionError("density matrix must be square");
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > herm_tol) throw DomainError("density matrix not Hermitian (residual " + std::to_string(herm) + ")");
  const double tr_err = std::abs(rho.trace() - 1.0);
  if (tr_err > trace_tol) throw DomainError("density matrix trace differs from 1 by " + std::to_string(tr_err));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  const double lowest = es.eigenvalues().minCoeff();
  if (lowest < -eig_tol) throw DomainError("density matrix has negative eigenvalue " + std::to_string(lowest));
}

DensityMatrix::DensityMatrix(ModeSpace space, CMatrix matrix, bool validate)
    : space_(space), matrix_(std::move(matrix)) {
  if (matrix_.rows() != space_.dim() || matrix_.cols() != space_.dim())
    throw DimensionError("DensityMatrix: matrix size does not match space");
  if (validate) validate_density(matrix_);
}

DensityMatrix DensityMatrix::from_pure(const TwoModeState& psi) {
  const CVector& v = psi.amplitudes();
  return DensityMatrix(psi.space(), v * v.adjoint(), false);
}

RVector hermite_functions(Index count, double q) {
  RVector out(std::max<Index>(count, 1));
  out[0] = std::pow(2.0 / kPi, 0.25) * std::exp(-q * q);
  if (count > 1) out[1] = 2.0 * q * out[0];
  for (Index k = 1; k + 1 < count; ++k)
    out[k + 1] = (2.0 * q * out[k] - std::sqrt(static_cast<double>(k)) * out[k - 1]) /
                 std::sqrt(static_cast<double>(k + 1));
  out.conservativeResize(count);
  return out;
}

double quadrature_wavefunction(Index n, double q) {
  if (n < 0) throw DomainError("quadrature_wavefunction: n must be non-negative");
  return hermite_functions(n + 1, q)[n];
}

Complex momentum_wavefunction(Index n, double p) {
  static const Complex kPhase[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
  return kPhase[n % 4] * quadrature_wavefunction(n, p);
}

}  // namespace paraqnd
