#include "paraqnd/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace paraqnd {

namespace {

void require_same(Index a, Index b, const char* what) {
  if (a != b) throw DimensionError(std::string(what) + ": dimension mismatch");
}

CMatrix psd_sqrt(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()));
  RVector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const CVector& a, const CVector& b) {
  require_same(a.size(), b.size(), "fidelity");
  return std::norm(a.dot(b));
}

double fidelity(const CMatrix& rho, const CVector& psi) {
  require_same(rho.rows(), psi.size(), "fidelity");
  return psi.dot(rho * psi).real();
}

double fidelity(const CMatrix& rho, const CMatrix& sigma) {
  require_same(rho.rows(), sigma.rows(), "fidelity");
  CMatrix s = psd_sqrt(rho);
  CMatrix inner = s * sigma * s;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
  const double root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return root * root;
}

double purity(const CMatrix& rho) { return (rho * rho).trace().real(); }

double trace_distance(const CMatrix& rho, const CMatrix& sigma) {
  require_same(rho.rows(), sigma.rows(), "trace_distance");
  CMatrix d = rho - sigma;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

CMatrix trace_out_pump(const CMatrix& rho, const ModeSpace& space) {
  require_same(rho.rows(), space.dim(), "trace_out_pump");
  const Index ns = space.n_signal, np = space.n_pump;
  CMatrix out(ns, ns);
  for (Index i = 0; i < ns; ++i)
    for (Index j = 0; j < ns; ++j) out(i, j) = rho.block(i * np, j * np, np, np).trace();
  return out;
}

CMatrix trace_out_signal(const CMatrix& rho, const ModeSpace& space) {
  require_same(rho.rows(), space.dim(), "trace_out_signal");
  const Index ns = space.n_signal, np = space.n_pump;
  CMatrix out = CMatrix::Zero(np, np);
  for (Index i = 0; i < ns; ++i) out += rho.block(i * np, i * np, np, np);
  return out;
}

CMatrix trace_out_pump(const TwoModeState& psi) {
  CMatrix m = psi.as_matrix();
  return m * m.adjoint();
}

CMatrix trace_out_signal(const TwoModeState& psi) {
  CMatrix m = psi.as_matrix();
  return (m.adjoint() * m).transpose();
}

Complex expectation(const SparseMatrix& op, const CVector& psi) {
  require_same(op.cols(), psi.size(), "expectation");
  return psi.dot(op * psi);
}

Complex expectation(const SparseMatrix& op, const CMatrix& rho) {
  require_same(op.cols(), rho.rows(), "expectation");
  return (op * rho).trace();
}

double variance(const SparseMatrix& op, const CVector& psi) {
  CVector v = op * psi;
  const double mean = psi.dot(v).real();
  return v.squaredNorm() - mean * mean;
}

double variance(const SparseMatrix& op, const CMatrix& rho) {
  CMatrix orho = op * rho;
  const double mean = orho.trace().real();
  CMatrix o2rho = op * orho;
  return o2rho.trace().real() - mean * mean;
}

}  // namespace paraqnd
