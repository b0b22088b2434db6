#include "paraqnd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace paraqnd {

SparseMatrix sparse_identity(Index n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  SparseMatrix out = Eigen::kroneckerProduct(a, b).eval();
  out.makeCompressed();
  return out;
}

SparseMatrix to_sparse(const CMatrix& m, double drop_tol) {
  std::vector<Eigen::Triplet<Complex>> trips;
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (std::abs(m(i, j)) > drop_tol) trips.emplace_back(i, j, m(i, j));
  SparseMatrix out(m.rows(), m.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

namespace {

double one_norm(const SparseMatrix& m) {
  double best = 0.0;
  for (Index k = 0; k < m.outerSize(); ++k) {
    double col = 0.0;
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) col += std::abs(it.value());
    best = std::max(best, col);
  }
  return best;
}

}  // namespace

CVector expm_multiply(const SparseMatrix& m, const CVector& v, double t) {
  const double norm = one_norm(m) * std::abs(t);
  const int steps = std::max(1, static_cast<int>(std::ceil(norm)));
  const double h = t / steps;
  CVector out = v;
  for (int s = 0; s < steps; ++s) {
    CVector term = out;
    CVector sum = out;
    for (int k = 1; k < 200; ++k) {
      term = (m * term) * (h / k);
      sum += term;
      if (term.norm() <= 1e-17 * sum.norm()) break;
    }
    out = std::move(sum);
  }
  return out;
}

CMatrix expm(const CMatrix& m) { return m.exp(); }

SpectralBounds gershgorin_bounds(const SparseMatrix& h) {
  const Index n = h.rows();
  std::vector<double> centre(n, 0.0), radius(n, 0.0);
  for (Index k = 0; k < h.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(h, k); it; ++it) {
      if (it.row() == it.col())
        centre[it.row()] += it.value().real();
      else
        radius[it.row()] += std::abs(it.value());
    }
  SpectralBounds b{centre.empty() ? 0.0 : centre[0] - radius[0],
                   centre.empty() ? 0.0 : centre[0] + radius[0]};
  for (Index i = 0; i < n; ++i) {
    b.lower = std::min(b.lower, centre[i] - radius[i]);
    b.upper = std::max(b.upper, centre[i] + radius[i]);
  }
  return b;
}

CVector propagate_hermitian(const SparseMatrix& h, const CVector& v, double t, double tol) {
  if (h.rows() != h.cols() || h.rows() != v.size())
    throw DimensionError("propagate_hermitian: dimension mismatch");
  if (t == 0.0) return v;
  auto bounds = gershgorin_bounds(h);
  const double pad = 1e-9 * std::max(1.0, bounds.upper - bounds.lower);
  const double half_width = std::max(0.5 * (bounds.upper - bounds.lower) + pad, 1e-12);
  const double centre = 0.5 * (bounds.upper + bounds.lower);

  // Keep the Bessel argument per chunk moderate so that the coefficients are
  // accurate and the number of terms stays near the argument.
  constexpr double kMaxArgument = 40.0;
  const int chunks = std::max(1, static_cast<int>(std::ceil(half_width * std::abs(t) / kMaxArgument)));
  const double tau = t / chunks;
  const double z = half_width * std::abs(tau);
  const double sign = tau >= 0.0 ? 1.0 : -1.0;

  std::vector<Complex> coeff;
  for (int k = 0;; ++k) {
    const double jk = std::cyl_bessel_j(static_cast<double>(k), z);
    Complex ik = std::pow(Complex(0.0, -sign), k);
    coeff.push_back((k == 0 ? 1.0 : 2.0) * ik * jk);
    if (k > z && std::abs(jk) < tol) break;
    if (k > 10000) throw StepSizeError("propagate_hermitian: Chebyshev series did not converge");
  }
  const Complex phase = std::exp(Complex(0.0, -centre * tau));
  const SparseMatrix scaled = (h - centre * sparse_identity(h.rows())) * (1.0 / half_width);

  CVector state = v;
  for (int c = 0; c < chunks; ++c) {
    CVector t_prev = state;
    CVector t_curr = scaled * state;
    CVector acc = coeff[0] * t_prev + coeff[1] * t_curr;
    for (std::size_t k = 2; k < coeff.size(); ++k) {
      CVector t_next = 2.0 * (scaled * t_curr) - t_prev;
      acc += coeff[k] * t_next;
      t_prev = std::move(t_curr);
      t_curr = std::move(t_next);
    }
    state = phase * acc;
  }
  return state;
}

double hermiticity_residual(const SparseMatrix& h) {
  SparseMatrix diff = h - SparseMatrix(h.adjoint());
  double worst = 0.0;
  for (Index k = 0; k < diff.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

}  // namespace paraqnd
