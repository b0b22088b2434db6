#include "paraqnd/wigner.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace paraqnd {

namespace {

// Trapezoid weights on a uniform axis.
double trapezoid(const RVector& axis, const Eigen::Ref<const RVector>& f) {
  if (axis.size() < 2) return 0.0;
  double h = (axis[axis.size() - 1] - axis[0]) / static_cast<double>(axis.size() - 1);
  return h * (f.sum() - 0.5 * (f[0] + f[f.size() - 1]));
}

}  // namespace

double WignerGrid::integral() const { return trapezoid(xs, x_marginal()); }

RVector WignerGrid::x_marginal() const {
  RVector out(xs.size());
  for (Index i = 0; i < xs.size(); ++i) out[i] = trapezoid(ps, values.row(i).transpose());
  return out;
}

RVector WignerGrid::p_marginal() const {
  RVector out(ps.size());
  for (Index j = 0; j < ps.size(); ++j) out[j] = trapezoid(xs, values.col(j));
  return out;
}

RVector linspace(double lo, double hi, Index count) { return RVector::LinSpaced(count, lo, hi); }

WignerGrid wigner(const CMatrix& rho, const RVector& xs, const RVector& ps) {
  if (rho.rows() != rho.cols()) throw DimensionError("wigner: density matrix must be square");
  const Index m = rho.rows();
  WignerGrid out{xs, ps, RMatrix::Zero(xs.size(), ps.size())};
  std::vector<Complex> w(m);
  std::vector<double> root(m + 1);
  for (Index k = 0; k <= m; ++k) root[k] = std::sqrt(static_cast<double>(k));

  // Laguerre-type recursion over matrix elements (the algorithm used by qutip's
  // iterative method), evaluated point by point.
  for (Index i = 0; i < xs.size(); ++i) {
    for (Index j = 0; j < ps.size(); ++j) {
      const Complex A(xs[i], ps[j]);
      const Complex Ac = std::conj(A);
      w[0] = std::exp(-2.0 * std::norm(A)) / kPi;
      double acc = rho(0, 0).real() * w[0].real();
      for (Index n = 1; n < m; ++n) {
        w[n] = 2.0 * A * w[n - 1] / root[n];
        acc += 2.0 * (rho(0, n) * w[n]).real();
      }
      for (Index r = 1; r < m; ++r) {
        Complex temp = w[r];
        w[r] = (2.0 * Ac * temp - root[r] * w[r - 1]) / root[r];
        acc += (rho(r, r) * w[r]).real();
        for (Index n = r + 1; n < m; ++n) {
          Complex next = (2.0 * A * w[n - 1] - root[r] * temp) / root[n];
          temp = w[n];
          w[n] = next;
          acc += 2.0 * (rho(r, n) * w[n]).real();
        }
      }
      out.values(i, j) = 2.0 * acc;
    }
  }
  return out;
}

WignerGrid wigner(const CVector& psi, const RVector& xs, const RVector& ps) {
  return wigner(CMatrix(psi * psi.adjoint()), xs, ps);
}

WignerGrid wigner_from_wavefunction(const RVector& grid, const CVector& psi, const RVector& ps,
                                    double x_lo, double x_hi, Index stride) {
  if (grid.size() != psi.size() || grid.size() < 2) throw DimensionError("wigner_from_wavefunction: size mismatch");
  if (stride < 1) throw GridError("wigner_from_wavefunction: stride must be positive");
  const Index n = grid.size();
  const double dx = grid[1] - grid[0];

  std::vector<Index> rows;
  for (Index i = 0; i < n; i += stride)
    if (grid[i] >= x_lo - 1e-12 && grid[i] <= x_hi + 1e-12) rows.push_back(i);

  // Only y offsets where the wavefunction has support contribute.
  Index first = 0, last = n - 1;
  const double cut = 1e-14 * psi.cwiseAbs().maxCoeff();
  while (first < n && std::abs(psi[first]) <= cut) ++first;
  while (last > first && std::abs(psi[last]) <= cut) --last;
  const Index max_k = last - first;

  WignerGrid out;
  out.xs.resize(static_cast<Index>(rows.size()));
  out.ps = ps;
  out.values = RMatrix::Zero(out.xs.size(), ps.size());
  for (std::size_t r = 0; r < rows.size(); ++r) out.xs[static_cast<Index>(r)] = grid[rows[r]];

  // W(x,p) = (2/pi) sum_k psi*(x+y_k) psi(x-y_k) exp(4 i p y_k) dx, y_k = k dx.
  std::vector<Complex> corr(2 * max_k + 1);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Index i = rows[r];
    for (Index k = -max_k; k <= max_k; ++k) {
      const Index a = i + k, b = i - k;
      corr[k + max_k] = (a >= 0 && a < n && b >= 0 && b < n) ? std::conj(psi[a]) * psi[b] : Complex(0.0);
    }
    for (Index j = 0; j < ps.size(); ++j) {
      // The correlation is Hermitian in k, so the sum is real.
      double acc = corr[max_k].real();
      for (Index k = 1; k <= max_k; ++k) {
        const Complex c = corr[k + max_k];
        if (c == Complex(0.0)) continue;
        const double phase = 4.0 * ps[j] * k * dx;
        acc += 2.0 * (c * Complex(std::cos(phase), std::sin(phase))).real();
      }
      out.values(static_cast<Index>(r), j) = 2.0 / kPi * acc * dx;
    }
  }
  return out;
}

void check_wigner_normalization(const WignerGrid& w, double tol) {
  const double total = w.integral();
  if (std::abs(total - 1.0) > tol) {
    std::ostringstream msg;
    msg << "Wigner grid integrates to " << total << "; widen or refine the grid";
    throw GridError(msg.str());
  }
}

}  // namespace paraqnd
