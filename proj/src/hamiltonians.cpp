#include "paraqnd/hamiltonians.hpp"

#include <cmath>
#include <vector>

#include "paraqnd/linalg.hpp"

namespace paraqnd {

namespace {

SparseMatrix cubic_term(const OperatorSet& ops) {
  SparseMatrix a2 = ops.signal.a * ops.signal.a;
  SparseMatrix ad2 = ops.signal.a_dag * ops.signal.a_dag;
  return kron(ad2, ops.pump.a) + kron(a2, ops.pump.a_dag);
}

ModeOperator joint(SparseMatrix m, const char* label) {
  m.prune(Complex(0.0), 0.0);
  m.makeCompressed();
  return {std::move(m), ActsOn::joint, label};
}

}  // namespace

ModeOperator build_H_lab(const SystemParams& params, const ModeSpace& space) {
  auto ops = make_operators(space);
  return joint(cubic_term(ops) * params.g + ops.n_a.matrix * params.delta, "H_lab");
}

ModeOperator build_H_displaced(const SystemParams& params, const ModeSpace& space) {
  auto ops = make_operators(space);
  SparseMatrix squeeze = ops.signal.a_dag * ops.signal.a_dag + ops.signal.a * ops.signal.a;
  SparseMatrix h = cubic_term(ops) * params.g + ops.n_a.matrix * params.delta +
                   embed_signal(squeeze, space.n_pump) * (0.5 * params.r());
  return joint(std::move(h), "H_D");
}

ModeOperator build_H_eff(double Delta, double g_tilde, double u, const ModeSpace& space) {
  auto ops = make_operators(space);
  SparseMatrix na = bogoliubov_number(space.n_signal, u);
  SparseMatrix shifted = na + ops.signal.identity * 0.5;
  SparseMatrix h = kron(shifted, ops.pump.x) * (-2.0 * g_tilde) + embed_signal(na, space.n_pump) * Delta;
  return joint(std::move(h), "H_eff");
}

ModeOperator build_H_eff(const SystemParams& params, const ModeSpace& space) {
  auto b = params.bogoliubov();
  return build_H_eff(b.Delta, b.g_tilde, b.u, space);
}

BogoliubovForm build_H_bogoliubov_form(const SystemParams& params, const ModeSpace& space) {
  auto b = params.bogoliubov();
  auto ops = make_operators(space);
  const double c = std::cosh(b.u), s = std::sinh(b.u);
  SparseMatrix A = bogoliubov_annihilator(space.n_signal, b.u);
  SparseMatrix Ad = A.adjoint();
  SparseMatrix na = Ad * A;
  SparseMatrix raise = Ad * Ad * (c * c) + A * A * (s * s);
  SparseMatrix lower = A * A * (c * c) + Ad * Ad * (s * s);
  SparseMatrix counter = (kron(raise, ops.pump.a) + kron(lower, ops.pump.a_dag)) * params.g;

  // -g cosh u sinh u (A A^dag + A^dag A)(b + b^dag); equals the N_a x_b term
  // below the truncation edge.
  SparseMatrix sym = A * Ad + Ad * A;
  SparseMatrix rwa = kron(sym, ops.pump.x) * (-2.0 * params.g * c * s);

  BogoliubovForm out;
  out.counter_rotating = joint(std::move(counter), "H_NL counter-rotating");
  out.rwa_part = joint(std::move(rwa), "H_NL rotating");
  out.nonlinear = joint(out.counter_rotating.matrix + out.rwa_part.matrix, "H_NL");
  out.quadratic = joint(embed_signal(na, space.n_pump) * b.Delta, "H_Q");
  return out;
}

ModeOperator build_hamiltonian(HamiltonianVariant variant, const SystemParams& params,
                               const ModeSpace& space) {
  switch (variant) {
    case HamiltonianVariant::lab:
      return build_H_lab(params, space);
    case HamiltonianVariant::displaced:
      return build_H_displaced(params, space);
    case HamiltonianVariant::bogoliubov_form: {
      auto f = build_H_bogoliubov_form(params, space);
      return joint(f.nonlinear.matrix + f.quadratic.matrix, "H_D (Bogoliubov form)");
    }
    case HamiltonianVariant::effective:
      return build_H_eff(params, space);
  }
  throw DomainError("unknown Hamiltonian variant");
}

CMatrix restrict_joint(const SparseMatrix& op, const ModeSpace& space, Index keep_signal, Index keep_pump) {
  std::vector<Index> slot(op.rows(), -1);
  Index count = 0;
  for (Index i = 0; i < keep_signal; ++i)
    for (Index k = 0; k < keep_pump; ++k) slot[i * space.n_pump + k] = count++;
  CMatrix out = CMatrix::Zero(count, count);
  for (Index c = 0; c < op.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(op, c); it; ++it)
      if (slot[it.row()] >= 0 && slot[it.col()] >= 0) out(slot[it.row()], slot[it.col()]) = it.value();
  return out;
}

double commutator_residual(const SparseMatrix& x, const SparseMatrix& y, const ModeSpace& space,
                           Index keep_signal, Index keep_pump) {
  SparseMatrix comm = x * y - y * x;
  CMatrix r = restrict_joint(comm, space, keep_signal, keep_pump);
  return r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace paraqnd
