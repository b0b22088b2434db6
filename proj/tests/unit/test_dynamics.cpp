#include <doctest.h>

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

#include "paraqnd/evolution.hpp"
#include "paraqnd/hamiltonians.hpp"
#include "paraqnd/linalg.hpp"
#include "paraqnd/metrics.hpp"

using namespace paraqnd;

namespace {

SystemParams fig1_params() { return SystemParams::from_targets(150.0, 1.0); }

double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST_CASE("lab Hamiltonian") {
  ModeSpace space(5, 4);
  SystemParams p;
  p.g = 0.0;
  p.delta = 2.5;
  CMatrix h0 = build_H_lab(p, space).dense();
  CHECK(max_abs(h0 - CMatrix(h0.diagonal().asDiagonal())) == 0.0);
  for (Index i = 0; i < 5; ++i)
    for (Index k = 0; k < 4; ++k) CHECK(h0(i * 4 + k, i * 4 + k).real() == doctest::Approx(2.5 * i));

  p.g = 0.8;
  auto h = build_H_lab(p, space);
  CMatrix d = h.dense();
  // <n_a=0, n_b=1| H |n_a=2, n_b=0> = g sqrt(2)
  CHECK(d(0 * 4 + 1, 2 * 4 + 0).real() == doctest::Approx(0.8 * std::sqrt(2.0)));
  CHECK(hermiticity_residual(h.matrix) < 1e-14);
}

TEST_CASE("displaced Hamiltonian") {
  SystemParams p;
  p.g = 1.0;
  p.delta = 3.0;
  p.beta = 0.0;
  ModeSpace space(6, 40);
  CHECK(max_abs_difference(build_H_displaced(p, space).matrix, build_H_lab(p, space).matrix) == 0.0);

  SUBCASE("frame identity at beta = 1") {
    p.beta = 1.0;
    CMatrix hl = build_H_lab(p, space).dense();
    CMatrix hd = build_H_displaced(p, space).dense();
    CMatrix db = displacement_operator(40, 1.0);
    CMatrix dj = Eigen::kroneckerProduct(CMatrix::Identity(6, 6), db).eval();
    CMatrix framed = dj.adjoint() * hl * dj;
    // Compare away from both truncation edges.
    CMatrix a = restrict_joint(to_sparse(hd), space, 4, 15);
    CMatrix b = restrict_joint(to_sparse(framed, 1e-300), space, 4, 15);
    const Complex c = (a - b).trace() / static_cast<double>(a.rows());
    CHECK((a - b - c * CMatrix::Identity(a.rows(), a.cols())).norm() / a.norm() < 1e-6);
  }
  SUBCASE("squeeze coefficient doubles with beta") {
    p.beta = 0.5;
    CMatrix h1 = build_H_displaced(p, space).dense();
    p.beta = 1.0;
    CMatrix h2 = build_H_displaced(p, space).dense();
    // Element <2,0|H|0,0> carries (r/2) sqrt(2) only.
    CHECK(h2(2 * 40, 0).real() == doctest::Approx(2.0 * h1(2 * 40, 0).real()));
    CHECK(h1(2 * 40, 0).real() == doctest::Approx(0.5 * std::sqrt(2.0)));
  }
}

TEST_CASE("effective Hamiltonian commutes with N_a and x_b") {
  ModeSpace space(12, 10);
  auto p = fig1_params();
  auto h = build_H_eff(p, space);
  auto ops = make_operators(space);
  SparseMatrix na = embed_signal(bogoliubov_number(12, p.u()), 10);
  CHECK(max_abs(CMatrix(h.matrix * na - na * h.matrix)) < 1e-9);
  CHECK(max_abs(CMatrix(h.matrix * ops.x_b.matrix - ops.x_b.matrix * h.matrix)) < 1e-9);
  CHECK(hermiticity_residual(h.matrix) < 1e-12);

  auto h0 = build_H_eff(7.0, 0.0, 0.3, space);
  CHECK(max_abs_difference(h0.matrix, SparseMatrix(embed_signal(bogoliubov_number(12, 0.3), 10) * 7.0)) < 1e-12);
}

TEST_CASE("Bogoliubov form of the cubic term") {
  ModeSpace space(16, 8);
  SUBCASE("u = 0 has no N_a x_b term") {
    SystemParams p;
    p.delta = 5.0;
    auto f = build_H_bogoliubov_form(p, space);
    CHECK(f.rwa_part.matrix.norm() == 0.0);
    CHECK(max_abs_difference(f.nonlinear.matrix, build_H_lab(SystemParams{1.0, 0.0}, space).matrix) < 1e-14);
  }
  SUBCASE("equals the cubic term at the figure-one point") {
    SystemParams p;
    p.delta = 212.132;
    p.beta = 75.0;
    auto f = build_H_bogoliubov_form(p, space);
    SystemParams cubic_only{1.0, 0.0};
    CMatrix a = restrict_joint(f.nonlinear.matrix, space, 12, 8);
    CMatrix b = restrict_joint(build_H_lab(cubic_only, space).matrix, space, 12, 8);
    CHECK((a - b).norm() / b.norm() < 1e-6);
    // RWA part equals -2 g~ (N_a + 1/2) x_b below the edge.
    CMatrix e = restrict_joint(build_H_eff(0.0, p.g_tilde(), p.u(), space).matrix, space, 12, 8);
    CHECK((restrict_joint(f.rwa_part.matrix, space, 12, 8) - e).norm() < 1e-9);
  }
  SUBCASE("counter-rotating part changes N_a by two") {
    SystemParams p;
    p.delta = 212.132;
    p.beta = 75.0;
    const Index ns = 70;
    ModeSpace big(ns, 6);
    auto f = build_H_bogoliubov_form(p, big);
    CMatrix v = squeeze_operator(ns, p.u());
    CMatrix vj = Eigen::kroneckerProduct(v, CMatrix::Identity(6, 6)).eval();
    CMatrix in_basis = vj.adjoint() * f.counter_rotating.dense() * vj;
    double off = 0.0, on = 0.0;
    for (Index m = 0; m < 8; ++m)
      for (Index n = 0; n < 8; ++n) {
        const double blk = in_basis.block(m * 6, n * 6, 6, 6).norm();
        if (std::abs(m - n) == 2)
          on = std::max(on, blk);
        else
          off = std::max(off, blk);
      }
    CHECK(on > 0.1);
    CHECK(off < 1e-6);
  }
}

TEST_CASE("unitary evolution") {
  ModeSpace space(28, 50);
  auto p = fig1_params();
  auto h = build_H_eff(p, space);
  CVector psi = TwoModeState::product(squeezed_number_state(28, p.u(), 1), squeezed_vacuum_pump(50, 0.25))
                    .amplitudes();
  CHECK((evolve_unitary(h.matrix, psi, 0.0) - psi).norm() == 0.0);
  CVector a = evolve_unitary(h.matrix, psi, 0.3);
  CHECK(std::abs(a.norm() - 1.0) < 1e-8);
  CVector b = evolve_unitary(h.matrix, evolve_unitary(h.matrix, psi, 0.1), 0.2);
  CHECK((a - b).norm() < 1e-7);
  CHECK_THROWS_AS(evolve_unitary(SparseMatrix(h.matrix * Complex(0.0, 1.0)), psi, 0.1), DomainError);
}

TEST_CASE("Heisenberg solution under the effective Hamiltonian") {
  auto p = fig1_params();
  ModeSpace space(40, 50);
  auto ops = make_operators(space);
  auto h = build_H_eff(p, space);
  SparseMatrix na = embed_signal(bogoliubov_number(40, p.u()), 50);
  for (Index N : {0, 1, 2}) {
    CVector psi = TwoModeState::product(squeezed_number_state(40, p.u(), N), squeezed_vacuum_pump(50, 0.25))
                      .amplitudes();
    CVector out = evolve_unitary(h.matrix, psi, 1.0);
    CHECK(expectation(ops.p_b.matrix, out).real() == doctest::Approx(N + 0.5).epsilon(1e-6));
  }
  // Superposition of N_a: conserved N_a, p_b shift follows the mean N_a.
  // The pump needs room for the largest shifted component.
  ModeSpace wide(30, 160);
  auto wops = make_operators(wide);
  auto wh = build_H_eff(p, wide);
  SparseMatrix wna = embed_signal(bogoliubov_number(30, p.u()), 160);
  CVector psi = TwoModeState::product(bogoliubov_coherent_state(30, p.u(), 0.8), squeezed_vacuum_pump(160, 0.25))
                    .amplitudes();
  CVector out = evolve_unitary(wh.matrix, psi, 1.0);
  const double n0 = expectation(wna, psi).real();
  CHECK(std::abs(expectation(wna, out).real() - n0) < 1e-8);
  CHECK(std::abs(expectation(wops.p_b.matrix, out).real() - (n0 + 0.5)) < 1e-6);
  CHECK(std::abs(expectation(wops.x_b.matrix, out).real() - expectation(wops.x_b.matrix, psi).real()) < 1e-6);
  CHECK(std::abs(variance(wops.x_b.matrix, out) - variance(wops.x_b.matrix, psi)) < 1e-6);
}

TEST_CASE("Bogoliubov phase advances with x_b") {
  // Narrow x_b pump displaced to x0: arg<A> advances by 2 g~ t x0 - Delta t.
  auto p = SystemParams::from_targets(2.0, 1.0);
  const Index ns = 30, np = 150;
  ModeSpace space(ns, np);
  auto h = build_H_eff(p, space);
  const double x0 = 0.3, t = 0.5;
  CVector pump = displacement_operator(np, x0) * x_squeezed_vacuum(np, 0.15);
  CVector sig = bogoliubov_coherent_state(ns, p.u(), 1.0);
  CVector out = evolve_unitary(h.matrix, TwoModeState::product(sig, pump).amplitudes(), t);
  SparseMatrix A = embed_signal(bogoliubov_annihilator(ns, p.u()), np);
  const Complex mean = expectation(A, out);
  double expected = 2.0 * p.g_tilde() * t * x0 - p.Delta() * t;
  double diff = std::remainder(std::arg(mean) - expected, 2.0 * kPi);
  CHECK(std::abs(diff) < 1e-3);
}

TEST_CASE("quadratic part alone squeezes the vacuum") {
  SystemParams p = SystemParams::from_targets(1.0, 1.0);
  p.g = 1.0;
  ModeSpace space(40, 2);
  auto ops = make_operators(space);
  SparseMatrix hq = build_H_displaced(p, space).matrix - build_H_lab(SystemParams{p.g, 0.0}, space).matrix;
  CVector psi = TwoModeState::product(fock_state(40, 0), fock_state(2, 0)).amplitudes();
  CVector out = evolve_unitary(hq, psi, 0.7);
  const double vx = variance(ops.x_a.matrix, out), vp = variance(ops.p_a.matrix, out);
  CHECK(std::min(vx, vp) < 0.2);
}

TEST_CASE("master equation") {
  SUBCASE("no channels agrees with unitary evolution") {
    ModeSpace space(8, 12);
    auto p = fig1_params();
    auto h = build_H_eff(p, space);
    CVector psi = TwoModeState::product(coherent_state(8, 0.3, 1e-6), squeezed_vacuum_pump(12, 0.45, 1e-6)).amplitudes();
    CMatrix rho = evolve_master(h.matrix, {}, CMatrix(psi * psi.adjoint()), 0.05, {2e-5});
    CVector u = evolve_unitary(h.matrix, psi, 0.05);
    CHECK((rho - u * u.adjoint()).norm() < 1e-6);
  }
  SUBCASE("coherent amplitude decay") {
    auto ops = single_mode_operators(20);
    const double kappa = 0.4, t = 1.5;
    CVector alpha = coherent_state(20, 1.2);
    std::vector<LindbladChannel> ch{{ops.a * std::sqrt(kappa), false, 0.0, "loss"}};
    CMatrix rho = evolve_master(SparseMatrix(ops.n * 0.0), ch, CMatrix(alpha * alpha.adjoint()), t, {1e-2});
    CHECK(std::abs(expectation(ops.a, rho) - 1.2 * std::exp(-kappa * t / 2.0)) < 1e-8);
    CHECK(std::abs(rho.trace() - 1.0) < 1e-10);
  }
  SUBCASE("single-photon survival") {
    auto ops = single_mode_operators(4);
    const double kappa = 0.3, t = 2.0;
    CVector one = fock_state(4, 1);
    std::vector<LindbladChannel> ch{{ops.a * std::sqrt(kappa), false, 0.0, "loss"}};
    CMatrix rho = evolve_master(ops.n, ch, CMatrix(one * one.adjoint()), t, {1e-2});
    CHECK(rho(1, 1).real() == doctest::Approx(std::exp(-kappa * t)).epsilon(1e-9));
  }
  SUBCASE("step-halving check") {
    auto ops = single_mode_operators(10);
    CVector v = coherent_state(10, 0.5, 1e-4);
    CHECK_THROWS_AS(evolve_master(SparseMatrix(ops.n * 50.0), {}, CMatrix(v * v.adjoint()), 1.0, {0.1}),
                    StepSizeError);
  }
}

TEST_CASE("drive and pump offset cancel in the generator") {
  const Index ns = 3, np = 8;
  ModeSpace space(ns, np);
  auto ops = make_operators(space);
  auto base = build_H_eff(SystemParams::from_targets(100.0, 1.5), space).matrix;
  const double kappa_b = 3.0, kappa_a = 0.03;
  SparseMatrix La = ops.a.matrix * std::sqrt(kappa_a);
  SparseMatrix ref = liouvillian(base, {La, SparseMatrix(ops.b.matrix * std::sqrt(kappa_b))});
  for (double beta : {0.0, 1.0, 2.0}) {
    const double lambda = kappa_b * beta / 2.0;
    SparseMatrix drive = (ops.b_dag.matrix - ops.b.matrix) * Complex(0.0, lambda);
    SparseMatrix Lb = (ops.b.matrix + sparse_identity(space.dim()) * beta) * std::sqrt(kappa_b);
    CHECK(max_abs_difference(liouvillian(base + drive, {La, Lb}), ref) < 1e-8);
  }
  // Wrong drive strength does not cancel.
  SparseMatrix drive = (ops.b_dag.matrix - ops.b.matrix) * Complex(0.0, kappa_b);
  SparseMatrix Lb = (ops.b.matrix + sparse_identity(space.dim()) * 1.0) * std::sqrt(kappa_b);
  CHECK(max_abs_difference(liouvillian(base + drive, {La, Lb}), ref) > 0.1);
}

TEST_CASE("Liouvillian matches the direct right-hand side") {
  auto ops = single_mode_operators(5);
  SparseMatrix H = ops.n * 0.7 + ops.x * 0.2;
  SparseMatrix L = ops.a * 0.5;
  CVector v = coherent_state(5, Complex(0.2, 0.1), 1e-3);
  CMatrix rho = v * v.adjoint();
  CMatrix direct = lindblad_rhs(H, {{L, false, 0.0, ""}}, rho);
  CVector vec = liouvillian(H, {L}) * Eigen::Map<CVector>(rho.data(), 25);
  CHECK((Eigen::Map<CMatrix>(vec.data(), 5, 5) - direct).norm() < 1e-13);
}

TEST_CASE("homodyne SME") {
  auto ops = single_mode_operators(8);
  SparseMatrix H = (ops.a_dag * ops.a_dag + ops.a * ops.a) * 0.2 + ops.x * 0.3;
  CVector v0 = fock_state(8, 0);
  CMatrix rho0 = v0 * v0.adjoint();
  std::vector<Observable> obs{{"n", ops.n}, {"p", ops.p}};

  SUBCASE("zero monitored rate reproduces the master equation") {
    std::vector<LindbladChannel> ch{{ops.a * 0.0, true, kPi / 2, "b"}, {ops.a * 0.4, false, 0.0, "a"}};
    CMatrix fin;
    evolve_sme_homodyne(H, ch, rho0, 0.5, {1e-3, 10}, {1, 2}, obs, &fin);
    CMatrix me = evolve_master(H, ch, rho0, 0.5, {1e-3, 1e-6});
    CHECK((fin - me).norm() < 1e-12);
  }
  SUBCASE("reproducible and seed dependent") {
    std::vector<LindbladChannel> ch{{ops.a * 1.0, true, kPi / 2, "b"}};
    auto r1 = evolve_sme_homodyne(H, ch, rho0, 0.3, {1e-3, 10}, {42, 0}, obs);
    auto r2 = evolve_sme_homodyne(H, ch, rho0, 0.3, {1e-3, 10}, {42, 0}, obs);
    auto r3 = evolve_sme_homodyne(H, ch, rho0, 0.3, {1e-3, 10}, {42, 1}, obs);
    CHECK(r1["p"] == r2["p"]);
    CHECK(r1.current == r2.current);
    CHECK(r1["p"] != r3["p"]);
    CHECK(r1.times.size() == 31);
  }
  SUBCASE("ensemble mean converges to the master equation") {
    std::vector<LindbladChannel> ch{{ops.a * 1.0, true, kPi / 2, "b"}, {ops.a * 0.3, false, 0.0, "a"}};
    const int M = 200;
    CMatrix mean = CMatrix::Zero(8, 8);
    for (int k = 0; k < M; ++k) {
      CMatrix fin;
      evolve_sme_homodyne(H, ch, rho0, 1.0, {1e-3, 1000}, {7, static_cast<std::uint64_t>(k)}, {}, &fin);
      mean += fin / static_cast<double>(M);
    }
    CMatrix me = evolve_master(H, ch, rho0, 1.0, {1e-3, 1e-6});
    const double dist = trace_distance(mean, me);
    MESSAGE("SME ensemble trace distance " << dist);
    CHECK(dist <= 5.0 / std::sqrt(double(M)));
  }
  SUBCASE("exactly one monitored channel") {
    std::vector<LindbladChannel> none{{ops.a, false, 0.0, "a"}};
    CHECK_THROWS_AS(evolve_sme_homodyne(H, none, rho0, 0.1, {}, {}, obs), DomainError);
  }
}

TEST_CASE("exact versus RWA dynamics") {
  SUBCASE("g = 0 gives identical states") {
    SystemParams p;
    p.g = 0.0;
    p.delta = 10.0;
    ModeSpace space(10, 8);
    auto r = compare_exact_vs_rwa(p, space, coherent_state(10, 0.4, 1e-6), squeezed_vacuum_pump(8, 0.45, 1e-6), 0.7);
    CHECK(r.fidelity == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("fidelity improves with Delta") {
    ModeSpace space(30, 60);
    CVector s = coherent_state(30, 0.7), b = squeezed_vacuum_pump(60, 0.25);
    double last = 0.0;
    for (double Delta : {25.0, 50.0, 100.0, 150.0}) {
      auto r = compare_exact_vs_rwa(SystemParams::from_targets(Delta, 1.0), space, s, b, 1.0);
      MESSAGE("Delta " << Delta << " fidelity " << r.fidelity);
      CHECK(r.fidelity > last);
      last = r.fidelity;
    }
    // Joint-state fidelity at Delta = 150 from the converged oracle run
    // (0.8957 at 40 x 200 levels); counter-rotating corrections scale as 1/Delta.
    CHECK(last == doctest::Approx(0.897).epsilon(0.005));
  }
}
