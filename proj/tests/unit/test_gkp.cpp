#include <doctest.h>

#include <cmath>
#include <random>

#include "paraqnd/evolution.hpp"
#include "paraqnd/fock.hpp"
#include "paraqnd/gkp.hpp"
#include "paraqnd/hamiltonians.hpp"
#include "paraqnd/linalg.hpp"
#include "paraqnd/metrics.hpp"

using namespace paraqnd;

namespace {

const double kGt = std::sqrt(kPi / 2.0);
const double kS = std::sqrt(2.0 * kPi);

double overlap_fidelity(const GridState& a, const GridState& b) {
  const Complex o = a.psi.dot(b.psi) * a.dx();
  return std::norm(o) / std::pow(a.norm() * b.norm(), 2);
}

CVector fock_displace(const CVector& v, Complex alpha) {
  const SingleModeOperators ops = single_mode_operators(v.size());
  const SparseMatrix gen = alpha * ops.a_dag - std::conj(alpha) * ops.a;
  return expm_multiply(gen, v);
}

}  // namespace

TEST_CASE("general-dyne outcome and modulus") {
  const auto o = GeneralDyneOutcome::make(0.1, kPi / 4.0, kGt, 100.0 * kGt);
  CHECK(o.mu == doctest::Approx(kS).epsilon(1e-12));
  CHECK(o.mu == doctest::Approx(2.5066).epsilon(1e-4));
  CHECK(o.x_phi >= 0.0);
  CHECK(o.x_phi < o.mu);
  // x_phi + n mu solves 2 g~t x = Delta t + phi (mod 2 pi)
  const double lhs = 2.0 * kGt * (o.x_phi + 3.0 * o.mu) - 100.0 * kGt - kPi / 4.0;
  CHECK(std::remainder(lhs, 2.0 * kPi) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(GeneralDyneOutcome::make(0.0, -1.0, 1.0, 0.0).x_phi == doctest::Approx(kPi - 0.5));
  CHECK_THROWS_AS(GeneralDyneOutcome::make(0.0, 0.0, 0.0, 0.0), DomainError);
}

TEST_CASE("GKP target parameters") {
  const double w = width_from_db(15.0);
  CHECK(w == doctest::Approx(0.0889).epsilon(1e-3));
  const double A0 = symmetric_meter_amplitude(w);
  CHECK(A0 == doctest::Approx(3.172).epsilon(1e-3));
  const auto t = GKPTarget::make(w, A0, 0.0);
  CHECK(t.kappa == doctest::Approx(w).epsilon(1e-12));
  CHECK(t.symmetric());
  CHECK_FALSE(GKPTarget::make(w, 2.0 * A0, 0.0).symmetric());
  CHECK(t.spacing == doctest::Approx(kS));
}

TEST_CASE("general-dyne amplitude") {
  // phase argument 0 and eps = 0
  const Complex one = generaldyne_c_amplitude(0.5, 0.0, 2.0 * kGt * 0.5, 3.0, kGt, 0.0);
  CHECK(std::abs(one - Complex(1.0)) < 1e-12);
  CHECK_THROWS_AS(generaldyne_c_amplitude(0.0, -4.0, 0.0, 3.0, kGt, 0.0), DomainError);

  const double gt = 0.9, mu = kPi / gt;
  std::mt19937 eng(3);
  std::uniform_real_distribution<double> ux(-5.0, 5.0);
  for (int i = 0; i < 20; ++i) {
    const double x = ux(eng);
    const Complex c0 = generaldyne_c_amplitude(x, 0.2, 0.7, 2.0, gt, 4.0);
    const Complex c1 = generaldyne_c_amplitude(x + mu, 0.2, 0.7, 2.0, gt, 4.0);
    CHECK(std::abs(c0 - c1) < 1e-12);
  }

  // Comb approximation within one tooth width of each peak.
  const double A0 = 3.172;
  const auto o = GeneralDyneOutcome::make(0.0, kPi / 4.0, kGt, 100.0 * kGt);
  const double kappa = 1.0 / (2.0 * std::sqrt(kPi) * A0);
  double worst = 0.0;
  for (int n = -3; n <= 3; ++n)
    for (double d = -kappa; d <= kappa; d += kappa / 20.0) {
      const double x = o.x_phi + n * o.mu + d;
      const Complex exact = generaldyne_c_amplitude(x, 0.0, kPi / 4.0, A0, kGt, 100.0 * kGt);
      const Complex approx = generaldyne_c_approx(x, o, A0, kGt);
      worst = std::max(worst, std::abs(exact - approx) / std::abs(approx));
    }
  CHECK(worst < 0.05);
}

TEST_CASE("general-dyne Kraus operator") {
  const double A0 = 2.0, eps = 0.3, phi = 1.1, Dt = 7.0;

  SUBCASE("diagonal action on a narrow pump") {
    const double x0 = 0.37;
    const RVector fine = periodic_grid(2.0, 1e-4);
    const GridState narrow = x_squeezed_wavefunction(5e-4, fine, x0);
    const GridState out = apply_diagonal(generaldyne_kraus(eps, phi, A0, kGt, Dt, fine), narrow);
    const Complex c0 = std::sqrt((A0 + eps) / kPi) * generaldyne_c_amplitude(x0, eps, phi, A0, kGt, Dt);
    const CVector expected = c0 * narrow.psi;
    CHECK((out.psi - expected).norm() / expected.norm() < 0.02);
  }

  SUBCASE("resolution of the identity") {
    const double de = 0.01;
    const int nphi = 128;
    for (double x : {-1.3, 0.0, 0.4, 2.2}) {
      double acc = 0.0;
      for (double e = -A0; e <= 8.0; e += de)
        for (int j = 0; j < nphi; ++j) {
          const double ph = 2.0 * kPi * j / nphi;
          acc += (A0 + e) / kPi * std::norm(generaldyne_c_amplitude(x, e, ph, A0, kGt, Dt)) * de *
                 (2.0 * kPi / nphi);
        }
      CHECK(acc == doctest::Approx(1.0).epsilon(0.02));
    }
  }
}

TEST_CASE("outcome density localizes near the meter amplitude") {
  GKPConfig c;
  const double A0 = c.meter_amplitude();
  const GridState pump = p_squeezed_wavefunction(c.width(), periodic_grid(20.0, 0.01));
  const double Dt = 100.0 * kGt;
  const double de = 0.05;
  const int nphi = 32;
  double total = 0.0, near = 0.0;
  for (double e = -A0; e <= 6.0; e += de)
    for (int j = 0; j < nphi; ++j) {
      const double f = generaldyne_density(pump, e, 2.0 * kPi * j / nphi, A0, kGt, Dt) * de * 2.0 * kPi / nphi;
      total += f;
      if (std::abs(e) < 2.0) near += f;
    }
  CHECK(total == doctest::Approx(1.0).epsilon(0.01));
  // eps is close to Gaussian with variance 1/2
  CHECK(near / total > 0.99);
  CHECK(near / total == doctest::Approx(std::erf(2.0)).epsilon(0.005));
}

TEST_CASE("grid displacement matches the Fock displacement") {
  const RVector grid = periodic_grid(12.0, 0.01);
  const GridState vac = x_squeezed_wavefunction(0.5, grid);
  const Complex alpha(0.7, -0.4);
  const GridState moved = displace(vac, alpha);
  const GridState ref = fock_to_grid(coherent_state(40, alpha), grid);
  CHECK((moved.psi - ref.psi).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(moved.norm() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(moved.mean_x() == doctest::Approx(0.7).epsilon(1e-8));

  // <D(alpha)> for the vacuum is exp(-|alpha|^2/2)
  CHECK(std::abs(displacement_expectation(vac, alpha)) == doctest::Approx(std::exp(-0.5 * std::norm(alpha))));

  const GridState edge = x_squeezed_wavefunction(0.5, grid, 11.0);
  CHECK_THROWS_AS(displace(edge, Complex(0.5, 0.0)), GridError);
}

TEST_CASE("grid and Fock representations agree") {
  const RVector grid = periodic_grid(12.0, 0.01);
  const GridState sq = x_squeezed_wavefunction(0.25, grid);
  const CVector c = grid_to_fock(sq, 60);
  CHECK(fidelity(c, x_squeezed_vacuum(60, 0.25)) == doctest::Approx(1.0).epsilon(1e-9));
  const GridState ps = p_squeezed_wavefunction(0.3, grid);
  CHECK(fidelity(grid_to_fock(ps, 60), squeezed_vacuum_pump(60, 0.3)) == doctest::Approx(1.0).epsilon(1e-9));
  const GridState back = fock_to_grid(c, grid);
  CHECK(overlap_fidelity(back, sq) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(grid_to_fock(x_squeezed_wavefunction(0.05, grid), 30), TruncationError);
}

TEST_CASE("analytic GKP state") {
  const double w = width_from_db(15.0);
  const auto t = GKPTarget::make(w, symmetric_meter_amplitude(w), 0.0);
  const RVector grid = periodic_grid(20.0, 0.01);
  // teeth beyond |n| = 8 carry envelope weight below 1e-10
  CHECK(gkp_comb_terms(t) <= 17);
  CHECK(gkp_comb_terms(t) >= 13);
  const GridState g = analytic_gkp_wavefunction(t, grid);
  CHECK(g.norm() == doctest::Approx(1.0));
  CHECK(tooth_spacing(g) == doctest::Approx(kS).epsilon(1e-3));

  const SqueezingReport s = effective_squeezing_db(g);
  CHECK(s.tooth_x.width == doctest::Approx(t.kappa).epsilon(0.01));
  // symmetric: x and p teeth have the same width
  CHECK(s.tooth_p.width == doctest::Approx(s.tooth_x.width).epsilon(0.01));
  REQUIRE(s.modular_x_db.has_value());
  REQUIRE(s.modular_p_db.has_value());
  CHECK(*s.modular_x_db == doctest::Approx(15.0).epsilon(0.01));
  CHECK(*s.modular_p_db == doctest::Approx(15.0).epsilon(0.01));
  CHECK(std::abs(*s.modular_x_db - s.tooth_x_db) < 0.5);
  CHECK(std::abs(*s.modular_p_db - s.tooth_p_db) < 0.5);

  SUBCASE("envelope follows x_phi") {
    const auto shifted = GKPTarget::make(0.2, symmetric_meter_amplitude(0.2), 1.0);
    const GridState gs = analytic_gkp_wavefunction(shifted, grid);
    // envelope centre at -x_phi; teeth stay on the lattice
    CHECK(gs.mean_x() < -0.5);
    const ToothFit f = fit_largest_tooth(gs.x, gs.psi.cwiseAbs2());
    CHECK(std::remainder(f.center, kS) == doctest::Approx(0.0).epsilon(1e-3));
  }

  SUBCASE("single-tooth limit") {
    const auto wide = GKPTarget::make(1.5, 3.0, 0.3);
    CHECK(overlap_fidelity(analytic_gkp_wavefunction(wide, grid), x_squeezed_wavefunction(wide.kappa, grid)) > 0.99);
  }

  SUBCASE("Fock-space target") {
    const CVector f = analytic_gkp_state(0.25, 0.25, 0.4, 160);
    CHECK(f.norm() == doctest::Approx(1.0).epsilon(1e-8));
    const auto mid = GKPTarget::make(0.25, symmetric_meter_amplitude(0.25), 0.4);
    CHECK(overlap_fidelity(fock_to_grid(f, grid), analytic_gkp_wavefunction(mid, grid)) ==
          doctest::Approx(1.0).epsilon(1e-7));
    CHECK_THROWS_AS(analytic_gkp_state(0.25, 0.25, 0.4, 40), TruncationError);
  }
}

TEST_CASE("feedforward displacement") {
  const RVector grid = periodic_grid(15.0, 0.01);
  const GridState s = x_squeezed_wavefunction(0.3, grid, 0.5);
  // x_phi = 0 and A0^2 integer: pure imaginary displacement by -i sqrt(pi/2) A0^2
  const GridState ff = feedforward_displacement(s, 0.0, 2.0);
  const GridState ref = displace(s, Complex(0.0, -std::sqrt(kPi / 2.0) * 4.0));
  CHECK((ff.psi - ref.psi).cwiseAbs().maxCoeff() < 1e-12);
  const GridState moved = feedforward_displacement(s, 0.8, 2.3, 0.4);
  CHECK(moved.norm() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(moved.mean_x() == doctest::Approx(0.5 - 0.8).epsilon(1e-8));
}

TEST_CASE("effective squeezing metrics on Gaussian states") {
  const RVector grid = periodic_grid(20.0, 0.01);
  const SqueezingReport vac = effective_squeezing_db(x_squeezed_wavefunction(0.5, grid));
  CHECK(std::abs(vac.tooth_x_db) < 0.01);
  CHECK(std::abs(vac.tooth_p_db) < 0.01);
  const SqueezingReport sq = effective_squeezing_db(x_squeezed_wavefunction(width_from_db(15.0), grid));
  CHECK(sq.tooth_x_db == doctest::Approx(15.0).epsilon(0.003));
  CHECK(sq.tooth_p_db == doctest::Approx(-15.0).epsilon(0.003));
  // a single narrow x Gaussian has no p comb: the x stabilizer is ~0
  const bool p_comb = sq.modular_p_db.has_value() && *sq.modular_p_db > 5.0;
  CHECK_FALSE(p_comb);
  CHECK_THROWS_AS(fit_largest_tooth(linspace(0.0, 1.0, 5), RVector::Unit(5, 2)), GridError);
}

TEST_CASE("x_b conserved under the effective Hamiltonian") {
  const double u = 0.5 * std::asinh(1.0);
  const ModeSpace space(30, 40);
  const CVector sig = bogoliubov_coherent_state(30, u, 1.0);
  const CVector pump = squeezed_vacuum_pump(40, 0.35);
  const TwoModeState psi0 = TwoModeState::product(sig, pump);
  const ModeOperator H = build_H_eff(100.0, 1.0, u, space);
  const TwoModeState psi = evolve_unitary(H, psi0, kGt);
  const OperatorSet ops = make_operators(space);
  const SparseMatrix x2 = ops.x_b.matrix * ops.x_b.matrix;
  const double m0 = expectation(ops.x_b.matrix, psi0.amplitudes()).real();
  const double m1 = expectation(ops.x_b.matrix, psi.amplitudes()).real();
  const double v0 = expectation(x2, psi0.amplitudes()).real() - m0 * m0;
  const double v1 = expectation(x2, psi.amplitudes()).real() - m1 * m1;
  CHECK(std::abs(m1 - m0) < 1e-6);
  CHECK(std::abs(v1 - v0) < 1e-6);
}

TEST_CASE("GKP protocol at the 15 dB operating point") {
  GKPConfig c;
  const GKPReport r = run_gkp_protocol(c);
  CHECK(r.target.A0 == doctest::Approx(3.172).epsilon(1e-3));
  CHECK(r.target.symmetric());
  CHECK(r.amplitude_residual < 1e-8);
  CHECK(r.signal_top_population < 1e-8);
  CHECK(r.outcome_density > 0.0);
  CHECK(r.fidelity >= 0.9);
  CHECK(r.fidelity == doctest::Approx(0.9968).epsilon(1e-3));
  REQUIRE(r.squeezing.modular_x_db.has_value());
  REQUIRE(r.squeezing.modular_p_db.has_value());
  CHECK(std::abs(*r.squeezing.modular_x_db - 15.0) <= 1.0);
  CHECK(std::abs(*r.squeezing.modular_p_db - 15.0) <= 1.0);
  CHECK(std::abs(r.squeezing.tooth_x_db - 15.0) <= 1.0);
  CHECK(std::abs(r.squeezing.tooth_p_db - 15.0) <= 1.0);
  CHECK(tooth_spacing(r.final_state) == doctest::Approx(kS).epsilon(0.01));
  CHECK(r.final_state.norm() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK((r.signal_final - r.signal_final.adjoint()).norm() < 1e-12);
  CHECK(r.signal_final.trace().real() == doctest::Approx(1.0));

  SUBCASE("modular projection") {
    const GridState& post = r.post_measurement;
    const double kappa = r.target.kappa, mu = r.outcome.mu;
    double inside = 0.0;
    for (Index i = 0; i < post.x.size(); ++i) {
      const double d = std::remainder(post.x[i] - r.outcome.x_phi, mu);
      if (std::abs(d) <= 3.0 * kappa) inside += std::norm(post.psi[i]) * post.dx();
    }
    CHECK(inside >= 0.95);
  }

  SUBCASE("determinism") {
    const GKPReport again = run_gkp_protocol(c);
    CHECK(again.fidelity == r.fidelity);
    CHECK(again.final_state.psi == r.final_state.psi);
    CHECK(*again.squeezing.modular_x_db == *r.squeezing.modular_x_db);
  }

  SUBCASE("comb approximation pathway") {
    CHECK(overlap_fidelity(run_gkp_approximate(c), r.final_state) > 0.98);
    GKPConfig big = c;
    big.A0 = 4.0;
    CHECK(overlap_fidelity(run_gkp_approximate(big), run_gkp_protocol(big).final_state) > 0.98);
  }

  SUBCASE("zero-point phase shifts the comb by half a p period") {
    GKPConfig raw = c;
    raw.zero_point_correction = false;
    CHECK(run_gkp_protocol(raw).fidelity < 0.01);
  }
}

TEST_CASE("GKP protocol edge cases") {
  SUBCASE("unsqueezed pump leaves one tooth") {
    GKPConfig c;
    c.w = 0.5;
    c.A0 = symmetric_meter_amplitude(width_from_db(15.0));
    const GKPReport r = run_gkp_protocol(c);
    const GridState single = x_squeezed_wavefunction(r.target.kappa, r.final_state.x);
    CHECK(overlap_fidelity(r.final_state, single) > 0.98);
  }
  SUBCASE("zero-probability outcome") {
    GKPConfig c;
    c.epsilon = -c.meter_amplitude();
    CHECK_THROWS_AS(run_gkp_protocol(c), DomainError);
  }
  SUBCASE("signal truncation") {
    GKPConfig c;
    c.n_signal = 20;
    CHECK_THROWS_AS(run_gkp_protocol(c), TruncationError);
  }
}

TEST_CASE("grid pipeline against a Fock-space oracle") {
  // Moderate meter so every term fits in a few hundred pump levels.
  GKPConfig c;
  c.A0 = 1.0;
  c.w = 0.3;
  c.epsilon = 0.0;
  c.phi = 0.3;
  c.n_signal = 40;
  c.grid_extent = 15.0;
  const GKPReport r = run_gkp_protocol(c);

  const double u = r.u, t = kGt;
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(CMatrix(bogoliubov_number(40, u)));
  const CVector a = eig.eigenvectors().adjoint() * bogoliubov_coherent_state(40, u, 1.0);
  const CVector m = eig.eigenvectors().adjoint() * bogoliubov_coherent_state(40, u, std::polar(1.0, 0.3));
  const Index np = 300;
  const CVector pump = squeezed_vacuum_pump(np, 0.3);
  CVector post = CVector::Zero(np);
  for (Index k = 0; k < 40; ++k) {
    const Complex ck = std::conj(m[k]) * a[k];
    if (std::abs(ck) < 1e-10) continue;
    const double L = eig.eigenvalues()[k];
    // exp(2 i g~t (L + 1/2) x_b) = D(i g~t (L + 1/2))
    post += ck * std::exp(-kI * (100.0 * t * L)) * fock_displace(pump, Complex(0.0, kGt * (L + 0.5)));
  }
  CVector fin = fock_displace(post, Complex(0.0, -kGt * std::floor(1.0)));
  fin = fock_displace(fin, Complex(-r.outcome.x_phi, 0.0));
  fin = fock_displace(fin, Complex(0.0, -kGt / 2.0));
  fin.normalize();
  CHECK(top_population(fin) < 1e-8);
  const CVector grid_fock = grid_to_fock(r.final_state, np, 1e-6);
  CHECK(fidelity(grid_fock, fin) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("outcome sampling") {
  GKPConfig c;
  c.grid_extent = 16.0;
  const auto s1 = sample_generaldyne_outcomes(c, 60, 11);
  const auto s2 = sample_generaldyne_outcomes(c, 60, 11);
  const auto s3 = sample_generaldyne_outcomes(c, 60, 12);
  REQUIRE(s1.size() == 60);
  int near = 0;
  bool same = true, differ = false;
  for (std::size_t i = 0; i < s1.size(); ++i) {
    same = same && s1[i].epsilon == s2[i].epsilon && s1[i].phi == s2[i].phi;
    differ = differ || s1[i].epsilon != s3[i].epsilon;
    if (std::abs(s1[i].epsilon) < 2.0) ++near;
    CHECK(s1[i].phi >= 0.0);
    CHECK(s1[i].phi < 2.0 * kPi);
  }
  CHECK(same);
  CHECK(differ);
  CHECK(near >= 57);
}
