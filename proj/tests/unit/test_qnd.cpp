#include <doctest.h>

#include <cmath>

#include "paraqnd/metrics.hpp"
#include "paraqnd/qnd.hpp"

using namespace paraqnd;

namespace {
const double kU = 0.5 * std::asinh(1.0);
}

TEST_CASE("Kraus amplitude") {
  const double w = 0.25, d = 1.0;
  const Complex peak = kraus_amplitude(2, d * 2.5, d, w, 0.0);
  CHECK(std::norm(peak) == doctest::Approx(1.0 / (std::sqrt(2.0 * kPi) * w)));
  CHECK(std::norm(peak) == doctest::Approx(1.5958).epsilon(1e-4));
  CHECK(peak.imag() == 0.0);
  CHECK(peak.real() > 0.0);
  for (Index N : {0, 1, 4}) {
    double integral = 0.0;
    for (double p = -10.0; p < 15.0; p += 0.001) integral += std::norm(kraus_amplitude(N, p, d, w, 3.0)) * 0.001;
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-9));
  }
  // exp(-i Delta t N) phase
  CHECK(std::arg(kraus_amplitude(1, 1.5, d, w, 0.4)) == doctest::Approx(-0.4));
  CHECK_THROWS_AS(kraus_amplitude(0, 0.0, 1.0, 0.0, 0.0), DomainError);
}

TEST_CASE("outcome grid") {
  RVector g = default_outcome_grid(1.0, 0.25, 6);
  CHECK(g[0] == -2.0);
  CHECK(g[1] - g[0] == doctest::Approx(0.025));
  CHECK(g[g.size() - 1] == doctest::Approx(6.5 + 1.5));
  RVector weights(5);
  weights << 0.5, 0.3, 0.2 - 1e-9, 0.5e-9, 0.5e-9;
  CHECK(choose_n_max(weights, 1e-8) == 2);
}

TEST_CASE("Kraus operators") {
  SUBCASE("u = 0 is diagonal in the Fock basis") {
    auto f = KrausFamily::make(1.0, 0.25, 0.3, 0.0, 5);
    CMatrix M = kraus_operator(1.2, f, 10);
    CHECK((M - CMatrix(M.diagonal().asDiagonal())).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(std::abs(M(1, 1) - kraus_amplitude(1, 1.2, 1.0, 0.25, 0.3)) < 1e-15);
    CHECK(std::abs(M(7, 7)) == 0.0);
  }
  SUBCASE("reweights the squeezed-number expansion") {
    const Index n = 40;
    auto f = KrausFamily::make(1.0, 0.25, 150.0, kU, 8);
    CVector alpha = coherent_state(n, 0.7);
    CVector out = kraus_operator(1.7, f, n) * alpha;
    for (Index N = 0; N <= 4; ++N) {
      CVector basis = squeezed_number_state(n, kU, N);
      const Complex expected = kraus_amplitude(N, 1.7, 1.0, 0.25, 150.0) * basis.dot(alpha);
      CHECK(std::abs(basis.dot(out) - expected) < 1e-9);
    }
  }
  SUBCASE("far-apart outcomes select disjoint N") {
    const Index n = 40;
    auto f = KrausFamily::make(1.0, 0.125, 0.0, kU, 8);
    CVector alpha = coherent_state(n, 0.7);
    CVector a = (kraus_operator(1.5, f, n) * alpha).normalized();
    CVector b = (kraus_operator(3.5, f, n) * alpha).normalized();
    CHECK(fidelity(a, b) < 1e-6);
  }
}

TEST_CASE("POVM purity") {
  const double d = 1.0;
  SUBCASE("peak centres and midpoints") {
    auto f = KrausFamily::make(d, 0.25, 0.0, kU, 8);
    const double oracle = (1.0 + 2.0 * std::exp(-16.0)) / std::pow(1.0 + 2.0 * std::exp(-8.0), 2);
    CHECK(oracle == doctest::Approx(0.9987).epsilon(1e-4));
    CHECK(povm_purity(2.5, f) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(povm_purity(2.5, f) >= 0.99);
    for (Index N = 0; N < 6; ++N) CHECK(std::abs(povm_purity(d * (N + 1), f) - 0.5) < 1e-3);
  }
  SUBCASE("narrower pumps give purer POVMs at peak centres") {
    auto f2 = KrausFamily::make(d, 0.5, 0.0, kU, 8);
    auto f4 = KrausFamily::make(d, 0.25, 0.0, kU, 8);
    auto f8 = KrausFamily::make(d, 0.125, 0.0, kU, 8);
    for (Index N = 0; N < 6; ++N) {
      const double p = d * (N + 0.5);
      CHECK(povm_purity(p, f8) > povm_purity(p, f4));
      CHECK(povm_purity(p, f4) > povm_purity(p, f2));
    }
  }
  SUBCASE("formula matches the matrix definition on the grid") {
    auto f = KrausFamily::make(d, 0.25, 150.0, kU, 6);
    double worst = 0.0;
    for (Index i = 0; i < f.grid.size(); i += 7) {
      const double p = f.grid[i];
      worst = std::max(worst, std::abs(povm_purity(p, f) - povm_purity_matrix(povm_element(p, f, 40))));
    }
    CHECK(worst < 1e-10);
  }
  SUBCASE("vanishing amplitudes") {
    auto f = KrausFamily::make(d, 0.01, 0.0, 0.0, 2);
    CHECK_THROWS_AS(povm_purity(-50.0, f), DomainError);
  }
}

TEST_CASE("POVM completeness converges") {
  const Index n = 40;
  const double d = 1.0, w = 0.25;
  auto f = KrausFamily::make(d, w, 150.0, kU, 6);
  CMatrix V = squeeze_operator(n, kU).leftCols(7);
  CMatrix projector = V * V.adjoint();
  // Error falls as dp halves until it reaches the floor set by the grid range.
  double last = 1.0;
  for (double dp : {2.0 * w, w, w / 2.0, w / 10.0}) {
    CMatrix sum = CMatrix::Zero(n, n);
    for (double p = f.grid[0]; p <= f.grid[f.grid.size() - 1] + 1e-12; p += dp) sum += povm_element(p, f, n) * dp;
    const double err = (sum - projector).norm();
    MESSAGE("dp " << dp << " completeness error " << err);
    CHECK(err <= std::max(last, 1e-8));
    last = err;
  }
  CHECK(last < 1e-3);
  // Widening the range tightens the floor.
  auto wide = f;
  wide.grid = RVector::LinSpaced(1601, -6.0, 14.0);
  CMatrix sum = CMatrix::Zero(n, n);
  for (Index i = 0; i < wide.grid.size(); ++i) sum += povm_element(wide.grid[i], wide, n) * (20.0 / 1600.0);
  CHECK((sum - projector).norm() < last);
}

TEST_CASE("outcome distribution") {
  const Index n = 40;
  auto f = KrausFamily::make(1.0, 0.25, 0.0, kU, 24);
  SUBCASE("squeezed vacuum gives one Gaussian") {
    RVector P = outcome_distribution(squeezed_number_state(n, kU, 0), f);
    double mass = P.sum() * f.dp, mean = 0.0, var = 0.0;
    for (Index i = 0; i < P.size(); ++i) mean += f.grid[i] * P[i] * f.dp;
    for (Index i = 0; i < P.size(); ++i) var += (f.grid[i] - mean) * (f.grid[i] - mean) * P[i] * f.dp;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(mean == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(std::sqrt(var) == doctest::Approx(0.25).epsilon(1e-6));
  }
  SUBCASE("coherent input gives a comb") {
    RVector P = outcome_distribution(coherent_state(n, 0.7), f);
    CHECK(std::abs(P.sum() * f.dp - 1.0) < 1e-3);
    CHECK((P.array() >= 0.0).all());
    // local maxima near d(N + 1/2) and minima near d(N + 1)
    auto at = [&](double p) { return P[static_cast<Index>(std::llround((p - f.grid[0]) / f.dp))]; };
    for (Index N = 0; N < 3; ++N) CHECK(at(N + 0.5) > 2.0 * at(N + 1.0));
  }
}

TEST_CASE("conditional states") {
  const Index n = 40;
  SUBCASE("peak outcome projects close to N_a") {
    auto f = KrausFamily::make(1.0, 0.25, 150.0, kU, 12);
    auto o = apply_measurement(coherent_state(n, 0.7), 1.5, f);
    CHECK(o.nearest == 1);
    CHECK(o.fidelity > 0.9);
    CHECK(o.posterior.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fidelity(o.state, squeezed_number_state(n, kU, 1)) == doctest::Approx(o.fidelity).epsilon(1e-9));
  }
  SUBCASE("u = 0 with a Fock-diagonal input gives a Fock state") {
    auto f = KrausFamily::make(1.0, 0.1, 0.0, 0.0, 5);
    CVector in = (fock_state(10, 0) + fock_state(10, 2) + fock_state(10, 4)).normalized();
    auto o = apply_measurement(in, 2.5, f);
    CHECK(fidelity(o.state, fock_state(10, 2)) > 1.0 - 1e-12);
  }
  SUBCASE("midpoint outcome keeps two components") {
    auto f = KrausFamily::make(1.0, 0.25, 0.0, kU, 5);
    CVector in = (squeezed_number_state(n, kU, 1) + squeezed_number_state(n, kU, 2)).normalized();
    auto o = apply_measurement(in, 2.0, f);
    CHECK(o.posterior[1] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(o.posterior[2] == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("repeatability in the projective limit") {
    auto f = KrausFamily::make(1.0, 0.125, 150.0, kU, 12);
    auto once = apply_measurement(coherent_state(n, 0.7), 2.5, f);
    auto twice = apply_measurement(once.state, 2.5, f);
    CHECK(1.0 - fidelity(once.state, twice.state) < 1e-6);
  }
  SUBCASE("zero probability") {
    auto f = KrausFamily::make(1.0, 0.01, 0.0, 0.0, 3);
    CHECK_THROWS_AS(apply_measurement(fock_state(10, 0), 40.0, f), DomainError);
  }
}

TEST_CASE("squeezing sandwich") {
  const Index n = 40;
  CVector psi = coherent_state(n, Complex(0.4, 0.3));
  CHECK((basis_transform_sandwich(psi, CMatrix::Identity(n, n)) - psi).norm() == 0.0);
  CMatrix S = squeeze_operator(n, kU);
  for (Index N = 0; N < 4; ++N)
    CHECK(fidelity(basis_transform_sandwich(squeezed_number_state(n, kU, N), S), fock_state(n, N)) > 1.0 - 1e-6);
  // Bogoliubov number becomes the plain number operator.
  CMatrix na = CMatrix(bogoliubov_number(n, kU));
  CMatrix plain = basis_transform_sandwich(na, S);
  CHECK((plain - CMatrix(single_mode_operators(n).n)).topLeftCorner(6, 6).cwiseAbs().maxCoeff() < 1e-6);
  // Outcome statistics of the squeezed-basis measurement equal the Fock-basis
  // statistics of the transformed input.
  auto fu = KrausFamily::make(1.0, 0.25, 0.0, kU, 12);
  auto f0 = KrausFamily::make(1.0, 0.25, 0.0, 0.0, 12);
  RVector a = outcome_distribution(psi, fu);
  RVector b = outcome_distribution(basis_transform_sandwich(psi, S), f0);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(basis_transform_sandwich(psi, CMatrix(2.0 * S)), DomainError);
}

TEST_CASE("QND protocol at reduced size") {
  SUBCASE("Fock vacuum input populates even N_a only") {
    // |0> = S(-u)-squeezed in the Bogoliubov basis: P(N_a = 0) = 1/cosh u.
    QNDConfig c;
    c.alpha = 0.0;
    c.n_signal = 30;
    c.n_pump = 120;
    c.evolved_tolerance = 1e-4;  // only the first bins are inspected
    auto d = run_qnd_protocol(c);
    const double p0 = 1.0 / std::cosh(d.u);
    // Bin [0, 1) holds erf(sqrt 2) of the N_a = 0 Gaussian (mean 0.5, std 0.25).
    CHECK(d.bins[0].probability == doctest::Approx(p0 * std::erf(std::sqrt(2.0))).epsilon(2e-3));
    CHECK(d.bins[0].fidelity > 0.999);
    CHECK(d.bins[1].probability < 0.03);
  }
  SUBCASE("full evolution matches the Kraus prediction") {
    QNDConfig c;
    c.alpha = 0.4;
    c.n_signal = 40;
    c.n_pump = 160;
    c.evolved_tolerance = 1e-4;
    auto d = run_qnd_protocol(c);
    auto cmp = compare_with_kraus(d, 20, 0.01);
    CHECK(cmp.outcomes.size() == 20);
    CHECK(cmp.min_fidelity > 0.999);
    CHECK((d.probability - d.kraus_probability).cwiseAbs().maxCoeff() < 1e-3);
  }
  SUBCASE("edge of the pump truncation is detected") {
    QNDConfig c;
    c.n_signal = 40;
    c.n_pump = 30;
    CHECK_THROWS_AS(run_qnd_protocol(c), TruncationError);
  }
}
