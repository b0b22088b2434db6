#include <doctest.h>

#include <cmath>

#include "paraqnd/params.hpp"

using namespace paraqnd;

TEST_CASE("squeezing dB rule") {
  CHECK(squeezing_db(0.5) == doctest::Approx(0.0));
  CHECK(squeezing_db(0.25) == doctest::Approx(6.0206).epsilon(1e-4));
  CHECK(width_from_db(15.0) == doctest::Approx(0.0889).epsilon(1e-3));
  CHECK(squeezing_db(width_from_db(15.0)) == doctest::Approx(15.0));
}

TEST_CASE("bogoliubov_params") {
  SUBCASE("no mismatch squeezing") {
    auto b = bogoliubov_params(7.0, 0.0);
    CHECK(b.Delta == doctest::Approx(7.0));
    CHECK(b.u == 0.0);
    CHECK(b.g_tilde == 0.0);
  }
  SUBCASE("figure-one parameters") {
    // Independent oracle: sinh 2u = 1 means cosh 2u = sqrt 2 and u = asinh(1)/2.
    const double delta = 150.0 * std::sqrt(2.0);
    auto b = bogoliubov_params(delta, 150.0);
    CHECK(b.Delta == doctest::Approx(150.0).epsilon(1e-12));
    CHECK(b.u == doctest::Approx(0.5 * std::log(1.0 + std::sqrt(2.0))).epsilon(1e-12));
    CHECK(b.u == doctest::Approx(0.4407).epsilon(1e-4));
    CHECK(b.g_tilde == doctest::Approx(1.0).epsilon(1e-12));
    auto rounded = bogoliubov_params(212.132, 150.0);
    CHECK(rounded.Delta == doctest::Approx(150.0).epsilon(1e-5));
  }
  SUBCASE("defining relations hold to 1e-12") {
    const double delta = 3.7, r = 2.9, g = 1.3;
    auto b = bogoliubov_params(delta, r, g);
    CHECK(std::abs(b.Delta * b.Delta - (delta * delta - r * r)) < 1e-12);
    CHECK(std::abs(std::tanh(2.0 * b.u) - r / delta) < 1e-12);
    CHECK(std::abs(b.g_tilde - g * std::sinh(2.0 * b.u)) < 1e-12);
  }
  SUBCASE("approach to r = delta diverges") {
    auto b = bogoliubov_params(1.0, 1.0 - 1e-9);
    CHECK(b.u > 5.0);
    CHECK(b.g_tilde > 1e3);
  }
  SUBCASE("domain errors") {
    CHECK_THROWS_AS(bogoliubov_params(1.0, 1.0), DomainError);
    CHECK_THROWS_AS(bogoliubov_params(1.0, 2.0), DomainError);
    CHECK_THROWS_AS(bogoliubov_params(1.0, -0.1), DomainError);
    CHECK_THROWS_WITH(bogoliubov_params(1.0, 1.0), doctest::Contains("Bogoliubov transform undefined"));
  }
}

TEST_CASE("params_from_targets round trip") {
  auto m = params_from_targets(150.0, 1.0);
  CHECK(m.delta == doctest::Approx(212.132).epsilon(1e-6));
  CHECK(m.r == doctest::Approx(150.0));
  auto m4 = params_from_targets(100.0, 1.5);
  CHECK(m4.delta == doctest::Approx(180.28).epsilon(1e-4));
  CHECK(m4.r == doctest::Approx(150.0));
  auto m0 = params_from_targets(42.0, 0.0);
  CHECK(m0.delta == 42.0);
  CHECK(m0.r == 0.0);
  for (double gt : {0.1, 1.0, 1.5, 4.0}) {
    auto mm = params_from_targets(80.0, gt);
    auto b = bogoliubov_params(mm.delta, mm.r);
    CHECK(std::abs(b.Delta - 80.0) < 1e-10 * 80.0);
    CHECK(std::abs(b.g_tilde - gt) < 1e-10);
  }
}

TEST_CASE("SystemParams from targets") {
  auto p = SystemParams::from_targets(150.0, 1.0);
  CHECK(p.r() == doctest::Approx(150.0));
  CHECK(p.beta == doctest::Approx(75.0));
  CHECK(p.Delta() == doctest::Approx(150.0));
  CHECK(p.g_tilde() == doctest::Approx(1.0));
}
