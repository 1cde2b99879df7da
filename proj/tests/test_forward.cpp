#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sls/forward.hpp"

using namespace sls;

namespace {

OpticalParams lysozyme_like() {
  OpticalParams p;
  p.dndc = 0.20;
  p.constants.lambda = 657e-7;
  p.constants.n0 = 1.33;
  p.constants.monomer_mass = 14307;
  return p;
}

double rel_err(double a, long double b) {
  const long double denom = std::max<long double>(std::abs(b), 1e-300L);
  return static_cast<double>(std::abs(static_cast<long double>(a) - b) / denom);
}

}  // namespace

TEST_CASE("kstar against the extended-precision oracle") {
  const auto p = lysozyme_like();
  const long double expected =
      oracle::kstar_ld(1.33L, 0.20L, 657e-7L, 6.022e23L);
  CHECK(rel_err(kstar(p), expected) < 1e-12);
}

TEST_CASE("kstar quadratic scaling in dndc") {
  auto p = lysozyme_like();
  const double base = kstar(p);
  p.dndc = 0.0;
  CHECK(kstar(p) == 0.0);
  p.dndc = 0.40;
  CHECK(kstar(p) == doctest::Approx(4.0 * base).epsilon(1e-12));
}

TEST_CASE("rayleigh basics") {
  const auto p = lysozyme_like();
  CHECK(rayleigh(0.0, 14307, 1e-4, p) == 0.0);

  // With no interaction the curve is strictly linear in c.
  const double r1 = rayleigh(0.01, 14307, 0.0, p);
  const double r2 = rayleigh(0.02, 14307, 0.0, p);
  CHECK(r2 == doctest::Approx(2.0 * r1).epsilon(1e-12));

  // Case-study-like point against the closed-form oracle.
  OpticalParams lys = p;
  lys.dndc = 0.1970;
  const long double expected = oracle::rayleigh_ld(
      0.005L, 14307.0L, 35.521e-5L, 1.33L, 0.1970L, 657e-7L, 6.022e23L);
  CHECK(rel_err(rayleigh(0.005, 14307, 35.521e-5, lys), expected) < 1e-12);
}

TEST_CASE("delta_n basics") {
  auto p = lysozyme_like();
  p.dndc = 0.1970;
  CHECK(delta_n(0.0, p) == 0.0);
  CHECK(delta_n(0.010, p) == doctest::Approx(0.00197).epsilon(1e-12));
  CHECK(delta_n(0.020, p) == doctest::Approx(2.0 * delta_n(0.010, p)).epsilon(1e-14));
}

TEST_CASE("forward model matches the oracle over a random valid grid") {
  // Valid means inside the dilute small-particle regime the expansion is for:
  // the interaction term stays clearly away from cancelling the linear term.
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int tested = 0;
  while (tested < 1000) {
    OpticalParams p;
    p.constants.n0 = 1.0 + 0.8 * u01(gen);
    p.constants.lambda = (300.0 + 500.0 * u01(gen)) * 1e-7;
    p.constants.monomer_mass = 1e3 + 1e5 * u01(gen);
    p.dndc = 0.01 + 0.5 * u01(gen);
    const double c = 0.05 * u01(gen);
    const double mw = p.constants.monomer_mass * (1.0 + 19.0 * u01(gen));
    const double a2 = (u01(gen) - 0.5) * 2e-3;
    if (std::abs(2.0 * a2 * mw * c) > 0.9) continue;
    ++tested;

    const long double ks_exp = oracle::kstar_ld(p.constants.n0, p.dndc,
                                                p.constants.lambda, 6.022e23L);
    CHECK(rel_err(kstar(p), ks_exp) < 1e-12);

    const long double r_exp =
        oracle::rayleigh_ld(c, mw, a2, p.constants.n0, p.dndc,
                            p.constants.lambda, 6.022e23L);
    CHECK(rel_err(rayleigh(c, mw, a2, p), r_exp) < 1e-12);

    const long double dn_exp = static_cast<long double>(c) * p.dndc;
    CHECK(rel_err(delta_n(c, p), dn_exp) < 1e-12);
  }
}

TEST_CASE("rayleigh(c)/c tends to kstar * Mw as c -> 0") {
  const auto p = lysozyme_like();
  const double mw = 14307;
  const double a2 = 5e-4;
  const double limit = kstar(p) * mw;
  const double c = 1e-8;
  CHECK(rayleigh(c, mw, a2, p) / c ==
        doctest::Approx(limit).epsilon(1e-6));
}

TEST_CASE("slope at small c is positive regardless of the sign of A2") {
  const auto p = lysozyme_like();
  const double mw = 14307;
  const double c = 1e-4, h = 1e-8;
  for (double a2 : {-1e-2, -1e-4, 0.0, 1e-4, 1e-2}) {
    const double slope =
        (rayleigh(c + h, mw, a2, p) - rayleigh(c - h, mw, a2, p)) / (2 * h);
    CHECK(slope > 0.0);
  }
}

TEST_CASE("rayleigh is concave in c for positive A2 on the stated interval") {
  const auto p = lysozyme_like();
  const double mw = 14307;
  const double a2 = 1e-3;
  const double upper = 1.0 / (4.0 * a2 * mw);
  for (int i = 1; i <= 20; ++i) {
    const double c = upper * i / 21.0;
    const double h = upper * 1e-4;
    const double second = rayleigh(c + h, mw, a2, p) -
                          2.0 * rayleigh(c, mw, a2, p) +
                          rayleigh(c - h, mw, a2, p);
    CHECK(second <= 1e-18);
  }
}
