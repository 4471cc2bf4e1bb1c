#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "riesz1d/kernel.hpp"
#include "riesz1d/mollify.hpp"
#include "riesz1d/potential.hpp"
#include "riesz1d/rng.hpp"

using namespace riesz;

namespace {
double bump_raw(double t) {
  return std::fabs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0;
}
}  // namespace

TEST_CASE("bump normalization against independent quadrature") {
  const Mollifier& m = Mollifier::standard();
  const double z = 2.0 * oracle::simpson(bump_raw, 0.0, 1.0, 1e-13);
  CHECK(m.Z() == doctest::Approx(z).epsilon(1e-11));
  CHECK(m.Z() == doctest::Approx(0.44399381616807937).epsilon(1e-11));
  // unit mass
  const double mass =
      oracle::simpson([&](double t) { return m.rho(t); }, -1.0, 1.0, 1e-12);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("bump shape facts") {
  const Mollifier& m = Mollifier::standard();
  CHECK(m.rho(0.0) == doctest::Approx(std::exp(-1.0) / m.Z()).epsilon(1e-13));
  CHECK(m.rho(0.0) <= 1.0);
  CHECK(m.rho(1.0) == 0.0);
  CHECK(m.rho(-1.2) == 0.0);
  CHECK(m.rho(0.3) == m.rho(-0.3));
  // strictly decreasing on (0,1)
  double prev = m.rho(0.0);
  for (double t = 0.05; t < 1.0; t += 0.05) {
    CHECK(m.rho(t) < prev);
    prev = m.rho(t);
  }
  for (double t : {0.2, 0.55, 0.9}) CHECK(m.rho_prime(t) < 0.0);
}

TEST_CASE("bump derivatives match finite differences") {
  const Mollifier& m = Mollifier::standard();
  for (double t : {-0.7, -0.2, 0.0, 0.35, 0.8}) {
    CAPTURE(t);
    const double fd1 =
        oracle::fd_derivative([&](double u) { return m.rho(u); }, t, 1e-4);
    CHECK(m.rho_prime(t) == doctest::Approx(fd1).epsilon(1e-7));
    const double fd2 = oracle::fd_derivative(
        [&](double u) { return m.rho_prime(u); }, t, 1e-4);
    CHECK(m.rho_second(t) == doctest::Approx(fd2).epsilon(1e-6));
  }
  CHECK(m.rho_prime_l1() == doctest::Approx(2.0 * m.rho(0.0)).epsilon(1e-13));
  // |rho''| integral: cross-check by fine scan
  double tv = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double a = -1.0 + 2.0 * i / n, b = -1.0 + 2.0 * (i + 1) / n;
    tv += std::fabs(m.rho_prime(b) - m.rho_prime(a));
  }
  CHECK(m.rho_second_l1() == doctest::Approx(tv).epsilon(1e-5));
}

TEST_CASE("tail integral endpoints and interior value") {
  const Mollifier& m = Mollifier::standard();
  CHECK(m.tail_integral(-1.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(m.tail_integral(0.0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(m.tail_integral(1.0) == 0.0);
  CHECK(m.tail_integral(2.0) == 0.0);
  const double q =
      oracle::simpson([&](double t) { return m.rho(t); }, 0.5, 1.0, 1e-12);
  CHECK(m.tail_integral(0.5) == doctest::Approx(q).epsilon(1e-9));
  // monotone nonincreasing in t0
  CHECK(m.tail_integral(0.2) > m.tail_integral(0.6));
}

TEST_CASE("mollified uniform density keeps the plateau and mass") {
  GridDensity f = GridDensity::uniform(-1.0, 1.0, 401);
  MollifiedDensity fd(f, 0.25);
  CHECK(fd.support_lo() == doctest::Approx(-1.25));
  CHECK(fd.support_hi() == doctest::Approx(1.25));
  // well inside, the convolution sees a constant: value 1/2, flat
  for (double x : {-0.5, 0.0, 0.6}) {
    CAPTURE(x);
    CHECK(fd.value(x) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(fd.deriv(x) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(fd.deriv2(x) == doctest::Approx(0.0).epsilon(1e-8));
  }
  // at the original edge, exactly half the plateau
  CHECK(fd.value(1.0) == doctest::Approx(0.25).epsilon(1e-10));
  // outside the fattened support
  CHECK(fd.value(1.3) == 0.0);
  // total mass preserved
  const double mass = oracle::simpson([&](double x) { return fd.value(x); },
                                      fd.support_lo(), fd.support_hi(), 1e-11);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mollified derivatives agree with finite differences of value") {
  Rng rng(17);
  GridDensity f = oracle::random_bump_density(rng, -1.0, 1.0, 201);
  MollifiedDensity fd(f, 0.15);
  for (double x : {-0.8, -0.3, 0.1, 0.62, 1.05}) {
    CAPTURE(x);
    const double fd1 =
        oracle::fd_derivative([&](double u) { return fd.value(u); }, x, 1e-4);
    CHECK(fd.deriv(x) == doctest::Approx(fd1).epsilon(1e-6));
    const double fd2 =
        oracle::fd_derivative([&](double u) { return fd.deriv(u); }, x, 1e-4);
    CHECK(fd.deriv2(x) == doctest::Approx(fd2).epsilon(1e-5));
  }
}

TEST_CASE("grid mollification preserves mass and matches the exact convolution") {
  Rng rng(5);
  GridDensity f = oracle::random_bump_density(rng, -1.0, 1.0, 301);
  const double delta = 0.2;
  GridDensity out = mollify(f, delta);
  CHECK(out.mass() == doctest::Approx(f.mass()).epsilon(1e-9));
  CHECK(out.a() <= f.a() - delta + 1e-12);
  CHECK(out.b() >= f.b() + delta - 1e-12);
  MollifiedDensity exact(f, delta);
  for (std::size_t i = 0; i < out.n(); i += 37) {
    CAPTURE(i);
    CHECK(out[i] ==
          doctest::Approx(exact.value(out.node(i))).epsilon(1e-10));
  }
}

TEST_CASE("mollification preconditions") {
  GridDensity f = GridDensity::uniform(-1.0, 1.0, 101);  // h = 0.02
  CHECK_THROWS_AS(mollify(f, 0.05), std::invalid_argument);  // < 4h
  CHECK_THROWS_AS(mollify(f, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(MollifiedDensity(f, -0.1), std::invalid_argument);
  CHECK_NOTHROW(mollify(f, 0.08));
}

TEST_CASE("slope bound holds across random densities") {
  Rng rng(99);
  for (int trial = 0; trial < 12; ++trial) {
    CAPTURE(trial);
    GridDensity f = oracle::random_bump_density(rng, -1.0, 1.0, 151);
    const double delta = 0.1 + 0.3 * rng.uniform();
    DerivativeBoundReport rep = derivative_bound_check(f, delta);
    CHECK(rep.ok);
    CHECK(rep.bound == doctest::Approx(2.0 * f.max_abs() / delta));
    CHECK(rep.max_abs_deriv <= rep.bound * (1.0 + 1e-9));
    CHECK(rep.argmax >= f.a() - delta);
    CHECK(rep.argmax <= f.b() + delta);
  }
}

TEST_CASE("potential of mollified density equals mollified potential") {
  Kernel k = Kernel::power_law(2.0, 0.0);
  certify_hypotheses(k);
  GridDensity f = GridDensity::uniform(-1.0, 1.0, 401);
  std::vector<double> xs;
  for (double x = -1.4; x <= 1.4; x += 0.2) xs.push_back(x);
  CommutationReport rep = potential_commutation_check(k, f, 0.25, xs);
  REQUIRE(rep.xs.size() == xs.size());
  CHECK(rep.max_discrepancy <= 1e-6);
  for (std::size_t i = 0; i < rep.xs.size(); ++i)
    CHECK(rep.lhs[i] == doctest::Approx(rep.rhs[i]).epsilon(1e-6));
}

TEST_CASE("commutation survives a singular kernel and a rough density") {
  Kernel k = Kernel::power_law(2.0, -0.5);
  certify_hypotheses(k);
  Rng rng(7);
  GridDensity f = oracle::random_bump_density(rng, -1.0, 1.0, 401);
  std::vector<double> xs{-0.9, -0.35, 0.0, 0.42, 1.1};
  CommutationReport rep = potential_commutation_check(k, f, 0.2, xs);
  CHECK(rep.max_discrepancy <= 1e-6);
}
