#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "riesz1d/measure.hpp"
#include "riesz1d/rng.hpp"

using namespace riesz;

TEST_CASE("grid density basics") {
  GridDensity f = GridDensity::uniform(-1.0, 1.0, 201);
  CHECK(f.mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.h() == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(f.interp(0.123) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f.interp(-3.0) == 0.0);
  CHECK(f.interp(1.5) == 0.0);
  CHECK(f.max_abs() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f.node(0) == -1.0);
  CHECK(f.node(200) == 1.0);
  CHECK_FALSE(f.is_signed());
}

TEST_CASE("interpolation is piecewise linear in the cells") {
  GridDensity f =
      GridDensity::sample(0.0, 1.0, 51, [](double x) { return x * x; });
  // inside a cell the interpolant is the chord, not the parabola
  const double x0 = f.node(12), x1 = f.node(13);
  const double x = x0 + 0.37 * (x1 - x0);
  const double chord = f[12] + (f[13] - f[12]) * 0.37;
  CHECK(f.interp(x) == doctest::Approx(chord).epsilon(1e-13));
  CHECK(f.interp(x1) == doctest::Approx(x1 * x1).epsilon(1e-13));
}

TEST_CASE("signedness is enforced") {
  std::vector<double> neg(51, 0.5);
  neg[25] = -0.75;
  CHECK_THROWS_AS(GridDensity(0.0, 1.0, neg), std::invalid_argument);
  GridDensity ok(0.0, 1.0, neg, /*allow_signed=*/true);
  CHECK(ok.is_signed());
  CHECK(ok.max_abs() == doctest::Approx(0.75));
  CHECK_THROWS_AS(GridDensity(0.0, 1.0, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(GridDensity(1.0, 0.0, std::vector<double>(51, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("normalization rescales to unit mass") {
  GridDensity f =
      GridDensity::sample(-2.0, 2.0, 401, [](double x) { return 1.0 + x * x; });
  GridDensity g = f.normalized();
  CHECK(g.mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g[200] * f.mass() == doctest::Approx(f[200]).epsilon(1e-12));
}

TEST_CASE("particles sort on construction and reset") {
  ParticleSystem p({0.5, -1.0, 0.25});
  CHECK(p[0] == -1.0);
  CHECK(p[2] == 0.5);
  p.set_positions({3.0, 2.0, 1.0});
  CHECK(p[0] == 1.0);
  CHECK(p.n() == 3);
}

TEST_CASE("essential limits of a step with a measure-zero spike") {
  auto step = [](double x) { return x < 0.0 ? 1.0 : 2.0; };
  GridDensity f = GridDensity::sample(-1.0, 1.0, 4001, step);
  f.set_value(1000, 50.0);  // spike at x = -0.5, one node only
  f.set_value(3000, 0.0);   // dropout at x = +0.5
  JumpDiagnostics d = essential_limits(f, 0.0, default_windows(f, 0.0));
  // the trimmed estimates ignore both artifacts
  CHECK(d.left.lower == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(d.left.upper == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(d.right.lower == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(d.right.upper == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(d.h_left == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(d.h_right == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(d.left.stabilized);
  CHECK(d.right.stabilized);

  // at the spike itself the window estimates still converge to the plateau
  JumpDiagnostics at_spike = essential_limits(f, -0.5, default_windows(f, -0.5));
  CHECK(at_spike.left.upper == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(at_spike.right.upper == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("essential limits bracket a bounded oscillation") {
  // 2 + sin(1/x): essential limsup 3, essential liminf 1 on both sides of 0
  GridDensity f = GridDensity::sample(
      -0.5, 0.5, 200001,
      [](double x) { return x == 0.0 ? 2.0 : 2.0 + std::sin(1.0 / x); });
  JumpDiagnostics d = essential_limits(f, 0.0, default_windows(f, 0.0));
  CHECK(d.left.upper == doctest::Approx(3.0).epsilon(0.05));
  CHECK(d.left.lower == doctest::Approx(1.0).epsilon(0.05));
  CHECK(d.right.upper == doctest::Approx(3.0).epsilon(0.05));
  CHECK(d.right.lower == doctest::Approx(1.0).epsilon(0.05));
  CHECK(d.h_left == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("essential limit preconditions") {
  GridDensity f = GridDensity::uniform(0.0, 1.0, 101);
  CHECK_THROWS_AS(essential_limits(f, 0.0, {0.25}), std::domain_error);
  CHECK_THROWS_AS(essential_limits(f, 0.5, {}), std::invalid_argument);
  CHECK_THROWS_AS(essential_limits(f, 0.5, {0.1, 0.2}),
                  std::invalid_argument);  // not decreasing
  CHECK_THROWS_AS(essential_limits(f, 0.5, {1e-4}),
                  std::domain_error);  // starved window
}

TEST_CASE("default windows are geometric and resolvable") {
  GridDensity f = GridDensity::uniform(-1.0, 1.0, 2001);
  std::vector<double> w = default_windows(f, 0.25);
  REQUIRE(w.size() >= 2);
  CHECK(w.front() == doctest::Approx(0.375));  // min(1.25, 0.75)/2
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    CHECK(w[i + 1] == doctest::Approx(0.5 * w[i]));
  CHECK(w.back() >= 16.0 * f.h());
  CHECK(0.5 * w.back() < 16.0 * f.h());
}

TEST_CASE("even odd decomposition about an interior point") {
  GridDensity f =
      GridDensity::sample(0.0, 3.0, 301, [](double x) { return x + 2.0; });
  SymmetrizedPair sp = symmetrize(f, 1.0);
  CHECK(sp.s == doctest::Approx(1.0));
  CHECK(sp.even_part.a() == doctest::Approx(-2.0));
  CHECK(sp.even_part.b() == doctest::Approx(2.0));
  CHECK(sp.odd_part.is_signed());
  // inside the transfer interval both halves of f contribute
  for (double x : {0.1, 0.45, 0.9}) {
    const double even = f.interp(1.0 + x) + f.interp(1.0 - x);
    const double odd = f.interp(1.0 + x) - f.interp(1.0 - x);
    CHECK(sp.even_part.interp(x) == doctest::Approx(even).epsilon(1e-10));
    CHECK(sp.odd_part.interp(x) == doctest::Approx(odd).epsilon(1e-10));
    // even + odd = 2 f(xbar + x)
    CHECK(sp.even_part.interp(x) + sp.odd_part.interp(x) ==
          doctest::Approx(2.0 * f.interp(1.0 + x)).epsilon(1e-10));
  }
  // symmetry of the parts
  for (double x : {0.3, 1.4}) {
    CHECK(sp.even_part.interp(-x) ==
          doctest::Approx(sp.even_part.interp(x)).epsilon(1e-10));
    CHECK(sp.odd_part.interp(-x) ==
          doctest::Approx(-sp.odd_part.interp(x)).epsilon(1e-10));
  }
}

TEST_CASE("kernel density estimate conserves mass") {
  Rng rng(7);
  std::vector<double> xs(64);
  for (double& x : xs) x = rng.uniform(-1.0, 1.0);
  ParticleSystem p(std::move(xs));
  GridDensity f = particles_to_grid(p, 0.2);
  CHECK(f.mass() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(f.a() <= p[0] - 0.19);
  CHECK(f.b() >= p[p.n() - 1] + 0.19);
  for (std::size_t i = 0; i < f.n(); ++i) CHECK(f[i] >= 0.0);
}
