#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "riesz1d/kernel.hpp"
#include "riesz1d/regularity.hpp"
#include "riesz1d/rng.hpp"

using namespace riesz;

namespace {

Kernel certified(double a, double l) {
  Kernel k = Kernel::power_law(a, l);
  certify_hypotheses(k);
  return k;
}

// Equal minima at both ends, critical endpoints: amp * sin^2(pi u).
TestFunction sine_well(double alpha, double beta, double amp) {
  TestFunction F;
  F.alpha = alpha;
  F.beta = beta;
  const double w = beta - alpha;
  F.f = [=](double t) {
    const double s = std::sin(M_PI * (t - alpha) / w);
    return amp * s * s;
  };
  F.f1 = [=](double t) {
    return amp * M_PI / w * std::sin(2.0 * M_PI * (t - alpha) / w);
  };
  F.f2 = [=](double t) {
    return 2.0 * amp * M_PI * M_PI / (w * w) *
           std::cos(2.0 * M_PI * (t - alpha) / w);
  };
  F.alpha_critical = F.beta_critical = true;
  F.alpha_abs_min = F.beta_abs_min = true;
  return F;
}

// Rises from a flat minimum at alpha: (t - alpha)^2 (1 + t).
TestFunction quadratic_rise(double alpha, double beta) {
  TestFunction F;
  F.alpha = alpha;
  F.beta = beta;
  F.f = [=](double t) {
    const double u = t - alpha;
    return u * u * (1.0 + t);
  };
  F.f1 = [=](double t) {
    const double u = t - alpha;
    return 2.0 * u * (1.0 + t) + u * u;
  };
  F.f2 = [=](double t) {
    const double u = t - alpha;
    return 2.0 * (1.0 + t) + 4.0 * u;
  };
  F.alpha_critical = true;
  F.alpha_abs_min = true;
  return F;
}

}  // namespace

TEST_CASE("claim scanning rejects mislabeled functions") {
  // claims a critical endpoint where the slope is 1
  TestFunction bad;
  bad.alpha = 0.0;
  bad.beta = 1.0;
  bad.f = [](double t) { return t; };
  bad.f1 = [](double) { return 1.0; };
  bad.f2 = [](double) { return 0.0; };
  bad.alpha_critical = true;
  CHECK_THROWS_AS(verify_test_function(bad), std::invalid_argument);

  // claims beta is the absolute maximum while the interior is higher
  TestFunction hump;
  hump.alpha = 0.0;
  hump.beta = 1.0;
  hump.f = [](double t) { return std::sin(M_PI * t); };
  hump.f1 = [](double t) { return M_PI * std::cos(M_PI * t); };
  hump.f2 = [](double t) { return -M_PI * M_PI * std::sin(M_PI * t); };
  hump.beta_abs_max = true;
  CHECK_THROWS_AS(verify_test_function(hump), std::invalid_argument);

  CHECK_THROWS_AS(verify_test_function(TestFunction{}),
                  std::invalid_argument);  // no callables

  CHECK_NOTHROW(verify_test_function(sine_well(0.0, 0.3, 0.8)));
}

TEST_CASE("convex-shape cancellation matches direct quadrature and stays nonnegative") {
  for (auto [a, l] : {std::pair{2.0, 0.0}, {2.0, -0.5}, {3.0, 0.5}}) {
    CAPTURE(a);
    CAPTURE(l);
    Kernel k = certified(a, l);
    TestFunction F = sine_well(0.1, 0.4, 0.8);
    for (double x : {0.4, 0.55, 0.85}) {  // right branch, includes x = beta
      CAPTURE(x);
      CancellationResult res = check_convex_cancellation(k, F, x);
      CHECK(res.value >= -res.err - 1e-8);
      auto integrand = [&](double t) {
        return F.f1(t) * oracle::gp_of(a, l, x - t);
      };
      const double truth =
          x == F.beta
              ? oracle::simpson_graded(integrand, F.alpha, F.beta, false, 1e-11)
              : oracle::simpson(integrand, F.alpha, F.beta, 1e-11);
      CHECK(res.value == doctest::Approx(truth).epsilon(1e-6));
    }
    // left branch
    CancellationResult res = check_convex_cancellation(k, F, 0.02);
    CHECK(res.value >= -res.err - 1e-8);
    auto integrand = [&](double t) {
      return -F.f1(t) * oracle::gp_of(a, l, t - 0.02);
    };
    CHECK(res.value ==
          doctest::Approx(oracle::simpson(integrand, F.alpha, F.beta, 1e-11))
              .epsilon(1e-6));
  }
}

TEST_CASE("concave-shape cancellation matches direct quadrature") {
  Kernel k = certified(2.0, -0.5);
  TestFunction F = quadratic_rise(0.2, 0.45);
  const double x = 0.05, y = 0.15;
  CancellationResult res = check_concave_cancellation(k, F, x, y);
  CHECK(res.value >= -res.err - 1e-8);
  auto integrand = [&](double t) {
    return F.f1(t) * (oracle::gp_of(2.0, -0.5, t - x) -
                      oracle::gp_of(2.0, -0.5, t - y));
  };
  CHECK(res.value ==
        doctest::Approx(oracle::simpson(integrand, F.alpha, F.beta, 1e-11))
            .epsilon(1e-6));

  // y at the window edge: the second term grazes its singularity
  CancellationResult edge = check_concave_cancellation(k, F, 0.05, 0.2);
  const double part1 = oracle::simpson(
      [&](double t) { return F.f1(t) * oracle::gp_of(2.0, -0.5, t - 0.05); },
      F.alpha, F.beta, 1e-11);
  const double part2 = oracle::simpson_graded(
      [&](double t) { return F.f1(t) * oracle::gp_of(2.0, -0.5, t - 0.2); },
      F.alpha, F.beta, true, 1e-11);
  CHECK(edge.value == doctest::Approx(part1 - part2).epsilon(1e-5));
  CHECK(edge.value >= -edge.err - 1e-8);
}

TEST_CASE("checker preconditions reject out-of-scope inputs") {
  Kernel k = certified(2.0, 0.0);
  TestFunction F = sine_well(0.1, 0.4, 0.8);
  // evaluation point strictly inside the window
  CHECK_THROWS_AS(check_convex_cancellation(k, F, 0.2), std::invalid_argument);
  // window reach beyond the certified radius
  TestFunction wide = sine_well(0.0, 0.4, 0.8);
  CHECK_THROWS_AS(check_convex_cancellation(k, wide, 0.2 + k.r()),
                  std::invalid_argument);
  // concave: needs x <= y <= alpha
  TestFunction Q = quadratic_rise(0.2, 0.45);
  CHECK_THROWS_AS(check_concave_cancellation(k, Q, 0.15, 0.05),
                  std::invalid_argument);
}

TEST_CASE("rearrangement bound on the plain ramp has a closed-form right side") {
  Kernel k = certified(2.0, 0.0);
  TestFunction F = bumps_test_function(0.0, 0.5, {}, 1.0);
  F.alpha_critical = F.beta_critical = true;
  F.alpha_abs_min = true;
  F.beta_abs_max = true;
  RearrangementResult r = check_rearrangement_inequality(k, F);
  CHECK(r.gamma == doctest::Approx(0.5).epsilon(1e-14));
  // (F(b) - F(a)) (|g'(1/2)| + |g'(1/4)|) = 1 * (3/2 + 15/4)
  CHECK(r.rhs == doctest::Approx(5.25).epsilon(1e-10));
  CHECK(r.lhs + r.err >= r.rhs);
  // one endpoint supplies half the bound by itself
  CHECK(r.split_achieved);
  CHECK((r.split_sign == 1 || r.split_sign == -1));
  CHECK((r.split_endpoint == 'a' || r.split_endpoint == 'b'));
  CHECK(std::fabs(r.split_value) + r.split_err >= 0.5 * r.rhs - 1e-10);

  // independent evaluation of the left side, graded into both endpoints
  auto weight = [&](double t) {
    return F.f1(t) * (std::fabs(oracle::gp_of(2.0, 0.0, t)) +
                      std::fabs(oracle::gp_of(2.0, 0.0, 0.5 - t)));
  };
  const double mid = 0.25;
  const double lhs_truth =
      oracle::simpson_graded(weight, 0.0, mid, true, 1e-11) +
      oracle::simpson_graded(weight, mid, 0.5, false, 1e-11);
  CHECK(r.lhs == doctest::Approx(lhs_truth).epsilon(1e-6));
}

TEST_CASE("monotone substitution leaves the cancellation integral unchanged") {
  Kernel k = certified(2.0, 0.0);
  TestFunction F = quadratic_rise(0.2, 0.45);
  CovCheck c = monotone_change_of_variables(k, F, 0.05, 0.25, 0.45);
  CHECK(c.direct == doctest::Approx(c.transformed).epsilon(1e-8));
  CHECK(c.direct != 0.0);
}

TEST_CASE("critical point location on sampled oscillations") {
  GridDensity F = GridDensity::sample(
      0.0, 1.0, 2001, [](double x) { return std::sin(2.0 * M_PI * x); }, true);
  std::vector<double> cps = critical_points(F);
  REQUIRE(cps.size() >= 2);
  bool near_quarter = false, near_three_quarter = false;
  for (double c : cps) {
    if (std::fabs(c - 0.25) < 1e-4) near_quarter = true;
    if (std::fabs(c - 0.75) < 1e-4) near_three_quarter = true;
  }
  CHECK(near_quarter);
  CHECK(near_three_quarter);
}

TEST_CASE("three second-derivative forms agree at a critical point") {
  Kernel k = certified(2.0, -0.9);
  GridDensity F = GridDensity::sample(-1.0, 1.0, 2001, [](double x) {
    const double s = 1.0 - x * x;
    return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
  });
  SecondDerivativeForms forms = psi_second_derivative_at_critical(k, F, 0.0);
  CHECK(std::fabs(forms.fprime_at_x) <= forms.tol_crit);
  // high-precision independent value for this bump and kernel
  const double truth = -14.549836203763813;
  CHECK(forms.folded == doctest::Approx(truth).epsilon(1e-6));
  CHECK(std::fabs(forms.curvature - forms.folded) <=
        forms.curvature_err + forms.folded_err);
  CHECK(std::fabs(forms.parts - forms.folded) <=
        forms.parts_err + forms.folded_err);
  CHECK(std::fabs(forms.curvature - forms.parts) <=
        forms.curvature_err + forms.parts_err);
}

TEST_CASE("second-derivative evaluation refuses non-critical points") {
  Kernel k = certified(2.0, 0.0);
  GridDensity F = GridDensity::sample(-1.0, 1.0, 1001, [](double x) {
    const double s = 1.0 - x * x;
    return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
  });
  CHECK_THROWS_AS(psi_second_derivative_at_critical(k, F, 0.31),
                  std::domain_error);
  CHECK_THROWS_AS(psi_second_derivative_at_critical(k, F, 1.7),
                  std::domain_error);
}

TEST_CASE("randomized sweeps run clean on the log kernel") {
  Kernel k = certified(2.0, 0.0);
  SweepReport cx = sweep_convex_cancellation(k, 100, 7001);
  CHECK(cx.trials == 100);
  CHECK(cx.violations == 0);
  CHECK(cx.worst_margin >= -1e-8);
  CHECK(cx.failures.empty());

  SweepReport cc = sweep_concave_cancellation(k, 100, 7002);
  CHECK(cc.trials == 100);
  CHECK(cc.violations == 0);
  CHECK(cc.worst_margin >= -1e-8);

  SweepReport re = sweep_rearrangement(k, 100, 7003);
  CHECK(re.trials == 100);
  CHECK(re.violations == 0);
  CHECK(re.worst_margin >= -1e-8);
}

TEST_CASE("failing sweep indices can be replayed in isolation") {
  Kernel k = certified(2.0, -0.5);
  // same seed, same index => identical instance
  Rng r1 = Rng(9100).fork(5), r2 = Rng(9100).fork(5);
  ConvexInstance i1 = random_convex_instance(k, r1);
  ConvexInstance i2 = random_convex_instance(k, r2);
  CHECK(i1.x == i2.x);
  CHECK(i1.F.alpha == i2.F.alpha);
  CHECK(i1.F.beta == i2.F.beta);
  CHECK(i1.F.f(0.5 * (i1.F.alpha + i1.F.beta)) ==
        i2.F.f(0.5 * (i2.F.alpha + i2.F.beta)));
}
