#pragma once

// Reference results the tests trust: a plain recursive Simpson integrator,
// closed forms for the power-law kernels and the semicircle law, and a tiny
// random density generator.  Deliberately independent of the library's
// quadrature (different rule, different refinement strategy, different
// singularity treatment) so agreement between the two is evidence rather
// than a tautology.

#include <cmath>
#include <functional>
#include <vector>

#include "riesz1d/measure.hpp"
#include "riesz1d/rng.hpp"

namespace oracle {

using Fn = std::function<double(double)>;

namespace detail {
inline double simpson_step(const Fn& f, double a, double m, double b,
                           double fa, double fm, double fb, double whole,
                           double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_step(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

inline double simpson(const Fn& f, double a, double b, double tol = 1e-10,
                      int depth = 52) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(f, a, m, b, fa, fm, fb, whole, tol, depth);
}

// Endpoint-singular integrals via the cubic substitution t = p +/- v^3,
// which tames every |t - p|^mu tail with mu > -2/3 (covers lambda - 1 + 1
// exponents for lambda > -1 once the integrand carries one vanishing factor,
// and all the g itself cases).  The integrand is evaluated strictly inside.
inline double simpson_graded(const Fn& f, double a, double b,
                             bool singular_at_a, double tol = 1e-10) {
  if (a == b) return 0.0;
  const double w = b - a;
  const double p = singular_at_a ? a : b;
  const double s = singular_at_a ? 1.0 : -1.0;
  auto sub = [&](double v) {
    const double t = p + s * v * v * v;
    if (singular_at_a ? t <= a : t >= b) return 0.0;
    return 3.0 * v * v * f(singular_at_a ? std::min(t, b) : std::max(t, a));
  };
  return simpson(sub, 0.0, std::cbrt(w), tol);
}

// ---- power-law kernel closed forms ----------------------------------------

inline double g_of(double alpha, double lambda, double x) {
  const double ax = std::fabs(x);
  const double att = std::pow(ax, alpha) / alpha;
  if (lambda == 0.0) return att - std::log(ax);
  return att - std::pow(ax, lambda) / lambda;
}

inline double gp_of(double alpha, double lambda, double x) {
  const double ax = std::fabs(x);
  const double v = std::pow(ax, alpha - 1.0) - std::pow(ax, lambda - 1.0);
  return x < 0.0 ? -v : v;
}

// ---- semicircle law (kernel x^2/2 - log|x|) -------------------------------

inline double semicircle_density(double x) {
  const double v = 2.0 - x * x;
  return v > 0.0 ? std::sqrt(v) / M_PI : 0.0;
}

inline double semicircle_cdf(double x) {
  const double R = std::sqrt(2.0);
  if (x <= -R) return 0.0;
  if (x >= R) return 1.0;
  return 0.5 + (x * std::sqrt(2.0 - x * x) / 2.0 + std::asin(x / R)) / M_PI;
}

inline double semicircle_quantile(double p) {
  double lo = -std::sqrt(2.0), hi = std::sqrt(2.0);
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    (semicircle_cdf(m) < p ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

// E(semicircle): quadratic moment 1/2 plus log potential -(-1/4 - ln(2)/2).
inline double semicircle_energy() { return 0.75 + 0.5 * std::log(2.0); }

// ---- density helpers ------------------------------------------------------

inline double l1_distance(const riesz::GridDensity& f, const Fn& ref, double a,
                          double b, int cells = 200000) {
  const double h = (b - a) / cells;
  double s = 0.0;
  for (int i = 0; i < cells; ++i) {
    const double x = a + (i + 0.5) * h;
    s += std::fabs(f.interp(x) - ref(x)) * h;
  }
  return s;
}

// Smooth nonnegative density: 2-4 bumps (1-u^2)^3, unit trapezoid mass.
inline riesz::GridDensity random_bump_density(riesz::Rng& rng, double a,
                                              double b, std::size_t n) {
  const int k = 2 + static_cast<int>(rng.below(3));
  std::vector<double> c(k), w(k), amp(k);
  for (int i = 0; i < k; ++i) {
    c[i] = rng.uniform(a + 0.15 * (b - a), b - 0.15 * (b - a));
    w[i] = rng.uniform(0.1, 0.35) * (b - a);
    amp[i] = rng.uniform(0.2, 1.0);
  }
  auto val = [&](double x) {
    double s = 0.0;
    for (int i = 0; i < k; ++i) {
      const double u = (x - c[i]) / w[i];
      if (std::fabs(u) < 1.0) {
        const double q = 1.0 - u * u;
        s += amp[i] * q * q * q;
      }
    }
    return s;
  };
  return riesz::GridDensity::sample(a, b, n, val).normalized();
}

// Potential of the interpolant by quadrature, cell by cell so the kinks
// never cross a Simpson panel and no support is skipped; the cell holding
// x is split there and graded into the singularity from both sides.
inline double potential_quad(double alpha, double lambda,
                             const riesz::GridDensity& f, double x,
                             double tol = 1e-10) {
  auto integrand = [&](double y) {
    return g_of(alpha, lambda, x - y) * f.interp(y);
  };
  double v = 0.0;
  for (std::size_t i = 0; i + 1 < f.n(); ++i) {
    const double lo = f.node(i), hi = f.node(i + 1);
    if (x >= lo && x <= hi) {
      v += simpson_graded(integrand, lo, x, false, tol);
      v += simpson_graded(integrand, x, hi, true, tol);
    } else {
      v += simpson(integrand, lo, hi, tol);
    }
  }
  return v;
}

// Independent double quadrature of the interaction energy; both layers run
// cell-aligned.
inline double energy_double_quad(double alpha, double lambda,
                                 const riesz::GridDensity& f,
                                 double tol = 1e-9) {
  auto psi = [&](double x) { return potential_quad(alpha, lambda, f, x, tol); };
  double e = 0.0;
  for (std::size_t i = 0; i + 1 < f.n(); ++i)
    e += simpson([&](double x) { return psi(x) * f.interp(x); }, f.node(i),
                 f.node(i + 1), tol);
  return e;
}

// Five-point central difference, for checking analytic derivatives.
inline double fd_derivative(const Fn& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) /
         (12.0 * h);
}

}  // namespace oracle
