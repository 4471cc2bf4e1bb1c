#include "riesz1d/mollify.hpp"

#include <cmath>
#include <stdexcept>

#include "riesz1d/potential.hpp"
#include "riesz1d/quadrature.hpp"

namespace riesz {

namespace {

double bump_raw(double t) {
  const double s = 1.0 - t * t;
  if (s <= 0.0) return 0.0;
  return std::exp(-1.0 / s);
}

}  // namespace

Mollifier::Mollifier() {
  auto q = integrate(bump_raw, -1.0, 1.0, {1e-14, 1e-14, 4000});
  z_ = q.value;
  if (!(q.converged && q.error < 1e-12))
    throw std::runtime_error("mollifier normalization did not converge");

  auto mass = integrate([&](double t) { return rho(t); }, -1.0, 1.0,
                        {1e-14, 1e-14, 4000});
  if (std::fabs(mass.value - 1.0) > 1e-10)
    throw std::runtime_error("mollifier mass is not 1");
  if (rho(0.0) > 1.0)
    throw std::runtime_error("mollifier peak exceeds 1");
  for (int i = 1; i < 64; ++i)
    if (rho_prime(i / 64.0) >= 0.0)
      throw std::runtime_error("mollifier is not decreasing on (0, 1)");

  rho_prime_l1_ = 2.0 * rho(0.0);
  auto r2 = integrate([&](double t) { return std::fabs(rho_second(t)); }, -1.0,
                      1.0, {1e-12, 1e-12, 4000});
  rho_second_l1_ = r2.value;
}

const Mollifier& Mollifier::standard() {
  static const Mollifier m;
  return m;
}

double Mollifier::rho(double t) const { return bump_raw(t) / z_; }

double Mollifier::rho_prime(double t) const {
  const double s = 1.0 - t * t;
  if (s <= 0.0) return 0.0;
  return rho(t) * (-2.0 * t / (s * s));
}

double Mollifier::rho_second(double t) const {
  const double s = 1.0 - t * t;
  if (s <= 0.0) return 0.0;
  const double s2 = s * s;
  return rho(t) * (4.0 * t * t / (s2 * s2) - 2.0 / s2 - 8.0 * t * t / (s2 * s));
}

double Mollifier::tail_integral(double t0) const {
  if (t0 <= -1.0) return 1.0;
  if (t0 >= 1.0) return 0.0;
  auto q = integrate([&](double t) { return rho(t); }, t0, 1.0,
                     {1e-13, 1e-13, 2000});
  return std::min(1.0, std::max(0.0, q.value));
}

MollifiedDensity::MollifiedDensity(GridDensity f, double delta)
    : f_(std::move(f)), delta_(delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (delta < 4.0 * f_.h())
    throw std::invalid_argument(
        "delta below 4 grid spacings: mollification undersampled");
}

double MollifiedDensity::convolve(double x, int order) const {
  // int rho^(order)(u) f(x - delta u) du / delta^order over the overlap of
  // (-1, 1) with the preimage of the support.
  const Mollifier& m = Mollifier::standard();
  double lo = (x - f_.b()) / delta_;
  double hi = (x - f_.a()) / delta_;
  lo = std::max(lo, -1.0);
  hi = std::min(hi, 1.0);
  if (!(hi > lo)) return 0.0;

  std::vector<double> kinks;
  {
    // Grid nodes inside [x - delta, x + delta] are slope breaks of f.
    const double ylo = x - delta_ * hi, yhi = x - delta_ * lo;
    const double h = f_.h();
    auto j0 = static_cast<std::ptrdiff_t>(std::ceil((ylo - f_.a()) / h));
    auto j1 = static_cast<std::ptrdiff_t>(std::floor((yhi - f_.a()) / h));
    for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(j0, 0);
         j <= std::min<std::ptrdiff_t>(j1, static_cast<std::ptrdiff_t>(f_.n()) - 1);
         ++j)
      kinks.push_back((x - f_.node(static_cast<std::size_t>(j))) / delta_);
  }

  auto weight = [&](double u) {
    switch (order) {
      case 0: return m.rho(u);
      case 1: return m.rho_prime(u);
      default: return m.rho_second(u);
    }
  };
  auto q = integrate_with_breakpoints(
      [&](double u) { return weight(u) * f_.interp(x - delta_ * u); }, lo, hi,
      std::move(kinks), {1e-13 * std::max(1.0, f_.max_abs()), 1e-12, 20000});
  return q.value / std::pow(delta_, order);
}

double MollifiedDensity::value(double x) const { return convolve(x, 0); }
double MollifiedDensity::deriv(double x) const { return convolve(x, 1); }
double MollifiedDensity::deriv2(double x) const { return convolve(x, 2); }

GridDensity mollify(const GridDensity& f, double delta) {
  MollifiedDensity md(f, delta);
  const double lo = f.a() - delta, hi = f.b() + delta;
  const double target_h = std::min(f.h(), delta / 64.0);
  auto n = static_cast<std::size_t>(std::ceil((hi - lo) / target_h)) + 1;
  n = std::min<std::size_t>(n, 2'000'001);
  n = std::max<std::size_t>(n, 51);
  const double h = (hi - lo) / static_cast<double>(n - 1);

  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = md.value(lo + static_cast<double>(i) * h);
  if (!f.is_signed()) {
    // Clamp quadrature-level negative dust.
    const double floor = -1e-12 * std::max(1.0, f.max_abs());
    for (double& x : v)
      if (x < 0.0 && x > floor) x = 0.0;
  }
  return GridDensity(lo, hi, std::move(v), f.is_signed());
}

DerivativeBoundReport derivative_bound_check(const GridDensity& f,
                                             double delta) {
  MollifiedDensity md(f, delta);
  const double lo = md.support_lo(), hi = md.support_hi();
  const double h = delta / 64.0;
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / h)) + 9;

  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = lo + (static_cast<double>(i) - 4.0) * h;
    v[i] = md.value(x);
  }
  // Eighth-order central differences on the sample grid.
  static const double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
  DerivativeBoundReport rep;
  rep.bound = 2.0 * f.max_abs() / delta;
  for (std::size_t i = 4; i + 4 < n; ++i) {
    double d = 0.0;
    for (int k = 1; k <= 4; ++k) d += c[k - 1] * (v[i + static_cast<std::size_t>(k)] - v[i - static_cast<std::size_t>(k)]);
    d = std::fabs(d / h);
    if (d > rep.max_abs_deriv) {
      rep.max_abs_deriv = d;
      rep.argmax = lo + (static_cast<double>(i) - 4.0) * h;
    }
  }
  rep.ok = rep.max_abs_deriv <= rep.bound * (1.0 + 1e-9);
  return rep;
}

CommutationReport potential_commutation_check(const Kernel& k,
                                              const GridDensity& f,
                                              double delta,
                                              const std::vector<double>& xs) {
  CommutationReport rep;
  rep.xs = xs;
  // The left side goes through a sampled grid; at the default mollify
  // resolution its interpolation bias is a few 1e-6, so sample 4x finer
  // here (this check is the one place that budget matters).
  MollifiedDensity md(f, delta);
  const double lo = md.support_lo(), hi = md.support_hi();
  const auto n = static_cast<std::size_t>(
                     std::ceil((hi - lo) / (delta / 256.0))) + 1;
  const double hh = (hi - lo) / static_cast<double>(n - 1);
  std::vector<double> vals(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = md.value(lo + static_cast<double>(i) * hh);
    if (!f.is_signed() && v < 0.0 && v > -1e-12) v = 0.0;
    vals[i] = v;
  }
  GridDensity fd(lo, hi, std::move(vals), f.is_signed());
  const Mollifier& m = Mollifier::standard();
  for (double x : xs) {
    const double lhs = potential_at(k, fd, x).value;
    auto q = integrate(
        [&](double v) { return m.rho(v) * potential_at(k, f, x - delta * v).value; },
        -1.0, 1.0, {1e-10, 1e-10, 600});
    rep.lhs.push_back(lhs);
    rep.rhs.push_back(q.value);
    rep.max_discrepancy =
        std::max(rep.max_discrepancy, std::fabs(lhs - q.value));
  }
  return rep;
}

}  // namespace riesz
