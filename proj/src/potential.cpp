#include "riesz1d/potential.hpp"

#include <cmath>
#include <stdexcept>

#include "riesz1d/quadrature.hpp"

namespace riesz {

namespace detail {

double power_G0(double alpha, double lambda, double t) {
  if (t == 0.0) return 0.0;
  const double attract = std::pow(t, alpha + 1.0) / (alpha * (alpha + 1.0));
  if (lambda == 0.0) return attract - (t * std::log(t) - t);
  return attract - std::pow(t, lambda + 1.0) / (lambda * (lambda + 1.0));
}

double power_G1(double alpha, double lambda, double t) {
  if (t == 0.0) return 0.0;
  const double attract = std::pow(t, alpha + 2.0) / (alpha * (alpha + 2.0));
  if (lambda == 0.0)
    return attract - (0.5 * t * t * std::log(t) - 0.25 * t * t);
  return attract - std::pow(t, lambda + 2.0) / (lambda * (lambda + 2.0));
}

namespace {

// Signed primitives over arbitrary intervals, using g even:
//   int_p^q g(v) dv       = A0(q) - A0(p),  A0 odd
//   int_p^q v g(v) dv     = A1(q) - A1(p),  A1 even
struct PowerPrimitives {
  double alpha, lambda;
  double A0(double t) const {
    const double s = t < 0.0 ? -1.0 : 1.0;
    return s * power_G0(alpha, lambda, std::fabs(t));
  }
  double A1(double t) const { return power_G1(alpha, lambda, std::fabs(t)); }
};

}  // namespace
}  // namespace detail

namespace {

void require_usable(const Kernel& k) {
  if (!(k.certified() || k.trusted()))
    throw std::domain_error(
        "kernel must be certified or explicitly trusted before use");
}

// Exact int over one cell [y0, y0 + w] of g(x - y) (c0 + c1 (y - y0)) dy.
double power_cell(const detail::PowerPrimitives& P, double x, double y0,
                  double w, double c0, double c1) {
  // Substitute v = x - y; y - y0 = (x - y0) - v.
  const double cj = x - y0;
  const double lo = cj - w, hi = cj;
  const double i0 = P.A0(hi) - P.A0(lo);
  const double i1 = P.A1(hi) - P.A1(lo);
  return (c0 + c1 * cj) * i0 - c1 * i1;
}

double sampling_model_error(const Kernel& k, const GridDensity& f) {
  const double expo =
      k.form() == Kernel::Form::power_law
          ? std::min(1.0, 1.0 + k.lambda_exponent())
          : 1.0;
  return 2.0 * f.max_abs() * std::pow(f.h(), expo);
}

}  // namespace

PotentialValue potential_at(const Kernel& k, const GridDensity& f, double x) {
  require_usable(k);
  PotentialValue out;
  const std::size_t n = f.n();
  const double h = f.h();

  if (k.form() == Kernel::Form::power_law) {
    const detail::PowerPrimitives P{k.alpha(), k.lambda_exponent()};
    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double c1 = (f[j + 1] - f[j]) / h;
      sum += power_cell(P, x, f.node(j), h, f[j], c1);
    }
    out.value = sum;
    out.error = sampling_model_error(k, f) +
                64.0 * static_cast<double>(n) * 1e-16 * std::fabs(sum);
    return out;
  }

  // Tabulated: adaptive panels, split at every kink of the interpolant and
  // at the singular point y = x.
  std::vector<double> pts;
  pts.reserve(n + 1);
  for (std::size_t j = 0; j < n; ++j) pts.push_back(f.node(j));
  if (x > f.a() && x < f.b()) pts.push_back(x);
  auto q = integrate_with_breakpoints(
      [&](double y) { return k.g(x - y) * f.interp(y); }, f.a(), f.b(), pts,
      {1e-11, 1e-11, 20000});
  out.value = q.value;
  out.error = q.error + sampling_model_error(k, f);
  if (!q.converged) out.error += 1e-6 * std::fabs(q.value);
  return out;
}

PotentialProfile potential_profile(const Kernel& k, const GridDensity& f,
                                   const std::vector<double>& xs) {
  PotentialProfile p;
  p.xs = xs;
  p.psi.reserve(xs.size());
  p.err.reserve(xs.size());
  for (double x : xs) {
    auto v = potential_at(k, f, x);
    p.psi.push_back(v.value);
    p.err.push_back(v.error);
  }
  return p;
}

GridPotentialOperator::GridPotentialOperator(const Kernel& k, double h,
                                             std::size_t n)
    : h_(h), n_(n) {
  require_usable(k);
  if (!(h > 0.0) || n < 2)
    throw std::invalid_argument("operator needs h > 0 and n >= 2");
  right_half_.resize(2 * n - 1);

  if (k.form() == Kernel::Form::power_law) {
    const detail::PowerPrimitives P{k.alpha(), k.lambda_exponent()};
    for (std::ptrdiff_t d = -(static_cast<std::ptrdiff_t>(n) - 1);
         d <= static_cast<std::ptrdiff_t>(n) - 1; ++d) {
      // R(c) = int_0^h g(c - u) (1 - u / h) du at c = d h.
      const double c = static_cast<double>(d) * h;
      const double i0 = P.A0(c) - P.A0(c - h);
      const double i1 = P.A1(c) - P.A1(c - h);
      right_half_[static_cast<std::size_t>(
          d + static_cast<std::ptrdiff_t>(n) - 1)] = ((h - c) * i0 + i1) / h;
    }
  } else {
    for (std::ptrdiff_t d = -(static_cast<std::ptrdiff_t>(n) - 1);
         d <= static_cast<std::ptrdiff_t>(n) - 1; ++d) {
      const double c = static_cast<double>(d) * h;
      auto q = integrate_with_breakpoints(
          [&](double u) { return k.g(c - u) * (1.0 - u / h); }, 0.0, h,
          {c}, {1e-13, 1e-12, 4000});
      right_half_[static_cast<std::size_t>(
          d + static_cast<std::ptrdiff_t>(n) - 1)] = q.value;
    }
  }
}

void GridPotentialOperator::apply(const std::vector<double>& f,
                                  std::vector<double>& psi) const {
  if (f.size() != n_) throw std::invalid_argument("size mismatch");
  psi.assign(n_, 0.0);
  const auto m = static_cast<std::ptrdiff_t>(n_);
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    double s = f[0] * rh(i);                        // left half-hat
    s += f[static_cast<std::size_t>(m - 1)] * rh(m - 1 - i);  // right half-hat
    for (std::ptrdiff_t j = 1; j < m - 1; ++j)
      s += f[static_cast<std::size_t>(j)] * (rh(i - j) + rh(j - i));
    psi[static_cast<std::size_t>(i)] = s;
  }
}

EnergyValue energy(const Kernel& k, const GridDensity& f) {
  require_usable(k);
  const std::size_t n = f.n();
  const double h = f.h();
  std::vector<double> psi(n), psi_mid(n - 1), err(n, 0.0);

  if (k.form() == Kernel::Form::power_law) {
    GridPotentialOperator op(k, h, n);
    op.apply(f.values(), psi);
    // Potentials at cell midpoints via a second tap table at offset h/2:
    // psi(x) = sum_j f_j W(x - y_j) with W the hat moment of g, so the
    // midpoint row is the same convolution against M(d) = R(d h + h/2).
    const detail::PowerPrimitives P{k.alpha(), k.lambda_exponent()};
    const auto m = static_cast<std::ptrdiff_t>(n);
    std::vector<double> M(2 * n - 2);
    auto mid_tap = [&](std::ptrdiff_t d) -> double {
      return M[static_cast<std::size_t>(d + m - 1)];
    };
    for (std::ptrdiff_t d = -(m - 1); d <= m - 2; ++d) {
      const double c = static_cast<double>(d) * h + 0.5 * h;
      const double i0 = P.A0(c) - P.A0(c - h);
      const double i1 = P.A1(c) - P.A1(c - h);
      M[static_cast<std::size_t>(d + m - 1)] = ((h - c) * i0 + i1) / h;
    }
    for (std::ptrdiff_t i = 0; i < m - 1; ++i) {
      double s = f[0] * mid_tap(i);
      s += f[static_cast<std::size_t>(m - 1)] * mid_tap(m - 2 - i);
      for (std::ptrdiff_t j = 1; j < m - 1; ++j)
        s += f[static_cast<std::size_t>(j)] *
             (mid_tap(i - j) + mid_tap(j - i - 1));
      psi_mid[static_cast<std::size_t>(i)] = s;
    }
    const double model = sampling_model_error(k, f);
    for (std::size_t i = 0; i < n; ++i) err[i] = model;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      auto v = potential_at(k, f, f.node(i));
      psi[i] = v.value;
      err[i] = v.error;
    }
    for (std::size_t i = 0; i + 1 < n; ++i)
      psi_mid[i] = potential_at(k, f, f.node(i) + 0.5 * h).value;
  }

  // Per-cell Simpson of psi * f; f at the midpoint is the interpolant mean.
  EnergyValue e;
  double quad_err = 0.0, gap = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double fl = f[i] * psi[i], fr = f[i + 1] * psi[i + 1];
    const double fm = 0.5 * (f[i] + f[i + 1]) * psi_mid[i];
    const double trap = 0.5 * h * (fl + fr);
    const double simp = h * (fl + 4.0 * fm + fr) / 6.0;
    e.value += simp;
    gap += std::fabs(simp - trap);
    quad_err += 0.5 * h * (std::fabs(f[i]) * err[i] +
                           std::fabs(f[i + 1]) * err[i + 1]);
  }
  e.error = quad_err + gap / 15.0;
  return e;
}

}  // namespace riesz
