#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace riesz {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // conservative absolute error estimate
  std::size_t evals = 0;
  bool converged = true;

  QuadResult& operator+=(const QuadResult& o) {
    value += o.value;
    error += o.error;
    evals += o.evals;
    converged = converged && o.converged;
    return *this;
  }
};

namespace detail {

// Classical 7-point Gauss / 15-point Kronrod pair (QUADPACK dqk15 tables).
inline constexpr double kGk15X[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kGk15Wk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGk15Wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
QuadResult gk15_panel(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double resg = fc * kGk15Wg[3];
  double resk = fc * kGk15Wk[7];
  double resabs = std::fabs(resk);
  double fv[14];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kGk15X[j];
    fv[2 * j] = f(c - dx);
    fv[2 * j + 1] = f(c + dx);
    const double fsum = fv[2 * j] + fv[2 * j + 1];
    if (j % 2 == 1) resg += kGk15Wg[j / 2] * fsum;
    resk += kGk15Wk[j] * fsum;
    resabs += kGk15Wk[j] * (std::fabs(fv[2 * j]) + std::fabs(fv[2 * j + 1]));
  }
  const double reskh = resk * 0.5;
  double resasc = kGk15Wk[7] * std::fabs(fc - reskh);
  for (int j = 0; j < 7; ++j)
    resasc += kGk15Wk[j] *
              (std::fabs(fv[2 * j] - reskh) + std::fabs(fv[2 * j + 1] - reskh));
  resabs *= std::fabs(h);
  resasc *= std::fabs(h);

  QuadResult r;
  r.value = resk * h;
  r.evals = 15;
  double err = std::fabs((resk - resg) * h);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double eps50 = 50.0 * 2.220446049250313e-16;
  if (resabs > 1e-290) err = std::max(err, eps50 * resabs);
  r.error = err;
  return r;
}

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

}  // namespace detail

struct QuadOptions {
  double abs_tol = 1e-11;
  double rel_tol = 1e-11;
  std::size_t max_panels = 4000;
};

// Globally adaptive Gauss-Kronrod integration of f over [a, b].  Worst panel
// is bisected first, so integrable endpoint singularities are approached
// geometrically without special casing.  Endpoints are never evaluated.
template <class F>
QuadResult integrate(F&& f, double a, double b, QuadOptions opt = {}) {
  QuadResult total;
  if (a == b) return total;
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }

  std::vector<detail::Segment> heap;
  auto push = [&](double lo, double hi) {
    QuadResult p = detail::gk15_panel(f, lo, hi);
    total.evals += p.evals;
    heap.push_back({lo, hi, p.value, p.error});
    std::push_heap(heap.begin(), heap.end());
    return p;
  };
  const QuadResult first = push(a, b);

  const double span = b - a;
  double value = first.value;
  double error = first.error;
  while (true) {
    const double tol = std::max(opt.abs_tol, opt.rel_tol * std::fabs(value));
    if (error <= tol) break;
    if (heap.size() >= opt.max_panels) {
      total.converged = false;
      break;
    }
    std::pop_heap(heap.begin(), heap.end());
    detail::Segment worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    // Width floor: below ~8 ulp of the endpoint positions the quadrature
    // nodes are no longer distinct from the endpoints.
    const double floor_w = std::max(
        1e-15 * span,
        8.0 * 2.220446049250313e-16 *
            std::max(std::fabs(worst.a), std::fabs(worst.b)));
    if (!(mid > worst.a && mid < worst.b) || worst.b - worst.a < floor_w) {
      // Cannot split further; keep the panel and accept its error.
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end());
      total.converged = false;
      break;
    }
    value -= worst.value;
    error -= worst.error;
    const QuadResult left = push(worst.a, mid);
    const QuadResult right = push(mid, worst.b);
    value += left.value + right.value;
    error += left.error + right.error;
    if (error < 0.0) error = 0.0;
  }

  // Recompute sums in a fixed order for reproducibility.
  std::sort(heap.begin(), heap.end(),
            [](const detail::Segment& x, const detail::Segment& y) {
              return x.a < y.a;
            });
  value = 0.0;
  error = 0.0;
  for (const auto& s : heap) {
    value += s.value;
    error += s.error;
  }
  total.value = sign * value;
  total.error = error;
  return total;
}

// Integral over [a, b] whose integrand behaves like |t - p|^mu, mu > -1,
// at the endpoint p (p = a or p = b) and is smooth elsewhere.  For mu < 0
// the integrand is unbounded and plain bisection stalls at the width floor;
// the substitution t = p +/- u^m with m >= 2/(mu + 1) turns the local
// behavior into u^{m(mu+1)-1}, bounded and vanishing, after which the
// adaptive rule converges normally.
template <class F>
QuadResult integrate_graded(F&& f, double a, double b, bool singular_at_a,
                            double mu, QuadOptions opt = {}) {
  if (a == b) return {};
  if (a > b) {
    QuadResult r = integrate_graded(f, b, a, singular_at_a, mu, opt);
    r.value = -r.value;
    return r;
  }
  if (!(mu > -1.0)) mu = -0.999;  // defensive: keep the transform finite
  int m = static_cast<int>(std::ceil(2.0 / (mu + 1.0)));
  m = std::min(std::max(m, 2), 64);
  const double w = b - a;
  const double u_hi = std::pow(w, 1.0 / m);
  const double p = singular_at_a ? a : b;
  const double sgn = singular_at_a ? 1.0 : -1.0;
  auto sub = [&](double u) {
    double um = 1.0;
    for (int i = 0; i < m; ++i) um *= u;
    double t = p + sgn * um;
    // u^m can underflow onto the singular endpoint; the graded integrand
    // vanishes there, so 0 is the correct limit.  At the far end, clamp.
    if (singular_at_a) {
      if (t <= a) return 0.0;
      if (t > b) t = b;
    } else {
      if (t >= b) return 0.0;
      if (t < a) t = a;
    }
    double jac = static_cast<double>(m);
    for (int i = 0; i < m - 1; ++i) jac *= u;
    return f(t) * jac;
  };
  // In both orientations the swap of u-limits cancels the sign of dt, so the
  // transformed integral carries a positive jacobian.
  return integrate(sub, 0.0, u_hi, opt);
}

// Same, with the initial partition split at the given interior breakpoints
// (e.g. kinks of a piecewise-linear factor).  Points outside (a, b) ignored.
template <class F>
QuadResult integrate_with_breakpoints(F&& f, double a, double b,
                                      std::vector<double> pts,
                                      QuadOptions opt = {}) {
  if (a == b) return {};
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  pts.erase(std::remove_if(pts.begin(), pts.end(),
                           [&](double p) { return !(p > a && p < b); }),
            pts.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  QuadResult total;
  double lo = a;
  QuadOptions sub = opt;
  sub.abs_tol = opt.abs_tol / static_cast<double>(pts.size() + 1);
  for (std::size_t i = 0; i <= pts.size(); ++i) {
    const double hi = (i == pts.size()) ? b : pts[i];
    total += integrate(f, lo, hi, sub);
    lo = hi;
  }
  total.value *= sign;
  return total;
}

}  // namespace riesz
