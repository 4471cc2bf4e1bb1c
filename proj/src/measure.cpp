#include "riesz1d/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "riesz1d/mollify.hpp"

namespace riesz {

GridDensity::GridDensity(double a, double b, std::vector<double> values,
                         bool allow_signed)
    : a_(a), b_(b), values_(std::move(values)), signed_(allow_signed) {
  if (!(std::isfinite(a) && std::isfinite(b) && b > a))
    throw std::invalid_argument("grid window must satisfy a < b");
  if (values_.size() < 51)
    throw std::invalid_argument("grid density needs at least 51 samples");
  h_ = (b_ - a_) / static_cast<double>(values_.size() - 1);
  for (double v : values_) {
    if (!std::isfinite(v))
      throw std::invalid_argument("grid density values must be finite");
    if (!signed_ && v < 0.0)
      throw std::invalid_argument("grid density values must be nonnegative");
  }
}

GridDensity GridDensity::uniform(double a, double b, std::size_t n) {
  return GridDensity(a, b, std::vector<double>(n, 1.0 / (b - a)));
}

double GridDensity::mass() const {
  double s = 0.0;
  for (double v : values_) s += v;
  s -= 0.5 * (values_.front() + values_.back());
  return s * h_;
}

double GridDensity::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::fabs(v));
  return m;
}

double GridDensity::interp(double x) const {
  if (x < a_ || x > b_) return 0.0;
  double u = (x - a_) / h_;
  auto i = static_cast<std::size_t>(u);
  if (i >= values_.size() - 1) return values_.back();
  const double w = u - static_cast<double>(i);
  return (1.0 - w) * values_[i] + w * values_[i + 1];
}

GridDensity GridDensity::normalized() const {
  const double m = mass();
  if (!(m > 0.0)) throw std::invalid_argument("cannot normalize zero mass");
  std::vector<double> v = values_;
  for (double& x : v) x /= m;
  return GridDensity(a_, b_, std::move(v), signed_);
}

ParticleSystem::ParticleSystem(std::vector<double> positions) {
  set_positions(std::move(positions));
}

void ParticleSystem::set_positions(std::vector<double> positions) {
  if (positions.size() < 2)
    throw std::invalid_argument("particle system needs at least 2 particles");
  for (double p : positions)
    if (!std::isfinite(p))
      throw std::invalid_argument("particle positions must be finite");
  std::sort(positions.begin(), positions.end());
  x_ = std::move(positions);
}

std::vector<double> default_windows(const GridDensity& f, double xbar) {
  const double side = std::min(xbar - f.a(), f.b() - xbar);
  if (!(side > 0.0))
    throw std::domain_error("essential limits need an interior point");
  std::vector<double> w;
  for (double eta = 0.5 * side; eta >= 16.0 * f.h(); eta *= 0.5)
    w.push_back(eta);
  if (w.empty()) w.push_back(0.5 * side);
  return w;
}

namespace {

struct TrimmedRange {
  double lo, hi;
};

// Inf/sup over the window after discarding the extreme tau fraction of
// samples on each end, the grid stand-in for "up to measure zero".
TrimmedRange trimmed_range(std::vector<double>& vals, double tau) {
  std::sort(vals.begin(), vals.end());
  const auto m = vals.size();
  auto drop = static_cast<std::size_t>(tau * static_cast<double>(m));
  if (2 * drop >= m) drop = (m - 1) / 2;
  return {vals[drop], vals[m - 1 - drop]};
}

double slope_proxy(const GridDensity& f, std::size_t i0, std::size_t i1) {
  double m = 0.0;
  for (std::size_t i = i0; i + 1 <= i1; ++i)
    m = std::max(m, std::fabs(f[i + 1] - f[i]));
  return m / f.h();
}

}  // namespace

JumpDiagnostics essential_limits(const GridDensity& f, double xbar,
                                 const std::vector<double>& windows,
                                 double discard_fraction) {
  if (!(xbar > f.a() && xbar < f.b()))
    throw std::domain_error("essential limits need a() < xbar < b()");
  if (windows.empty()) throw std::invalid_argument("no windows given");
  for (std::size_t i = 0; i + 1 < windows.size(); ++i)
    if (!(windows[i] > windows[i + 1]))
      throw std::invalid_argument("windows must be strictly decreasing");
  if (!(discard_fraction >= 0.0 && discard_fraction < 0.5))
    throw std::invalid_argument("discard fraction must be in [0, 0.5)");

  // side = -1 for (xbar - eta, xbar), +1 for (xbar, xbar + eta)
  auto side_estimates = [&](int side) {
    std::vector<TrimmedRange> est;
    double lip = 0.0;
    for (double eta : windows) {
      if (!(eta > 0.0)) throw std::invalid_argument("windows must be positive");
      const double lo = side < 0 ? xbar - eta : xbar;
      const double hi = side < 0 ? xbar : xbar + eta;
      std::vector<double> vals;
      std::size_t i0 = f.n(), i1 = 0;
      for (std::size_t i = 0; i < f.n(); ++i) {
        const double x = f.node(i);
        if (x > lo && x < hi) {
          vals.push_back(f[i]);
          i0 = std::min(i0, i);
          i1 = std::max(i1, i);
        }
      }
      if (vals.size() < 8)
        throw std::domain_error(
            "essential-limit window has fewer than 8 samples");
      lip = std::max(lip, slope_proxy(f, i0, i1));
      est.push_back(trimmed_range(vals, discard_fraction));
    }
    // The finest window gives the tightest bracket (sup can only shrink, inf
    // only grow, as the window nests).  Wider windows only inform the
    // stabilized flag: the ladder has converged when the two finest windows
    // agree to sampling accuracy.  Reporting an earlier window instead would
    // make the estimate depend on which pair happens to agree, which moves
    // non-monotonically under grid refinement.
    SideLimits out;
    const double tol = 2.0 * f.h() * lip;
    out.lower = est.back().lo;
    out.upper = est.back().hi;
    out.eta_used = windows.back();
    if (est.size() >= 2) {
      const auto& prev = est[est.size() - 2];
      out.stabilized = std::fabs(prev.lo - out.lower) <= tol &&
                       std::fabs(prev.hi - out.upper) <= tol;
    }
    return out;
  };

  JumpDiagnostics d;
  d.left = side_estimates(-1);
  d.right = side_estimates(+1);
  d.h_left = d.left.upper - d.left.lower;
  d.h_right = d.right.upper - d.right.lower;
  return d;
}

SymmetrizedPair symmetrize(const GridDensity& f, double xbar) {
  if (!(xbar > f.a() && xbar < f.b()))
    throw std::domain_error("symmetrize needs a() < xbar < b()");
  const double S = std::max(xbar - f.a(), f.b() - xbar);
  const double s = std::min(xbar - f.a(), f.b() - xbar);
  auto half = static_cast<std::size_t>(std::ceil(S / f.h()));
  half = std::max<std::size_t>(half, 25);
  const std::size_t n = 2 * half + 1;
  const double hs = S / static_cast<double>(half);
  std::vector<double> even(n), odd(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = -S + static_cast<double>(i) * hs;
    const double u = f.interp(xbar + t);
    const double v = f.interp(xbar - t);
    even[i] = u + v;
    odd[i] = u - v;
  }
  SymmetrizedPair out{GridDensity(-S, S, std::move(even), f.is_signed()),
                      GridDensity(-S, S, std::move(odd), true), s};
  return out;
}

GridDensity particles_to_grid(const ParticleSystem& p, double bandwidth,
                              std::size_t n) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be > 0");
  const auto& xs = p.positions();
  const double lo = xs.front() - bandwidth;
  const double hi = xs.back() + bandwidth;
  if (n == 0) {
    const double target_h = bandwidth / 48.0;
    n = static_cast<std::size_t>(std::ceil((hi - lo) / target_h)) + 1;
    n = std::min<std::size_t>(n, 2'000'001);
  }
  n = std::max<std::size_t>(n, 51);

  const Mollifier& m = Mollifier::standard();
  const double inv = 1.0 / (bandwidth * static_cast<double>(xs.size()));
  const double h = (hi - lo) / static_cast<double>(n - 1);
  std::vector<double> v(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = lo + static_cast<double>(i) * h;
    auto first = std::lower_bound(xs.begin(), xs.end(), x - bandwidth);
    auto last = std::upper_bound(xs.begin(), xs.end(), x + bandwidth);
    double s = 0.0;
    for (auto it = first; it != last; ++it)
      s += m.rho((x - *it) / bandwidth);
    v[i] = s * inv;
  }
  return GridDensity(lo, hi, std::move(v));
}

}  // namespace riesz
