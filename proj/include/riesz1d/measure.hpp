#pragma once

#include <cstddef>
#include <vector>

namespace riesz {

// Density samples on a uniform grid over [a, b], interpreted everywhere as
// the piecewise-linear interpolant, zero-extended outside the window.
// Signed values are permitted only for the parts produced by symmetrize
// (and their derived quantities); plain densities must be nonnegative.
class GridDensity {
 public:
  GridDensity(double a, double b, std::vector<double> values,
              bool allow_signed = false);

  static GridDensity uniform(double a, double b, std::size_t n);

  template <class F>
  static GridDensity sample(double a, double b, std::size_t n, F&& f,
                            bool allow_signed = false) {
    std::vector<double> v(n);
    const double h = (b - a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
      v[i] = f(a + static_cast<double>(i) * h);
    return GridDensity(a, b, std::move(v), allow_signed);
  }

  double a() const { return a_; }
  double b() const { return b_; }
  std::size_t n() const { return values_.size(); }
  double h() const { return h_; }
  double node(std::size_t i) const { return a_ + static_cast<double>(i) * h_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  bool is_signed() const { return signed_; }

  double mass() const;                 // trapezoid quadrature of the samples
  double max_abs() const;              // sup |f|
  double interp(double x) const;       // 0 outside [a, b]

  GridDensity normalized() const;      // scaled to unit mass
  void set_value(std::size_t i, double v) { values_[i] = v; }

 private:
  double a_, b_, h_;
  std::vector<double> values_;
  bool signed_ = false;
};

// Sorted particle positions representing the empirical measure (1/N) sum d_Xi.
class ParticleSystem {
 public:
  explicit ParticleSystem(std::vector<double> positions);
  std::size_t n() const { return x_.size(); }
  const std::vector<double>& positions() const { return x_; }
  double operator[](std::size_t i) const { return x_[i]; }
  void set_positions(std::vector<double> positions);  // re-sorts

 private:
  std::vector<double> x_;
};

// One-sided essential limits at xbar estimated from samples in shrinking
// windows, robust to measure-zero spikes: the top and bottom tau fraction of
// samples in each window is discarded before taking inf/sup.
struct SideLimits {
  double lower = 0.0;    // essential liminf estimate
  double upper = 0.0;    // essential limsup estimate
  double eta_used = 0.0;
  bool stabilized = false;
};

struct JumpDiagnostics {
  SideLimits left, right;
  double h_left = 0.0;   // left.upper - left.lower
  double h_right = 0.0;
};

// Geometric window ladder from min(side)/2 down to 16 grid spacings.
std::vector<double> default_windows(const GridDensity& f, double xbar);

// Requires a < xbar < b and at least 8 samples per side in every window.
// Estimates come from the finest window; stabilized reports whether the two
// finest windows agreed within 2 h * (local slope proxy), i.e. whether the
// window ladder had converged before running out of samples.
JumpDiagnostics essential_limits(const GridDensity& f, double xbar,
                                 const std::vector<double>& windows,
                                 double discard_fraction = 0.01);

// Even/odd decomposition about xbar on the symmetric hull [-S, S],
// S = max(xbar - a, b - xbar), with f zero-extended:
//   even(x) = f(xbar + x) + f(xbar - x),  odd(x) = f(xbar + x) - f(xbar - x),
// so even + odd = 2 f(xbar + .).  s = min(xbar - a, b - xbar) bounds the
// interval (-s, s) on which constancy statements about potentials transfer.
struct SymmetrizedPair {
  GridDensity even_part;
  GridDensity odd_part;
  double s = 0.0;
};

SymmetrizedPair symmetrize(const GridDensity& f, double xbar);

// Kernel-density estimate of the particle measure using the standard
// mollifier bump at the given bandwidth, sampled on a grid covering
// [min - bw, max + bw].  n = 0 picks a grid fine enough for the trapezoid
// mass to hold to ~1e-10.
GridDensity particles_to_grid(const ParticleSystem& p, double bandwidth,
                              std::size_t n = 0);

}  // namespace riesz
