#pragma once

#include <cstddef>
#include <vector>

#include "riesz1d/kernel.hpp"
#include "riesz1d/measure.hpp"

namespace riesz {

struct PotentialValue {
  double value = 0.0;
  double error = 0.0;  // conservative bound (quadrature + sampling model term)
};

struct PotentialProfile {
  std::vector<double> xs, psi, err;
};

struct EnergyValue {
  double value = 0.0;
  double error = 0.0;
};

// psi_f(x) = int g(x - y) f(y) dy against the piecewise-linear interpolant.
// Power-law kernels use closed-form primitives per cell (exact for the
// interpolant, singular cells included); tabulated kernels use adaptive
// panels split at the grid kinks and at y = x.
// Requires a certified or explicitly trusted kernel.
PotentialValue potential_at(const Kernel& k, const GridDensity& f, double x);

PotentialProfile potential_profile(const Kernel& k, const GridDensity& f,
                                   const std::vector<double>& xs);

// E = int psi_f f by per-cell Simpson (node and midpoint potentials).
EnergyValue energy(const Kernel& k, const GridDensity& f);

// Potential at every node of a fixed uniform grid, as a dense symmetric
// convolution with precomputed hat-function moments of g.  Exact for the
// interpolant under power-law kernels; built once, applied many times by the
// solver.  Construction is independent of the window's absolute position,
// so translated grids produce identical taps.
class GridPotentialOperator {
 public:
  GridPotentialOperator(const Kernel& k, double h, std::size_t n);

  // psi[i] = sum_j taps(i - j) f[j], boundary hats halved.
  void apply(const std::vector<double>& f, std::vector<double>& psi) const;

  double h() const { return h_; }
  std::size_t n() const { return n_; }

 private:
  double h_;
  std::size_t n_;
  std::vector<double> right_half_;  // R(d h), d = -(n-1) .. (n-1)
  double rh(std::ptrdiff_t d) const {
    return right_half_[static_cast<std::size_t>(d +
                                                static_cast<std::ptrdiff_t>(n_) - 1)];
  }
};

namespace detail {
// int_0^t g and int_0^t u g(u) du for power-law kernels (log branch at
// lambda = 0); building blocks of the closed-form cell integrals.
double power_G0(double alpha, double lambda, double t);
double power_G1(double alpha, double lambda, double t);
}  // namespace detail

}  // namespace riesz
