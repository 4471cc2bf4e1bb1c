#pragma once

#include <cstddef>
#include <vector>

#include "riesz1d/measure.hpp"

namespace riesz {

class Kernel;

// The standard Friedrichs bump rho(t) = Z^-1 exp(-1/(1-t^2)) on (-1, 1),
// normalized to unit mass.  Z is computed once at startup to 1e-12 and the
// basic shape facts (unit mass, rho <= 1, rho decreasing on (0, 1)) are
// asserted then.
class Mollifier {
 public:
  static const Mollifier& standard();

  double Z() const { return z_; }
  double rho(double t) const;
  double rho_prime(double t) const;
  double rho_second(double t) const;

  double rho_prime_l1() const { return rho_prime_l1_; }    // = 2 rho(0)
  double rho_second_l1() const { return rho_second_l1_; }

  // int_{t0}^{1} rho(t) dt, clamped to [0, 1].
  double tail_integral(double t0) const;

 private:
  Mollifier();
  double z_ = 0.0, rho_prime_l1_ = 0.0, rho_second_l1_ = 0.0;
};

// f * rho_delta evaluated exactly from the piecewise-linear interpolant
// (quadrature against the analytic bump, split at the interpolant's kinks).
// Also provides the first two derivatives, which are genuine C^infinity
// derivatives of the mollified function.
class MollifiedDensity {
 public:
  MollifiedDensity(GridDensity f, double delta);

  double value(double x) const;
  double deriv(double x) const;
  double deriv2(double x) const;
  double delta() const { return delta_; }
  double support_lo() const { return f_.a() - delta_; }
  double support_hi() const { return f_.b() + delta_; }
  const GridDensity& source() const { return f_; }

 private:
  double convolve(double x, int order) const;
  GridDensity f_;
  double delta_;
};

// Samples f * rho_delta on a grid fine enough for the trapezoid mass of the
// output to match the input mass to ~1e-10.
// Requires delta >= 4 grid spacings of f (undersampled mollification
// otherwise) and delta > 0.
GridDensity mollify(const GridDensity& f, double delta);

struct DerivativeBoundReport {
  double max_abs_deriv = 0.0;
  double argmax = 0.0;
  double bound = 0.0;        // 2 max|f| / delta
  bool ok = false;
};

// Checks ||(f_delta)'||_inf <= 2 max|f| / delta, the slope bound that the
// bump's shape guarantees.  The derivative is scanned by high-order central
// differences on a fine sample grid.
DerivativeBoundReport derivative_bound_check(const GridDensity& f,
                                             double delta);

struct CommutationReport {
  double max_discrepancy = 0.0;
  std::vector<double> xs;
  std::vector<double> lhs;   // potential of the mollified density
  std::vector<double> rhs;   // mollified potential
};

// Verifies psi_{f_delta} = psi_f * rho_delta at the given points.
CommutationReport potential_commutation_check(const Kernel& k,
                                              const GridDensity& f,
                                              double delta,
                                              const std::vector<double>& xs);

}  // namespace riesz
