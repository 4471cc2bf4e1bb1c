#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "riesz1d/kernel.hpp"
#include "riesz1d/measure.hpp"

namespace riesz {

class Rng;

// A C^2 function on [alpha, beta] with analytic first and second derivatives,
// plus the endpoint claims the cancellation checkers rely on.  Every claim is
// re-verified by a dense scan before any integral is trusted; a violated
// claim raises std::invalid_argument naming the clause.
struct TestFunction {
  double alpha = 0.0, beta = 1.0;
  std::function<double(double)> f, f1, f2;
  bool alpha_critical = false;  // claims F'(alpha) = 0
  bool beta_critical = false;   // claims F'(beta) = 0
  bool alpha_abs_min = false;   // claims F(alpha) = min over [alpha, beta]
  bool beta_abs_min = false;
  bool beta_abs_max = false;    // claims F(beta) = max over [alpha, beta]
};

// Scan-verifies the claims marked on F (plus basic sanity).  Exposed so
// callers can pre-screen generated instances.
void verify_test_function(const TestFunction& F);

struct CancellationResult {
  double value = 0.0;   // the checked integral; the claim is value >= -err
  double err = 0.0;     // quadrature error bound
  std::string clause;   // which branch was exercised
};

// With alpha and beta absolute minimum points at equal height and
// beta - alpha < r:
//   x >= beta (needs F'(beta) = 0, x - alpha < r):
//       value = int_alpha^beta F'(t) g'(x - t) dt
//   x <= alpha (needs F'(alpha) = 0, beta - x < r):
//       value = int_alpha^beta -F'(t) g'(t - x) dt
// Both are nonnegative when the kernel shape hypotheses hold on (0, r).
CancellationResult check_convex_cancellation(const Kernel& k,
                                             const TestFunction& F, double x);

// With alpha an absolute minimum, F'(alpha) = 0, x <= y <= alpha and
// beta - x < r:
//   value = int_alpha^beta F'(t) (g'(t - x) - g'(t - y)) dt  >= 0,
// the concavity-of-g' counterpart of the convex case.
CancellationResult check_concave_cancellation(const Kernel& k,
                                              const TestFunction& F, double x,
                                              double y);

struct RearrangementResult {
  double lhs = 0.0;   // int F'(t) (|g'(t - alpha)| + |g'(beta - t)|) dt
  double rhs = 0.0;   // (F(beta) - F(alpha)) (|g'(gamma)| + |g'(gamma/2)|)
  double err = 0.0;
  double gamma = 0.0;
  // At least one endpoint contributes half of rhs on its own:
  //   split_endpoint 'b' (the maximum end): + int F' (d/dt) g(|t - beta|)
  //   split_endpoint 'a' (the minimum end): - int F' (d/dt) g(|t - alpha|)
  char split_endpoint = 'a';
  int split_sign = 0;        // +1 at the maximum end, -1 at the minimum end
  double split_value = 0.0;
  double split_err = 0.0;
  bool split_achieved = false;
};

// Requires F'(alpha) = F'(beta) = 0, alpha an absolute minimum, beta an
// absolute maximum, and gamma = beta - alpha < r.
RearrangementResult check_rearrangement_inequality(const Kernel& k,
                                                   const TestFunction& F);

// Three independent evaluations of (psi_F)''(x) for a smooth sampled density
// F at a critical point x of F (|F'(x)| <= tol_crit required):
//   curvature:  int F''(t) g(x - t) dt
//   parts:      symmetric pairing near x, direct singular quadrature outside
//   folded:     single folded integral int_0^S [F'(x-s) - F'(x+s)] g'(s) ds
// Derivatives of F come from high-order central differences of the samples;
// the reported errors combine quadrature bounds with a half-resolution
// re-evaluation of the folded form.
struct SecondDerivativeForms {
  double curvature = 0.0, parts = 0.0, folded = 0.0;
  double curvature_err = 0.0, parts_err = 0.0, folded_err = 0.0;
  double fprime_at_x = 0.0;
  double tol_crit = 0.0;
};

SecondDerivativeForms psi_second_derivative_at_critical(const Kernel& k,
                                                        const GridDensity& F,
                                                        double x);

// Critical points of the sampled function: sign changes of the difference
// derivative refined by bisection on its C^1 interpolant.
std::vector<double> critical_points(const GridDensity& F);

// For F strictly increasing on [lo, hi] and x outside (lo, hi), compares the
// direct integral int_lo^hi F'(t) g'(x - t) dt with its image under the
// substitution z = F(t) (inverted by bisection).  The two must agree to
// quadrature accuracy; this is the change of variables the cancellation
// arguments lean on for monotone pieces.
struct CovCheck {
  double direct = 0.0;
  double transformed = 0.0;
};

CovCheck monotone_change_of_variables(const Kernel& k, const TestFunction& F,
                                      double x, double lo, double hi);

// ---- explicit instance construction --------------------------------------

struct BumpSpec {
  double center = 0.0, width = 0.0, amplitude = 0.0;
};

// Sum of compactly supported C^2 bumps amp * rho((t - c)/w), optionally
// riding a smoothstep ramp from 0 to base_height across [alpha, beta].
// No claims are marked; callers set and verify what they assert.
TestFunction bumps_test_function(double alpha, double beta,
                                 const std::vector<BumpSpec>& bumps,
                                 double base_height = 0.0);

// View of uniform samples: piecewise-linear values, high-order
// difference-quotient derivatives with C^1 interpolation.
TestFunction sampled_test_function(const GridDensity& g);

// ---- randomized admissible instances -------------------------------------

struct ConvexInstance {
  TestFunction F;
  double x = 0.0;
};

struct ConcaveInstance {
  TestFunction F;
  double x = 0.0, y = 0.0;
};

// Sums of 3-8 interior bumps (nonnegative where the lemma needs minima at
// the endpoints), window and evaluation points drawn inside (0, r).
ConvexInstance random_convex_instance(const Kernel& k, Rng& rng);
ConcaveInstance random_concave_instance(const Kernel& k, Rng& rng);

// Smoothstep base plus signed interior bumps; draws violating the endpoint
// extremum claims are rejected and redrawn (count reported by the sweeps).
TestFunction random_rearrangement_instance(const Kernel& k, Rng& rng,
                                           int* rejected = nullptr);

struct SweepReport {
  int trials = 0;
  int violations = 0;
  int rejected_draws = 0;
  double worst_margin = 0.0;  // min over trials of value (or lhs - rhs)
  std::vector<std::string> failures;
};

// Instance i is drawn from an independent stream fork(seed, i), so a failing
// index can be replayed in isolation.
SweepReport sweep_convex_cancellation(const Kernel& k, int trials,
                                      std::uint64_t seed);
SweepReport sweep_concave_cancellation(const Kernel& k, int trials,
                                       std::uint64_t seed);
SweepReport sweep_rearrangement(const Kernel& k, int trials,
                                std::uint64_t seed);

}  // namespace riesz
