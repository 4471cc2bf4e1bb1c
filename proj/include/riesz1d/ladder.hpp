#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "riesz1d/kernel.hpp"
#include "riesz1d/measure.hpp"

namespace riesz {

// The two symmetry classes a one-sided jump can be reduced to: an even
// density whose left essential limits straddle a band of height h > 0, or an
// odd density whose lower-left limit sits strictly below both 0 and the
// lower-right limit.
enum class LadderCase { symmetric_even, antisymmetric_odd };

struct LadderHints {
  double epsilon = 0.0;       // 0: derived from the case formula (0.9 safety)
  double eta = 0.0;           // 0: halving search from r/8
  double delta0 = 0.0;        // 0: start the delta search at eta/2
  bool enforce_delta_rule = true;  // require eps |g'(gamma_bar/2)| >= C
  double band_fraction = 0.99;     // sample fraction of f inside the band
  int max_delta_halvings = 40;
  double min_delta_spacings = 8.0;  // delta may not dip below this many cells
  double scan_per_delta = 8.0;      // scan resolution: delta / this
};

// Alternating chain of near-extreme points of the mollified density to the
// left of the jump.  All coordinates are offsets from xbar.  p_points is
// strictly decreasing, with odd entries (p1, p3, ...) near the band bottom
// and even entries near the band top.
struct CriticalPointLadder {
  LadderCase kase = LadderCase::symmetric_even;
  double xbar = 0.0;
  double epsilon = 0.0, eta = 0.0, delta = 0.0;
  double l_minus = 0.0, l_plus = 0.0, h_jump = 0.0;  // left band and height
  std::vector<double> C_points;  // threshold crossings framing each p
  std::vector<double> p_points;
  std::vector<double> q_points;  // mirrored companions (q1 = -p2 or -p1, ...)
  std::size_t N = 0;
  std::size_t good_index = 0;                  // 1-based j
  std::pair<double, double> good_couple{0, 0}; // (left, right) offsets
  double gamma = 0.0;      // good couple gap
  double gamma_bar = 0.0;  // max(|p1 - p2|, |q1 - p1|)
  double C_const = 0.0;    // C(eta, D, M, g)
  bool delta_rule_ok = false;
  bool delta_rule_enforced = true;
};

struct LadderError : std::runtime_error {
  LadderError(const std::string& msg, std::string cond)
      : std::runtime_error(msg), failed_condition(std::move(cond)) {}
  std::string failed_condition;
};

// The outer-region control constant
//   C(eta, D, M, g) = 20 M ( Var_{[eta/2, D]} g' + 2 sup_{[eta/2, D]} |g'| ).
double ladder_constant(const Kernel& k, double eta, double D, double M);

// Builds the ladder for f about xbar.  Searches eta (band and ratio
// conditions) and delta (halving until the chain resolves and, unless
// disabled, the delta rule holds).  Throws LadderError with the first unmet
// condition when f has no jump, the wrong symmetry, or too coarse a grid.
CriticalPointLadder build_ladder(const Kernel& k, const GridDensity& f,
                                 double xbar, LadderCase kase,
                                 const LadderHints& hints = {});

// Strict running extrema of a callable scanned leftward from `from` down to
// `to`: returns (ascending) the points where the value is strictly below
// (want_minima) or above every value seen closer to `from`.  Diagnostic
// companion of the ladder selection.
std::vector<double> strict_running_extrema(
    const std::function<double(double)>& f, double from, double to,
    std::size_t samples, bool want_minima);

}  // namespace riesz
