#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "riesz1d/kernel.hpp"
#include "riesz1d/ladder.hpp"
#include "riesz1d/measure.hpp"
#include "riesz1d/regularity.hpp"

namespace riesz {

// The second-derivative decomposition at one end of the good couple,
// split over (outer-left | couple | outer-right) and sign-normalized so a
// single template applies: J is the couple term, I the outer piece adjacent
// to the singular base, K the far piece, and the claim is
//   J >= J_bound,  I >= I_bound,  K >= K_bound,
// whose sum is a strictly positive lower bound on +/- psi''(base) -- the
// quantity that must vanish if the potential were constant.
struct ContradictionMargin {
  double base = 0.0;      // offset of the base point from the symmetry center
  int base_sign = 0;      // +1: psi'' >= margin at base, -1: psi'' <= -margin
  bool mirrored = false;  // template applied after an even reflection
  double split_value = 0.0;     // one-sided rearrangement integral
  double split_rhs_half = 0.0;  // half of the two-point lower bound
  double I = 0.0, J = 0.0, K = 0.0;
  double I_err = 0.0, J_err = 0.0, K_err = 0.0;
  double J_bound = 0.0, I_bound = 0.0, K_bound = 0.0;
  bool bounds_checked = false;  // template orientation was available
  bool bounds_hold = false;
  double margin_sum = 0.0;    // J_bound + I_bound + K_bound
  double margin_lower = 0.0;  // (LamBar (h - 10e) - (h + 6e)) |g'(gamma)| / 2
  double psi2_ijk = 0.0;      // I + J + K (oriented), = +/- psi''(base)
  double psi2_folded = 0.0;   // independent folded quadrature, true derivative
  std::optional<SecondDerivativeForms> forms;  // sampled three-form check
};

// Evaluates the margin for a symmetrized density about 0 and its ladder.
// compute_forms additionally runs the sampled three-form second derivative
// at the base (costlier; the forms' error bounds can be large on fine
// ladders, they are reported as-is).
ContradictionMargin ladder_margin(const Kernel& k, const GridDensity& f_sym,
                                  const CriticalPointLadder& L,
                                  bool compute_forms = false);

struct LevelJump {
  std::size_t n = 0;       // grid nodes at this refinement
  double h_left = 0.0, h_right = 0.0;
  bool stabilized_left = false, stabilized_right = false;
  double el_residual = 0.0;  // of the re-solved density (0 at the base level)
  bool solver_converged = true;
};

struct PointReport {
  double x = 0.0;
  std::vector<LevelJump> levels;  // coarse to fine
  bool continuous = false;        // finest jumps below threshold
  double sym_s = 0.0;             // symmetric transfer half-width
  double even_jump = 0.0, odd_jump = 0.0;  // at 0, finest level
  bool ladder_attempted = false;
  std::string ladder_case;   // "even", "odd" or empty
  std::string ladder_error;  // failure note when no ladder resolved
  std::optional<CriticalPointLadder> ladder;
  std::optional<ContradictionMargin> margin;
};

struct ContinuityReport {
  std::vector<PointReport> points;
  double el_residual = 0.0;  // of the input density
  bool any_jump = false;
  std::string verdict;  // "continuous" or "jump"
};

struct ContinuityOptions {
  int refinements = 3;             // including the input level
  double jump_threshold_frac = 0.1;  // of max |f|
  double el_tol = 1e-2;
  std::size_t max_iters = 20000;
  bool attempt_ladder = true;
  bool margin_forms = false;
  std::string ladder_case;  // "", "even" or "odd"; empty tries both
  LadderHints ladder_hints;
};

// Precondition: f satisfies the equilibrium conditions at el_tol (else
// std::invalid_argument "density is not potential-constant").  Re-minimizes
// on dyadically refined grids, tracks the one-sided jump estimates at each
// point, decomposes into even/odd parts, and escalates flagged jumps to the
// ladder machinery.
ContinuityReport continuity_report(const Kernel& k, const GridDensity& f,
                                   const std::vector<double>& points,
                                   const ContinuityOptions& opt = {});

}  // namespace riesz
