#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riesz1d/kernel.hpp"
#include "riesz1d/measure.hpp"

namespace riesz {

enum class SolveMethod { grid_projection, particle_flow };

struct SolveConfig {
  SolveMethod method = SolveMethod::grid_projection;
  double a = -2.0, b = 2.0;
  std::size_t n = 401;          // grid nodes (grid_projection)
  std::size_t particles = 200;  // particle count (particle_flow)
  std::size_t max_iters = 5000;
  double step0 = 0.5;           // initial gradient step, or dt for the flow
  double el_tol = 1e-2;
  std::uint64_t seed = 1;
  double jitter = 0.0;          // initial particle jitter, fraction of spacing
  bool record_trajectory = false;
  std::size_t trajectory_stride = 10;
};

// Equilibrium diagnostics.  For a grid density: the potential must be constant
// on the support of f and no smaller off it.  el_residual is the max deviation
// on the support relative to the mean level; the off-support clause is checked
// separately (psi_min_off_support >= mean - tol * |mean|).  For particles the
// residual is instead a force cancellation ratio in [0, 1]: |sum of signed
// forces| over sum of their magnitudes, maximised over particles.
struct ELReport {
  double energy = 0.0;
  double support_lo = 0.0, support_hi = 0.0;
  double psi_mean_on_support = 0.0;
  double psi_max_dev_on_support = 0.0;
  double psi_min_off_support = 0.0;
  double el_residual = 0.0;
  double linf_bound = 0.0;  // max |f| of the iterate (KDE max for particles)
  bool pass = false;
};

struct SolveResult {
  std::optional<GridDensity> density;
  std::optional<ParticleSystem> particles;
  ELReport el;
  std::vector<double> energy_history;  // one entry per accepted iteration
  std::size_t iterations = 0;
  bool converged = false;
  std::string status;  // "converged", "max_iters", "stalled", "diverged"
  std::vector<std::vector<double>> trajectory;
};

SolveResult minimize(const Kernel& k, const SolveConfig& cfg);

// Support is the smallest node interval containing {f > 1e-3 max f}.
ELReport verify_el(const Kernel& k, const GridDensity& f, double tol);
ELReport verify_el(const Kernel& k, const ParticleSystem& p, double tol);

}  // namespace riesz
