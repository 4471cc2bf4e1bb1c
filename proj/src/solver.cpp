#include "riesz1d/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "riesz1d/potential.hpp"
#include "riesz1d/rng.hpp"

namespace riesz {

namespace {

std::vector<double> trapezoid_weights(std::size_t n, double h) {
  std::vector<double> w(n, h);
  w.front() = 0.5 * h;
  w.back() = 0.5 * h;
  return w;
}

// Projection of u onto {v >= 0, sum w_i v_i = 1} in the w-weighted metric:
// v_i = max(0, u_i - theta) with theta fixed by the mass constraint.
void project_simplex(const std::vector<double>& w, std::vector<double>& u) {
  const double W = std::accumulate(w.begin(), w.end(), 0.0);
  auto mass_at = [&](double theta) {
    double m = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      m += w[i] * std::max(0.0, u[i] - theta);
    return m;
  };
  double hi = *std::max_element(u.begin(), u.end());
  double lo = *std::min_element(u.begin(), u.end()) - (1.0 + 1.0 / W);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mass_at(mid) > 1.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-16 * (1.0 + std::fabs(hi))) break;
  }
  const double theta = 0.5 * (lo + hi);
  for (double& x : u) x = std::max(0.0, x - theta);
}

ELReport el_from_psi(const GridDensity& f, const std::vector<double>& psi,
                     const std::vector<double>& w, double tol) {
  ELReport rep;
  const double thr = 1e-3 * f.max_abs();
  std::size_t lo = f.n(), hi = 0;
  for (std::size_t i = 0; i < f.n(); ++i)
    if (f[i] > thr) {
      lo = std::min(lo, i);
      hi = std::max(hi, i);
    }
  if (lo > hi) throw std::runtime_error("density has empty support");
  rep.support_lo = f.node(lo);
  rep.support_hi = f.node(hi);
  rep.linf_bound = f.max_abs();

  for (std::size_t i = 0; i < f.n(); ++i) rep.energy += w[i] * f[i] * psi[i];

  double num = 0.0, den = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    num += w[i] * f[i] * psi[i];
    den += w[i] * f[i];
  }
  rep.psi_mean_on_support = num / den;
  for (std::size_t i = lo; i <= hi; ++i)
    rep.psi_max_dev_on_support = std::max(
        rep.psi_max_dev_on_support, std::fabs(psi[i] - rep.psi_mean_on_support));

  rep.psi_min_off_support = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.n(); ++i)
    if (i < lo || i > hi)
      rep.psi_min_off_support = std::min(rep.psi_min_off_support, psi[i]);
  if (!std::isfinite(rep.psi_min_off_support))
    rep.psi_min_off_support = rep.psi_mean_on_support;

  const double scale = std::max(std::fabs(rep.psi_mean_on_support), 1e-300);
  rep.el_residual = rep.psi_max_dev_on_support / scale;
  rep.pass = rep.el_residual <= tol &&
             rep.psi_min_off_support >=
                 rep.psi_mean_on_support - tol * scale;
  return rep;
}

SolveResult minimize_grid(const Kernel& k, const SolveConfig& cfg) {
  if (cfg.n < 51) throw std::invalid_argument("need at least 51 grid nodes");
  if (!(cfg.b > cfg.a)) throw std::invalid_argument("empty window");

  const double h = (cfg.b - cfg.a) / static_cast<double>(cfg.n - 1);
  GridPotentialOperator op(k, h, cfg.n);
  const auto w = trapezoid_weights(cfg.n, h);

  std::vector<double> f(cfg.n, 1.0 / (cfg.b - cfg.a));
  std::vector<double> psi(cfg.n), trial_psi(cfg.n), trial(cfg.n);

  auto energy_of = [&](const std::vector<double>& v,
                       std::vector<double>& pv) {
    op.apply(v, pv);
    double e = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) e += w[i] * v[i] * pv[i];
    return e;
  };

  SolveResult res;
  double step = cfg.step0;
  double e = energy_of(f, psi);
  res.energy_history.push_back(e);

  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    res.iterations = it + 1;

    GridDensity snapshot(cfg.a, cfg.b, f);
    res.el = el_from_psi(snapshot, psi, w, cfg.el_tol);
    if (res.el.pass) {
      res.converged = true;
      res.status = "converged";
      res.density = std::move(snapshot);
      return res;
    }
    if (cfg.record_trajectory && it % cfg.trajectory_stride == 0)
      res.trajectory.push_back(f);

    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t i = 0; i < f.size(); ++i)
        trial[i] = f[i] - step * psi[i];
      project_simplex(w, trial);
      const double e_trial = energy_of(trial, trial_psi);
      if (e_trial < e) {
        f.swap(trial);
        psi.swap(trial_psi);
        e = e_trial;
        res.energy_history.push_back(e);
        step *= 1.3;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No descent direction left at this precision; report the point as-is.
      res.status = "stalled";
      res.density = GridDensity(cfg.a, cfg.b, f);
      res.el = el_from_psi(*res.density, psi, w, cfg.el_tol);
      res.converged = res.el.pass;
      if (res.converged) res.status = "converged";
      return res;
    }
  }

  res.status = "max_iters";
  res.density = GridDensity(cfg.a, cfg.b, f);
  res.el = el_from_psi(*res.density, psi, w, cfg.el_tol);
  res.converged = res.el.pass;
  if (res.converged) res.status = "converged";
  return res;
}

struct ForceEval {
  std::vector<double> force;   // F_i = -(1/N) sum_{j != i} g'(x_i - x_j)
  double max_ratio = 0.0;      // worst cancellation ratio |sum| / sum||
  double energy = 0.0;         // (1/N^2) sum_{i != j} g(x_i - x_j)
};

ForceEval eval_forces(const Kernel& k, const std::vector<double>& x) {
  const std::size_t N = x.size();
  std::vector<double> s(N, 0.0), abss(N, 0.0);
  double e = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j) {
      const double gp = k.gprime(x[i] - x[j]);
      s[i] += gp;
      s[j] -= gp;
      abss[i] += std::fabs(gp);
      abss[j] += std::fabs(gp);
      e += 2.0 * k.g(x[i] - x[j]);
    }
  ForceEval fe;
  fe.force.resize(N);
  const double invN = 1.0 / static_cast<double>(N);
  for (std::size_t i = 0; i < N; ++i) {
    fe.force[i] = -invN * s[i];
    fe.max_ratio = std::max(
        fe.max_ratio, std::fabs(s[i]) / std::max(abss[i], 1e-300));
  }
  fe.energy = e * invN * invN;
  return fe;
}

SolveResult minimize_particles(const Kernel& k, const SolveConfig& cfg) {
  const std::size_t N = cfg.particles;
  if (N < 2) throw std::invalid_argument("need at least 2 particles");
  if (!(cfg.b > cfg.a)) throw std::invalid_argument("empty window");

  Rng rng(cfg.seed);
  const double gap = (cfg.b - cfg.a) / static_cast<double>(N);
  std::vector<double> x(N);
  for (std::size_t i = 0; i < N; ++i) {
    x[i] = cfg.a + (static_cast<double>(i) + 0.5) * gap;
    if (cfg.jitter > 0.0)
      x[i] += cfg.jitter * gap * rng.uniform(-0.5, 0.5);
  }
  std::sort(x.begin(), x.end());

  const double minsep = 1e-8 * (cfg.b - cfg.a);
  const double blowup = 100.0 * (std::fabs(cfg.a) + std::fabs(cfg.b) + 1.0);

  SolveResult res;
  double dt = cfg.step0;
  ForceEval fe = eval_forces(k, x);
  res.energy_history.push_back(fe.energy);

  std::vector<double> trial(N);
  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    res.iterations = it + 1;
    if (fe.max_ratio <= cfg.el_tol) {
      res.converged = true;
      res.status = "converged";
      break;
    }
    if (cfg.record_trajectory && it % cfg.trajectory_stride == 0)
      res.trajectory.push_back(x);

    double fmax = 0.0;
    for (double F : fe.force) fmax = std::max(fmax, std::fabs(F));
    const double span = std::max(x.back() - x.front(), minsep);
    const double cap = 0.25 * span / static_cast<double>(N);

    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      double dt_eff = dt;
      if (fmax * dt_eff > cap) dt_eff = cap / fmax;
      for (std::size_t i = 0; i < N; ++i) trial[i] = x[i] + dt_eff * fe.force[i];
      std::sort(trial.begin(), trial.end());
      for (std::size_t i = 1; i < N; ++i)
        if (trial[i] - trial[i - 1] < minsep) trial[i] = trial[i - 1] + minsep;

      ForceEval fe_trial = eval_forces(k, trial);
      if (fe_trial.energy < fe.energy) {
        x.swap(trial);
        fe = std::move(fe_trial);
        res.energy_history.push_back(fe.energy);
        dt *= 1.3;
        accepted = true;
        break;
      }
      dt *= 0.5;
    }
    if (!accepted) {
      res.status = "stalled";
      break;
    }
    if (std::fabs(x.front()) > blowup || std::fabs(x.back()) > blowup) {
      res.status = "diverged";
      break;
    }
  }
  if (res.status.empty())
    res.status = res.converged ? "converged" : "max_iters";

  res.particles = ParticleSystem(x);
  res.el = verify_el(k, *res.particles, cfg.el_tol);
  if (res.status == "stalled" && res.el.pass) {
    res.converged = true;
    res.status = "converged";
  }
  return res;
}

}  // namespace

SolveResult minimize(const Kernel& k, const SolveConfig& cfg) {
  if (!(k.certified() || k.trusted()))
    throw std::invalid_argument("kernel must be certified or trusted");
  return cfg.method == SolveMethod::grid_projection ? minimize_grid(k, cfg)
                                                    : minimize_particles(k, cfg);
}

ELReport verify_el(const Kernel& k, const GridDensity& f, double tol) {
  if (!(k.certified() || k.trusted()))
    throw std::invalid_argument("kernel must be certified or trusted");
  GridPotentialOperator op(k, f.h(), f.n());
  std::vector<double> psi;
  op.apply(f.values(), psi);
  return el_from_psi(f, psi, trapezoid_weights(f.n(), f.h()), tol);
}

ELReport verify_el(const Kernel& k, const ParticleSystem& p, double tol) {
  if (!(k.certified() || k.trusted()))
    throw std::invalid_argument("kernel must be certified or trusted");
  const auto& x = p.positions();
  if (x.size() < 2) throw std::invalid_argument("need at least 2 particles");

  ForceEval fe = eval_forces(k, x);
  const std::size_t N = x.size();
  std::vector<double> psi(N, 0.0);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j)
      if (j != i) psi[i] += k.g(x[i] - x[j]) / static_cast<double>(N);

  ELReport rep;
  rep.energy = fe.energy;
  rep.support_lo = x.front();
  rep.support_hi = x.back();
  rep.psi_mean_on_support = std::accumulate(psi.begin(), psi.end(), 0.0) /
                            static_cast<double>(N);
  for (double v : psi)
    rep.psi_max_dev_on_support = std::max(rep.psi_max_dev_on_support,
                                          std::fabs(v - rep.psi_mean_on_support));
  rep.psi_min_off_support = rep.psi_mean_on_support;
  const double bw = 4.0 * (x.back() - x.front()) /
                    std::max<std::size_t>(N, std::size_t{2});
  rep.linf_bound = particles_to_grid(p, bw, 512).max_abs();
  rep.el_residual = fe.max_ratio;
  rep.pass = rep.el_residual <= tol;
  return rep;
}

}  // namespace riesz
