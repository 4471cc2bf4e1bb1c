#include "riesz1d/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "riesz1d/mollify.hpp"

namespace riesz {

double ladder_constant(const Kernel& k, double eta, double D, double M) {
  const double lo = 0.5 * eta;
  if (!(lo > 0.0 && D > lo)) return 0.0;
  double sup = std::max(std::fabs(k.gprime(lo)), std::fabs(k.gprime(D)));
  const double ratio = D / lo;
  for (int i = 1; i < 4096; ++i) {
    const double x = lo * std::pow(ratio, static_cast<double>(i) / 4096.0);
    sup = std::max(sup, std::fabs(k.gprime(x)));
  }
  return 20.0 * M * (gprime_total_variation(k, lo, D) + 2.0 * sup);
}

std::vector<double> strict_running_extrema(
    const std::function<double(double)>& f, double from, double to,
    std::size_t samples, bool want_minima) {
  std::vector<double> out;
  if (!(to < from) || samples < 2) return out;
  const double step = (from - to) / static_cast<double>(samples - 1);
  double best = f(from);
  out.push_back(from);
  for (std::size_t i = 1; i < samples; ++i) {
    const double t = from - static_cast<double>(i) * step;
    const double v = f(t);
    const bool better = want_minima ? v < best : v > best;
    if (better) {
      best = v;
      out.push_back(t);
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

namespace {

struct TrialOutcome {
  bool ok = false;
  std::string failed;  // first unmet condition
  CriticalPointLadder ladder;
};

struct BuildContext {
  const Kernel* k = nullptr;
  const GridDensity* f = nullptr;
  double xbar = 0.0;
  LadderCase kase = LadderCase::symmetric_even;
  LadderHints hints;
  double M = 0.0, D = 0.0;
  double l_minus = 0.0, l_plus = 0.0, h = 0.0;
  double epsilon = 0.0, eta = 0.0;
  double C_const = 0.0;
};

// Mollified values of f on a uniform scan over [xbar - eta, xbar].  When the
// mollification window spans very many cells of f, f is first restricted to
// a coarser grid (a fraction of delta per cell), which leaves the mollified
// values essentially unchanged but keeps the kink count per convolution
// bounded.
class ScanField {
 public:
  ScanField(const BuildContext& cx, double delta) : delta_(delta) {
    const GridDensity& f = *cx.f;
    const double target = delta / 32.0;
    if (f.h() < 0.5 * target) {
      const std::size_t n = std::max<std::size_t>(
          51, static_cast<std::size_t>(std::ceil((f.b() - f.a()) / target)) + 1);
      coarse_.emplace(GridDensity::sample(
          f.a(), f.b(), n, [&](double x) { return f.interp(x); },
          f.is_signed()));
    }
    md_.emplace(coarse_ ? *coarse_ : f, delta);

    const double step_goal = delta / cx.hints.scan_per_delta;
    m_ = std::max<std::size_t>(
        64, static_cast<std::size_t>(std::ceil(cx.eta / step_goal)));
    step_ = cx.eta / static_cast<double>(m_);
    x0_ = cx.xbar - cx.eta;
    vals_.resize(m_ + 1);
    for (std::size_t i = 0; i <= m_; ++i) vals_[i] = md_->value(x(i));
    sufmin_.resize(m_ + 1);
    double run = std::numeric_limits<double>::infinity();
    for (std::size_t i = m_ + 1; i-- > 0;) {
      run = std::min(run, vals_[i]);
      sufmin_[i] = run;
    }
  }

  std::size_t m() const { return m_; }
  double x(std::size_t i) const {
    return x0_ + static_cast<double>(i) * step_;
  }
  double step() const { return step_; }
  double value(std::size_t i) const { return vals_[i]; }
  double suffix_min(std::size_t i) const { return sufmin_[i]; }
  const MollifiedDensity& md() const { return *md_; }

  // Bisection on the mollified derivative between the scan neighbors of a
  // discrete extremum; falls back to the sample when no bracket exists.
  double refine_extremum(std::size_t i, std::size_t lo, std::size_t hi) const {
    if (i <= lo || i >= hi) return x(i);
    double a = x(i - 1), b = x(i + 1);
    double da = md_->deriv(a), db = md_->deriv(b);
    if (!(da * db < 0.0)) return x(i);
    for (int it = 0; it < 50; ++it) {
      const double mid = 0.5 * (a + b);
      const double dm = md_->deriv(mid);
      if ((da <= 0.0) == (dm <= 0.0)) {
        a = mid;
        da = dm;
      } else {
        b = mid;
      }
    }
    return 0.5 * (a + b);
  }

 private:
  double delta_ = 0.0;
  std::optional<GridDensity> coarse_;
  std::optional<MollifiedDensity> md_;
  std::size_t m_ = 0;
  double x0_ = 0.0, step_ = 0.0;
  std::vector<double> vals_, sufmin_;
};

TrialOutcome try_delta(const BuildContext& cx, double delta) {
  TrialOutcome out;
  const ScanField scan(cx, delta);
  const std::size_t m = scan.m();
  const double thr_top = cx.l_plus - cx.epsilon;
  const double thr_bot = cx.l_minus + cx.epsilon;

  // C1: rightmost scan point reaching the band top whose suffix still dips
  // to the band bottom.
  std::size_t iC = m + 1;
  for (std::size_t i = m + 1; i-- > 0;) {
    if (scan.value(i) >= thr_top && scan.suffix_min(i) <= thr_bot) {
      iC = i;
      break;
    }
  }
  if (iC > m) {
    out.failed = "C1 exists";
    return out;
  }

  std::vector<double> C_pts, p_pts;
  std::vector<std::size_t> p_idx;
  std::size_t win_hi = m;  // p_i searched on [C_i, previous p] (indices)
  bool want_min = true;    // p1 is a minimum
  while (true) {
    C_pts.push_back(scan.x(iC) - cx.xbar);
    std::size_t best = iC;
    for (std::size_t i = iC; i <= win_hi; ++i) {
      const bool better = want_min ? scan.value(i) < scan.value(best)
                                   : scan.value(i) > scan.value(best);
      if (better) best = i;  // leftmost tie kept automatically
    }
    const double refined = scan.refine_extremum(best, iC, win_hi);
    p_pts.push_back(refined - cx.xbar);
    p_idx.push_back(best);

    // Next crossing: the opposite threshold, strictly left of this C.
    if (iC == 0) break;
    const double thr = want_min ? thr_bot : thr_top;  // C2 seeks the bottom
    std::size_t next = m + 1;
    for (std::size_t i = iC; i-- > 0;) {
      const bool hit = want_min ? scan.value(i) <= thr : scan.value(i) >= thr;
      if (hit) {
        next = i;
        break;
      }
    }
    if (next > m) break;
    win_hi = p_idx.back();
    iC = next;
    want_min = !want_min;
  }

  const std::size_t N = p_pts.size();
  if (N < 10) {
    out.failed = "N >= 10";
    return out;
  }
  if (!(C_pts[0] > -cx.eta / 16.0 && C_pts[0] < 0.0 && p_pts[0] < 0.0)) {
    out.failed = "C1 and p1 inside (-eta/16, 0)";
    return out;
  }
  if (!(C_pts[1] > -cx.eta / 8.0)) {
    out.failed = "C2 inside (-eta/8, 0)";
    return out;
  }
  for (std::size_t i = 1; i < N; ++i)
    if (!(p_pts[i] < p_pts[i - 1])) {
      out.failed = "p strictly decreasing";
      return out;
    }
  const double slack = 1e-9 * std::max(1.0, cx.M);
  for (std::size_t i = 0; i < N; ++i) {
    const double v = scan.md().value(cx.xbar + p_pts[i]);
    const bool ok = (i % 2 == 0) ? v <= thr_bot + slack : v >= thr_top - slack;
    if (!ok) {
      out.failed = "alternation";
      return out;
    }
  }

  CriticalPointLadder L;
  L.kase = cx.kase;
  L.xbar = cx.xbar;
  L.epsilon = cx.epsilon;
  L.eta = cx.eta;
  L.delta = delta;
  L.l_minus = cx.l_minus;
  L.l_plus = cx.l_plus;
  L.h_jump = cx.h;
  L.C_points = std::move(C_pts);
  L.p_points = std::move(p_pts);
  L.N = N;
  L.C_const = cx.C_const;
  L.delta_rule_enforced = cx.hints.enforce_delta_rule;

  if (cx.kase == LadderCase::symmetric_even) {
    L.q_points = {-L.p_points[1]};
  } else {
    L.q_points = {-L.p_points[0], -L.p_points[1]};
  }
  L.gamma_bar = std::max(L.p_points[0] - L.p_points[1],
                         L.q_points[0] - L.p_points[0]);
  L.delta_rule_ok =
      cx.epsilon * std::fabs(cx.k->gprime(0.5 * L.gamma_bar)) >= cx.C_const;

  // Good index: first j whose segment is at most twice each neighbor.
  auto gap = [&](std::size_t j) {  // 1-based: p_j - p_{j+1}
    return L.p_points[j - 1] - L.p_points[j];
  };
  std::size_t j = 0;
  for (std::size_t cand = 1; cand + 1 < N; ++cand) {
    const bool left_ok = gap(cand + 1) >= 0.5 * gap(cand);
    const bool right_ok = cand == 1 || gap(cand - 1) >= 0.5 * gap(cand);
    if (left_ok && right_ok) {
      j = cand;
      break;
    }
  }
  if (j == 0) {
    out.failed = "good index exists";
    return out;
  }
  L.good_index = j;

  const double q1 = L.q_points[0];
  if (cx.kase == LadderCase::antisymmetric_odd && j == 1 &&
      !(gap(1) < q1 - L.p_points[0])) {
    L.good_couple = {L.p_points[0], q1};
  } else {
    L.good_couple = {L.p_points[j], L.p_points[j - 1]};
  }
  L.gamma = L.good_couple.second - L.good_couple.first;

  // Segment-balance invariant around the chosen couple.
  {
    const double tol = 1e-12 * cx.eta;
    double left_len, right_len;
    if (L.good_couple.second > L.p_points[0] + tol) {  // couple (p1, q1)
      left_len = gap(1);
      right_len = gap(1);  // mirrored segment (q1, q2) has the same length
    } else {
      left_len = gap(j + 1);
      right_len = j > 1 ? gap(j - 1) : q1 - L.p_points[0];
    }
    if (L.gamma > 2.0 * left_len + tol || L.gamma > 2.0 * right_len + tol) {
      out.failed = "good segment <= 2x neighbors";
      return out;
    }
  }

  out.ok = true;
  out.ladder = std::move(L);
  return out;
}

bool band_ok(const BuildContext& cx, double eta) {
  const GridDensity& f = *cx.f;
  const double lo = cx.xbar - 2.0 * eta;
  std::size_t total = 0, inside = 0;
  for (std::size_t i = 0; i < f.n(); ++i) {
    const double x = f.node(i);
    if (x <= lo || x >= cx.xbar) continue;
    ++total;
    const double v = f[i];
    if (v >= cx.l_minus - cx.epsilon && v <= cx.l_plus + cx.epsilon) ++inside;
  }
  if (total < 16) return false;
  return static_cast<double>(inside) >=
         cx.hints.band_fraction * static_cast<double>(total);
}

bool good_lambda_ok(const Kernel& k, double two_eta) {
  const double lam_bar = k.LambdaBar();
  for (int i = 0; i <= 512; ++i) {
    const double x = two_eta * std::pow(1e-10, static_cast<double>(i) / 512.0);
    if (!(std::fabs(k.gprime(0.5 * x)) > lam_bar * std::fabs(k.gprime(x))))
      return false;
  }
  return true;
}

}  // namespace

CriticalPointLadder build_ladder(const Kernel& k, const GridDensity& f,
                                 double xbar, LadderCase kase,
                                 const LadderHints& hints) {
  if (!(k.certified() || k.trusted()))
    throw LadderError("kernel must be certified or trusted", "kernel");
  if (!(xbar > f.a() && xbar < f.b()))
    throw LadderError("xbar outside the density window", "xbar interior");

  BuildContext cx;
  cx.k = &k;
  cx.f = &f;
  cx.xbar = xbar;
  cx.kase = kase;
  cx.hints = hints;
  cx.M = f.max_abs();
  cx.D = f.b() - f.a();
  if (!(cx.M > 0.0)) throw LadderError("density is identically zero", "M > 0");

  // Symmetry about xbar.
  {
    const double side = std::min(xbar - f.a(), f.b() - xbar);
    double worst = 0.0;
    for (int i = 1; i <= 33; ++i) {
      const double t = side * std::pow(0.8, static_cast<double>(i));
      const double sum = f.interp(xbar + t) +
                         (kase == LadderCase::symmetric_even
                              ? -f.interp(xbar - t)
                              : f.interp(xbar - t));
      worst = std::max(worst, std::fabs(sum));
    }
    if (worst > 1e-6 * cx.M)
      throw LadderError(kase == LadderCase::symmetric_even
                            ? "density is not even about xbar"
                            : "density is not odd about xbar",
                        "symmetry");
  }

  const JumpDiagnostics jd = essential_limits(f, xbar, default_windows(f, xbar));
  cx.l_minus = jd.left.lower;
  cx.l_plus = jd.left.upper;
  cx.h = jd.h_left;
  if (!(cx.h > 1e-3 * cx.M))
    throw LadderError("no jump; ladder undefined", "h_L > 0");
  if (kase == LadderCase::antisymmetric_odd &&
      !(cx.l_minus < std::min(0.0, jd.right.lower)))
    throw LadderError("lower-left limit not below min(0, lower-right limit)",
                      "l_L^- < min(0, l_R^-)");

  const double lam_bar = k.LambdaBar();
  if (!(lam_bar > 1.0))
    throw LadderError("derivative ratio limit does not exceed 1",
                      "Lambda_bar > 1");

  if (hints.epsilon > 0.0) {
    cx.epsilon = hints.epsilon;
  } else if (kase == LadderCase::symmetric_even) {
    cx.epsilon = 0.9 * (lam_bar - 1.0) * cx.h / (10.0 * lam_bar + 6.0);
  } else {
    const double cap1 = (lam_bar - 1.0) * cx.h / (18.0 * lam_bar + 6.0);
    const double cap2 = 0.5 * (jd.right.lower - cx.l_minus) *
                        Mollifier::standard().tail_integral(
                            1.0 - cx.h / (4.0 * cx.M));
    cx.epsilon = 0.9 * std::min(cap1, cap2);
  }
  if (!(cx.epsilon > 0.0 && 2.0 * cx.epsilon < cx.h))
    throw LadderError("admissible epsilon is empty", "epsilon in (0, h/2)");

  // Eta: band containment of f on (xbar - 2 eta, xbar) plus the doubling
  // ratio condition on (0, 2 eta).
  if (hints.eta > 0.0) {
    cx.eta = hints.eta;
    if (!(cx.eta < 0.25 * k.r()))
      throw LadderError("eta must be below r/4", "eta < r/4");
    if (!band_ok(cx, cx.eta))
      throw LadderError("band fraction condition fails at the hinted eta",
                        "band containment");
    if (!good_lambda_ok(k, 2.0 * cx.eta))
      throw LadderError("ratio condition fails at the hinted eta",
                        "|g'(x/2)| > Lambda_bar |g'(x)| on (0, 2 eta)");
  } else {
    double eta = k.r() / 8.0;
    bool found = false;
    std::string last = "band containment";
    for (int it = 0; it < 30 && !found; ++it) {
      if (!band_ok(cx, eta)) {
        last = "band containment";
      } else if (!good_lambda_ok(k, 2.0 * eta)) {
        last = "|g'(x/2)| > Lambda_bar |g'(x)| on (0, 2 eta)";
      } else {
        found = true;
        break;
      }
      eta *= 0.5;
    }
    if (!found)
      throw LadderError("no admissible eta found", last);
    cx.eta = eta;
  }

  cx.C_const = ladder_constant(k, cx.eta, cx.D, cx.M);

  const double delta_cap =
      std::min(cx.eta, 0.25 * std::min(xbar - f.a(), f.b() - xbar));
  double delta = hints.delta0 > 0.0 ? std::min(hints.delta0, 0.999 * delta_cap)
                                    : 0.5 * delta_cap;
  std::string last = "C1 exists";
  for (int it = 0; it <= hints.max_delta_halvings; ++it) {
    if (delta < hints.min_delta_spacings * f.h()) break;
    TrialOutcome t = try_delta(cx, delta);
    if (t.ok && (!hints.enforce_delta_rule || t.ladder.delta_rule_ok))
      return t.ladder;
    last = t.ok ? "epsilon |g'(gamma_bar/2)| >= C(eta, D, M, g)" : t.failed;
    delta *= 0.5;
  }
  throw LadderError(
      "grid cannot resolve ladder; refine f (last unmet condition: " + last +
          ")",
      last);
}

}  // namespace riesz
