#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace riesz {

// Result of the small-scale derivative-ratio limit
//   liminf_{x->0+} |g'(x/2)| / |g'(x)|
// probed on a geometric sequence x_k = x0 * 2^-k.
struct LambdaEstimate {
  double estimate = 0.0;               // may be +infinity
  std::optional<double> analytic;      // closed form when available
  bool oscillatory = false;            // ratio sequence was not eventually monotone
  std::vector<double> ratios;
};

enum class ClauseStatus { pass, fail, unchecked };

struct ClauseReport {
  std::string name;
  ClauseStatus status = ClauseStatus::unchecked;
  std::string detail;
  std::optional<double> violation_x;   // first violating probe, if any
};

struct CertificateReport {
  bool passed = false;                 // no clause failed (unchecked allowed)
  double r = 0.0;                      // certified window (0, r)
  LambdaEstimate lambda;
  double lambda_bar = 0.0;
  std::vector<ClauseReport> clauses;
};

// Partial integrals I_n = -int_{r/2^n}^{r} g'(t) t dt and their limit,
// the quantity controlling how much of g' mass sits near the origin.
struct ConvergenceReport {
  std::vector<double> partials;
  bool cauchy = false;
  double limit = 0.0;
  std::optional<double> closed_form;   // PowerLaw: r^(l+1)/(l+1) - r^(a+1)/(a+1)
};

// Interaction kernel g, even in x, attractive at large distance and singular
// (or kinked) at the origin.  Two forms:
//   PowerLaw:  g(x) = |x|^a / a - |x|^l / l      (l != 0)
//              g(x) = |x|^a / a - log|x|         (l == 0)
//   Tabulated: callable samplers for g, g', optionally g'' on (0, x_max].
class Kernel {
 public:
  enum class Form { power_law, tabulated };
  using Sampler = std::function<double(double)>;

  // Requires alpha > 0 and -1 < lambda < min(1, alpha).
  static Kernel power_law(double alpha, double lambda);

  // Samplers are taken on (0, x_max]; evaluation is extended evenly.
  // gsecond may be null.  Below x_min, g and g' follow a power fit through
  // the first two probe scales (tables are expected to start well inside
  // the singular regime).
  static Kernel tabulated(Sampler g, Sampler gprime, Sampler gsecond,
                          double x_min, double x_max);

  // CSV with header x,g,gprime or x,g,gprime,gsecond; x strictly increasing, > 0.
  static Kernel tabulated_from_csv(const std::string& path);

  Form form() const { return form_; }
  double alpha() const { return alpha_; }
  double lambda_exponent() const { return lambda_; }

  double g(double x) const;          // +infinity at 0 when lambda <= 0
  double gprime(double x) const;     // odd; domain error at 0
  double gsecond(double x) const;    // even; domain error if unavailable
  bool has_gsecond() const;

  // Exponent e with |g(x)| ~ x^e near the origin (lambda for power laws, the
  // table's extension fit otherwise).  Integrals whose endpoint touches the
  // singularity are graded against this exponent.
  double origin_exponent() const;

  // Largest window (0, r) on which the shape hypotheses are certified:
  // g decreasing and convex, g' concave.  For PowerLaw this is the root of
  // g' capped by the closed-form convexity/concavity boundaries.
  double r() const;

  double Lambda() const;             // small-scale ratio limit (may be +inf)
  double LambdaBar() const;          // min(2, (1 + Lambda) / 2)

  bool certified() const { return certified_; }
  bool trusted() const { return trusted_; }
  void set_trusted(bool t) { trusted_ = t; }

  friend CertificateReport certify_hypotheses(Kernel& k, int probes);
  friend double gprime_first_moment(const Kernel& k, double w);

 private:
  Kernel() = default;
  double power_r() const;

  Form form_ = Form::power_law;
  double alpha_ = 0.0;
  double lambda_ = 0.0;
  Sampler g_, gprime_, gsecond_;
  double x_min_ = 0.0, x_max_ = 0.0;
  // Power fit g ~ c * x^p below x_min for tabulated kernels.
  double ext_p_ = 0.0, ext_c_ = 0.0, ext_gp_p_ = 0.0, ext_gp_c_ = 0.0;
  mutable std::optional<double> r_;
  mutable std::optional<LambdaEstimate> lambda_info_;
  bool certified_ = false;
  bool trusted_ = false;
};

// Probes every hypothesis clause on a geometric grid inside (0, r) and a
// uniform grid beyond, analytically where the form allows.  Marks the kernel
// certified when no clause fails.
CertificateReport certify_hypotheses(Kernel& k, int probes = 256);

// Ratio probe for Lambda on x_k = x0 * 2^-k, k < levels.  Running minimum of
// the tail is used as the limit (the target is a liminf); +infinity is
// reported when ratios exceed 1e6 and are still increasing.
// Requires 0 < x0 < r.
LambdaEstimate estimate_lambda(const Kernel& k, double x0 = 0.0,
                               int levels = 14);

inline double lambda_bar_of(double Lambda) {
  return Lambda > 3.0 ? 2.0 : (1.0 + Lambda) / 2.0;
}

// Total variation of g' on [lo, hi], 0 < lo <= hi.  Closed form for PowerLaw,
// quadrature of |g''| (or probe refinement) otherwise.
double gprime_total_variation(const Kernel& k, double lo, double hi);

// First moment int_0^w t g'(t) dt.  Finite for every admissible kernel even
// though g' itself is not integrable at 0; closed form for PowerLaw and for
// the fitted small-x extension of tables.  Negative for w inside the
// decreasing window.  Integrands of the form [difference vanishing like
// c t] * g'(t) are integrated as c * moment below the scale where the
// difference loses floating-point signal.
double gprime_first_moment(const Kernel& k, double w);

// Dyadic partial integrals of -g'(t) t toward 0; finite limit certifies that
// the kernel derivative is integrable against distance near the origin.
// Requires 0 < r <= k.r().
ConvergenceReport check_tail_integrability(const Kernel& k, double r,
                                           int refinements = 48);

}  // namespace riesz
