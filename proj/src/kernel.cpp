#include "riesz1d/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "riesz1d/quadrature.hpp"

namespace riesz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct HermiteTable {
  std::vector<double> x, y, yp;

  std::size_t interval(double t) const {
    auto it = std::upper_bound(x.begin(), x.end(), t);
    std::size_t i = static_cast<std::size_t>(it - x.begin());
    if (i == 0) return 0;
    if (i >= x.size()) return x.size() - 2;
    return i - 1;
  }

  double value(double t) const {
    const std::size_t i = interval(t);
    const double h = x[i + 1] - x[i];
    const double u = (t - x[i]) / h;
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * y[i] + (u3 - 2 * u2 + u) * h * yp[i] +
           (-2 * u3 + 3 * u2) * y[i + 1] + (u3 - u2) * h * yp[i + 1];
  }

  double derivative(double t) const {
    const std::size_t i = interval(t);
    const double h = x[i + 1] - x[i];
    const double u = (t - x[i]) / h;
    const double u2 = u * u;
    return (6 * u2 - 6 * u) * y[i] / h + (3 * u2 - 4 * u + 1) * yp[i] +
           (-6 * u2 + 6 * u) * y[i + 1] / h + (3 * u2 - 2 * u) * yp[i + 1];
  }
};

struct LinearTable {
  std::vector<double> x, y;
  double value(double t) const {
    auto it = std::upper_bound(x.begin(), x.end(), t);
    std::size_t i = static_cast<std::size_t>(it - x.begin());
    if (i == 0) i = 1;
    if (i >= x.size()) i = x.size() - 1;
    const double w = (t - x[i - 1]) / (x[i] - x[i - 1]);
    return (1 - w) * y[i - 1] + w * y[i];
  }
};

}  // namespace

Kernel Kernel::power_law(double alpha, double lambda) {
  if (!(alpha > 0.0))
    throw std::invalid_argument("power-law kernel requires alpha > 0");
  if (!(lambda > -1.0 && lambda < 1.0 && lambda < alpha))
    throw std::invalid_argument(
        "power-law kernel requires -1 < lambda < min(1, alpha)");
  Kernel k;
  k.form_ = Form::power_law;
  k.alpha_ = alpha;
  k.lambda_ = lambda;
  k.certified_ = false;  // set by certify_hypotheses
  return k;
}

Kernel Kernel::tabulated(Sampler g, Sampler gprime, Sampler gsecond,
                         double x_min, double x_max) {
  if (!g || !gprime) throw std::invalid_argument("g and g' samplers required");
  if (!(x_min > 0.0 && x_max > x_min))
    throw std::invalid_argument("tabulated kernel needs 0 < x_min < x_max");
  Kernel k;
  k.form_ = Form::tabulated;
  k.g_ = std::move(g);
  k.gprime_ = std::move(gprime);
  k.gsecond_ = std::move(gsecond);
  k.x_min_ = x_min;
  k.x_max_ = x_max;

  // Power fit below the table, through values at x_min and 2 x_min.
  auto fit = [&](double v1, double v2, double& p, double& c) {
    if (v1 * v2 > 0.0 && std::fabs(v2) != std::fabs(v1)) {
      p = std::log(std::fabs(v2) / std::fabs(v1)) / std::log(2.0);
      c = v1 / std::pow(x_min, p);
    } else {  // flat continuation
      p = 0.0;
      c = v1;
    }
  };
  fit(k.g_(x_min), k.g_(std::min(2 * x_min, x_max)), k.ext_p_, k.ext_c_);
  fit(k.gprime_(x_min), k.gprime_(std::min(2 * x_min, x_max)), k.ext_gp_p_,
      k.ext_gp_c_);
  return k;
}

Kernel Kernel::tabulated_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open kernel table: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty kernel table: " + path);
  auto strip = [](std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(),
                           [](char c) { return c == ' ' || c == '\r'; }),
            s.end());
    return s;
  };
  const std::string header = strip(line);
  bool has_gs = false;
  if (header == "x,g,gprime")
    has_gs = false;
  else if (header == "x,g,gprime,gsecond")
    has_gs = true;
  else
    throw std::runtime_error("kernel table header must be x,g,gprime[,gsecond]");

  auto table = std::make_shared<HermiteTable>();
  auto gs = std::make_shared<LinearTable>();
  while (std::getline(in, line)) {
    if (strip(line).empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != (has_gs ? 4u : 3u))
      throw std::runtime_error("malformed kernel table row: " + line);
    table->x.push_back(vals[0]);
    table->y.push_back(vals[1]);
    table->yp.push_back(vals[2]);
    if (has_gs) {
      gs->x.push_back(vals[0]);
      gs->y.push_back(vals[3]);
    }
  }
  if (table->x.size() < 4)
    throw std::runtime_error("kernel table needs at least 4 rows");
  for (std::size_t i = 0; i + 1 < table->x.size(); ++i)
    if (!(table->x[i] > 0.0 && table->x[i + 1] > table->x[i]))
      throw std::runtime_error("kernel table x must be positive and increasing");

  Sampler g = [table](double t) { return table->value(t); };
  Sampler gp = [table](double t) { return table->derivative(t); };
  Sampler g2;
  if (has_gs) g2 = [gs](double t) { return gs->value(t); };
  return tabulated(std::move(g), std::move(gp), std::move(g2),
                   table->x.front(), table->x.back());
}

double Kernel::g(double x) const {
  const double ax = std::fabs(x);
  if (form_ == Form::power_law) {
    if (ax == 0.0) return lambda_ <= 0.0 ? kInf : 0.0;
    const double attract = std::pow(ax, alpha_) / alpha_;
    if (lambda_ == 0.0) return attract - std::log(ax);
    return attract - std::pow(ax, lambda_) / lambda_;
  }
  if (ax == 0.0) return ext_p_ < 0.0 ? kInf : ext_c_ * (ext_p_ > 0.0 ? 0.0 : 1.0);
  if (ax < x_min_) return ext_c_ * std::pow(ax, ext_p_);
  if (ax > x_max_)
    throw std::domain_error("tabulated kernel evaluated beyond table range");
  return g_(ax);
}

double Kernel::gprime(double x) const {
  if (x == 0.0)
    throw std::domain_error("g' is undefined at 0");
  const double ax = std::fabs(x);
  const double s = x > 0.0 ? 1.0 : -1.0;
  if (form_ == Form::power_law)
    return s * (std::pow(ax, alpha_ - 1.0) - std::pow(ax, lambda_ - 1.0));
  if (ax < x_min_) return s * ext_gp_c_ * std::pow(ax, ext_gp_p_);
  if (ax > x_max_)
    throw std::domain_error("tabulated kernel evaluated beyond table range");
  return s * gprime_(ax);
}

double Kernel::gsecond(double x) const {
  const double ax = std::fabs(x);
  if (form_ == Form::power_law) {
    if (ax == 0.0) throw std::domain_error("g'' is undefined at 0");
    return (alpha_ - 1.0) * std::pow(ax, alpha_ - 2.0) -
           (lambda_ - 1.0) * std::pow(ax, lambda_ - 2.0);
  }
  if (!gsecond_) throw std::domain_error("kernel has no g'' data");
  if (ax < x_min_ || ax > x_max_)
    throw std::domain_error("tabulated kernel evaluated beyond table range");
  return gsecond_(ax);
}

bool Kernel::has_gsecond() const {
  return form_ == Form::power_law || static_cast<bool>(gsecond_);
}

double Kernel::origin_exponent() const {
  return form_ == Form::power_law ? lambda_ : ext_p_;
}

double gprime_first_moment(const Kernel& k, double w) {
  if (!(w > 0.0)) return 0.0;
  if (k.form_ == Kernel::Form::power_law) {
    const double a = k.alpha_, l = k.lambda_;
    // t g'(t) = t^a - t^l; the l = 0 (logarithmic) case folds in as w^1 / 1.
    return std::pow(w, a + 1.0) / (a + 1.0) - std::pow(w, l + 1.0) / (l + 1.0);
  }
  const double p = k.ext_gp_p_, c = k.ext_gp_c_;
  if (!(p > -2.0))  // steeper than t^-2: the moment itself diverges
    return -std::numeric_limits<double>::infinity();
  const double cap = std::min(w, k.x_min_);
  double m = c * std::pow(cap, p + 2.0) / (p + 2.0);
  if (w > k.x_min_)
    m += integrate([&](double t) { return t * k.gprime(t); }, k.x_min_, w,
                   {1e-12, 1e-12, 2000})
             .value;
  return m;
}

double Kernel::power_r() const {
  // g' root is at 1.  Convexity can bind for alpha < 1, concavity of g'
  // for alpha outside [1, 2]; both have closed-form boundaries.
  double r = 1.0;
  const double a = alpha_, l = lambda_;
  if (a < 1.0) {
    const double rv = std::pow((1.0 - l) / (1.0 - a), 1.0 / (a - l));
    r = std::min(r, rv);
  }
  const double P = (a - 1.0) * (a - 2.0);
  if (P > 0.0) {
    const double Q = (l - 1.0) * (l - 2.0);
    const double rc = std::pow(Q / P, 1.0 / (a - l));
    r = std::min(r, rc);
  }
  return r;
}

double Kernel::r() const {
  if (r_) return *r_;
  if (form_ == Form::power_law) {
    r_ = power_r();
    return *r_;
  }
  // First sign change of g' scanning up from the table start.
  const int m = 1024;
  double prev_x = x_min_;
  double prev = gprime_(prev_x);
  double root = x_max_;
  if (prev >= 0.0) {
    r_ = x_max_;  // never decreasing; clause checks will report the failure
    return *r_;
  }
  for (int i = 1; i <= m; ++i) {
    const double x = x_min_ + (x_max_ - x_min_) * i / m;
    const double v = gprime_(x);
    if (v >= 0.0) {
      double lo = prev_x, hi = x;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (gprime_(mid) < 0.0 ? lo : hi) = mid;
      }
      root = 0.5 * (lo + hi);
      break;
    }
    prev_x = x;
    prev = v;
  }
  r_ = root;
  return *r_;
}

double Kernel::Lambda() const {
  if (form_ == Form::power_law) return std::pow(2.0, 1.0 - lambda_);
  if (!lambda_info_) lambda_info_ = estimate_lambda(*this);
  return lambda_info_->estimate;
}

double Kernel::LambdaBar() const { return lambda_bar_of(Lambda()); }

LambdaEstimate estimate_lambda(const Kernel& k, double x0, int levels) {
  const double r = k.r();
  if (x0 == 0.0) x0 = 0.5 * r;
  if (!(x0 > 0.0 && x0 < r))
    throw std::domain_error("lambda probe start must lie in (0, r)");
  if (levels < 4) levels = 4;

  LambdaEstimate est;
  if (k.form() == Kernel::Form::power_law)
    est.analytic = std::pow(2.0, 1.0 - k.lambda_exponent());

  double x = x0;
  for (int i = 0; i < levels; ++i, x *= 0.5) {
    const double den = std::fabs(k.gprime(x));
    if (den == 0.0) continue;
    est.ratios.push_back(std::fabs(k.gprime(0.5 * x)) / den);
  }
  if (est.ratios.size() < 3)
    throw std::domain_error("lambda probe failed: g' vanishes on probe grid");

  int sign_changes = 0;
  for (std::size_t i = 2; i < est.ratios.size(); ++i) {
    const double d1 = est.ratios[i - 1] - est.ratios[i - 2];
    const double d2 = est.ratios[i] - est.ratios[i - 1];
    if (d1 * d2 < 0.0) ++sign_changes;
  }
  est.oscillatory = sign_changes >= 2;

  const std::size_t n = est.ratios.size();
  const double last = est.ratios[n - 1];
  if (last > 1e6 && last >= est.ratios[n - 2]) {
    est.estimate = kInf;
    return est;
  }
  // The target is a liminf: take the running minimum over the tail.
  const std::size_t tail = std::max<std::size_t>(3, n / 3);
  double m = kInf;
  for (std::size_t i = n - tail; i < n; ++i) m = std::min(m, est.ratios[i]);
  est.estimate = m;
  return est;
}

double gprime_total_variation(const Kernel& k, double lo, double hi) {
  if (!(lo > 0.0)) throw std::domain_error("total variation needs lo > 0");
  if (!(hi >= lo)) throw std::domain_error("total variation needs hi >= lo");
  if (hi == lo) return 0.0;

  if (k.form() == Kernel::Form::power_law) {
    // g'' = (a-1) x^(a-2) + (1-l) x^(l-2) has at most one root (alpha < 1).
    std::vector<double> knots{lo};
    const double a = k.alpha(), l = k.lambda_exponent();
    if (a < 1.0) {
      const double rv = std::pow((1.0 - l) / (1.0 - a), 1.0 / (a - l));
      if (rv > lo && rv < hi) knots.push_back(rv);
    }
    knots.push_back(hi);
    double tv = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
      tv += std::fabs(k.gprime(knots[i + 1]) - k.gprime(knots[i]));
    return tv;
  }

  if (k.has_gsecond()) {
    auto q = integrate([&](double t) { return std::fabs(k.gsecond(t)); }, lo,
                       hi, {1e-12, 1e-12, 8000});
    return q.value;
  }
  // Probe refinement on g' differences.
  double prev_tv = -1.0;
  for (int m = 256; m <= 1 << 20; m *= 2) {
    double tv = 0.0;
    double last = k.gprime(lo);
    for (int i = 1; i <= m; ++i) {
      const double x = lo + (hi - lo) * i / m;
      const double v = k.gprime(x);
      tv += std::fabs(v - last);
      last = v;
    }
    if (prev_tv >= 0.0 && std::fabs(tv - prev_tv) <= 1e-10 * (1.0 + tv))
      return tv;
    prev_tv = tv;
  }
  return prev_tv;
}

ConvergenceReport check_tail_integrability(const Kernel& k, double r,
                                           int refinements) {
  if (!(r > 0.0 && r <= k.r()))
    throw std::domain_error("tail check requires 0 < r <= certified r");
  ConvergenceReport rep;
  double sum = 0.0;
  for (int n = 1; n <= refinements; ++n) {
    const double b = r * std::pow(2.0, -(n - 1));
    const double a = 0.5 * b;
    auto q = integrate([&](double t) { return -k.gprime(t) * t; }, a, b,
                       {1e-14, 1e-13, 2000});
    sum += q.value;
    rep.partials.push_back(sum);
  }
  const std::size_t n = rep.partials.size();
  rep.limit = rep.partials.back();
  if (n >= 3) {
    const double d1 = std::fabs(rep.partials[n - 1] - rep.partials[n - 2]);
    const double d2 = std::fabs(rep.partials[n - 2] - rep.partials[n - 3]);
    rep.cauchy = d1 <= d2 + 1e-15 && d1 <= 1e-6 * std::max(1.0, std::fabs(rep.limit));
  }
  if (k.form() == Kernel::Form::power_law) {
    const double a = k.alpha(), l = k.lambda_exponent();
    rep.closed_form =
        std::pow(r, l + 1.0) / (l + 1.0) - std::pow(r, a + 1.0) / (a + 1.0);
  }
  return rep;
}

namespace {

ClauseReport probe_clause(const std::string& name,
                          const std::vector<double>& xs,
                          const std::function<bool(double)>& ok,
                          const std::string& fail_detail) {
  ClauseReport c;
  c.name = name;
  c.status = ClauseStatus::pass;
  for (double x : xs) {
    if (!ok(x)) {
      c.status = ClauseStatus::fail;
      c.violation_x = x;
      c.detail = fail_detail;
      break;
    }
  }
  return c;
}

}  // namespace

CertificateReport certify_hypotheses(Kernel& k, int probes) {
  if (probes < 8) probes = 8;
  CertificateReport rep;
  const double r = k.r();
  rep.r = r;

  // Geometric probes inside (0, r); uniform probes past r for symmetry/BV.
  // The window is open, so the top probe stays strictly below r (g'(r) = 0
  // exactly when r is the root of g').
  std::vector<double> in(static_cast<std::size_t>(probes));
  for (int i = 0; i < probes; ++i)
    in[static_cast<std::size_t>(i)] =
        r * (1.0 - 1e-9) *
        std::pow(10.0, -8.0 * (probes - 1 - i) / (probes - 1));
  double outer_hi = 4.0 * r;
  if (k.form() == Kernel::Form::tabulated) outer_hi = std::min(outer_hi, k.x_max_);
  std::vector<double> out;
  for (int i = 1; i <= 64; ++i) {
    const double x = r + (outer_hi - r) * i / 64.0;
    if (x > r) out.push_back(x);
  }

  const bool power = k.form() == Kernel::Form::power_law;

  {  // symmetry of g and oddness of g'
    std::vector<double> xs = in;
    xs.insert(xs.end(), out.begin(), out.end());
    auto c = probe_clause(
        "symmetric", xs,
        [&](double x) {
          const double d = std::fabs(k.g(x) - k.g(-x)) +
                           std::fabs(k.gprime(x) + k.gprime(-x));
          return d <= 1e-10 * (1.0 + std::fabs(k.g(x)));
        },
        "g(x) != g(-x) beyond tolerance");
    if (c.status == ClauseStatus::pass)
      c.detail = power ? "even in |x| by construction" : "even extension verified";
    rep.clauses.push_back(c);
  }

  {  // local integrability near the origin
    ClauseReport c;
    c.name = "locally_integrable";
    if (power) {
      c.status = ClauseStatus::pass;
      c.detail = "|x|^lambda with lambda > -1 (and log) are integrable near 0";
    } else {
      double prev = -1.0;
      bool ok = false;
      double sum = 0.0;
      for (int n = 0; n < 60; ++n) {
        const double b = r * std::pow(2.0, -n);
        auto q = integrate([&](double t) { return std::fabs(k.g(t)); },
                           0.5 * b, b, {1e-12, 1e-10, 500});
        sum += q.value;
        if (n > 10 && prev >= 0.0 && sum - prev < 1e-9 * (1.0 + sum)) {
          ok = true;
          break;
        }
        prev = sum;
      }
      c.status = ok ? ClauseStatus::pass : ClauseStatus::fail;
      c.detail = ok ? "dyadic partial integrals of |g| are Cauchy"
                    : "partial integrals of |g| near 0 do not settle";
    }
    rep.clauses.push_back(c);
  }

  rep.clauses.push_back(probe_clause(
      "decreasing_on_window", in,
      [&](double x) { return k.gprime(x) < 0.0; }, "g'(x) >= 0 inside (0, r)"));

  {  // convexity of g on (0, r): g' nondecreasing; g'' >= 0 when available
    ClauseReport c = probe_clause(
        "convex_on_window", in,
        [&](double x) {
          if (k.has_gsecond()) return k.gsecond(x) >= -1e-12;
          return true;
        },
        "g''(x) < 0 inside (0, r)");
    if (c.status == ClauseStatus::pass) {
      double prev = k.gprime(in.front());
      for (std::size_t i = 1; i < in.size(); ++i) {
        const double v = k.gprime(in[i]);
        if (v < prev - 1e-9 * (1.0 + std::fabs(prev))) {
          c.status = ClauseStatus::fail;
          c.violation_x = in[i];
          c.detail = "g' decreases inside (0, r)";
          break;
        }
        prev = v;
      }
    }
    if (c.status == ClauseStatus::pass)
      c.detail = power ? "closed-form boundary respected by certified r"
                       : "g' nondecreasing on probe grid";
    rep.clauses.push_back(c);
  }

  {  // concavity of g' on (0, r): g'' nonincreasing
    ClauseReport c;
    c.name = "gprime_concave_on_window";
    if (!k.has_gsecond()) {
      c.status = ClauseStatus::unchecked;
      c.detail = "no g'' data on tabulated kernel";
    } else {
      c.status = ClauseStatus::pass;
      double prev = k.gsecond(in.front());
      for (std::size_t i = 1; i < in.size(); ++i) {
        const double v = k.gsecond(in[i]);
        if (v > prev + 1e-9 * (1.0 + std::fabs(prev))) {
          c.status = ClauseStatus::fail;
          c.violation_x = in[i];
          c.detail = "g'' increases inside (0, r)";
          break;
        }
        prev = v;
      }
      if (c.status == ClauseStatus::pass)
        c.detail = power ? "closed-form boundary respected by certified r"
                         : "g'' nonincreasing on probe grid";
    }
    rep.clauses.push_back(c);
  }

  {  // bounded variation of g' on compacts away from 0
    ClauseReport c;
    c.name = "gprime_bv_loc";
    try {
      const double tv = gprime_total_variation(k, 0.01 * r, power ? 2.0 * r : outer_hi);
      c.status = std::isfinite(tv) ? ClauseStatus::pass : ClauseStatus::fail;
      c.detail = "TV on representative compact = " + std::to_string(tv);
    } catch (const std::exception& e) {
      c.status = ClauseStatus::fail;
      c.detail = e.what();
    }
    rep.clauses.push_back(c);
  }

  {  // small-scale derivative ratio exceeds 1
    ClauseReport c;
    c.name = "derivative_ratio_exceeds_one";
    try {
      LambdaEstimate le = estimate_lambda(k);
      rep.lambda = le;
      const double L = power ? *le.analytic : le.estimate;
      bool ok = L > 1.0;
      if (power && std::isfinite(le.estimate))
        ok = ok && std::fabs(le.estimate - *le.analytic) <= 1e-3;
      c.status = ok ? ClauseStatus::pass : ClauseStatus::fail;
      std::ostringstream d;
      d << "Lambda = " << (std::isfinite(L) ? std::to_string(L) : "inf")
        << (le.oscillatory ? " (oscillatory probe, running minimum used)" : "");
      c.detail = d.str();
      rep.lambda_bar = lambda_bar_of(L);
    } catch (const std::exception& e) {
      c.status = ClauseStatus::fail;
      c.detail = e.what();
    }
    rep.clauses.push_back(c);
  }

  rep.passed = std::none_of(
      rep.clauses.begin(), rep.clauses.end(),
      [](const ClauseReport& c) { return c.status == ClauseStatus::fail; });
  if (rep.passed) k.certified_ = true;
  return rep;
}

}  // namespace riesz
