#include "cli.hpp"

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "riesz1d/continuity.hpp"
#include "riesz1d/io.hpp"
#include "riesz1d/kernel.hpp"
#include "riesz1d/ladder.hpp"
#include "riesz1d/measure.hpp"
#include "riesz1d/mollify.hpp"
#include "riesz1d/potential.hpp"
#include "riesz1d/regularity.hpp"
#include "riesz1d/rng.hpp"
#include "riesz1d/solver.hpp"

namespace riesz {
namespace {

constexpr const char* kVersion = "0.1.0";

// Exit contract: 0 clean, 1 verified-negative verdict, 2 usage or
// precondition error, 3 jump detected (regularity only).
enum ExitCode { kOk = 0, kNegative = 1, kUsage = 2, kJump = 3 };

struct Ctx {
  std::string outdir = ".";
  std::uint64_t seed = 1;
  bool json_out = false;
  nlohmann::json config;
  std::vector<std::string> outputs;

  std::string path(const std::string& name) {
    std::filesystem::create_directories(outdir);
    return (std::filesystem::path(outdir) / name).string();
  }
  void note(std::string p) { outputs.push_back(std::move(p)); }
  void emit(const nlohmann::json& report, const std::string& file) {
    const std::string p = path(file);
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p);
    out << report.dump(2) << '\n';
    note(p);
    if (json_out) std::cout << report.dump(2) << std::endl;
  }
};

void add_global(CLI::App* cmd, Ctx& ctx) {
  cmd->add_option("--out", ctx.outdir, "output directory")
      ->capture_default_str();
  cmd->add_option("--seed", ctx.seed, "random seed")->capture_default_str();
  cmd->add_flag("--json", ctx.json_out, "echo the report JSON to stdout");
}

struct KernelOpts {
  double alpha = 0.0, lambda = 0.0;
  std::string spec, tabulated;
  bool trusted = false;
  CLI::Option* alpha_opt = nullptr;
};

void add_kernel_opts(CLI::App* cmd, KernelOpts& ko) {
  ko.alpha_opt =
      cmd->add_option("--alpha", ko.alpha, "attraction exponent, > 0");
  cmd->add_option("--lambda", ko.lambda,
                  "repulsion exponent, -1 < lambda < min(1, alpha)")
      ->capture_default_str();
  cmd->add_option("--spec", ko.spec,
                  "kernel spec JSON: {\"alpha\":A,\"lambda\":L} or "
                  "{\"tabulated\":\"file.csv\"}");
  cmd->add_option("--tabulated", ko.tabulated,
                  "tabulated kernel CSV (x,g,gprime[,gsecond])");
  cmd->add_flag("--trusted", ko.trusted,
                "accept an uncertified tabulated kernel");
}

Kernel kernel_from_json(const nlohmann::json& j, nlohmann::json& resolved) {
  if (j.contains("tabulated")) {
    const std::string p = j.at("tabulated").get<std::string>();
    resolved = {{"form", "tabulated"}, {"path", p}};
    return Kernel::tabulated_from_csv(p);
  }
  const double a = j.at("alpha").get<double>();
  const double l = j.at("lambda").get<double>();
  resolved = {{"form", "power_law"}, {"alpha", a}, {"lambda", l}};
  return Kernel::power_law(a, l);
}

Kernel make_kernel(const KernelOpts& ko, nlohmann::json& resolved,
                   bool need_certified) {
  std::optional<Kernel> k;
  if (!ko.spec.empty()) {
    std::ifstream in(ko.spec);
    if (!in) throw std::invalid_argument("cannot open kernel spec " + ko.spec);
    nlohmann::json j;
    in >> j;
    k = kernel_from_json(j, resolved);
  } else if (!ko.tabulated.empty()) {
    resolved = {{"form", "tabulated"}, {"path", ko.tabulated}};
    k = Kernel::tabulated_from_csv(ko.tabulated);
  } else if (ko.alpha_opt && ko.alpha_opt->count() > 0) {
    resolved = {{"form", "power_law"},
                {"alpha", ko.alpha},
                {"lambda", ko.lambda}};
    k = Kernel::power_law(ko.alpha, ko.lambda);
  } else {
    throw std::invalid_argument(
        "kernel not specified: use --alpha/--lambda, --spec or --tabulated");
  }
  if (ko.trusted) {
    k->set_trusted(true);
    resolved["trusted"] = true;
  }
  if (need_certified && !k->trusted()) {
    CertificateReport rep = certify_hypotheses(*k);
    if (!rep.passed)
      throw std::invalid_argument(
          "kernel failed hypothesis certification; run check-kernel for the "
          "clause report");
  }
  return *k;
}

void write_trajectory_csv(const std::string& path,
                          const std::vector<std::vector<double>>& snaps) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "snap";
  if (!snaps.empty())
    for (std::size_t i = 0; i < snaps.front().size(); ++i) out << ",p" << i;
  out << '\n';
  for (std::size_t s = 0; s < snaps.size(); ++s) {
    out << s;
    for (double v : snaps[s]) out << ',' << format_double(v);
    out << '\n';
  }
}

// ---- check-kernel ---------------------------------------------------------

struct CheckKernelOpts {
  KernelOpts kernel;
  int probes = 256;
};

int cmd_check_kernel(Ctx& ctx, const CheckKernelOpts& o) {
  nlohmann::json kj;
  Kernel k = make_kernel(o.kernel, kj, /*need_certified=*/false);
  ctx.config = {{"command", "check-kernel"},
                {"kernel", kj},
                {"probes", o.probes},
                {"seed", ctx.seed}};

  nlohmann::json rep;
  CertificateReport cert;
  bool tail_ok = false;
  try {
    cert = certify_hypotheses(k, o.probes);
    rep["certificate"] = to_json(cert);
  } catch (const std::exception& e) {
    cert.passed = false;
    rep["certificate"] = {{"passed", false}, {"error", e.what()}};
  }
  try {
    if (k.r() > 0.0) {
      ConvergenceReport tail = check_tail_integrability(k, k.r());
      rep["tail"] = to_json(tail);
      tail_ok = tail.cauchy;
    } else {
      rep["tail"] = {{"error", "no certified window"}};
    }
  } catch (const std::exception& e) {
    rep["tail"] = {{"error", e.what()}};
  }
  ctx.emit(rep, "check_kernel_report.json");
  if (!ctx.json_out)
    std::cout << "certificate " << (cert.passed ? "pass" : "FAIL")
              << "  r=" << format_double(cert.r)
              << "  Lambda=" << format_double(cert.lambda.estimate)
              << "  LambdaBar=" << format_double(cert.lambda_bar)
              << "  tail=" << (tail_ok ? "cauchy" : "FAIL") << '\n';
  return cert.passed && tail_ok ? kOk : kNegative;
}

// ---- minimize -------------------------------------------------------------

struct MinimizeOpts {
  KernelOpts kernel;
  std::string method = "grid";
  std::size_t n = 401, particles = 200, max_iters = 5000, stride = 10;
  std::vector<double> window{-2.0, 2.0};
  double step0 = 0.5, el_tol = 1e-2, jitter = 0.0;
};

int cmd_minimize(Ctx& ctx, const MinimizeOpts& o) {
  nlohmann::json kj;
  Kernel k = make_kernel(o.kernel, kj, /*need_certified=*/true);
  if (o.window.size() != 2 || !(o.window[0] < o.window[1]))
    throw std::invalid_argument("--window needs a < b");
  const bool grid = o.method == "grid";
  if (grid && o.n < 51)
    throw std::invalid_argument("--n must be at least 51");
  if (!grid && o.particles < 10)
    throw std::invalid_argument("--N must be at least 10");
  if (o.max_iters == 0) throw std::invalid_argument("--max-iters must be > 0");

  SolveConfig cfg;
  cfg.method = grid ? SolveMethod::grid_projection : SolveMethod::particle_flow;
  cfg.a = o.window[0];
  cfg.b = o.window[1];
  cfg.n = o.n;
  cfg.particles = o.particles;
  cfg.max_iters = o.max_iters;
  cfg.step0 = o.step0;
  cfg.el_tol = o.el_tol;
  cfg.seed = ctx.seed;
  cfg.jitter = o.jitter;
  cfg.record_trajectory = !grid;
  cfg.trajectory_stride = o.stride;

  ctx.config = {{"command", "minimize"},
                {"kernel", kj},
                {"method", o.method},
                {"n", o.n},
                {"particles", o.particles},
                {"window", o.window},
                {"max_iters", o.max_iters},
                {"step0", o.step0},
                {"el_tol", o.el_tol},
                {"jitter", o.jitter},
                {"trajectory_stride", o.stride},
                {"seed", ctx.seed}};

  SolveResult res = minimize(k, cfg);
  if (res.density) {
    const std::string p = ctx.path("density.csv");
    write_density_csv(p, *res.density);
    ctx.note(p);
  }
  if (res.particles) {
    const std::string p = ctx.path("particles.csv");
    write_particles_csv(p, *res.particles);
    ctx.note(p);
    const std::string t = ctx.path("trajectory.csv");
    write_trajectory_csv(t, res.trajectory);
    ctx.note(t);
  }
  nlohmann::json rep;
  rep["el"] = to_json(res.el);
  rep["iterations"] = res.iterations;
  rep["converged"] = res.converged;
  rep["status"] = res.status;
  rep["final_energy"] = json_number(
      res.energy_history.empty() ? res.el.energy : res.energy_history.back());
  ctx.emit(rep, "el_report.json");
  if (!ctx.json_out)
    std::cout << "status=" << res.status << "  iters=" << res.iterations
              << "  energy=" << format_double(res.el.energy)
              << "  el_residual=" << format_double(res.el.el_residual)
              << "  el=" << (res.el.pass ? "pass" : "FAIL") << '\n';
  if (res.status == "diverged") {
    std::cerr << "minimization diverged\n";
    return kNegative;
  }
  return res.el.pass ? kOk : kNegative;
}

// ---- verify-el ------------------------------------------------------------

struct VerifyElOpts {
  KernelOpts kernel;
  std::string input, particles;
  double el_tol = 1e-2;
  bool potential_out = false;
};

int cmd_verify_el(Ctx& ctx, const VerifyElOpts& o) {
  nlohmann::json kj;
  Kernel k = make_kernel(o.kernel, kj, /*need_certified=*/true);
  if (o.input.empty() == o.particles.empty())
    throw std::invalid_argument("need exactly one of --input / --particles");
  ctx.config = {{"command", "verify-el"},
                {"kernel", kj},
                {"input", o.input},
                {"particles", o.particles},
                {"el_tol", o.el_tol},
                {"potential_out", o.potential_out},
                {"seed", ctx.seed}};

  ELReport el;
  if (!o.input.empty()) {
    GridDensity f = read_density_csv(o.input);
    el = verify_el(k, f, o.el_tol);
    if (o.potential_out) {
      std::vector<double> xs(f.n());
      for (std::size_t i = 0; i < f.n(); ++i) xs[i] = f.node(i);
      PotentialProfile prof = potential_profile(k, f, xs);
      const std::string p = ctx.path("potential.csv");
      write_potential_csv(p, prof.xs, prof.psi, prof.err);
      ctx.note(p);
    }
  } else {
    ParticleSystem p = read_particles_csv(o.particles);
    el = verify_el(k, p, o.el_tol);
  }
  ctx.emit(to_json(el), "el_report.json");
  if (!ctx.json_out)
    std::cout << "el_residual=" << format_double(el.el_residual)
              << "  energy=" << format_double(el.energy)
              << "  el=" << (el.pass ? "pass" : "FAIL") << '\n';
  return el.pass ? kOk : kNegative;
}

// ---- mollify --------------------------------------------------------------

struct MollifyOpts {
  KernelOpts kernel;
  std::string input;
  double delta = 0.0;
  bool bound_check = false;
  bool commute = false;
  std::vector<double> commute_points;
};

int cmd_mollify(Ctx& ctx, const MollifyOpts& o) {
  if (o.input.empty()) throw std::invalid_argument("--input required");
  if (!(o.delta > 0.0)) throw std::invalid_argument("--delta must be > 0");
  ctx.config = {{"command", "mollify"},
                {"input", o.input},
                {"delta", o.delta},
                {"bound_check", o.bound_check},
                {"commute", o.commute},
                {"commute_points", o.commute_points},
                {"seed", ctx.seed}};

  GridDensity f = read_density_csv(o.input);
  GridDensity fd = mollify(f, o.delta);
  const std::string p = ctx.path("mollified.csv");
  write_density_csv(p, fd);
  ctx.note(p);

  nlohmann::json rep;
  rep["delta"] = o.delta;
  rep["mass_in"] = json_number(f.mass());
  rep["mass_out"] = json_number(fd.mass());
  bool ok = true;
  if (o.bound_check) {
    DerivativeBoundReport br = derivative_bound_check(f, o.delta);
    rep["derivative_bound"] = to_json(br);
    ok = ok && br.ok;
  }
  if (o.commute) {
    nlohmann::json kj;
    Kernel k = make_kernel(o.kernel, kj, /*need_certified=*/true);
    ctx.config["kernel"] = kj;
    std::vector<double> xs = o.commute_points;
    if (xs.empty())
      for (int i = 1; i <= 5; ++i)
        xs.push_back(f.a() + (f.b() - f.a()) * i / 6.0);
    CommutationReport cr = potential_commutation_check(k, f, o.delta, xs);
    rep["commutation"] = to_json(cr);
  }
  ctx.emit(rep, "mollify_report.json");
  return ok ? kOk : kNegative;
}

// ---- second-derivative ----------------------------------------------------

struct SecondDerivOpts {
  KernelOpts kernel;
  std::string input;
  double x = 0.0;
  CLI::Option* x_opt = nullptr;
};

int cmd_second_derivative(Ctx& ctx, const SecondDerivOpts& o) {
  nlohmann::json kj;
  Kernel k = make_kernel(o.kernel, kj, /*need_certified=*/true);
  if (o.input.empty()) throw std::invalid_argument("--input required");
  ctx.config = {{"command", "second-derivative"},
                {"kernel", kj},
                {"input", o.input},
                {"x", o.x},
                {"seed", ctx.seed}};

  GridDensity F = read_density_csv(o.input);
  SecondDerivativeForms forms = psi_second_derivative_at_critical(k, F, o.x);
  const bool cp =
      std::abs(forms.curvature - forms.parts) <=
      forms.curvature_err + forms.parts_err;
  const bool cf =
      std::abs(forms.curvature - forms.folded) <=
      forms.curvature_err + forms.folded_err;
  const bool pf = std::abs(forms.parts - forms.folded) <=
                  forms.parts_err + forms.folded_err;
  nlohmann::json rep = to_json(forms);
  rep["critical_points"] = json_array(critical_points(F));
  rep["pairwise_agree"] = cp && cf && pf;
  ctx.emit(rep, "second_derivative.json");
  if (!ctx.json_out)
    std::cout << "curvature=" << format_double(forms.curvature)
              << "  parts=" << format_double(forms.parts)
              << "  folded=" << format_double(forms.folded)
              << "  agree=" << ((cp && cf && pf) ? "yes" : "NO") << '\n';
  return cp && cf && pf ? kOk : kNegative;
}

// ---- check-lemmas ---------------------------------------------------------

struct CheckLemmasOpts {
  KernelOpts kernel;
  int trials = 1000;
  std::string lemma = "all";
  std::string replay;
};

nlohmann::json failure_instance(const std::string& lemma,
                                const std::string& s) {
  nlohmann::json j;
  j["lemma"] = lemma;
  double a = 0, l = 0;
  unsigned long long sd = 0;
  int idx = 0;
  if (std::sscanf(s.c_str(), "alpha=%lf lambda=%lf seed=%llu index=%d", &a,
                  &l, &sd, &idx) == 4) {
    j["kernel"] = {{"alpha", a}, {"lambda", l}};
    j["seed"] = sd;
    j["index"] = idx;
  }
  const auto pos = s.find(": ");
  if (pos != std::string::npos) j["detail"] = s.substr(pos + 2);
  return j;
}

int replay_lemma(Ctx& ctx, const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("cannot open replay file " + file);
  nlohmann::json j;
  in >> j;
  const std::string lemma = j.at("lemma").get<std::string>();
  nlohmann::json kj;
  Kernel k = kernel_from_json(j.at("kernel"), kj);
  if (!k.trusted()) {
    CertificateReport cert = certify_hypotheses(k);
    if (!cert.passed)
      throw std::invalid_argument("replay kernel failed certification");
  }
  ctx.config = {{"command", "check-lemmas"},
                {"replay", j},
                {"seed", ctx.seed}};

  nlohmann::json rep;
  rep["lemma"] = lemma;
  bool holds = false;
  if (j.contains("instance")) {
    const auto& ji = j.at("instance");
    const auto win = ji.at("window").get<std::vector<double>>();
    if (win.size() != 2) throw std::invalid_argument("window needs [a, b]");
    std::vector<BumpSpec> bumps;
    for (const auto& b : ji.value("bumps", nlohmann::json::array()))
      bumps.push_back({b.at("center").get<double>(),
                       b.at("width").get<double>(),
                       b.at("amplitude").get<double>()});
    TestFunction F = bumps_test_function(win[0], win[1], bumps,
                                         ji.value("base_height", 0.0));
    if (lemma == "convex") {
      CancellationResult res =
          check_convex_cancellation(k, F, ji.at("x").get<double>());
      rep["result"] = to_json(res);
      holds = res.value >= -(res.err + 1e-8);
    } else if (lemma == "concave") {
      CancellationResult res = check_concave_cancellation(
          k, F, ji.at("x").get<double>(), ji.at("y").get<double>());
      rep["result"] = to_json(res);
      holds = res.value >= -(res.err + 1e-8);
    } else if (lemma == "rearrangement") {
      RearrangementResult res = check_rearrangement_inequality(k, F);
      rep["result"] = to_json(res);
      holds = res.lhs - res.rhs >= -(res.err + 1e-8) && res.split_achieved;
    } else {
      throw std::invalid_argument("unknown lemma " + lemma);
    }
  } else {
    const auto seed = j.at("seed").get<std::uint64_t>();
    const auto index = j.at("index").get<std::uint64_t>();
    Rng rng = Rng(seed).fork(index);
    if (lemma == "convex") {
      ConvexInstance inst = random_convex_instance(k, rng);
      CancellationResult res = check_convex_cancellation(k, inst.F, inst.x);
      rep["result"] = to_json(res);
      holds = res.value >= -(res.err + 1e-8);
    } else if (lemma == "concave") {
      ConcaveInstance inst = random_concave_instance(k, rng);
      CancellationResult res =
          check_concave_cancellation(k, inst.F, inst.x, inst.y);
      rep["result"] = to_json(res);
      holds = res.value >= -(res.err + 1e-8);
    } else if (lemma == "rearrangement") {
      TestFunction F = random_rearrangement_instance(k, rng);
      RearrangementResult res = check_rearrangement_inequality(k, F);
      rep["result"] = to_json(res);
      holds = res.lhs - res.rhs >= -(res.err + 1e-8) && res.split_achieved;
    } else {
      throw std::invalid_argument("unknown lemma " + lemma);
    }
  }
  rep["holds"] = holds;
  ctx.emit(rep, "replay_report.json");
  return holds ? kOk : kNegative;
}

int cmd_check_lemmas(Ctx& ctx, const CheckLemmasOpts& o) {
  if (!o.replay.empty()) return replay_lemma(ctx, o.replay);
  if (o.trials <= 0)
    throw std::invalid_argument("--trials must be positive");
  nlohmann::json kj;
  Kernel k = make_kernel(o.kernel, kj, /*need_certified=*/true);
  ctx.config = {{"command", "check-lemmas"},
                {"kernel", kj},
                {"trials", o.trials},
                {"lemma", o.lemma},
                {"seed", ctx.seed}};

  nlohmann::json rep;
  nlohmann::json bad = nlohmann::json::array();
  int violations = 0;
  auto run = [&](const std::string& name, SweepReport (*sweep)(
                                              const Kernel&, int,
                                              std::uint64_t)) {
    if (o.lemma != "all" && o.lemma != name) return;
    SweepReport sr = sweep(k, o.trials, ctx.seed);
    rep[name] = to_json(sr);
    violations += sr.violations;
    for (const auto& f : sr.failures) bad.push_back(failure_instance(name, f));
    if (!ctx.json_out)
      std::cout << name << ": " << sr.trials << " trials, " << sr.violations
                << " violations, worst margin "
                << format_double(sr.worst_margin) << '\n';
  };
  run("convex", &sweep_convex_cancellation);
  run("concave", &sweep_concave_cancellation);
  run("rearrangement", &sweep_rearrangement);
  if (violations > 0) {
    const std::string p = ctx.path("bad_instances.json");
    std::ofstream out(p);
    out << bad.dump(2) << '\n';
    ctx.note(p);
  }
  ctx.emit(rep, "lemma_report.json");
  return violations == 0 ? kOk : kNegative;
}

// ---- build-ladder ---------------------------------------------------------

struct LadderOpts {
  KernelOpts kernel;
  std::string input;
  double xbar = 0.0;
  std::string kase = "auto";
  bool margin = false, forms = false;
  LadderHints hints;
  bool no_delta_rule = false;
};

void add_hint_opts(CLI::App* cmd, LadderOpts& o) {
  cmd->add_option("--epsilon", o.hints.epsilon,
                  "band tolerance (0: case formula)");
  cmd->add_option("--eta", o.hints.eta, "band half-width (0: halving search)");
  cmd->add_option("--delta0", o.hints.delta0,
                  "initial mollification scale (0: eta/2)");
  cmd->add_flag("--no-delta-rule", o.no_delta_rule,
                "do not require eps |g'(gamma_bar/2)| >= C");
  cmd->add_option("--band-fraction", o.hints.band_fraction,
                  "required sample fraction inside the band")
      ->capture_default_str();
  cmd->add_option("--max-halvings", o.hints.max_delta_halvings,
                  "delta search depth")
      ->capture_default_str();
}

bool structural_ladder_failure(const std::string& cond) {
  return cond.find("no jump") != std::string::npos ||
         cond.find("symmetry") != std::string::npos ||
         cond.find("h_L > 0") != std::string::npos ||
         cond.find("l_L^-") != std::string::npos ||
         cond.find("Lambda_bar") != std::string::npos;
}

int cmd_build_ladder(Ctx& ctx, const LadderOpts& o) {
  nlohmann::json kj;
  Kernel k = make_kernel(o.kernel, kj, /*need_certified=*/true);
  if (o.input.empty()) throw std::invalid_argument("--input required");
  if (o.margin && o.xbar != 0.0)
    throw std::invalid_argument(
        "--margin needs a density already centered at --xbar 0");
  LadderHints hints = o.hints;
  hints.enforce_delta_rule = !o.no_delta_rule;
  ctx.config = {{"command", "build-ladder"},
                {"kernel", kj},
                {"input", o.input},
                {"xbar", o.xbar},
                {"case", o.kase},
                {"margin", o.margin},
                {"forms", o.forms},
                {"epsilon", hints.epsilon},
                {"eta", hints.eta},
                {"delta0", hints.delta0},
                {"enforce_delta_rule", hints.enforce_delta_rule},
                {"band_fraction", hints.band_fraction},
                {"max_delta_halvings", hints.max_delta_halvings},
                {"seed", ctx.seed}};

  GridDensity f = read_density_csv(o.input);
  std::vector<std::pair<std::string, LadderCase>> attempts;
  if (o.kase == "even" || o.kase == "auto")
    attempts.emplace_back("even", LadderCase::symmetric_even);
  if (o.kase == "odd" || o.kase == "auto")
    attempts.emplace_back("odd", LadderCase::antisymmetric_odd);

  nlohmann::json errors = nlohmann::json::array();
  bool all_structural = true;
  for (const auto& [name, kase] : attempts) {
    try {
      CriticalPointLadder L = build_ladder(k, f, o.xbar, kase, hints);
      nlohmann::json rep;
      rep["ladder"] = to_json(L);
      if (o.margin) rep["margin"] = to_json(ladder_margin(k, f, L, o.forms));
      ctx.emit(rep, "ladder.json");
      if (!ctx.json_out)
        std::cout << "case=" << name << "  N=" << L.N
                  << "  good_index=" << L.good_index
                  << "  gamma=" << format_double(L.gamma)
                  << "  delta_rule=" << (L.delta_rule_ok ? "ok" : "no")
                  << '\n';
      return kOk;
    } catch (const LadderError& e) {
      errors.push_back({{"case", name},
                        {"message", e.what()},
                        {"failed_condition", e.failed_condition}});
      all_structural =
          all_structural && structural_ladder_failure(e.failed_condition);
    }
  }
  ctx.emit(nlohmann::json{{"errors", errors}}, "ladder.json");
  for (const auto& e : errors)
    std::cerr << e["case"].get<std::string>() << ": "
              << e["message"].get<std::string>() << '\n';
  return all_structural ? kUsage : kNegative;
}

// ---- regularity -----------------------------------------------------------

struct RegularityOpts {
  KernelOpts kernel;
  std::string input;
  std::vector<double> points;
  int refinements = 3;
  double jump_frac = 0.1, el_tol = 1e-2;
  std::size_t max_iters = 20000;
  bool no_ladder = false, forms = false;
  std::string kase = "auto";
};

int cmd_regularity(Ctx& ctx, const RegularityOpts& o) {
  nlohmann::json kj;
  Kernel k = make_kernel(o.kernel, kj, /*need_certified=*/true);
  if (o.input.empty()) throw std::invalid_argument("--input required");
  ctx.config = {{"command", "regularity"},
                {"kernel", kj},
                {"input", o.input},
                {"points", o.points},
                {"refinements", o.refinements},
                {"jump_frac", o.jump_frac},
                {"el_tol", o.el_tol},
                {"max_iters", o.max_iters},
                {"ladder", !o.no_ladder},
                {"case", o.kase},
                {"forms", o.forms},
                {"seed", ctx.seed}};

  GridDensity f = read_density_csv(o.input);
  std::vector<double> pts = o.points;
  if (pts.empty())
    for (int i = 1; i <= 9; ++i)
      pts.push_back(f.a() + (f.b() - f.a()) * i / 10.0);

  ContinuityOptions copt;
  copt.refinements = o.refinements;
  copt.jump_threshold_frac = o.jump_frac;
  copt.el_tol = o.el_tol;
  copt.max_iters = o.max_iters;
  copt.attempt_ladder = !o.no_ladder;
  copt.margin_forms = o.forms;
  copt.ladder_case = o.kase == "auto" ? "" : o.kase;

  ContinuityReport rep;
  try {
    rep = continuity_report(k, f, pts, copt);
  } catch (const std::invalid_argument& e) {
    if (std::string(e.what()).find("potential-constant") !=
        std::string::npos) {
      ctx.emit(nlohmann::json{{"error", e.what()}}, "regularity_report.json");
      std::cerr << e.what() << '\n';
      return kNegative;
    }
    throw;
  }
  ctx.emit(to_json(rep), "regularity_report.json");
  if (!ctx.json_out)
    std::cout << "verdict=" << rep.verdict
              << "  el_residual=" << format_double(rep.el_residual) << '\n';
  return rep.verdict == "jump" ? kJump : kOk;
}

// ---- essential-limits -----------------------------------------------------

struct EssentialOpts {
  std::string input;
  std::vector<double> points;
};

int cmd_essential_limits(Ctx& ctx, const EssentialOpts& o) {
  if (o.input.empty()) throw std::invalid_argument("--input required");
  ctx.config = {{"command", "essential-limits"},
                {"input", o.input},
                {"points", o.points},
                {"seed", ctx.seed}};
  GridDensity f = read_density_csv(o.input);
  std::vector<double> pts = o.points;
  if (pts.empty()) pts.push_back(0.5 * (f.a() + f.b()));
  nlohmann::json arr = nlohmann::json::array();
  for (double x : pts) {
    JumpDiagnostics jd = essential_limits(f, x, default_windows(f, x));
    nlohmann::json j = to_json(jd);
    j["x"] = json_number(x);
    arr.push_back(j);
  }
  ctx.emit(nlohmann::json{{"points", arr}}, "essential_limits.json");
  return kOk;
}

// ---- replay ---------------------------------------------------------------

int cmd_replay(const std::string& manifest_path) {
  static thread_local int depth = 0;
  if (depth > 0)
    throw std::invalid_argument("nested replay is not supported");
  RunManifest m = read_manifest(manifest_path);
  if (m.command == "replay" || m.argv.size() < 2)
    throw std::invalid_argument("manifest does not describe a replayable run");
  const std::string expect = hex64(fnv1a(m.config.dump()));
  if (!m.config_hash.empty() && m.config_hash != expect)
    throw std::invalid_argument("manifest config hash mismatch");
  std::vector<std::string> args(m.argv.begin() + 1, m.argv.end());
  ++depth;
  const int code = run_cli_args(std::move(args));
  --depth;
  return code;
}

}  // namespace

int run_cli_args(std::vector<std::string> args) {
  CLI::App app{"1-D attractive-repulsive interaction energy toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Ctx ctx;
  std::function<int(Ctx&)> body;
  std::string command;

  CheckKernelOpts ck;
  auto* sc_ck = app.add_subcommand(
      "check-kernel", "certify kernel shape hypotheses and tail integrals");
  add_global(sc_ck, ctx);
  add_kernel_opts(sc_ck, ck.kernel);
  sc_ck->add_option("--probes", ck.probes, "certification probe count")
      ->capture_default_str();
  sc_ck->callback([&] {
    command = "check-kernel";
    body = [&](Ctx& c) { return cmd_check_kernel(c, ck); };
  });

  MinimizeOpts mi;
  auto* sc_mi = app.add_subcommand(
      "minimize", "minimize the interaction energy over probability measures");
  add_global(sc_mi, ctx);
  add_kernel_opts(sc_mi, mi.kernel);
  sc_mi->add_option("--method", mi.method, "grid or particles")
      ->check(CLI::IsMember({"grid", "particles"}))
      ->capture_default_str();
  sc_mi->add_option("--n", mi.n, "grid nodes")->capture_default_str();
  sc_mi->add_option("--N", mi.particles, "particle count")
      ->capture_default_str();
  sc_mi->add_option("--window", mi.window, "solution window a b")
      ->expected(2);
  sc_mi->add_option("--max-iters", mi.max_iters, "iteration cap")
      ->capture_default_str();
  sc_mi->add_option("--step0", mi.step0, "initial step")->capture_default_str();
  sc_mi->add_option("--el-tol", mi.el_tol, "equilibrium residual tolerance")
      ->capture_default_str();
  sc_mi->add_option("--jitter", mi.jitter,
                    "initial particle jitter, fraction of spacing");
  sc_mi->add_option("--trajectory-stride", mi.stride,
                    "iterations between recorded particle snapshots")
      ->capture_default_str();
  sc_mi->callback([&] {
    command = "minimize";
    body = [&](Ctx& c) { return cmd_minimize(c, mi); };
  });

  VerifyElOpts ve;
  auto* sc_ve = app.add_subcommand(
      "verify-el", "check the equilibrium conditions of a saved state");
  add_global(sc_ve, ctx);
  add_kernel_opts(sc_ve, ve.kernel);
  sc_ve->add_option("--input", ve.input, "density CSV (x,f)");
  sc_ve->add_option("--particles", ve.particles, "particle CSV (x)");
  sc_ve->add_option("--el-tol", ve.el_tol, "residual tolerance")
      ->capture_default_str();
  sc_ve->add_flag("--potential", ve.potential_out,
                  "also write potential.csv (x,psi,err)");
  sc_ve->callback([&] {
    command = "verify-el";
    body = [&](Ctx& c) { return cmd_verify_el(c, ve); };
  });

  MollifyOpts mo;
  auto* sc_mo =
      app.add_subcommand("mollify", "convolve a density with the standard bump");
  add_global(sc_mo, ctx);
  add_kernel_opts(sc_mo, mo.kernel);
  sc_mo->add_option("--input", mo.input, "density CSV (x,f)");
  sc_mo->add_option("--delta", mo.delta, "mollification scale")->required();
  sc_mo->add_flag("--bound-check", mo.bound_check,
                  "verify the 2 max|f|/delta derivative bound");
  sc_mo->add_flag("--commute", mo.commute,
                  "verify potential/mollification commutation (needs kernel)");
  sc_mo->add_option("--commute-points", mo.commute_points,
                    "evaluation points for the commutation check");
  sc_mo->callback([&] {
    command = "mollify";
    body = [&](Ctx& c) { return cmd_mollify(c, mo); };
  });

  SecondDerivOpts sd;
  auto* sc_sd = app.add_subcommand(
      "second-derivative",
      "evaluate the three potential second-derivative forms at a critical "
      "point");
  add_global(sc_sd, ctx);
  add_kernel_opts(sc_sd, sd.kernel);
  sc_sd->add_option("--input", sd.input, "density CSV (x,f)");
  sd.x_opt = sc_sd->add_option("--x", sd.x, "critical point")->required();
  sc_sd->callback([&] {
    command = "second-derivative";
    body = [&](Ctx& c) { return cmd_second_derivative(c, sd); };
  });

  CheckLemmasOpts cl;
  auto* sc_cl = app.add_subcommand(
      "check-lemmas", "randomized sweeps of the cancellation inequalities");
  add_global(sc_cl, ctx);
  add_kernel_opts(sc_cl, cl.kernel);
  sc_cl->add_option("--trials", cl.trials, "instances per checker")
      ->capture_default_str();
  sc_cl->add_option("--lemma", cl.lemma,
                    "all, convex, concave or rearrangement")
      ->check(CLI::IsMember({"all", "convex", "concave", "rearrangement"}))
      ->capture_default_str();
  sc_cl->add_option("--replay", cl.replay,
                    "re-run one saved instance (JSON file)");
  sc_cl->callback([&] {
    command = "check-lemmas";
    body = [&](Ctx& c) { return cmd_check_lemmas(c, cl); };
  });

  LadderOpts la;
  auto* sc_la = app.add_subcommand(
      "build-ladder", "build the alternating critical-point ladder at a jump");
  add_global(sc_la, ctx);
  add_kernel_opts(sc_la, la.kernel);
  sc_la->add_option("--input", la.input, "density CSV (x,f)");
  sc_la->add_option("--xbar", la.xbar, "jump location")->capture_default_str();
  sc_la->add_option("--case", la.kase, "even, odd or auto")
      ->check(CLI::IsMember({"even", "odd", "auto"}))
      ->capture_default_str();
  sc_la->add_flag("--margin", la.margin,
                  "evaluate the contradiction margin (xbar must be 0)");
  sc_la->add_flag("--forms", la.forms,
                  "include the sampled three-form second derivative");
  add_hint_opts(sc_la, la);
  sc_la->callback([&] {
    command = "build-ladder";
    body = [&](Ctx& c) { return cmd_build_ladder(c, la); };
  });

  RegularityOpts re;
  auto* sc_re = app.add_subcommand(
      "regularity", "continuity diagnostics of an equilibrium density");
  add_global(sc_re, ctx);
  add_kernel_opts(sc_re, re.kernel);
  sc_re->add_option("--input", re.input, "density CSV (x,f)");
  sc_re->add_option("--points", re.points,
                    "evaluation points (default: 9 interior)");
  sc_re->add_option("--refinements", re.refinements,
                    "grid refinement levels including the input")
      ->capture_default_str();
  sc_re->add_option("--jump-frac", re.jump_frac,
                    "jump threshold as a fraction of max |f|")
      ->capture_default_str();
  sc_re->add_option("--el-tol", re.el_tol, "equilibrium precondition tolerance")
      ->capture_default_str();
  sc_re->add_option("--max-iters", re.max_iters, "re-solve iteration cap")
      ->capture_default_str();
  sc_re->add_flag("--no-ladder", re.no_ladder,
                  "do not escalate jumps to the ladder");
  sc_re->add_option("--case", re.kase, "ladder case restriction")
      ->check(CLI::IsMember({"even", "odd", "auto"}))
      ->capture_default_str();
  sc_re->add_flag("--forms", re.forms,
                  "include sampled second-derivative forms in margins");
  sc_re->callback([&] {
    command = "regularity";
    body = [&](Ctx& c) { return cmd_regularity(c, re); };
  });

  EssentialOpts es;
  auto* sc_es = app.add_subcommand(
      "essential-limits", "one-sided essential limits of a sampled density");
  add_global(sc_es, ctx);
  sc_es->add_option("--input", es.input, "density CSV (x,f)");
  sc_es->add_option("--points", es.points, "evaluation points");
  sc_es->callback([&] {
    command = "essential-limits";
    body = [&](Ctx& c) { return cmd_essential_limits(c, es); };
  });

  std::string replay_path;
  auto* sc_rp = app.add_subcommand("replay", "re-run a saved manifest");
  sc_rp->add_option("manifest", replay_path, "manifest JSON file")->required();
  sc_rp->callback([&] { command = "replay"; });

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (command == "replay") {
    try {
      return cmd_replay(replay_path);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kUsage;
    }
  }

  RunManifest manifest;
  manifest.command = command;
  manifest.argv.push_back("riesz1d");
  manifest.argv.insert(manifest.argv.end(), args.begin(), args.end());
  manifest.version = kVersion;
  manifest.started_at = iso_timestamp_now();

  int code = kUsage;
  std::string error;
  try {
    code = body(ctx);
  } catch (const LadderError& e) {
    error = e.what();
    code = kNegative;
  } catch (const std::exception& e) {
    error = e.what();
    code = kUsage;
  }
  if (!error.empty()) std::cerr << "error: " << error << '\n';

  manifest.config = ctx.config;
  finalize_hash(manifest);
  manifest.finished_at = iso_timestamp_now();
  manifest.outputs = ctx.outputs;
  try {
    write_manifest(ctx.path("manifest.json"), manifest);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (code == kOk) code = kUsage;
  }
  return code;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli_args(std::move(args));
}

}  // namespace riesz
