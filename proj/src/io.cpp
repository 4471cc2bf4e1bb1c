#include "riesz1d/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace riesz {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json json_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

nlohmann::json json_array(const std::vector<double>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : v) a.push_back(json_number(x));
  return a;
}

namespace {

nlohmann::json jnum(double v) { return json_number(v); }
nlohmann::json jvec(const std::vector<double>& v) { return json_array(v); }

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.exceptions(std::ios::badbit | std::ios::failbit);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

std::string chomp(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n' ||
                        s.back() == ' ' || s.back() == '\t'))
    s.pop_back();
  return s;
}

std::vector<double> parse_row(const std::string& line, std::size_t expect,
                              const std::string& path) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const char* c = cell.c_str();
    char* end = nullptr;
    double v = std::strtod(c, &end);
    if (end == c) throw std::runtime_error("bad number '" + cell + "' in " + path);
    out.push_back(v);
  }
  if (out.size() != expect)
    throw std::runtime_error("expected " + std::to_string(expect) +
                             " columns in " + path);
  return out;
}

void expect_header(std::ifstream& in, const std::string& want,
                   const std::string& path) {
  std::string line;
  if (!std::getline(in, line) || chomp(line) != want)
    throw std::runtime_error("expected header '" + want + "' in " + path);
}

}  // namespace

void write_density_csv(const std::string& path, const GridDensity& f) {
  auto out = open_out(path);
  out << "x,f\n";
  for (std::size_t i = 0; i < f.n(); ++i)
    out << format_double(f.node(i)) << ',' << format_double(f[i]) << '\n';
}

GridDensity read_density_csv(const std::string& path) {
  auto in = open_in(path);
  expect_header(in, "x,f", path);
  std::vector<double> xs, vs;
  std::string line;
  while (std::getline(in, line)) {
    if (chomp(line).empty()) continue;
    auto row = parse_row(line, 2, path);
    xs.push_back(row[0]);
    vs.push_back(row[1]);
  }
  if (xs.size() < 2) throw std::runtime_error("need at least 2 rows in " + path);
  const double a = xs.front(), b = xs.back();
  const double h = (b - a) / static_cast<double>(xs.size() - 1);
  const double tol = 1e-9 * std::max(1.0, std::abs(b - a));
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (std::abs(xs[i] - (a + static_cast<double>(i) * h)) > tol)
      throw std::runtime_error("non-uniform grid in " + path);
  bool has_negative = false;
  for (double v : vs)
    if (v < 0) has_negative = true;
  return GridDensity(a, b, std::move(vs), has_negative);
}

void write_particles_csv(const std::string& path, const ParticleSystem& p) {
  auto out = open_out(path);
  out << "x\n";
  for (double x : p.positions()) out << format_double(x) << '\n';
}

ParticleSystem read_particles_csv(const std::string& path) {
  auto in = open_in(path);
  expect_header(in, "x", path);
  std::vector<double> xs;
  std::string line;
  while (std::getline(in, line)) {
    if (chomp(line).empty()) continue;
    xs.push_back(parse_row(line, 1, path)[0]);
  }
  if (xs.empty()) throw std::runtime_error("no particles in " + path);
  return ParticleSystem(std::move(xs));
}

void write_potential_csv(const std::string& path,
                         const std::vector<double>& x,
                         const std::vector<double>& psi,
                         const std::vector<double>& err) {
  if (x.size() != psi.size() || x.size() != err.size())
    throw std::invalid_argument("potential columns must have equal length");
  auto out = open_out(path);
  out << "x,psi,err\n";
  for (std::size_t i = 0; i < x.size(); ++i)
    out << format_double(x[i]) << ',' << format_double(psi[i]) << ','
        << format_double(err[i]) << '\n';
}

nlohmann::json to_json(const LambdaEstimate& v) {
  nlohmann::json j;
  j["estimate"] = jnum(v.estimate);
  if (v.analytic) j["analytic"] = jnum(*v.analytic);
  j["oscillatory"] = v.oscillatory;
  j["ratios"] = jvec(v.ratios);
  return j;
}

nlohmann::json to_json(const CertificateReport& v) {
  nlohmann::json j;
  j["passed"] = v.passed;
  j["r"] = jnum(v.r);
  j["lambda"] = to_json(v.lambda);
  j["lambda_bar"] = jnum(v.lambda_bar);
  nlohmann::json clauses = nlohmann::json::array();
  for (const auto& c : v.clauses) {
    nlohmann::json cj;
    cj["name"] = c.name;
    cj["status"] = c.status == ClauseStatus::pass    ? "pass"
                   : c.status == ClauseStatus::fail  ? "fail"
                                                     : "unchecked";
    if (!c.detail.empty()) cj["detail"] = c.detail;
    if (c.violation_x) cj["violation_x"] = jnum(*c.violation_x);
    clauses.push_back(cj);
  }
  j["clauses"] = clauses;
  return j;
}

nlohmann::json to_json(const ConvergenceReport& v) {
  nlohmann::json j;
  j["partials"] = jvec(v.partials);
  j["cauchy"] = v.cauchy;
  j["limit"] = jnum(v.limit);
  if (v.closed_form) j["closed_form"] = jnum(*v.closed_form);
  return j;
}

nlohmann::json to_json(const SideLimits& v) {
  return {{"lower", jnum(v.lower)},
          {"upper", jnum(v.upper)},
          {"eta_used", jnum(v.eta_used)},
          {"stabilized", v.stabilized}};
}

nlohmann::json to_json(const JumpDiagnostics& v) {
  return {{"left", to_json(v.left)},
          {"right", to_json(v.right)},
          {"h_left", jnum(v.h_left)},
          {"h_right", jnum(v.h_right)}};
}

nlohmann::json to_json(const ELReport& v) {
  return {{"energy", jnum(v.energy)},
          {"support_lo", jnum(v.support_lo)},
          {"support_hi", jnum(v.support_hi)},
          {"psi_mean_on_support", jnum(v.psi_mean_on_support)},
          {"psi_max_dev_on_support", jnum(v.psi_max_dev_on_support)},
          {"psi_min_off_support", jnum(v.psi_min_off_support)},
          {"el_residual", jnum(v.el_residual)},
          {"linf_bound", jnum(v.linf_bound)},
          {"pass", v.pass}};
}

nlohmann::json to_json(const DerivativeBoundReport& v) {
  return {{"max_abs_deriv", jnum(v.max_abs_deriv)},
          {"argmax", jnum(v.argmax)},
          {"bound", jnum(v.bound)},
          {"ok", v.ok}};
}

nlohmann::json to_json(const CommutationReport& v) {
  return {{"max_discrepancy", jnum(v.max_discrepancy)},
          {"xs", jvec(v.xs)},
          {"lhs", jvec(v.lhs)},
          {"rhs", jvec(v.rhs)}};
}

nlohmann::json to_json(const SecondDerivativeForms& v) {
  return {{"curvature", jnum(v.curvature)},
          {"parts", jnum(v.parts)},
          {"folded", jnum(v.folded)},
          {"curvature_err", jnum(v.curvature_err)},
          {"parts_err", jnum(v.parts_err)},
          {"folded_err", jnum(v.folded_err)},
          {"fprime_at_x", jnum(v.fprime_at_x)},
          {"tol_crit", jnum(v.tol_crit)}};
}

nlohmann::json to_json(const CancellationResult& v) {
  return {{"value", jnum(v.value)}, {"err", jnum(v.err)}, {"clause", v.clause}};
}

nlohmann::json to_json(const RearrangementResult& v) {
  return {{"lhs", jnum(v.lhs)},
          {"rhs", jnum(v.rhs)},
          {"err", jnum(v.err)},
          {"gamma", jnum(v.gamma)},
          {"split_endpoint", std::string(1, v.split_endpoint)},
          {"split_sign", v.split_sign},
          {"split_value", jnum(v.split_value)},
          {"split_err", jnum(v.split_err)},
          {"split_achieved", v.split_achieved}};
}

nlohmann::json to_json(const SweepReport& v) {
  return {{"trials", v.trials},
          {"violations", v.violations},
          {"rejected_draws", v.rejected_draws},
          {"worst_margin", jnum(v.worst_margin)},
          {"failures", v.failures}};
}

nlohmann::json to_json(const CriticalPointLadder& v) {
  nlohmann::json j;
  j["case"] = v.kase == LadderCase::symmetric_even ? "even" : "odd";
  j["xbar"] = jnum(v.xbar);
  j["epsilon"] = jnum(v.epsilon);
  j["eta"] = jnum(v.eta);
  j["delta"] = jnum(v.delta);
  j["l_minus"] = jnum(v.l_minus);
  j["l_plus"] = jnum(v.l_plus);
  j["h_jump"] = jnum(v.h_jump);
  j["C_points"] = jvec(v.C_points);
  j["p_points"] = jvec(v.p_points);
  j["q_points"] = jvec(v.q_points);
  j["N"] = v.N;
  j["good_index"] = v.good_index;
  j["good_couple"] = {{"left", jnum(v.good_couple.first)},
                      {"right", jnum(v.good_couple.second)}};
  j["gamma"] = jnum(v.gamma);
  j["gamma_bar"] = jnum(v.gamma_bar);
  j["C_const"] = jnum(v.C_const);
  j["delta_rule_ok"] = v.delta_rule_ok;
  j["delta_rule_enforced"] = v.delta_rule_enforced;
  return j;
}

nlohmann::json to_json(const ContradictionMargin& v) {
  nlohmann::json j;
  j["base"] = jnum(v.base);
  j["base_sign"] = v.base_sign;
  j["mirrored"] = v.mirrored;
  j["split_value"] = jnum(v.split_value);
  j["split_rhs_half"] = jnum(v.split_rhs_half);
  j["I"] = jnum(v.I);
  j["J"] = jnum(v.J);
  j["K"] = jnum(v.K);
  j["I_err"] = jnum(v.I_err);
  j["J_err"] = jnum(v.J_err);
  j["K_err"] = jnum(v.K_err);
  j["J_bound"] = jnum(v.J_bound);
  j["I_bound"] = jnum(v.I_bound);
  j["K_bound"] = jnum(v.K_bound);
  j["bounds_checked"] = v.bounds_checked;
  j["bounds_hold"] = v.bounds_hold;
  j["margin_sum"] = jnum(v.margin_sum);
  j["margin_lower"] = jnum(v.margin_lower);
  j["psi2_ijk"] = jnum(v.psi2_ijk);
  j["psi2_folded"] = jnum(v.psi2_folded);
  if (v.forms) j["forms"] = to_json(*v.forms);
  return j;
}

nlohmann::json to_json(const ContinuityReport& v) {
  nlohmann::json j;
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : v.points) {
    nlohmann::json pj;
    pj["x"] = jnum(p.x);
    nlohmann::json lv = nlohmann::json::array();
    for (const auto& l : p.levels)
      lv.push_back({{"n", l.n},
                    {"h_left", jnum(l.h_left)},
                    {"h_right", jnum(l.h_right)},
                    {"stabilized_left", l.stabilized_left},
                    {"stabilized_right", l.stabilized_right},
                    {"el_residual", jnum(l.el_residual)},
                    {"solver_converged", l.solver_converged}});
    pj["levels"] = lv;
    pj["continuous"] = p.continuous;
    pj["sym_s"] = jnum(p.sym_s);
    pj["even_jump"] = jnum(p.even_jump);
    pj["odd_jump"] = jnum(p.odd_jump);
    pj["ladder_attempted"] = p.ladder_attempted;
    if (!p.ladder_case.empty()) pj["ladder_case"] = p.ladder_case;
    if (!p.ladder_error.empty()) pj["ladder_error"] = p.ladder_error;
    if (p.ladder) pj["ladder"] = to_json(*p.ladder);
    if (p.margin) pj["margin"] = to_json(*p.margin);
    pts.push_back(pj);
  }
  j["points"] = pts;
  j["el_residual"] = jnum(v.el_residual);
  j["any_jump"] = v.any_jump;
  j["verdict"] = v.verdict;
  return j;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

void finalize_hash(RunManifest& m) {
  m.config_hash = hex64(fnv1a(m.config.dump()));
}

nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["config"] = m.config;
  j["config_hash"] = m.config_hash;
  j["version"] = m.version;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["outputs"] = m.outputs;
  return j;
}

void write_manifest(const std::string& path, const RunManifest& m) {
  auto out = open_out(path);
  out << to_json(m).dump(2) << '\n';
}

RunManifest read_manifest(const std::string& path) {
  auto in = open_in(path);
  nlohmann::json j;
  in >> j;
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.argv = j.at("argv").get<std::vector<std::string>>();
  m.config = j.at("config");
  m.config_hash = j.at("config_hash").get<std::string>();
  m.version = j.value("version", std::string{});
  m.started_at = j.value("started_at", std::string{});
  m.finished_at = j.value("finished_at", std::string{});
  m.outputs = j.value("outputs", std::vector<std::string>{});
  return m;
}

std::string iso_timestamp_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace riesz
