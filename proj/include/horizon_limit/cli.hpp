#pragma once

// Command-line front end. parse_config resolves flags and an optional TOML
// file into a RunConfig; run executes it and writes artifacts.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "horizon_limit/candidate.hpp"
#include "horizon_limit/costate.hpp"
#include "horizon_limit/integrate.hpp"
#include "horizon_limit/io.hpp"
#include "horizon_limit/oracle.hpp"
#include "horizon_limit/problem.hpp"
#include "horizon_limit/shoot.hpp"
#include "horizon_limit/verify.hpp"

namespace horizon_limit {

struct RunConfig {
  std::string command;
  std::string problem_id;
  std::map<std::string, double> params;  ///< catalog parameters (b, r, c, umax)
  std::string control_path;              ///< optional tabulated open-loop control

  std::string horizon_kind = "geometric";
  double tau0 = 2.0;
  double factor = 2.0;
  double step = 2.0;
  int count = 6;
  std::vector<double> taus;  ///< explicit horizons

  double ode_tol = 1e-10;
  double check_tol = 1e-6;
  double limiting_tol = 1e-6;
  double shoot_tol = 1e-8;

  std::string out_dir = "out";
  bool emit_json = true;
  bool emit_csv = true;

  double horizon = 40.0;  ///< tail horizon (verify) and shooting horizon
  double t_end = 10.0;    ///< verification grid end
  std::vector<std::string> checks;

  double psi_lo = -3.0;
  double psi_hi = 0.0;

  double oracle_T = 8.0;
  int oracle_N = 800;
  std::uint64_t seed = 0;
  int restarts = 0;

  HorizonSequence horizons() const {
    if (horizon_kind == "explicit") return HorizonSequence::explicit_values(taus);
    if (horizon_kind == "arithmetic") return HorizonSequence::arithmetic(tau0, step, count);
    return HorizonSequence::geometric(tau0, factor, count);
  }
  OdeOptions ode() const { return OdeOptions{ode_tol, ode_tol * 1e-2}; }
};

namespace detail {

inline std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t");
    const auto e = cell.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError(what + ": empty entry");
    cell = cell.substr(b, e - b + 1);
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
      throw ConfigError(what + ": '" + cell + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(what + ": no values");
  return out;
}

inline std::vector<std::string> parse_word_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t");
    const auto e = cell.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(cell.substr(b, e - b + 1));
  }
  return out;
}

class TomlView {
 public:
  explicit TomlView(TomlTable t) : table_(std::move(t)) {}

  template <class T>
  std::optional<T> get(const std::string& section, const std::string& key) {
    auto s = table_.find(section);
    if (s == table_.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    const TomlValue v = k->second;
    s->second.erase(k);
    const std::string name = section + "." + key;
    if constexpr (std::is_same_v<T, int>) {
      const auto* d = std::get_if<double>(&v);
      if (!d || *d != std::floor(*d)) throw ConfigError("'" + name + "' must be an integer");
      return static_cast<int>(*d);
    } else if constexpr (std::is_same_v<T, double> || std::is_same_v<T, bool> || std::is_same_v<T, std::string>) {
      const auto* x = std::get_if<T>(&v);
      if (!x) throw ConfigError("'" + name + "' has the wrong type");
      return *x;
    } else {
      const auto* x = std::get_if<T>(&v);
      if (!x) throw ConfigError("'" + name + "' must be an array");
      return *x;
    }
  }

  void reject_unknown() const {
    for (const auto& [section, keys] : table_) {
      if (!keys.empty()) {
        const std::string k = section.empty() ? keys.begin()->first : section + "." + keys.begin()->first;
        throw ConfigError("unknown key '" + k + "'");
      }
    }
  }

  bool has_section(const std::string& s) const { return table_.count(s) > 0; }
  std::vector<std::string> sections() const {
    std::vector<std::string> out;
    for (const auto& [s, _] : table_) out.push_back(s);
    return out;
  }

 private:
  TomlTable table_;
};

inline void apply_toml(RunConfig& cfg, TomlTable table) {
  static const std::set<std::string> known{"", "problem", "horizons", "tolerances", "output", "verify", "shoot", "oracle"};
  TomlView v(std::move(table));
  for (const auto& s : v.sections())
    if (!known.count(s)) throw ConfigError("unknown key '" + s + "'");
  if (auto x = v.get<std::string>("problem", "id")) cfg.problem_id = *x;
  if (auto x = v.get<std::string>("problem", "control")) cfg.control_path = *x;
  for (const char* k : {"b", "r", "c", "umax"})
    if (auto x = v.get<double>("problem", k)) cfg.params[k] = *x;
  if (auto x = v.get<std::string>("horizons", "kind")) cfg.horizon_kind = *x;
  if (auto x = v.get<double>("horizons", "tau0")) cfg.tau0 = *x;
  if (auto x = v.get<double>("horizons", "factor")) cfg.factor = *x;
  if (auto x = v.get<double>("horizons", "step")) cfg.step = *x;
  if (auto x = v.get<int>("horizons", "count")) cfg.count = *x;
  if (auto x = v.get<std::vector<double>>("horizons", "values")) cfg.taus = *x;
  if (auto x = v.get<double>("tolerances", "ode")) cfg.ode_tol = *x;
  if (auto x = v.get<double>("tolerances", "check")) cfg.check_tol = *x;
  if (auto x = v.get<double>("tolerances", "limiting")) cfg.limiting_tol = *x;
  if (auto x = v.get<double>("tolerances", "shoot")) cfg.shoot_tol = *x;
  if (auto x = v.get<std::string>("output", "dir")) cfg.out_dir = *x;
  if (auto x = v.get<bool>("output", "json")) cfg.emit_json = *x;
  if (auto x = v.get<bool>("output", "csv")) cfg.emit_csv = *x;
  if (auto x = v.get<double>("verify", "horizon")) cfg.horizon = *x;
  if (auto x = v.get<double>("verify", "t_end")) cfg.t_end = *x;
  if (auto x = v.get<std::vector<std::string>>("verify", "checks")) cfg.checks = *x;
  if (auto x = v.get<std::vector<double>>("shoot", "bracket")) {
    if (x->size() != 2) throw ConfigError("'shoot.bracket' needs two values");
    cfg.psi_lo = (*x)[0];
    cfg.psi_hi = (*x)[1];
  }
  if (auto x = v.get<double>("shoot", "horizon")) cfg.horizon = *x;
  if (auto x = v.get<double>("oracle", "T")) cfg.oracle_T = *x;
  if (auto x = v.get<int>("oracle", "N")) cfg.oracle_N = *x;
  if (auto x = v.get<int>("oracle", "seed")) {
    if (*x < 0) throw ConfigError("'oracle.seed' must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(*x);
  }
  if (auto x = v.get<int>("oracle", "restarts")) cfg.restarts = *x;
  v.reject_unknown();
}

inline void validate(const RunConfig& cfg) {
  if (cfg.command != "catalog" && cfg.problem_id.empty())
    throw ConfigError("missing problem: pass --problem ID or --config FILE");
  if (cfg.problem_id == "custom")
    throw ConfigError("custom problems are defined in code; the command line runs catalog problems only");
  for (const auto& [name, v] : {std::pair<const char*, double>{"ode", cfg.ode_tol},
                                {"check", cfg.check_tol},
                                {"limiting", cfg.limiting_tol},
                                {"shoot", cfg.shoot_tol}})
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("tolerances positive: '") + name + "' is not");
  if (cfg.horizon_kind != "geometric" && cfg.horizon_kind != "arithmetic" && cfg.horizon_kind != "explicit")
    throw ConfigError("horizons.kind must be geometric, arithmetic or explicit");
  if (cfg.horizon_kind == "explicit" && cfg.taus.empty()) throw ConfigError("explicit horizons need values");
  try {
    (void)cfg.horizons();
  } catch (const ProblemError& e) {
    throw ConfigError(e.what());
  }
  if (!(cfg.horizon > 0.0)) throw ConfigError("horizon must be positive");
  if (!(cfg.t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (!(cfg.psi_lo < cfg.psi_hi)) throw ConfigError("bracket needs lo < hi");
  if (!(cfg.oracle_T > 0.0) || cfg.oracle_N < 1) throw ConfigError("oracle needs T > 0 and N >= 1");
  if (cfg.restarts < 0) throw ConfigError("restarts must be non-negative");
  for (const auto& c : cfg.checks)
    if (std::find(all_check_ids().begin(), all_check_ids().end(), c) == all_check_ids().end())
      throw ConfigError("unknown check '" + c + "'");
}

}  // namespace detail

struct UsageError : ConfigError {
  using ConfigError::ConfigError;
};

/// Flags override file values. `file_text` stands in for the contents of
/// --config when given (tests).
inline RunConfig parse_config(const std::vector<std::string>& args, std::optional<std::string> file_text = std::nullopt) {
  CLI::App app{"Limiting costates and maximum-principle checks for infinite-horizon problems", "horizon-limit"};
  app.require_subcommand(1, 1);
  std::string config_path, problem, b_text, tau_text, bracket_text, checks_text, emit_text, kind;
  std::vector<std::string> param_text;
  RunConfig flags;
  std::uint64_t seed = 0;

  app.add_option("--config", config_path, "TOML problem config");
  auto* o_problem = app.add_option("--problem", problem, "catalog id (or a .toml config path)");
  auto* o_b = app.add_option("--b", b_text, "initial point b");
  auto* o_param = app.add_option("--param", param_text, "catalog parameter key=value (r, c, umax)");
  auto* o_control = app.add_option("--control", flags.control_path, "tabulated control CSV (t,u_1..u_k)");
  auto* o_kind = app.add_option("--horizons", kind, "geometric | arithmetic | explicit");
  auto* o_tau = app.add_option("--tau", tau_text, "explicit horizons, comma separated");
  auto* o_tau0 = app.add_option("--tau0", flags.tau0);
  auto* o_factor = app.add_option("--factor", flags.factor);
  auto* o_step = app.add_option("--step", flags.step);
  auto* o_count = app.add_option("--count", flags.count);
  auto* o_ode = app.add_option("--ode-tol", flags.ode_tol);
  auto* o_check = app.add_option("--check-tol", flags.check_tol);
  auto* o_lim = app.add_option("--limiting-tol", flags.limiting_tol);
  auto* o_stol = app.add_option("--shoot-tol", flags.shoot_tol);
  auto* o_out = app.add_option("--out", flags.out_dir, "output directory");
  auto* o_emit = app.add_option("--emit", emit_text, "json,csv");
  auto* o_horizon = app.add_option("--horizon", flags.horizon, "tail / shooting horizon");
  auto* o_tend = app.add_option("--t-end", flags.t_end, "verification grid end");
  auto* o_checks = app.add_option("--checks", checks_text, "comma separated check ids");
  auto* o_bracket = app.add_option("--bracket", bracket_text, "lo,hi");
  auto* o_T = app.add_option("--T", flags.oracle_T, "transcription horizon");
  auto* o_N = app.add_option("--N", flags.oracle_N, "transcription steps");
  auto* o_seed = app.add_option("--seed", seed);
  auto* o_restarts = app.add_option("--restarts", flags.restarts);
  for (const char* name : {"costate", "verify", "shoot", "oracle", "catalog"}) app.add_subcommand(name)->fallthrough();

  const std::string usage = app.help();
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    throw UsageError(usage);
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string(e.what()) + "\n" + usage);
  }

  RunConfig cfg;
  cfg.command = app.get_subcommands().front()->get_name();
  if (o_problem->count() && problem.size() > 5 && problem.substr(problem.size() - 5) == ".toml") {
    config_path = problem;
    problem.clear();
  }
  if (file_text || !config_path.empty()) {
    const std::string text = file_text ? *file_text : read_text_file(config_path);
    detail::apply_toml(cfg, parse_toml(text));
  }
  if (!problem.empty()) cfg.problem_id = problem;
  if (o_b->count()) {
    const auto b = detail::parse_number_list(b_text, "--b");
    if (b.size() != 1) throw ConfigError("--b: catalog problems have one state");
    cfg.params["b"] = b[0];
  }
  if (o_param->count()) {
    for (const auto& kv : param_text) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--param expects key=value, got '" + kv + "'");
      const std::string key = kv.substr(0, eq);
      if (key != "r" && key != "c" && key != "umax" && key != "b") throw ConfigError("unknown key '" + key + "'");
      cfg.params[key] = detail::parse_number_list(kv.substr(eq + 1), "--param " + key).at(0);
    }
  }
  if (o_control->count()) cfg.control_path = flags.control_path;
  if (o_kind->count()) cfg.horizon_kind = kind;
  if (o_tau->count()) {
    cfg.taus = detail::parse_number_list(tau_text, "--tau");
    cfg.horizon_kind = "explicit";
  }
  if (o_tau0->count()) cfg.tau0 = flags.tau0;
  if (o_factor->count()) cfg.factor = flags.factor;
  if (o_step->count()) cfg.step = flags.step;
  if (o_count->count()) cfg.count = flags.count;
  if (o_ode->count()) cfg.ode_tol = flags.ode_tol;
  if (o_check->count()) cfg.check_tol = flags.check_tol;
  if (o_lim->count()) cfg.limiting_tol = flags.limiting_tol;
  if (o_stol->count()) cfg.shoot_tol = flags.shoot_tol;
  if (o_out->count()) cfg.out_dir = flags.out_dir;
  if (o_emit->count()) {
    const auto words = detail::parse_word_list(emit_text);
    cfg.emit_json = cfg.emit_csv = false;
    for (const auto& w : words) {
      if (w == "json") cfg.emit_json = true;
      else if (w == "csv") cfg.emit_csv = true;
      else throw ConfigError("--emit: unknown format '" + w + "'");
    }
  }
  if (o_horizon->count()) cfg.horizon = flags.horizon;
  if (o_tend->count()) cfg.t_end = flags.t_end;
  if (o_checks->count()) cfg.checks = detail::parse_word_list(checks_text);
  if (o_bracket->count()) {
    const auto br = detail::parse_number_list(bracket_text, "--bracket");
    if (br.size() != 2) throw ConfigError("--bracket expects lo,hi");
    cfg.psi_lo = br[0];
    cfg.psi_hi = br[1];
  }
  if (o_T->count()) cfg.oracle_T = flags.oracle_T;
  if (o_N->count()) cfg.oracle_N = flags.oracle_N;
  if (o_seed->count()) cfg.seed = seed;
  if (o_restarts->count()) cfg.restarts = flags.restarts;

  if (cfg.command != "catalog" && cfg.problem_id.empty())
    throw UsageError("missing problem: pass --problem ID or --config FILE\n" + usage);
  detail::validate(cfg);
  return cfg;
}

namespace detail {

class ArtifactWriter {
 public:
  ArtifactWriter(const RunConfig& cfg) : cfg_(cfg), dir_(cfg.out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_)) throw ConfigError("output directory not writable: " + cfg.out_dir);
    const auto probe = dir_ / ".write_probe";
    {
      std::ofstream f(probe);
      if (!f) throw ConfigError("output directory not writable: " + cfg.out_dir);
    }
    std::filesystem::remove(probe, ec);
  }

  void json(const std::string& name, const nlohmann::json& j) const {
    if (!cfg_.emit_json) return;
    std::ofstream f(dir_ / name, std::ios::binary);
    f << j.dump(2) << '\n';
  }
  template <class Fn>
  void csv(const std::string& name, Fn&& fn) const {
    if (!cfg_.emit_csv) return;
    std::ofstream f(dir_ / name, std::ios::binary);
    fn(f);
  }

 private:
  const RunConfig& cfg_;
  std::filesystem::path dir_;
};

inline nlohmann::json limiting_json(const LimitingSolution& sol) {
  nlohmann::json trace = nlohmann::json::array();
  for (std::size_t i = 0; i < sol.grid.size(); ++i)
    trace.push_back({{"t", sol.grid[i]}, {"psi", vector_json(sol.psi_trace[i])}});
  return {{"lambda_star", sol.lambda_star},
          {"psi0_star", vector_json(sol.psi0_star)},
          {"abnormal", sol.abnormal},
          {"converged", sol.converged},
          {"oscillating", sol.oscillating},
          {"I_unbounded", sol.I_unbounded},
          {"last_step", finite_or_null(sol.last_step)},
          {"horizons", horizons_json(sol)},
          {"trace", trace}};
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(i == n - 1 ? b : a + (b - a) * i / (n - 1));
  return out;
}

inline CandidateProcess build_candidate(const RunConfig& cfg, const ControlProblem& problem, const Vector& b) {
  CandidateOptions copt;
  copt.ode = cfg.ode();
  const double reach = cfg.horizon_kind == "explicit" ? cfg.taus.back() : cfg.horizons().back();
  copt.t_end = std::max({64.0, reach, cfg.horizon, cfg.t_end});
  if (cfg.control_path.empty()) return candidate_process(problem, b, copt);
  std::ifstream in(cfg.control_path);
  if (!in) throw ConfigError("cannot read " + cfg.control_path);
  auto [ts, us] = read_table_csv(in, "u");
  return candidate_process(problem, b, tabulated_control(std::move(ts), std::move(us)), copt);
}

inline void write_costate_artifacts(const RunConfig& cfg, const ArtifactWriter& out, const ControlProblem& problem,
                                    const CandidateProcess& candidate, const LimitingSolution& sol) {
  out.csv("horizons.csv", [&](std::ostream& os) { write_horizons_csv(os, sol); });
  out.json("limiting.json", limiting_json(sol));
  const auto grid = linspace(0.0, std::min(cfg.t_end, sol.grid.back()), 101);
  const auto ht = hamiltonian_trace(problem, candidate, sol, grid, cfg.horizon, cfg.check_tol, cfg.ode());
  out.csv("costate_trace.csv", [&](std::ostream& os) { write_costate_trace_csv(os, sol, ht); });
  const auto fgrid = linspace(0.0, sol.grid.back(), 101);
  const auto ft = solve_fundamental(problem, candidate.initial_point, candidate.control, sol.grid.back(), fgrid, cfg.ode());
  out.csv("fundamental.csv", [&](std::ostream& os) { write_fundamental_csv(os, ft); });
}

}  // namespace detail

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_fail = 2 };

inline int run_catalog(std::ostream& os) {
  for (const auto& id : catalog_ids()) {
    const auto p = instantiate_problem(id);
    os << id << "  r=" << format_number(p.discount) << "  C=" << describe(p.initial_set) << '\n';
  }
  return exit_ok;
}

inline int run(const RunConfig& cfg, std::ostream& os = std::cout, std::ostream& err = std::cerr) {
  if (cfg.command == "catalog") return run_catalog(os);

  ControlProblem problem;
  std::optional<detail::ArtifactWriter> out;
  try {
    problem = instantiate_problem(cfg.problem_id, cfg.params);
    out.emplace(cfg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }
  const Vector b = default_initial_point(problem);
  const std::string report_name = cfg.command == "costate" ? "limiting.json"
                                  : cfg.command == "verify" ? "report.json"
                                  : cfg.command == "shoot"  ? "shoot.json"
                                                            : "transcription.json";
  try {
    if (cfg.command == "costate") {
      const auto candidate = detail::build_candidate(cfg, problem, b);
      LimitingOptions lopt;
      lopt.tol = cfg.limiting_tol;
      lopt.costate.ode = cfg.ode();
      const auto sol = limiting_costate(problem, candidate, cfg.horizons(), lopt);
      detail::write_costate_artifacts(cfg, *out, problem, candidate, sol);
      os << "lambda_star " << format_number(sol.lambda_star) << "  psi0_star " << format_number(sol.psi0_star[0])
         << "  " << (sol.converged ? "converged" : "not converged") << '\n';
      return sol.converged ? exit_ok : exit_fail;
    }
    if (cfg.command == "verify") {
      const auto candidate = detail::build_candidate(cfg, problem, b);
      VerifyOptions vopt;
      vopt.check_tol = cfg.check_tol;
      vopt.t_end = cfg.t_end;
      vopt.horizon = cfg.horizon;
      vopt.checks = cfg.checks;
      vopt.ode = cfg.ode();
      const auto rep = run_verification(problem, candidate, cfg.horizons(), vopt, cfg.limiting_tol);
      detail::write_costate_artifacts(cfg, *out, problem, candidate, rep.limiting);
      out->json("report.json", to_json(rep));
      const auto grid = detail::linspace(0.0, std::min(cfg.t_end, rep.limiting.grid.back()), 101);
      const auto ht = hamiltonian_trace(problem, candidate, rep.limiting, grid, cfg.horizon, cfg.check_tol, cfg.ode());
      out->csv("hamiltonian.csv", [&](std::ostream& f) { write_hamiltonian_csv(f, ht); });
      for (const auto& c : rep.checks)
        os << c.id << ' ' << to_string(c.status) << ' ' << format_number(c.worst_residual) << '\n';
      os << (rep.passed() ? "all applicable checks pass" : "verification failed") << '\n';
      return rep.passed() ? exit_ok : exit_fail;
    }
    if (cfg.command == "shoot") {
      ShootOptions sopt;
      sopt.ode.rtol = cfg.ode_tol;
      const auto shot = shoot_scalar(problem, b, cfg.psi_lo, cfg.psi_hi, cfg.horizon, cfg.shoot_tol, sopt);
      nlohmann::json ext = nlohmann::json::array();
      const detail::Extremal ex(problem, sopt);
      for (double t : detail::linspace(0.0, shot.horizon, 101))
        ext.push_back({{"t", t},
                       {"x", shot.x_at(t)},
                       {"psi", shot.psi_at(t)},
                       {"u", ex.control(shot.x_at(t), shot.mu_at(t))[0]}});
      out->json("shoot.json", {{"problem", problem.id},
                               {"b", vector_json(b)},
                               {"psi0", shot.psi0},
                               {"lambda", shot.lambda},
                               {"horizon", shot.horizon},
                               {"closing_residual", shot.closing_residual},
                               {"converged", shot.converged},
                               {"segments", shot.segments},
                               {"bracket", {cfg.psi_lo, cfg.psi_hi}},
                               {"extremal", ext}});
      out->csv("bracket.csv", [&](std::ostream& f) { write_bracket_csv(f, shot.history); });
      os << "psi0 " << format_number(shot.psi0) << "  closing residual " << format_number(shot.closing_residual)
         << '\n';
      return shot.converged ? exit_ok : exit_fail;
    }
    // oracle
    TranscriptionOptions topt;
    topt.seed = cfg.seed;
    topt.restarts = cfg.restarts;
    const auto tr = transcribe(problem, b, cfg.oracle_T, cfg.oracle_N, topt);
    out->csv("transcription.csv", [&](std::ostream& f) { write_transcription_csv(f, tr); });
    out->json("transcription.json", {{"problem", problem.id},
                                     {"b", vector_json(b)},
                                     {"T", tr.horizon},
                                     {"N", tr.steps},
                                     {"value", tr.value},
                                     {"status", tr.status},
                                     {"sweeps", tr.sweeps},
                                     {"p0", vector_json(tr.multipliers.front())},
                                     {"seed", cfg.seed},
                                     {"restarts", cfg.restarts}});
    os << "value " << format_number(tr.value) << "  p0 " << format_number(tr.multipliers.front()[0]) << "  "
       << tr.status << '\n';
    return tr.status == "converged" ? exit_ok : exit_fail;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    out->json(report_name, {{"problem", problem.id}, {"command", cfg.command}, {"error", e.what()}});
    err << "error: " << e.what() << '\n';
    return exit_fail;
  }
}

/// Entry point used by the executable.
inline int main_entry(int argc, char** argv, std::ostream& os = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args(argv + 1, argv + argc);
  RunConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const UsageError& e) {
    const bool help = std::find(args.begin(), args.end(), "--help") != args.end() ||
                      std::find(args.begin(), args.end(), "-h") != args.end();
    (help ? os : err) << e.what();
    return help ? exit_ok : exit_usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }
  return run(cfg, os, err);
}

}  // namespace horizon_limit
