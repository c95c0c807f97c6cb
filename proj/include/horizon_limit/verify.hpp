#pragma once

// Residual checks of the limiting solution against the transversality
// conditions, the vanishing-Hamiltonian relations, and their corollaries.

#include "horizon_limit/costate.hpp"
#include "horizon_limit/integrate.hpp"
#include "horizon_limit/maximize.hpp"
#include "horizon_limit/problem.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace horizon_limit {

enum class CheckStatus { pass, fail, not_applicable, uncertified };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::not_applicable: return "not-applicable";
    case CheckStatus::uncertified: return "uncertified";
  }
  return "?";
}

struct CheckResult {
  std::string id;
  CheckStatus status = CheckStatus::not_applicable;
  double worst_residual = 0.0;
  double tolerance = 0.0;
  double location = 0.0;  ///< time of the worst residual
  nlohmann::json details = nlohmann::json::object();
};

struct VerifyOptions {
  double check_tol = 1e-6;
  double t_start = 0.0;
  double t_end = 10.0;
  int t_points = 101;
  std::vector<double> michel_T{0.0, 1.0, 2.0, 5.0, 10.0};
  std::vector<double> sequence_T{0.0, 1.0, 2.0, 5.0, 10.0};
  double horizon = 40.0;
  std::size_t samples_per_dim = 101;
  /// enabled checks, in report order; empty means all
  std::vector<std::string> checks;
  std::optional<ValueFunctionModel> value_model;  ///< overrides the catalog model
  OdeOptions ode;
};

inline const std::vector<std::string>& all_check_ids() {
  static const std::vector<std::string> ids{"maximum_condition", "michel",  "transversality_zero", "abnormal",
                                            "r_zero",            "hartwick", "shadow_price",        "limiting_sequence"};
  return ids;
}

namespace detail {

inline std::vector<double> uniform_grid(double a, double b, int n) {
  std::vector<double> g;
  n = std::max(n, 2);
  for (int i = 0; i < n; ++i) g.push_back(i == n - 1 ? b : a + (b - a) * double(i) / double(n - 1));
  return g;
}

inline void finish(CheckResult& c) {
  if (c.status == CheckStatus::not_applicable) return;
  const bool within = c.worst_residual <= c.tolerance;
  if (c.status == CheckStatus::uncertified) return;
  c.status = within ? CheckStatus::pass : CheckStatus::fail;
}

/// Grid clipped to where both the candidate and ψ* are available.
inline std::vector<double> check_grid(const CandidateProcess& candidate, const LimitingSolution& sol,
                                      const VerifyOptions& opt) {
  double end = std::min(opt.t_end, candidate.t_end());
  if (!sol.grid.empty()) end = std::min(end, sol.grid.back());
  return uniform_grid(opt.t_start, end, opt.t_points);
}

inline CheckResult unconverged_guard(CheckResult c, const LimitingSolution& sol) {
  if (!sol.converged) {
    c.status = CheckStatus::uncertified;
    c.details["note"] = "limiting sequence not converged";
  }
  return c;
}

}  // namespace detail

/// max over sampled u' of H(u') − H(u*) along the candidate. The sample set
/// holds the sampler grid, u*(t) itself, and the refined argmax.
inline CheckResult check_maximum_condition(const ControlProblem& problem, const CandidateProcess& candidate,
                                           const LimitingSolution& sol, std::span<const double> t_grid,
                                           const std::vector<Vector>& samples, double tol) {
  if (samples.empty()) throw ProblemError("maximum condition check: empty control sampler");
  CheckResult c{"maximum_condition", CheckStatus::pass, 0.0, tol, 0.0, nlohmann::json::object()};
  for (double t : t_grid) {
    const Vector x = candidate.state_at(t);
    const Vector us = candidate.control_at(t);
    const Vector psi = sol.psi_at(t);
    const double h_star = hamiltonian(problem, x, us, psi, sol.lambda_star, t);
    double best = h_star;
    for (const auto& u : samples) best = std::max(best, hamiltonian(problem, x, u, psi, sol.lambda_star, t));
    const Vector refined = hamiltonian_argmax(problem, x, psi, sol.lambda_star, t, samples);
    best = std::max(best, hamiltonian(problem, x, refined, psi, sol.lambda_star, t));
    const double scaled = (best - h_star) / (1.0 + psi.norm());
    if (scaled > c.worst_residual) {
      c.worst_residual = scaled;
      c.location = t;
    }
  }
  c.details["scaling"] = "residual / (1 + |psi(t)|)";
  c.details["grid_points"] = t_grid.size();
  c.details["samples"] = samples.size();
  c = detail::unconverged_guard(c, sol);
  detail::finish(c);
  return c;
}

/// |H_direct(T) + λ* r ∫_T^H e^{-rt} f0| over the T grid, plus |H_direct|
/// at the tail horizon H. Residuals are net of the tail remainder bound.
inline CheckResult check_michel(const ControlProblem& problem, const CandidateProcess& candidate,
                                const LimitingSolution& sol, std::span<const double> T_grid, double horizon, double tol,
                                const OdeOptions& opt = {}) {
  CheckResult c{"michel", CheckStatus::pass, 0.0, tol, 0.0, nlohmann::json::object()};
  if (T_grid.empty()) throw ProblemError("michel check needs a T grid");
  const auto ht = hamiltonian_trace(problem, candidate, sol, T_grid, horizon, tol, opt);
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < ht.grid.size(); ++i) {
    const double net = std::max(0.0, ht.residual[i] - ht.remainder[i]);
    if (net > c.worst_residual) {
      c.worst_residual = net;
      c.location = ht.grid[i];
    }
    rows.push_back({{"T", ht.grid[i]}, {"H_direct", ht.H_direct[i]}, {"H_michel", ht.H_michel[i]},
                    {"residual", ht.residual[i]}, {"remainder", ht.remainder[i]}});
  }
  // vanishing is judged at the tail horizon when ψ* reaches it, else at the last T
  double t_van = ht.grid.back(), h_van = ht.H_direct.back(), rem_van = ht.remainder.back();
  if (!sol.grid.empty() && horizon <= sol.grid.back() && horizon <= candidate.t_end()) {
    t_van = horizon;
    h_van = hamiltonian(problem, candidate.state_at(horizon), candidate.control_at(horizon), sol.psi_at(horizon),
                        sol.lambda_star, horizon);
    rem_van = problem.cost_bound && problem.discount > 0.0
                  ? sol.lambda_star * *problem.cost_bound * std::exp(-problem.discount * horizon)
                  : 0.0;
  }
  const double vanishing = std::max(0.0, std::abs(h_van) - rem_van);
  if (vanishing > c.worst_residual) {
    c.worst_residual = vanishing;
    c.location = t_van;
  }
  c.details["vanishing_T"] = t_van;
  c.details["rows"] = rows;
  c.details["vanishing_residual"] = vanishing;
  c.details["horizon"] = horizon;
  c = detail::unconverged_guard(c, sol);
  if (ht.heuristic) {
    c.status = CheckStatus::uncertified;
    c.details["note"] = "tail remainder is a heuristic extrapolation";
  }
  detail::finish(c);
  return c;
}

/// Distance from ψ*(0) − λ*∇l(b*) to the normal cone of C at b*.
inline CheckResult check_transversality_zero(const ControlProblem& problem, const CandidateProcess& candidate,
                                             const LimitingSolution& sol, double tol) {
  CheckResult c{"transversality_zero", CheckStatus::pass, 0.0, tol, 0.0, nlohmann::json::object()};
  const Vector& b = candidate.initial_point;
  const Vector v = sol.psi0_star - sol.lambda_star * problem.initial_cost_grad(b);
  if (std::holds_alternative<FreeSpace>(problem.initial_set)) {
    c.worst_residual = v.norm();
    c.details["normal_cone"] = "{0}";
  } else if (std::holds_alternative<Singleton>(problem.initial_set)) {
    c.worst_residual = 0.0;
    c.details["normal_cone"] = "normal cone is full space";
  } else {
    const auto& box = std::get<Box>(problem.initial_set);
    Vector d(v.size());
    nlohmann::json comps = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double scale = 1e-12 * (1.0 + std::abs(b[i]));
      const bool at_lo = std::abs(b[i] - box.lower[i]) <= scale;
      const bool at_hi = std::abs(b[i] - box.upper[i]) <= scale;
      if (at_lo && at_hi) {
        d[i] = 0.0;
        comps.push_back("full");
      } else if (at_lo) {
        d[i] = std::max(v[i], 0.0);
        comps.push_back("(-inf,0]");
      } else if (at_hi) {
        d[i] = std::max(-v[i], 0.0);
        comps.push_back("[0,inf)");
      } else {
        d[i] = v[i];
        comps.push_back("{0}");
      }
    }
    c.worst_residual = d.norm();
    c.details["normal_cone"] = comps;
  }
  detail::finish(c);
  return c;
}

/// λ* = 0 case: ψ*(0) ≠ 0, ‖I‖ unbounded along the horizons, H* ≡ 0 and
/// ψ* f ≡ 0 on the grid.
inline CheckResult check_abnormal(const ControlProblem& problem, const CandidateProcess& candidate,
                                  const LimitingSolution& sol, std::span<const double> t_grid, double tol) {
  CheckResult c{"abnormal", CheckStatus::not_applicable, 0.0, tol, 0.0, nlohmann::json::object()};
  if (sol.lambda_star != 0.0) {
    c.details["note"] = "lambda_star = 1";
    return c;
  }
  c.status = CheckStatus::pass;
  double worst_h = 0.0, worst_pf = 0.0;
  for (double t : t_grid) {
    const Vector x = candidate.state_at(t);
    const Vector u = candidate.control_at(t);
    const Vector psi = sol.psi_at(t);
    const double pf = std::abs(psi.dot(problem.dynamics(x, u)));
    const double h = std::abs(hamiltonian(problem, x, u, psi, 0.0, t));
    if (std::max(pf, h) > c.worst_residual) c.location = t;
    worst_h = std::max(worst_h, h);
    worst_pf = std::max(worst_pf, pf);
    c.worst_residual = std::max({c.worst_residual, h, pf});
  }
  const bool nontrivial = sol.psi0_star.norm() > tol;
  c.details["H_residual"] = worst_h;
  c.details["psi_f_residual"] = worst_pf;
  c.details["nontrivial"] = nontrivial;
  c.details["I_unbounded"] = sol.I_unbounded;
  if (!nontrivial || !sol.I_unbounded) c.worst_residual = std::numeric_limits<double>::infinity();
  c = detail::unconverged_guard(c, sol);
  detail::finish(c);
  return c;
}

/// r = 0: H* ≡ 0 and ψ* f = λ* f0 along the candidate.
inline CheckResult check_r_zero(const ControlProblem& problem, const CandidateProcess& candidate,
                                const LimitingSolution& sol, std::span<const double> t_grid, double tol) {
  CheckResult c{"r_zero", CheckStatus::not_applicable, 0.0, tol, 0.0, nlohmann::json::object()};
  if (problem.discount != 0.0) {
    c.details["note"] = "r > 0";
    return c;
  }
  c.status = CheckStatus::pass;
  double worst_h = 0.0, worst_pf = 0.0;
  for (double t : t_grid) {
    const Vector x = candidate.state_at(t);
    const Vector u = candidate.control_at(t);
    const Vector psi = sol.psi_at(t);
    const double h = std::abs(hamiltonian(problem, x, u, psi, sol.lambda_star, t));
    const double pf = std::abs(psi.dot(problem.dynamics(x, u)) - sol.lambda_star * problem.running_cost(x, u));
    if (std::max(h, pf) > c.worst_residual) c.location = t;
    worst_h = std::max(worst_h, h);
    worst_pf = std::max(worst_pf, pf);
    c.worst_residual = std::max({c.worst_residual, h, pf});
  }
  c.details["H_residual"] = worst_h;
  c.details["psi_f_minus_f0_residual"] = worst_pf;
  c = detail::unconverged_guard(c, sol);
  detail::finish(c);
  return c;
}

/// Constant f0 along the candidate (sample stdev ≤ 10·tol) forces ψ* f ≡ 0.
inline CheckResult check_hartwick(const ControlProblem& problem, const CandidateProcess& candidate,
                                  const LimitingSolution& sol, std::span<const double> t_grid, double tol) {
  CheckResult c{"hartwick", CheckStatus::not_applicable, 0.0, tol, 0.0, nlohmann::json::object()};
  std::vector<double> f0;
  for (double t : t_grid) f0.push_back(problem.running_cost(candidate.state_at(t), candidate.control_at(t)));
  const double mean = std::accumulate(f0.begin(), f0.end(), 0.0) / double(f0.size());
  double var = 0.0;
  for (double v : f0) var += (v - mean) * (v - mean);
  const double stdev = f0.size() > 1 ? std::sqrt(var / double(f0.size() - 1)) : 0.0;
  c.details["f0_stdev"] = stdev;
  c.details["f0_mean"] = mean;
  if (stdev > 10.0 * tol) {
    c.details["note"] = "f0 not constant along the candidate";
    return c;
  }
  c.status = CheckStatus::pass;
  for (double t : t_grid) {
    const Vector x = candidate.state_at(t);
    const double pf = std::abs(sol.psi_at(t).dot(problem.dynamics(x, candidate.control_at(t))));
    if (pf > c.worst_residual) {
      c.worst_residual = pf;
      c.location = t;
    }
  }
  c = detail::unconverged_guard(c, sol);
  detail::finish(c);
  return c;
}

/// r = 0 with a value function model: ψ*(0) = −∇V(b*), ψ* f = f0 + H∞, λ* = 1.
inline CheckResult check_shadow_price(const ControlProblem& problem, const CandidateProcess& candidate,
                                      const LimitingSolution& sol, const std::optional<ValueFunctionModel>& vmodel,
                                      std::span<const double> t_grid, double tol) {
  CheckResult c{"shadow_price", CheckStatus::not_applicable, 0.0, tol, 0.0, nlohmann::json::object()};
  if (problem.discount != 0.0) {
    c.details["note"] = "r > 0";
    return c;
  }
  if (!vmodel) {
    c.details["note"] = "no value function model";
    return c;
  }
  c.status = CheckStatus::pass;
  const Vector& b = candidate.initial_point;
  if (!contains(vmodel->domain, b)) throw ProblemError("shadow price check: b* outside the value model domain");
  Vector grad(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    const double h = 1e-5 * (1.0 + std::abs(b[i]));
    Vector bp = b, bm = b;
    bp[i] += h;
    bm[i] -= h;
    grad[i] = (vmodel->value(bp) - vmodel->value(bm)) / (2.0 * h);
  }
  const double gradient_residual = (sol.psi0_star + grad).norm();
  double identity_residual = 0.0;
  double where = 0.0;
  for (double t : t_grid) {
    const Vector x = candidate.state_at(t);
    const Vector u = candidate.control_at(t);
    const double r14 =
        std::abs(sol.psi_at(t).dot(problem.dynamics(x, u)) - problem.running_cost(x, u) - vmodel->h_infinity);
    if (r14 > identity_residual) {
      identity_residual = r14;
      where = t;
    }
  }
  c.worst_residual = std::max(gradient_residual, identity_residual);
  c.location = identity_residual >= gradient_residual ? where : 0.0;
  c.details["gradient_residual"] = gradient_residual;
  c.details["identity_residual"] = identity_residual;
  c.details["grad_V"] = std::vector<double>(grad.data(), grad.data() + grad.size());
  if (sol.lambda_star != 1.0) {
    c.details["note"] = "lambda_star must be 1";
    c.worst_residual = std::numeric_limits<double>::infinity();
  }
  c = detail::unconverged_guard(c, sol);
  detail::finish(c);
  return c;
}

/// One row of the sequence characterization at (τ_n, T).
struct SequenceRow {
  double tau;
  double T;
  Vector psi_n;        ///< ψ_n(T), normalized
  double lambda_n;
  Vector scaled_psi;   ///< ψ_n(T) λ̂_n / λ_n
  double michel_term;  ///< λ̂_n r ∫_T^{τ_n} e^{-rt} f0
};

struct SequenceVerdict {
  double T;
  std::string verdict;  ///< converged, inconclusive, mismatch
  double cauchy_step;
  double psi_error;
  double michel_error;
};

struct SequenceReport {
  std::vector<SequenceRow> rows;
  std::vector<SequenceVerdict> verdicts;
};

/// Sequences ψ_n(T)/λ_n and λ_n r J^T(·; τ_n) on the T grid. λ̂_n is 1 when
/// λ* = 1 and λ_n itself when λ* = 0, so both columns target (ψ*(T), −H*[T])
/// in the normalization of the limit.
inline SequenceReport limiting_sequence_report(const ControlProblem& problem, const CandidateProcess& candidate,
                                               const LimitingSolution& sol, std::span<const double> T_grid,
                                               double tol, const OdeOptions& opt = {}) {
  SequenceReport rep;
  const double r = problem.discount;
  for (double T : T_grid) {
    std::vector<const SequenceRow*> mine;
    for (const auto& hc : sol.horizons) {
      if (hc.tau < T) continue;
      const double lam_hat = sol.lambda_star == 1.0 ? 1.0 : hc.lambda_n;
      const Vector psi = hc.psi_at(T);
      const double tail = r == 0.0 ? 0.0 : discounted_cost_integral(problem, candidate.initial_point, candidate.control,
                                                                      T, hc.tau, opt);
      rep.rows.push_back({hc.tau, T, psi, hc.lambda_n, psi * (lam_hat / hc.lambda_n), lam_hat * r * tail});
    }
    for (const auto& row : rep.rows)
      if (row.T == T) mine.push_back(&row);
    SequenceVerdict v{T, "inconclusive", std::numeric_limits<double>::infinity(), 0.0, 0.0};
    if (mine.size() >= 2) {
      const auto& a = *mine[mine.size() - 2];
      const auto& b = *mine.back();
      v.cauchy_step = (b.scaled_psi - a.scaled_psi).norm() + std::abs(b.michel_term - a.michel_term);
      const Vector x = candidate.state_at(T);
      const Vector u = candidate.control_at(T);
      const Vector psi_star = sol.psi_at(T);
      const double h_star = hamiltonian(problem, x, u, psi_star, sol.lambda_star, T);
      v.psi_error = (b.scaled_psi - psi_star).norm();
      v.michel_error = std::abs(b.michel_term + h_star);
      if (v.cauchy_step < tol)
        v.verdict = std::max(v.psi_error, v.michel_error) <= tol ? "converged" : "mismatch";
    }
    rep.verdicts.push_back(v);
  }
  return rep;
}

inline CheckResult check_limiting_sequence(const ControlProblem& problem, const CandidateProcess& candidate,
                                           const LimitingSolution& sol, std::span<const double> T_grid, double tol,
                                           const OdeOptions& opt = {}) {
  CheckResult c{"limiting_sequence", CheckStatus::pass, 0.0, tol, 0.0, nlohmann::json::object()};
  std::vector<double> usable;
  for (double T : T_grid)
    if (T <= sol.horizons.back().tau) usable.push_back(T);
  const auto rep = limiting_sequence_report(problem, candidate, sol, usable, tol, opt);
  nlohmann::json verdicts = nlohmann::json::array();
  bool inconclusive = rep.verdicts.empty();
  for (const auto& v : rep.verdicts) {
    const double worst = std::max(v.psi_error, v.michel_error);
    if (v.verdict == "inconclusive") inconclusive = true;
    if (v.verdict != "inconclusive" && worst > c.worst_residual) {
      c.worst_residual = worst;
      c.location = v.T;
    }
    verdicts.push_back({{"T", v.T},
                        {"verdict", v.verdict},
                        {"cauchy_step", std::isfinite(v.cauchy_step) ? nlohmann::json(v.cauchy_step) : nlohmann::json()},
                        {"psi_error", v.psi_error},
                        {"michel_error", v.michel_error}});
  }
  c.details["verdicts"] = verdicts;
  if (inconclusive) {
    c.status = CheckStatus::uncertified;
    c.details["note"] = "inconclusive";
  }
  detail::finish(c);
  return c;
}

struct VerificationReport {
  std::string problem_id;
  Vector b;
  double candidate_t_end = 0.0;
  LimitingSolution limiting;
  std::vector<CheckResult> checks;
  HorizonSequence horizons = HorizonSequence::explicit_values({1.0, 2.0});
  VerifyOptions options;
  double limiting_tol = 1e-6;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) {
      return c.status == CheckStatus::pass || c.status == CheckStatus::not_applicable;
    });
  }
  const CheckResult* find(const std::string& id) const {
    for (const auto& c : checks)
      if (c.id == id) return &c;
    return nullptr;
  }
};

/// Runs every enabled check on an existing limiting solution.
inline std::vector<CheckResult> run_checks(const ControlProblem& problem, const CandidateProcess& candidate,
                                           const LimitingSolution& sol, const VerifyOptions& opt) {
  const auto& wanted = opt.checks.empty() ? all_check_ids() : opt.checks;
  for (const auto& id : wanted)
    if (std::find(all_check_ids().begin(), all_check_ids().end(), id) == all_check_ids().end())
      throw ProblemError("unknown check '" + id + "'");
  const auto grid = detail::check_grid(candidate, sol, opt);
  const auto& vmodel = opt.value_model ? opt.value_model : problem.value_model;
  std::vector<CheckResult> out;
  for (const auto& id : all_check_ids()) {
    if (std::find(wanted.begin(), wanted.end(), id) == wanted.end()) continue;
    if (id == "maximum_condition")
      out.push_back(check_maximum_condition(problem, candidate, sol, grid,
                                            sample_controls(problem.control_set, opt.samples_per_dim), opt.check_tol));
    else if (id == "michel")
      out.push_back(check_michel(problem, candidate, sol, opt.michel_T, opt.horizon, opt.check_tol, opt.ode));
    else if (id == "transversality_zero")
      out.push_back(check_transversality_zero(problem, candidate, sol, opt.check_tol));
    else if (id == "abnormal")
      out.push_back(check_abnormal(problem, candidate, sol, grid, opt.check_tol));
    else if (id == "r_zero")
      out.push_back(check_r_zero(problem, candidate, sol, grid, opt.check_tol));
    else if (id == "hartwick")
      out.push_back(check_hartwick(problem, candidate, sol, grid, opt.check_tol));
    else if (id == "shadow_price")
      out.push_back(check_shadow_price(problem, candidate, sol, vmodel, grid, opt.check_tol));
    else if (id == "limiting_sequence")
      out.push_back(check_limiting_sequence(problem, candidate, sol, opt.sequence_T, opt.check_tol, opt.ode));
  }
  return out;
}

/// Limiting solution over `horizons` followed by every enabled check.
inline VerificationReport run_verification(const ControlProblem& problem, const CandidateProcess& candidate,
                                           const HorizonSequence& horizons, const VerifyOptions& opt = {},
                                           double limiting_tol = 1e-6) {
  LimitingOptions lopt;
  lopt.tol = limiting_tol;
  lopt.costate.ode = opt.ode;
  lopt.trace_end = std::min(candidate.t_end(), std::max(opt.t_end, horizons.back()));
  VerificationReport rep;
  rep.problem_id = problem.id;
  rep.b = candidate.initial_point;
  rep.candidate_t_end = candidate.t_end();
  rep.horizons = horizons;
  rep.options = opt;
  rep.limiting_tol = limiting_tol;
  rep.limiting = limiting_costate(problem, candidate, horizons, lopt);
  rep.checks = run_checks(problem, candidate, rep.limiting, opt);
  return rep;
}

inline nlohmann::json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

inline nlohmann::json to_json(const CheckResult& c) {
  return {{"id", c.id},
          {"status", to_string(c.status)},
          {"worst_residual", finite_or_null(c.worst_residual)},
          {"tolerance", c.tolerance},
          {"location", c.location},
          {"details", c.details}};
}

inline nlohmann::json horizons_json(const LimitingSolution& sol) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& h : sol.horizon_diagnostics)
    rows.push_back({{"tau", h.tau}, {"lambda_n", h.lambda_n}, {"psi0_n", vector_json(h.psi0_n)},
                    {"I_norm", finite_or_null(h.I_norm)}});
  return rows;
}

inline nlohmann::json to_json(const VerificationReport& rep) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : rep.checks) checks.push_back(to_json(c));
  const auto& o = rep.options;
  return {{"problem", rep.problem_id},
          {"candidate", {{"b", vector_json(rep.b)}, {"t_end", rep.candidate_t_end}}},
          {"lambda_star", rep.limiting.lambda_star},
          {"psi0_star", vector_json(rep.limiting.psi0_star)},
          {"abnormal", rep.limiting.abnormal},
          {"converged", rep.limiting.converged},
          {"passed", rep.passed()},
          {"checks", checks},
          {"horizons", horizons_json(rep.limiting)},
          {"config",
           {{"check_tol", o.check_tol},
            {"limiting_tol", rep.limiting_tol},
            {"ode_rtol", o.ode.rtol},
            {"ode_atol", o.ode.atol},
            {"t_grid", {o.t_start, o.t_end, o.t_points}},
            {"michel_T", o.michel_T},
            {"sequence_T", o.sequence_T},
            {"horizon", o.horizon},
            {"taus", rep.horizons.values()}}}};
}

}  // namespace horizon_limit
