#pragma once

// Finite-horizon adjoint solutions with ψ(τ) = 0, their normalization,
// and the limit over an increasing horizon sequence.

#include "horizon_limit/integrate.hpp"
#include "horizon_limit/maximize.hpp"
#include "horizon_limit/parallel.hpp"
#include "horizon_limit/problem.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace horizon_limit {

struct CostateOptions {
  OdeOptions ode;
  int trace_points = 41;             ///< uniform samples of ψ on [0, τ]
  std::vector<double> sample_times;  ///< extra sample times (kept when inside [0, τ])
  bool force_fallback = false;       ///< skip the backward pass (testing the Eq.-6 path)
};

/// One normalized finite-horizon solution: λ_n + ‖ψ_n(0)‖ = 1.
struct HorizonCostate {
  double tau = 0.0;
  double lambda_n = 1.0;
  Vector psi0;
  std::vector<double> grid;
  std::vector<Vector> psi_trace;
  Vector I;             ///< I(b*; τ)
  double I_norm = 0.0;
  bool I_diverged = false;
  double eq6_residual = 0.0;  ///< ‖ψ_n(0) + λ_n I‖
  bool used_fallback = false;
  /// ψ_n at any t in [0, τ]; dense values are unnormalized, scaled on read
  DenseTrajectory raw;
  double scale = 1.0;

  Vector psi_at(double t) const { return scale * raw.at(t); }
};

namespace detail {

/// ψ' = −J^T ψ + λ e^{-rt} g along the candidate (ψ as a column).
struct AdjointRhs {
  const ControlProblem& problem;
  const CandidateProcess& candidate;
  double lambda;
  void operator()(double t, const Vector& psi, Vector& dpsi) const {
    const Vector x = candidate.trajectory.at(t);
    const Vector u = candidate.control(t);
    dpsi.noalias() = -problem.dynamics_jac(x, u).transpose() * psi;
    if (lambda != 0.0) dpsi += lambda * problem.discount_factor(t) * problem.running_cost_grad(x, u);
  }
};

inline std::vector<double> sample_grid(double t0, double t1, int points, const std::vector<double>& extra) {
  std::vector<double> g;
  const int n = std::max(points, 2);
  for (int i = 0; i < n; ++i) g.push_back(i == n - 1 ? t1 : t0 + (t1 - t0) * double(i) / double(n - 1));
  for (double t : extra)
    if (t >= t0 && t <= t1) g.push_back(t);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

inline void require_coverage(const CandidateProcess& c, double t) {
  if (t > c.t_end() * (1.0 + 1e-12))
    throw ProblemError("candidate trajectory covers [0, " + std::to_string(c.t_end()) + "] but t=" + std::to_string(t) +
                       " is needed");
}

}  // namespace detail

/// Step cap for integrations whose dense record is evaluated off-node.
inline constexpr double dense_max_step = 0.01;

struct AdjointTrace {
  std::vector<double> grid;
  std::vector<Vector> psi;
  DenseTrajectory dense;
};

/// Integrates the adjoint equation from (t0, ψ(t0)) to t1 along the
/// candidate; `times` must lie between t0 and t1.
inline AdjointTrace integrate_adjoint(const ControlProblem& problem, const CandidateProcess& candidate,
                                      const Vector& psi_start, double lambda, double t0, double t1,
                                      std::span<const double> times, const OdeOptions& opt = {}) {
  detail::require_coverage(candidate, std::max(t0, t1));
  detail::AdjointRhs rhs{problem, candidate, lambda};
  OdeOptions o = opt;
  o.max_step = std::min(o.max_step, dense_max_step);  // keeps the Hermite record accurate between nodes
  auto res = integrate(rhs, t0, psi_start, t1, times, o, candidate.control.breakpoints(), true);
  AdjointTrace out;
  out.grid = std::move(res.times);
  out.psi = std::move(res.states);
  if (t1 < t0) {
    std::reverse(out.grid.begin(), out.grid.end());
    std::reverse(out.psi.begin(), out.psi.end());
  }
  out.dense = std::move(res.dense);
  return out;
}

/// Forward solution from ψ(0) with multiplier λ on [0, t_end].
inline AdjointTrace integrate_costate(const ControlProblem& problem, const CandidateProcess& candidate,
                                      const Vector& psi0, double lambda, double t_end, std::span<const double> times,
                                      const OdeOptions& opt = {}) {
  return integrate_adjoint(problem, candidate, psi0, lambda, 0.0, t_end, times, opt);
}

/// Backward solution of the adjoint from ψ(τ) = 0 with λ = 1, rescaled so
/// that λ_n + ‖ψ_n(0)‖ = 1, cross-checked against ψ_n(0) = −λ_n I(b*; τ).
/// If the backward pass overflows, ψ_n(0) comes from that identity and the
/// trace from ψ_n(t) = (ψ_n(0) + λ_n I(t)) A(t)^{-1}.
inline HorizonCostate finite_horizon_costate(const ControlProblem& problem, const CandidateProcess& candidate,
                                             double tau, const CostateOptions& opt = {}) {
  if (!(tau > 0.0)) throw ProblemError("horizon must be positive");
  detail::require_coverage(candidate, tau);
  const int m = problem.state_dim;
  HorizonCostate hc;
  hc.tau = tau;
  hc.grid = detail::sample_grid(0.0, tau, opt.trace_points, opt.sample_times);

  const double end_only[] = {tau};
  const auto fund = solve_fundamental(problem, candidate.initial_point, candidate.control, tau, end_only, opt.ode);
  hc.I_diverged = fund.diverged;
  hc.I = fund.diverged ? Vector::Constant(m, std::numeric_limits<double>::infinity()) : fund.I_samples.back();
  hc.I_norm = hc.I.norm();

  bool backward_ok = false;
  if (!opt.force_fallback) {
    try {
      auto adj = integrate_adjoint(problem, candidate, Vector::Zero(m), 1.0, tau, 0.0, hc.grid, opt.ode);
      const Vector raw0 = adj.psi.front();
      const double mag = raw0.norm();
      if (raw0.allFinite() && mag < divergence_threshold) {
        hc.lambda_n = 1.0 / (1.0 + mag);
        hc.psi0 = hc.lambda_n * raw0;
        hc.psi_trace.reserve(adj.psi.size());
        for (const auto& p : adj.psi) hc.psi_trace.push_back(hc.lambda_n * p);
        hc.psi_trace.front() = hc.psi0;
        hc.raw = std::move(adj.dense);
        hc.scale = hc.lambda_n;
        backward_ok = true;
      }
    } catch (const IntegrationError&) {
    }
  }
  if (!backward_ok) {
    if (hc.I_diverged) throw IntegrationError("adjoint and gradient integral both overflow", 0.0);
    hc.used_fallback = true;
    hc.lambda_n = 1.0 / (1.0 + hc.I_norm);
    hc.psi0 = -hc.I / (1.0 + hc.I_norm);
    // A and I on a fine grid, transported by linear solves, then stored densely
    const auto fine = detail::sample_grid(0.0, tau, std::max(opt.trace_points, 2001), hc.grid);
    const auto tr = solve_fundamental(problem, candidate.initial_point, candidate.control, tau, fine, opt.ode);
    if (tr.diverged) throw IntegrationError("fundamental matrix overflow in Cauchy reconstruction", tr.t_reached);
    hc.raw = DenseTrajectory(m);
    for (std::size_t k = 0; k < tr.grid.size(); ++k) {
      const Vector row = (hc.psi0 + hc.lambda_n * tr.I_samples[k]) / hc.lambda_n;
      const Vector psi = tr.A_samples[k].transpose().partialPivLu().solve(row);
      const Vector x = tr.states[k];
      const Vector u = candidate.control(tr.grid[k]);
      Vector dpsi = -problem.dynamics_jac(x, u).transpose() * psi +
                    problem.discount_factor(tr.grid[k]) * problem.running_cost_grad(x, u);
      hc.raw.push_back(tr.grid[k], psi, dpsi);
    }
    hc.scale = hc.lambda_n;
    for (double t : hc.grid) hc.psi_trace.push_back(hc.psi_at(t));
  }
  hc.eq6_residual = hc.I_diverged ? 0.0 : (hc.psi0 + hc.lambda_n * hc.I).norm();
  return hc;
}

struct HorizonRow {
  double tau;
  double lambda_n;
  Vector psi0_n;
  double I_norm;
};

struct LimitingOptions {
  double tol = 1e-6;
  CostateOptions costate;
  double trace_end = 0.0;  ///< ψ* trace horizon; 0 uses the last τ (clipped to the candidate)
  int trace_points = 101;
};

struct LimitingSolution {
  double lambda_star = 1.0;
  Vector psi0_star;
  std::vector<double> grid;
  std::vector<Vector> psi_trace;
  DenseTrajectory psi_dense;
  bool abnormal = false;
  bool converged = false;
  bool oscillating = false;   ///< consecutive differences changed sign pattern without shrinking
  bool I_unbounded = false;   ///< ‖I‖ increasing and above 1/tol at the last horizon
  double last_step = 0.0;     ///< |Δλ| + ‖Δψ(0)‖ between the last two horizons
  std::vector<HorizonRow> horizon_diagnostics;
  std::vector<HorizonCostate> horizons;

  Vector psi_at(double t) const { return psi_dense.at(t); }
};

/// Re-integrates ψ* forward from psi0_star with λ* (after edits to either).
inline void retrace(const ControlProblem& problem, const CandidateProcess& candidate, LimitingSolution& sol,
                    double t_end, int points, const OdeOptions& opt = {}) {
  t_end = std::min(t_end, candidate.t_end());
  sol.grid = detail::sample_grid(0.0, t_end, points, {});
  auto tr = integrate_costate(problem, candidate, sol.psi0_star, sol.lambda_star, t_end, sol.grid, opt);
  sol.psi_trace = std::move(tr.psi);
  sol.psi_dense = std::move(tr.dense);
}

/// Copy of `sol` with ψ*(0) replaced and the trace recomputed.
inline LimitingSolution with_psi0(const ControlProblem& problem, const CandidateProcess& candidate,
                                  LimitingSolution sol, const Vector& psi0, const OdeOptions& opt = {}) {
  sol.psi0_star = psi0;
  const double t_end = sol.grid.empty() ? candidate.t_end() : sol.grid.back();
  retrace(problem, candidate, sol, t_end, static_cast<int>(std::max<std::size_t>(sol.grid.size(), 2)), opt);
  return sol;
}

/// Limit of the normalized solutions over `horizons`. λ* ∈ {0, 1}: when the
/// last λ_n is below tol the limit is abnormal and ψ*(0) = ψ_N(0);
/// otherwise ψ*(0) = ψ_N(0)/λ_N. Convergence is judged on the last step.
inline LimitingSolution limiting_costate(const ControlProblem& problem, const CandidateProcess& candidate,
                                         const HorizonSequence& horizons, const LimitingOptions& opt = {}) {
  if (horizons.size() < 3) throw ProblemError("limiting_costate needs at least 3 horizons");
  if (!(opt.tol > 0.0)) throw ProblemError("tolerance must be positive");
  detail::require_coverage(candidate, horizons.back());
  const auto& taus = horizons.values();
  LimitingSolution sol;
  sol.horizons.resize(taus.size());
  parallel_for(taus.size(),
               [&](std::size_t i) { sol.horizons[i] = finite_horizon_costate(problem, candidate, taus[i], opt.costate); });
  for (const auto& hc : sol.horizons) sol.horizon_diagnostics.push_back({hc.tau, hc.lambda_n, hc.psi0, hc.I_norm});

  std::vector<double> steps;
  for (std::size_t i = 1; i < sol.horizons.size(); ++i) {
    const auto& a = sol.horizons[i - 1];
    const auto& b = sol.horizons[i];
    steps.push_back(std::abs(b.lambda_n - a.lambda_n) + (b.psi0 - a.psi0).norm());
  }
  sol.last_step = steps.back();
  sol.converged = std::isfinite(sol.last_step) && sol.last_step < opt.tol;
  if (!sol.converged && steps.size() >= 2) {
    const double prev = steps[steps.size() - 2];
    sol.oscillating = sol.last_step >= 0.5 * prev;
  }

  bool increasing = true;
  for (std::size_t i = 1; i < sol.horizons.size(); ++i)
    if (!(sol.horizons[i].I_norm > sol.horizons[i - 1].I_norm)) increasing = false;
  sol.I_unbounded = increasing && sol.horizons.back().I_norm > 1.0 / opt.tol;

  const auto& last = sol.horizons.back();
  if (last.lambda_n > opt.tol) {
    sol.lambda_star = 1.0;
    sol.psi0_star = last.psi0 / last.lambda_n;
    sol.abnormal = false;
  } else {
    sol.lambda_star = 0.0;
    sol.psi0_star = last.psi0;
    sol.abnormal = true;
  }
  const double t_end = opt.trace_end > 0.0 ? opt.trace_end : horizons.back();
  retrace(problem, candidate, sol, t_end, opt.trace_points, opt.costate.ode);
  return sol;
}

struct HamiltonianTrace {
  std::vector<double> grid;
  std::vector<double> H_direct;
  std::vector<double> H_michel;
  std::vector<double> residual;
  std::vector<double> remainder;  ///< λ* r · tail remainder bound at each T
  bool heuristic = false;
};

/// H* along (x*, u*, ψ*, λ*) and its Michel representative −λ* r ∫_T^H e^{-rt} f0.
inline HamiltonianTrace hamiltonian_trace(const ControlProblem& problem, const CandidateProcess& candidate,
                                          const LimitingSolution& sol, std::span<const double> T_grid, double horizon,
                                          double check_tol = 1e-6, const OdeOptions& opt = {}) {
  HamiltonianTrace out;
  const double r = problem.discount;
  for (double T : T_grid) {
    const Vector x = candidate.state_at(T);
    const Vector u = candidate.control_at(T);
    const double hd = hamiltonian(problem, x, u, sol.psi_at(T), sol.lambda_star, T);
    double hm = 0.0, rem = 0.0;
    if (r > 0.0 && sol.lambda_star != 0.0) {
      const auto tail = tail_payoff(problem, candidate, T, horizon, check_tol, opt);
      hm = -sol.lambda_star * r * tail.value;
      rem = sol.lambda_star * r * tail.remainder;
      out.heuristic = out.heuristic || tail.heuristic;
    }
    out.grid.push_back(T);
    out.H_direct.push_back(hd);
    out.H_michel.push_back(hm);
    out.residual.push_back(std::abs(hd - hm));
    out.remainder.push_back(rem);
  }
  return out;
}

struct CauchyCheck {
  double worst_relative = 0.0;  ///< max ‖ψ(t) − ψ_cauchy(t)‖ / (1 + ‖ψ(t)‖)
  double worst_time = 0.0;
  int skipped = 0;              ///< samples with cond(A) > 1e12
  int compared = 0;
};

/// ψ_n(t) against (ψ_n(0) + λ_n I(t)) A(t)^{-1} at `times`, solving
/// A^T y = (ψ_n(0) + λ_n I(t))^T by LU.
inline CauchyCheck cauchy_check(const ControlProblem& problem, const CandidateProcess& candidate,
                                const HorizonCostate& hc, std::span<const double> times, const OdeOptions& opt = {}) {
  std::vector<double> ts(times.begin(), times.end());
  std::sort(ts.begin(), ts.end());
  CauchyCheck out;
  if (ts.empty()) return out;
  const auto tr = solve_fundamental(problem, candidate.initial_point, candidate.control, hc.tau, ts, opt);
  for (std::size_t k = 0; k < tr.grid.size(); ++k) {
    const Matrix& A = tr.A_samples[k];
    const Eigen::JacobiSVD<Matrix> svd(A);
    const auto& sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    if (cond > 1e12) {
      ++out.skipped;
      continue;
    }
    const Vector rhs = hc.psi0 + hc.lambda_n * tr.I_samples[k];
    const Vector predicted = A.transpose().partialPivLu().solve(rhs);
    const Vector actual = hc.psi_at(tr.grid[k]);
    const double rel = (actual - predicted).norm() / (1.0 + actual.norm());
    ++out.compared;
    if (rel > out.worst_relative) {
      out.worst_relative = rel;
      out.worst_time = tr.grid[k];
    }
  }
  return out;
}

}  // namespace horizon_limit
