#pragma once

#include "horizon_limit/ode.hpp"
#include "horizon_limit/problem.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <vector>

namespace horizon_limit {

struct CandidateOptions {
  double t_end = 64.0;    ///< trajectory cache covers [0, t_end]
  double max_step = 0.01;  ///< node spacing cap of the cached trajectory
  OdeOptions ode;
};

namespace detail {

inline void require_admissible_start(const ControlProblem& problem, const Vector& b) {
  if (b.size() != problem.state_dim) throw ProblemError("initial point has wrong dimension");
  if (!contains(problem.initial_set, b)) throw ProblemError("initial point b is not in the initial set");
}

inline void require_admissible_controls(const ControlProblem& problem, const CandidateProcess& c) {
  for (double t : c.trajectory.times()) {
    const Vector u = c.control(t);
    if (u.size() != problem.control_dim || !contains(problem.control_set, u))
      throw ProblemError("candidate control leaves U at t=" + std::to_string(t));
  }
}

}  // namespace detail

/// Open-loop candidate from a user-supplied control law.
inline CandidateProcess candidate_process(const ControlProblem& problem, const Vector& b, ControlLaw control,
                                          const CandidateOptions& opt = {}) {
  detail::require_admissible_start(problem, b);
  if (!(opt.t_end > 0.0)) throw ProblemError("candidate t_end must be positive");
  OdeOptions ode = opt.ode;
  ode.max_step = std::min(ode.max_step, opt.max_step);
  auto rhs = [&](double t, const Vector& x, Vector& dx) { dx = problem.dynamics(x, control(t)); };
  auto res = integrate(rhs, 0.0, b, opt.t_end, {}, ode, control.breakpoints(), true);
  CandidateProcess c{b, std::move(control), std::move(res.dense)};
  detail::require_admissible_controls(problem, c);
  return c;
}

/// Catalog candidate: the problem's feedback law evaluated along its own
/// closed-loop trajectory from b, then frozen as an open-loop control.
inline CandidateProcess candidate_process(const ControlProblem& problem, const Vector& b,
                                          const CandidateOptions& opt = {}) {
  if (!problem.policy) throw ProblemError("problem '" + problem.id + "' has no catalog policy; pass a control");
  detail::require_admissible_start(problem, b);
  if (!(opt.t_end > 0.0)) throw ProblemError("candidate t_end must be positive");
  OdeOptions ode = opt.ode;
  ode.max_step = std::min(ode.max_step, opt.max_step);
  const auto& policy = problem.policy;
  auto rhs = [&](double t, const Vector& x, Vector& dx) { dx = problem.dynamics(x, policy(t, x)); };
  auto res = integrate(rhs, 0.0, b, opt.t_end, {}, ode, {}, true);
  auto reference = std::make_shared<const DenseTrajectory>(res.dense);
  CandidateProcess c{b, replay_policy(reference, policy), std::move(res.dense)};
  detail::require_admissible_controls(problem, c);
  return c;
}

/// Catalog candidate at the problem's own initial point (singleton C) or b = 1.
inline Vector default_initial_point(const ControlProblem& problem) {
  if (const auto* s = std::get_if<Singleton>(&problem.initial_set)) return s->point;
  auto it = problem.parameters.find("b");
  return Vector::Constant(problem.state_dim, it == problem.parameters.end() ? 1.0 : it->second);
}

/// Worst mismatch between the secant slope of each cached cell and the
/// dynamics at the cell midpoint.
inline double dynamics_residual(const ControlProblem& problem, const CandidateProcess& c) {
  const auto& ts = c.trajectory.times();
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const double h = ts[i + 1] - ts[i];
    if (h <= 0.0) continue;
    const double tm = 0.5 * (ts[i] + ts[i + 1]);
    const Vector slope = (c.trajectory.node(i + 1) - c.trajectory.node(i)) / h;
    const Vector f = problem.dynamics(c.trajectory.at(tm), c.control(tm));
    worst = std::max(worst, (slope - f).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

}  // namespace horizon_limit
