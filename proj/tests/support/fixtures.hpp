#pragma once

// Small problems built directly in the tests.

#include "horizon_limit/candidate.hpp"
#include "horizon_limit/costate.hpp"
#include "horizon_limit/problem.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace fixtures {

using horizon_limit::ControlProblem;
using horizon_limit::Matrix;
using horizon_limit::Vector;

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

/// x' = 1, f0 ≡ 0: H(0) = ψ(0), so the Michel residual changes sign at 0.
inline ControlProblem zero_cost(double b = 1.0, double r = 1.0) {
  ControlProblem p;
  p.state_dim = 1;
  p.control_dim = 1;
  p.discount = r;
  p.dynamics = [](const Vector&, const Vector&) { return vec({1.0}); };
  p.dynamics_jac = [](const Vector&, const Vector&) { return Matrix::Zero(1, 1).eval(); };
  p.running_cost = [](const Vector&, const Vector&) { return 0.0; };
  p.running_cost_grad = [](const Vector&, const Vector&) { return vec({0.0}); };
  p.initial_set = horizon_limit::Singleton{vec({b})};
  p.control_set = horizon_limit::Box{vec({-1.0}), vec({1.0})};
  p.policy = [](double, const Vector&) { return vec({0.0}); };
  p.cost_bound = 0.0;
  return horizon_limit::make_custom_problem(p);
}

/// x' = M x + B u with tr M = −0.2, f0 = |x|² + u².
inline ControlProblem linear2(double r = 0.5) {
  ControlProblem p;
  p.state_dim = 2;
  p.control_dim = 1;
  p.discount = r;
  Matrix M(2, 2);
  M << 0.1, 1.0, -0.5, -0.3;
  p.dynamics = [M](const Vector& x, const Vector& u) { return (M * x + vec({0.0, 1.0}) * u[0]).eval(); };
  p.dynamics_jac = [M](const Vector&, const Vector&) { return M; };
  p.running_cost = [](const Vector& x, const Vector& u) { return x.squaredNorm() + u[0] * u[0]; };
  p.running_cost_grad = [](const Vector& x, const Vector&) { return (2.0 * x).eval(); };
  p.initial_set = horizon_limit::Singleton{vec({1.0, 0.0})};
  p.control_set = horizon_limit::Box{vec({-1.0}), vec({1.0})};
  return horizon_limit::make_custom_problem(p);
}

/// Nonlinear x' = −x³ + u, f0 = x² + u² (tr J depends on x).
inline ControlProblem cubic(double r = 1.0) {
  ControlProblem p;
  p.state_dim = 1;
  p.control_dim = 1;
  p.discount = r;
  p.dynamics = [](const Vector& x, const Vector& u) { return vec({-x[0] * x[0] * x[0] + u[0]}); };
  p.dynamics_jac = [](const Vector& x, const Vector&) { return Matrix::Constant(1, 1, -3.0 * x[0] * x[0]).eval(); };
  p.running_cost = [](const Vector& x, const Vector& u) { return x[0] * x[0] + u[0] * u[0]; };
  p.running_cost_grad = [](const Vector& x, const Vector&) { return vec({2.0 * x[0]}); };
  p.initial_set = horizon_limit::Singleton{vec({1.0})};
  p.control_set = horizon_limit::Box{vec({-2.0}), vec({2.0})};
  return horizon_limit::make_custom_problem(p);
}

inline horizon_limit::CandidateProcess catalog_candidate(const ControlProblem& p, double t_end = 64.0) {
  horizon_limit::CandidateOptions opt;
  opt.t_end = t_end;
  return horizon_limit::candidate_process(p, horizon_limit::default_initial_point(p), opt);
}

/// Sets HORIZON_LIMIT_THREADS for the lifetime of the guard.
class ThreadEnv {
 public:
  explicit ThreadEnv(const char* value) {
    if (const char* old = std::getenv("HORIZON_LIMIT_THREADS")) saved_ = old, had_ = true;
    setenv("HORIZON_LIMIT_THREADS", value, 1);
  }
  ~ThreadEnv() {
    if (had_) setenv("HORIZON_LIMIT_THREADS", saved_.c_str(), 1);
    else unsetenv("HORIZON_LIMIT_THREADS");
  }

 private:
  std::string saved_;
  bool had_ = false;
};

}  // namespace fixtures
