#pragma once

#include "horizon_limit/candidate.hpp"
#include "horizon_limit/ode.hpp"
#include "horizon_limit/problem.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace horizon_limit {

struct Trajectory {
  std::vector<double> grid;
  std::vector<Vector> states;
};

/// x(b, u; ·) sampled on `grid` (every point must lie in [0, T]).
inline Trajectory solve_state(const ControlProblem& problem, const Vector& b, const ControlLaw& control, double T,
                              std::span<const double> grid, const OdeOptions& opt = {}) {
  if (!(T > 0.0)) throw ProblemError("solve_state needs T > 0");
  auto rhs = [&](double t, const Vector& x, Vector& dx) { dx = problem.dynamics(x, control(t)); };
  auto res = integrate(rhs, 0.0, b, T, grid, opt, control.breakpoints());
  return {std::move(res.times), std::move(res.states)};
}

/// A(ξ; t), I(ξ; t) and log det A(ξ; t) along x(ξ, u; ·).
struct FundamentalTrace {
  Vector xi;
  std::vector<double> grid;
  std::vector<Vector> states;
  std::vector<Matrix> A_samples;
  std::vector<Vector> I_samples;
  std::vector<double> logdet_samples;
  bool diverged = false;  ///< ‖I‖ passed 1e300; samples stop at the last finite time
  double t_reached = 0.0;
};

inline constexpr double divergence_threshold = 1e300;

/// Integrates [x, A (row-major), I, log det A] as one system so A and I
/// share the state's step sequence.
inline FundamentalTrace solve_fundamental(const ControlProblem& problem, const Vector& xi, const ControlLaw& control,
                                          double T, std::span<const double> grid, const OdeOptions& opt = {}) {
  const int m = problem.state_dim;
  const int n = m + m * m + m + 1;
  Vector y0 = Vector::Zero(n);
  y0.head(m) = xi;
  for (int i = 0; i < m; ++i) y0[m + i * m + i] = 1.0;
  const double r = problem.discount;
  auto rhs = [&](double t, const Vector& y, Vector& dy) {
    const Vector x = y.head(m);
    const Vector u = control(t);
    const Matrix J = problem.dynamics_jac(x, u);
    const Vector g = problem.running_cost_grad(x, u);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> A(y.data() + m, m, m);
    dy.resize(n);
    dy.head(m) = problem.dynamics(x, u);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> dA(dy.data() + m, m, m);
    dA.noalias() = J * A;
    dy.segment(m + m * m, m).noalias() = (r == 0.0 ? 1.0 : std::exp(-r * t)) * (A.transpose() * g);
    dy[n - 1] = J.trace();
  };
  bool diverged = false;
  auto observer = [&](double, const Vector& y) {
    if (y.segment(m + m * m, m).norm() > divergence_threshold) diverged = true;
    return !diverged;
  };
  FundamentalTrace tr;
  tr.xi = xi;
  OdeResult res;
  try {
    res = integrate(rhs, 0.0, y0, T, grid, opt, control.breakpoints(), false, observer);
  } catch (const IntegrationError& e) {
    // overflow of the augmented system is the divergence signal when the
    // observer did not see it first
    tr.diverged = true;
    tr.t_reached = e.last_valid_time();
    return tr;
  }
  tr.diverged = diverged;
  tr.t_reached = res.t_final;
  for (std::size_t k = 0; k < res.times.size(); ++k) {
    const Vector& y = res.states[k];
    tr.grid.push_back(res.times[k]);
    tr.states.push_back(y.head(m));
    Matrix A(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) A(i, j) = y[m + i * m + j];
    tr.A_samples.push_back(std::move(A));
    tr.I_samples.push_back(y.segment(m + m * m, m));
    tr.logdet_samples.push_back(y[n - 1]);
  }
  return tr;
}

/// I(ξ; t) on `grid`; the last sample is I(ξ; T) when `grid` ends at T.
inline std::vector<Vector> accumulate_gradient_integral(const ControlProblem& problem, const Vector& xi,
                                                        const ControlLaw& control, double T,
                                                        std::span<const double> grid, const OdeOptions& opt = {}) {
  return solve_fundamental(problem, xi, control, T, grid, opt).I_samples;
}

/// I(ξ; T) alone, or +inf entries when the integral diverged.
inline Vector gradient_integral(const ControlProblem& problem, const Vector& xi, const ControlLaw& control, double T,
                                const OdeOptions& opt = {}) {
  const double g[] = {T};
  auto tr = solve_fundamental(problem, xi, control, T, g, opt);
  if (tr.diverged || tr.I_samples.empty())
    return Vector::Constant(problem.state_dim, std::numeric_limits<double>::infinity());
  return tr.I_samples.back();
}

/// ∫_a^b e^{-rt} f0(x, u) dt along x(b0, u; ·), with x carried from 0.
inline double discounted_cost_integral(const ControlProblem& problem, const Vector& b0, const ControlLaw& control,
                                       double a, double b, const OdeOptions& opt = {}) {
  if (b <= a) return 0.0;
  const int m = problem.state_dim;
  Vector xa = b0;
  if (a > 0.0) {
    auto rhs = [&](double t, const Vector& x, Vector& dx) { dx = problem.dynamics(x, control(t)); };
    xa = integrate(rhs, 0.0, b0, a, {}, opt, control.breakpoints()).y_final;
  }
  const double r = problem.discount;
  auto rhs = [&](double t, const Vector& y, Vector& dy) {
    const Vector x = y.head(m);
    const Vector u = control(t);
    dy.resize(m + 1);
    dy.head(m) = problem.dynamics(x, u);
    dy[m] = (r == 0.0 ? 1.0 : std::exp(-r * t)) * problem.running_cost(x, u);
  };
  Vector y0(m + 1);
  y0.head(m) = xa;
  y0[m] = 0.0;
  return integrate(rhs, a, y0, b, {}, opt, control.breakpoints()).y_final[m];
}

/// J0(b, s; T) = ∫_0^T e^{-r(t+s)} f0(x(b,u;t), u(t)) dt.
inline double payoff(const ControlProblem& problem, const Vector& b, const ControlLaw& control, double s, double T,
                     const OdeOptions& opt = {}) {
  if (T < 0.0) throw ProblemError("payoff needs T >= 0");
  if (T == 0.0) return 0.0;
  const double jbar = discounted_cost_integral(problem, b, control, 0.0, T, opt);
  return s == 0.0 ? jbar : std::exp(-problem.discount * s) * jbar;
}

struct TailEstimate {
  double value = 0.0;      ///< ∫_T^H e^{-rt} f0 dt
  double remainder = 0.0;  ///< bound on ∫_H^∞
  bool heuristic = false;  ///< remainder extrapolated, not bounded
};

/// ∫_T^H e^{-rt} f0 along the candidate with a bound on the part past H.
/// Remainders: M e^{-rH}/r with a cost bound, otherwise geometric
/// extrapolation from two trailing windows (flagged heuristic). For r = 0
/// the last half-window must satisfy |∫_{H/2}^H| < 0.01·check_tol.
inline TailEstimate tail_payoff(const ControlProblem& problem, const CandidateProcess& candidate, double T, double H,
                                double check_tol = 1e-6, const OdeOptions& opt = {}) {
  if (!(H > T)) throw ProblemError("tail_payoff needs horizon > T");
  TailEstimate out;
  const Vector& b = candidate.initial_point;
  const auto& u = candidate.control;
  out.value = discounted_cost_integral(problem, b, u, T, H, opt);
  const double r = problem.discount;
  if (r == 0.0) {
    const double last = discounted_cost_integral(problem, b, u, 0.5 * H, H, opt);
    if (!(std::abs(last) < 0.01 * check_tol)) throw CertificationError("tail not certifiable");
    out.remainder = std::abs(last);
    return out;
  }
  if (problem.cost_bound) {
    out.remainder = *problem.cost_bound * std::exp(-r * H) / r;
    return out;
  }
  const double a = std::max(T, 0.5 * H), mid = 0.5 * (a + H);
  const double s1 = discounted_cost_integral(problem, b, u, a, mid, opt);
  const double s2 = discounted_cost_integral(problem, b, u, mid, H, opt);
  out.heuristic = true;
  if (s2 == 0.0) {
    out.remainder = 0.0;
  } else {
    const double rho = std::abs(s2) / std::abs(s1);
    out.remainder = rho < 1.0 ? std::abs(s2) * rho / (1.0 - rho) : std::numeric_limits<double>::infinity();
  }
  return out;
}

/// The payoff functionals of one candidate process.
class PayoffAccount {
 public:
  PayoffAccount(const ControlProblem& problem, const CandidateProcess& candidate, OdeOptions opt = {})
      : problem_(problem), candidate_(candidate), opt_(opt) {}

  double J0(const Vector& b, double s, double T) const { return payoff(problem_, b, candidate_.control, s, T, opt_); }
  double Jbar(const Vector& b, double T) const { return J0(b, 0.0, T); }
  /// J^θ(b, s; T) = J0(b, s; T) − J0(b, s; θ).
  double Jtheta(const Vector& b, double s, double theta, double T) const {
    return std::exp(-problem_.discount * s) * discounted_cost_integral(problem_, b, candidate_.control, theta, T, opt_);
  }
  TailEstimate tail(double T, double H, double check_tol = 1e-6) const {
    return tail_payoff(problem_, candidate_, T, H, check_tol, opt_);
  }
  /// J** ≈ J̄0(b*; H) with the tail remainder past H.
  TailEstimate jstar(double H, double check_tol = 1e-6) const { return tail(0.0, H, check_tol); }

 private:
  const ControlProblem& problem_;
  const CandidateProcess& candidate_;
  OdeOptions opt_;
};

}  // namespace horizon_limit
