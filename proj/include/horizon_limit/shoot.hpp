#pragma once

// Scalar shooting on ψ(0) for one-state problems, closed by the Michel
// condition at T = 0: H(0) + r ∫_0^∞ e^{-rt} f0 = 0 with λ = 1.

#include "horizon_limit/candidate.hpp"
#include "horizon_limit/costate.hpp"
#include "horizon_limit/maximize.hpp"
#include "horizon_limit/problem.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace horizon_limit {

struct ShootOptions {
  std::size_t samples_per_dim = 21;
  double blowup = 1e6;           ///< |x| or |μ| beyond this ends a run with a sentinel
  int scan_points = 9;           ///< initial bracket scan
  int max_segments = 64;
  double separation = 1e-7;      ///< restart where neighbouring runs differ by this (relative)
  double separation_step = 0.02;
  OdeOptions ode{1e-10, 1e-16};
};

struct ResidualEval {
  double value = 0.0;
  bool diverged = false;
  double blowup_time = 0.0;
};

struct BracketStep {
  int iter;
  double psi_lo;
  double psi_hi;
  double psi_mid;
  double residual;
};

struct ShootResult {
  double psi0 = 0.0;
  double lambda = 1.0;
  double horizon = 0.0;
  double discount = 0.0;
  Vector b;
  DenseTrajectory extremal;  ///< [x, μ] on [0, horizon], μ = e^{rt} ψ
  double closing_residual = 0.0;
  bool converged = false;
  int segments = 0;
  std::vector<BracketStep> history;

  double x_at(double t) const { return extremal.at(t)[0]; }
  double mu_at(double t) const { return extremal.at(t)[1]; }
  double psi_at(double t) const { return std::exp(-discount * t) * mu_at(t); }
};

namespace detail {

inline void require_scalar_discounted(const ControlProblem& problem) {
  if (problem.state_dim != 1) throw ProblemError("shooting needs a one-state problem (m = 1)");
  if (!(problem.discount > 0.0)) throw ProblemError("shooting needs r > 0; with r = 0 the closing condition degenerates");
}

struct SegmentRun {
  ResidualEval eval;
  OdeResult ode;
};

/// Forward extremal with λ = 1 in current-value form: μ = e^{rt} ψ solves
/// μ' = r μ − J^T μ + g and u maximizes μ f − f0 (same argmax as H for
/// autonomous f, f0). The state is [x, μ, ∫_s^t e^{-rτ} f0 dτ].
class Extremal {
 public:
  Extremal(const ControlProblem& problem, const ShootOptions& opt)
      : problem_(problem), opt_(opt), samples_(sample_controls(problem.control_set, opt.samples_per_dim)) {
    maxopt_.per_dim = opt.samples_per_dim;
  }

  Vector control(double x, double mu) const {
    return hamiltonian_argmax(problem_, Vector::Constant(1, x), Vector::Constant(1, mu), 1.0, 0.0, samples_, maxopt_);
  }

  /// y = [x, μ, j] with j' = e^{-r(t-s)} f0 / scale.
  Vector slope(double t, const Vector& y, double s = 0.0, double scale = 1.0) const {
    const Vector x = y.head(1);
    const Vector u = control(y[0], y[1]);
    Vector dy(3);
    dy[0] = problem_.dynamics(x, u)[0];
    dy[1] = (problem_.discount - problem_.dynamics_jac(x, u)(0, 0)) * y[1] + problem_.running_cost_grad(x, u)[0];
    dy[2] = problem_.discount_factor(t - s) * problem_.running_cost(x, u) / scale;
    return dy;
  }

  /// Residual in current-value units: (μ_s f − f0)(s) + r e^{rs} ∫_s^H e^{-rt} f0;
  /// at s = 0 this is H(0) + r J̄0(b; H). Tolerances and the blow-up ball
  /// are measured against `scale` so late segments near the origin resolve.
  SegmentRun run(double s, double x_s, double mu_s, double horizon, std::span<const double> outputs = {},
                 bool dense = false, double scale = 1.0) const {
    auto rhs = [&](double t, const Vector& y, Vector& dy) { dy = slope(t, y, s, scale); };
    const double ball = opt_.blowup * scale;
    bool blown = false;
    double last_t = s, last_x = x_s;
    auto observer = [&](double t, const Vector& y) {
      last_t = t;
      last_x = y[0];
      if (!(std::abs(y[0]) <= ball && std::abs(y[1]) <= ball)) blown = true;
      return !blown;
    };
    Vector y0(3);
    y0 << x_s, mu_s, 0.0;
    OdeOptions o = opt_.ode;
    o.atol *= scale;
    if (dense) o.max_step = std::min(o.max_step, dense_max_step);
    SegmentRun out;
    try {
      out.ode = integrate(rhs, s, y0, horizon, outputs, o, {}, dense, observer);
    } catch (const IntegrationError& e) {
      blown = true;
      last_t = e.last_valid_time();
    }
    if (blown) {
      out.eval.diverged = true;
      out.eval.blowup_time = last_t;
      const double dir = last_x - x_s;
      out.eval.value = dir != 0.0 ? std::copysign(opt_.blowup, dir) : std::copysign(opt_.blowup, mu_s);
      return out;
    }
    const Vector xs = Vector::Constant(1, x_s), ms = Vector::Constant(1, mu_s);
    const double h_s = hamiltonian(problem_, xs, control(x_s, mu_s), ms, 1.0, 0.0);
    const double r = problem_.discount;
    out.eval.value = h_s + r * scale * out.ode.y_final[2];
    return out;
  }

 private:
  ControlProblem problem_;
  ShootOptions opt_;
  std::vector<Vector> samples_;
  MaximizerOptions maxopt_;
};

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

struct Bisection {
  double root;
  double lo, hi;  ///< final bracket (adjacent doubles unless an exact zero was hit)
  bool exact;
};

/// Scans, then bisects to floating-point exhaustion. Records history when asked.
template <class F>
Bisection bracket_and_bisect(F&& f, double lo, double hi, int scan_points, std::vector<BracketStep>* history) {
  const int n = std::max(scan_points, 2);
  std::vector<double> ps(n), rs(n);
  for (int i = 0; i < n; ++i) {
    ps[i] = i == n - 1 ? hi : lo + (hi - lo) * double(i) / double(n - 1);
    rs[i] = f(ps[i]);
  }
  for (int i = 0; i < n; ++i)
    if (rs[i] == 0.0) return {ps[i], ps[i], ps[i], true};
  int changes = 0, at = -1;
  for (int i = 0; i + 1 < n; ++i)
    if (sign_of(rs[i]) != sign_of(rs[i + 1])) {
      ++changes;
      at = i;
    }
  if (changes != 1) {
    std::ostringstream os;
    os << (changes == 0 ? "no sign change in bracket" : "multiple roots suspected") << "; residual table:";
    os.precision(10);
    for (int i = 0; i < n; ++i) os << " (" << ps[i] << ", " << rs[i] << ")";
    throw ShootError(os.str());
  }
  double a = ps[at], b = ps[at + 1];
  double fa = rs[at];
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = a + 0.5 * (b - a);
    if (!(mid > std::min(a, b) && mid < std::max(a, b))) break;
    const double fm = f(mid);
    if (history) history->push_back({iter, std::min(a, b), std::max(a, b), mid, fm});
    if (fm == 0.0) return {mid, mid, mid, true};
    if (sign_of(fm) == sign_of(fa)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return {a, std::min(a, b), std::max(a, b), false};
}

}  // namespace detail

/// H(0) + r ∫_0^horizon e^{-rt} f0 along the forward extremal from (b, psi0)
/// with λ = 1; ±blowup (toward the escape direction of x) when the run
/// leaves the blow-up ball first.
inline ResidualEval michel_residual(const ControlProblem& problem, const Vector& b, double psi0, double horizon,
                                    const ShootOptions& opt = {}) {
  detail::require_scalar_discounted(problem);
  if (b.size() != 1) throw ProblemError("shooting needs a scalar initial point");
  if (!(horizon > 0.0)) throw ProblemError("shooting horizon must be positive");
  return detail::Extremal(problem, opt).run(0.0, b[0], psi0, horizon).eval;
}

/// Bisection on the Michel residual over [psi_lo, psi_hi]. The saddle-path
/// extremal is continued past the point where neighbouring runs separate by
/// restarting from the state there with a fresh bracket around μ.
inline ShootResult shoot_scalar(const ControlProblem& problem, const Vector& b, double psi_lo, double psi_hi,
                                double horizon, double tol = 1e-8, const ShootOptions& opt = {}) {
  detail::require_scalar_discounted(problem);
  if (b.size() != 1) throw ProblemError("shooting needs a scalar initial point");
  if (!(psi_lo < psi_hi)) throw ProblemError("bracket needs psi_lo < psi_hi");
  if (!(horizon > 0.0)) throw ProblemError("shooting horizon must be positive");
  if (!(tol > 0.0)) throw ProblemError("tolerance must be positive");
  const detail::Extremal ex(problem, opt);

  ShootResult res;
  res.b = b;
  res.horizon = horizon;
  res.discount = problem.discount;
  res.extremal = DenseTrajectory(2);
  double s = 0.0, x_s = b[0];
  double lo = psi_lo, hi = psi_hi;
  double total_cost = 0.0;
  double scale = 1.0;
  for (int seg = 0;; ++seg) {
    if (seg >= opt.max_segments) throw ShootError("extremal not continued to the horizon within the segment budget");
    // continuation segments look as far ahead as the first one did, so the
    // sign still comes from the escape direction rather than a residual
    // that is dominated by rounding near the horizon
    const double reach = seg == 0 ? horizon : s + horizon;
    auto f = [&](double mu) { return ex.run(s, x_s, mu, reach, {}, false, scale).eval.value; };
    const auto bis =
        detail::bracket_and_bisect(f, lo, hi, seg == 0 ? opt.scan_points : 2, seg == 0 ? &res.history : nullptr);
    if (seg == 0) res.psi0 = bis.root;
    res.segments = seg + 1;

    auto root_run = ex.run(s, x_s, bis.root, horizon, {}, true, scale);
    double t_cut = horizon;
    if (!bis.exact) {
      // first time the two bracketing runs separate
      std::vector<double> grid;
      for (double t = s + opt.separation_step; t < horizon; t += opt.separation_step) grid.push_back(t);
      const auto run_lo = ex.run(s, x_s, bis.lo, horizon, grid, false, scale);
      const auto run_hi = ex.run(s, x_s, bis.hi, horizon, grid, false, scale);
      const std::size_t n = std::min(run_lo.ode.times.size(), run_hi.ode.times.size());
      const bool both_full = run_lo.ode.times.size() == grid.size() && run_hi.ode.times.size() == grid.size();
      t_cut = both_full ? horizon : (n > 0 ? run_lo.ode.times[n - 1] : s);
      for (std::size_t k = 0; k < n; ++k) {
        const double xl = run_lo.ode.states[k][0], xh = run_hi.ode.states[k][0];
        if (std::abs(xl - xh) > opt.separation * std::max(std::abs(xl), std::abs(xh))) {
          t_cut = run_lo.ode.times[k];
          break;
        }
      }
      if (root_run.eval.diverged) t_cut = std::min(t_cut, root_run.eval.blowup_time);
      if (t_cut < horizon && !(t_cut > s + 1e-6))
        throw ShootError("extremal not continuable past t=" + std::to_string(s));
    } else if (root_run.eval.diverged) {
      t_cut = root_run.eval.blowup_time;
      if (!(t_cut > s + 1e-6)) throw ShootError("extremal not continuable past t=" + std::to_string(s));
    }
    // keep the root run on [s, t_cut]
    const auto& d = root_run.ode.dense;
    for (std::size_t k = 0; k < d.size() && d.times()[k] <= t_cut; ++k)
      res.extremal.push_back(d.times()[k], d.node(k).head(2), d.node_derivative(k).head(2));
    const Vector y_cut = d.at(t_cut);
    if (res.extremal.t_end() < t_cut)
      res.extremal.push_back(t_cut, y_cut.head(2), ex.slope(t_cut, y_cut, s, scale).head(2));
    total_cost += std::exp(-problem.discount * s) * scale * y_cut[2];
    if (t_cut >= horizon) break;
    s = t_cut;
    x_s = y_cut[0];
    const double mu_s = y_cut[1];
    scale = std::max({std::abs(x_s), std::abs(mu_s), 1e-300});
    double delta = 1e-6 * std::abs(mu_s) + 1e-300;
    bool found = false;
    for (int k = 0; k < 40 && !found; ++k, delta *= 4.0) {
      lo = mu_s - delta;
      hi = mu_s + delta;
      found = detail::sign_of(f(lo)) != detail::sign_of(f(hi));
    }
    if (!found) throw ShootError("no sign change around the continued extremal at t=" + std::to_string(s));
  }
  const Vector p0 = Vector::Constant(1, res.psi0);
  const double h0 = hamiltonian(problem, b, ex.control(b[0], res.psi0), p0, 1.0, 0.0);
  res.closing_residual = h0 + problem.discount * total_cost;
  res.converged = std::abs(res.closing_residual) <= tol;
  return res;
}

/// Candidate process whose control is the argmax along the shooting
/// extremal, held at its last value past the horizon.
inline CandidateProcess candidate_from_shoot(const ControlProblem& problem, const ShootResult& shot,
                                             CandidateOptions opt = {}, const ShootOptions& sopt = {}) {
  auto ref = std::make_shared<const DenseTrajectory>(shot.extremal);
  auto ex = std::make_shared<const detail::Extremal>(problem, sopt);
  ControlLaw law([ref, ex](double t) {
    const Vector y = ref->at(std::min(t, ref->t_end()));
    return ex->control(y[0], y[1]);
  });
  opt.t_end = std::max(opt.t_end, shot.horizon);
  return candidate_process(problem, shot.b, std::move(law), opt);
}

}  // namespace horizon_limit
