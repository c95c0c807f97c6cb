#pragma once

// Direct transcription: explicit Euler, piecewise-constant controls,
// projected coordinate descent. Slow but independent of the costate code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "horizon_limit/core.hpp"
#include "horizon_limit/parallel.hpp"
#include "horizon_limit/problem.hpp"

namespace horizon_limit {

struct TranscriptionOptions {
  int max_sweeps = 2000;
  double tol = 1e-15;          ///< sweep decrease below tol·(1 + |value|) counts as converged
  double fd_step = 1e-4;       ///< relative finite-difference step for the coordinate Newton step
  int restarts = 0;            ///< extra random starts, best value kept
  std::uint64_t seed = 0;
  bool warm_start = true;      ///< solve on N/2 first and refine
  int coarsest = 50;
};

struct Transcription {
  double horizon = 0.0;
  int steps = 0;
  double dt = 0.0;
  double value = 0.0;
  std::vector<Vector> controls;     ///< u_0 .. u_{N-1}
  std::vector<Vector> states;       ///< x_0 .. x_N
  std::vector<Vector> multipliers;  ///< p_0 .. p_N
  std::string status;               ///< "converged" or "max-iters"
  int sweeps = 0;

  double t(int k) const { return dt * k; }
};

namespace detail {

class Transcriber {
 public:
  Transcriber(const ControlProblem& p, const Vector& b, double T, int N, const TranscriptionOptions& opt)
      : p_(p), b_(b), T_(T), N_(N), dt_(T / N), opt_(opt) {
    weight_.resize(N);
    for (int k = 0; k < N; ++k) weight_[k] = dt_ * p.discount_factor(dt_ * k);
  }

  Vector step(const Vector& x, const Vector& u) const { return x + dt_ * p_.dynamics(x, u); }

  /// Σ_{j ≥ k} w_j f0(x_j, u_j) with u_k replaced by v.
  double suffix(const std::vector<Vector>& us, const std::vector<Vector>& xs, int k, const Vector& v) const {
    Vector x = xs[k];
    double c = weight_[k] * p_.running_cost(x, v);
    x = step(x, v);
    for (int j = k + 1; j < N_; ++j) {
      c += weight_[j] * p_.running_cost(x, us[j]);
      x = step(x, us[j]);
    }
    return c;
  }

  void rollout(const std::vector<Vector>& us, std::vector<Vector>& xs, int from = 0) const {
    for (int j = from; j < N_; ++j) xs[j + 1] = step(xs[j], us[j]);
  }

  double value(const std::vector<Vector>& us, const std::vector<Vector>& xs) const {
    double c = p_.initial_cost(b_);
    for (int k = 0; k < N_; ++k) c += weight_[k] * p_.running_cost(xs[k], us[k]);
    return c;
  }

  /// One coordinate update on u_k; returns the suffix decrease.
  double improve(std::vector<Vector>& us, std::vector<Vector>& xs, int k) const {
    Vector u = us[k];
    double best = suffix(us, xs, k, u);
    const double start = best;
    if (const auto* fs = std::get_if<FiniteSet>(&p_.control_set)) {
      for (const auto& cand : fs->points) {
        const double c = suffix(us, xs, k, cand);
        if (c < best) {
          best = c;
          u = cand;
        }
      }
    } else {
      const auto& box = std::get<Box>(p_.control_set);
      for (Eigen::Index d = 0; d < u.size(); ++d) {
        const double lo = box.lower[d], hi = box.upper[d];
        if (lo == hi) continue;
        auto at = [&](double s) {
          Vector v = u;
          v[d] = std::clamp(s, lo, hi);
          return suffix(us, xs, k, v);
        };
        const double s0 = u[d];
        const double h = opt_.fd_step * (1.0 + std::abs(s0));
        const double cp = at(s0 + h), cm = at(s0 - h);
        const double curv = cp - 2.0 * best + cm;
        double s_new = s0, c_new = best;
        if (curv > 0.0 && s0 - h >= lo && s0 + h <= hi) {
          const double s = std::clamp(s0 - 0.5 * h * (cp - cm) / curv, lo, hi);
          const double c = at(s);
          if (c < c_new) {
            s_new = s;
            c_new = c;
          }
        }
        if (s_new == s0) {
          // no usable curvature: expanding steps toward the lower side
          const double dir = cp < cm ? 1.0 : -1.0;
          for (double step = h; step < 1e300; step *= 2.0) {
            const double s = std::clamp(s0 + dir * step, lo, hi);
            const double c = at(s);
            if (!(c < c_new)) break;
            s_new = s;
            c_new = c;
            if (s == lo || s == hi) break;
          }
        }
        if (c_new < best) {
          u[d] = s_new;
          best = c_new;
        }
      }
    }
    if (best < start) {
      us[k] = u;
      rollout(us, xs, k);
    }
    return start - best;
  }

  Transcription solve(std::vector<Vector> us) const {
    std::vector<Vector> xs(N_ + 1);
    xs[0] = b_;
    rollout(us, xs);
    Transcription out;
    out.status = "max-iters";
    for (int sweep = 0; sweep < opt_.max_sweeps; ++sweep) {
      double gain = 0.0;
      for (int k = 0; k < N_; ++k) gain += improve(us, xs, k);
      out.sweeps = sweep + 1;
      if (gain <= opt_.tol * (1.0 + std::abs(value(us, xs)))) {
        out.status = "converged";
        break;
      }
    }
    rollout(us, xs);
    out.horizon = T_;
    out.steps = N_;
    out.dt = dt_;
    out.value = value(us, xs);
    out.controls = std::move(us);
    out.states = std::move(xs);
    return out;
  }

 private:
  const ControlProblem& p_;
  Vector b_;
  double T_;
  int N_;
  double dt_;
  TranscriptionOptions opt_;
  std::vector<double> weight_;
};

inline Vector default_control(const ControlSet& set, Eigen::Index k) {
  if (const auto* fs = std::get_if<FiniteSet>(&set)) {
    // the point of smallest norm
    return *std::min_element(fs->points.begin(), fs->points.end(),
                             [](const Vector& a, const Vector& b) { return a.squaredNorm() < b.squaredNorm(); });
  }
  if (const auto* box = std::get_if<Box>(&set)) return Vector::Zero(k).cwiseMax(box->lower).cwiseMin(box->upper);
  throw ProblemError("transcription needs U to be a box or a finite set");
}

inline Vector random_control(const ControlSet& set, Eigen::Index k, std::mt19937_64& rng) {
  if (const auto* fs = std::get_if<FiniteSet>(&set)) {
    std::uniform_int_distribution<std::size_t> pick(0, fs->points.size() - 1);
    return fs->points[pick(rng)];
  }
  const auto& box = std::get<Box>(set);
  Vector u(k);
  for (Eigen::Index d = 0; d < k; ++d) {
    // unbounded-looking boxes are sampled near the origin
    const double lo = std::max(box.lower[d], -1.0), hi = std::min(box.upper[d], 1.0);
    std::uniform_real_distribution<double> pick(std::min(lo, hi), std::max(lo, hi));
    u[d] = pick(rng);
  }
  return u;
}

}  // namespace detail

/// p_N = 0, p_k = p_{k+1} + Δt (∂f/∂x^T p_{k+1} − e^{-r t_k} ∂f0/∂x) along the transcription.
inline std::vector<Vector> discrete_adjoint(const ControlProblem& problem, const Transcription& tr) {
  const int N = tr.steps;
  if (static_cast<int>(tr.controls.size()) != N || static_cast<int>(tr.states.size()) != N + 1)
    throw ProblemError("transcription is not feasible: sizes do not match N");
  std::vector<Vector> ps(N + 1);
  ps[N] = Vector::Zero(problem.state_dim);
  for (int k = N - 1; k >= 0; --k) {
    const Vector& x = tr.states[k];
    const Vector& u = tr.controls[k];
    ps[k] = ps[k + 1] + tr.dt * (problem.dynamics_jac(x, u).transpose() * ps[k + 1] -
                                 problem.discount_factor(tr.t(k)) * problem.running_cost_grad(x, u));
  }
  return ps;
}

inline Transcription transcribe(const ControlProblem& problem, const Vector& b, double T, int N,
                                const TranscriptionOptions& opt = {}) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ProblemError("transcription horizon must be positive and finite");
  if (N < 1) throw ProblemError("transcription needs N >= 1");
  if (b.size() != problem.state_dim) throw ProblemError("initial point has wrong dimension");
  if (static_cast<double>(N) * problem.state_dim * problem.control_dim > 1e5)
    throw ProblemError("transcription too large: N*m*k must be at most 1e5");
  if (!contains(problem.initial_set, b)) throw ProblemError("initial point is not in the initial set");
  if (opt.max_sweeps < 1 || !(opt.tol > 0.0) || !(opt.fd_step > 0.0) || opt.restarts < 0)
    throw ProblemError("transcription options must be positive");

  const Eigen::Index k = problem.control_dim;
  const detail::Transcriber solver(problem, b, T, N, opt);

  std::vector<Vector> start;
  if (opt.warm_start && N % 2 == 0 && N / 2 >= opt.coarsest) {
    TranscriptionOptions coarse = opt;
    coarse.restarts = 0;
    const auto tr = transcribe(problem, b, T, N / 2, coarse);
    for (const auto& u : tr.controls) {
      start.push_back(u);
      start.push_back(u);
    }
  } else {
    start.assign(N, detail::default_control(problem.control_set, k));
  }

  std::vector<std::vector<Vector>> starts{start};
  std::mt19937_64 rng(opt.seed);
  for (int r = 0; r < opt.restarts; ++r) {
    std::vector<Vector> us(N);
    for (auto& u : us) u = detail::random_control(problem.control_set, k, rng);
    starts.push_back(std::move(us));
  }
  std::vector<Transcription> runs(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) { runs[i] = solver.solve(starts[i]); });
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i)
    if (runs[i].value < runs[best].value) best = i;
  Transcription out = std::move(runs[best]);
  out.multipliers = discrete_adjoint(problem, out);
  return out;
}

}  // namespace horizon_limit
