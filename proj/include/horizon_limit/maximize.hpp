#pragma once

// Pointwise maximization of the Hamilton-Pontryagin function over U.

#include "horizon_limit/problem.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace horizon_limit {

/// H = ψ f(x,u) − λ e^{-rt} f0(x,u).
inline double hamiltonian(const ControlProblem& problem, const Vector& x, const Vector& u, const Vector& psi,
                          double lambda, double t) {
  double h = psi.dot(problem.dynamics(x, u));
  if (lambda != 0.0) h -= lambda * problem.discount_factor(t) * problem.running_cost(x, u);
  return h;
}

struct MaximizerOptions {
  std::size_t per_dim = 101;
  std::size_t cap = 10000;
  int brent_iterations = 200;
  int parabolic_rounds = 3;
};

namespace detail {

/// True when a is preferred over b: larger value, then smaller norm, then
/// lexicographically smaller.
inline bool better(double va, const Vector& a, double vb, const Vector& b) {
  if (va != vb) return va > vb;
  const double na = a.squaredNorm(), nb = b.squaredNorm();
  if (na != nb) return na < nb;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return a[i] < b[i];
  return false;
}

}  // namespace detail

/// Maximizes a scalar objective over U: dense sampling, then for a box a
/// Brent search per coordinate on the cell around the best sample,
/// followed by parabolic polishing. A refined point replaces the
/// incumbent only when strictly better.
template <class Objective>
Vector maximize_over(const ControlSet& set, Objective&& objective, const std::vector<Vector>& samples,
                     const MaximizerOptions& opt = {}) {
  if (samples.empty()) throw ProblemError("control sampler produced no points");
  std::size_t best = 0;
  double best_val = objective(samples[0]);
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double v = objective(samples[i]);
    if (detail::better(v, samples[i], best_val, samples[best])) {
      best = i;
      best_val = v;
    }
  }
  Vector u = samples[best];
  const auto* box = std::get_if<Box>(&set);
  if (!box) return u;

  const Eigen::Index k = u.size();
  // grid spacing of the sampler per coordinate
  std::size_t n = opt.per_dim;
  while (n > 1 && std::pow(double(n), double(k)) > double(opt.cap)) --n;
  for (Eigen::Index d = 0; d < k; ++d) {
    const double lo_box = box->lower[d], hi_box = box->upper[d];
    if (lo_box == hi_box) continue;
    const double cell = n > 1 ? (hi_box - lo_box) / double(n - 1) : hi_box - lo_box;
    double a = std::max(lo_box, u[d] - cell), b = std::min(hi_box, u[d] + cell);
    auto f = [&](double s) {
      Vector v = u;
      v[d] = s;
      return objective(v);
    };
    // Brent (golden section with parabolic steps) on −f; resolves s to about sqrt(eps)
    std::uintmax_t iters = static_cast<std::uintmax_t>(opt.brent_iterations);
    const auto found = boost::math::tools::brent_find_minima([&](double z) { return -f(z); }, a, b,
                                                             std::numeric_limits<double>::digits / 2 + 2, iters);
    double s = found.first;
    double fs = -found.second;
    // parabolic polish through (s - w, s, s + w)
    const double w = 1e-5 * (1.0 + std::abs(s));
    for (int round = 0; round < opt.parabolic_rounds; ++round) {
      const double s0 = std::max(lo_box, s - w), s2 = std::min(hi_box, s + w);
      if (!(s0 < s && s < s2)) break;
      const double f0 = f(s0), f2 = f(s2);
      const double num = (s - s0) * (s - s0) * (fs - f2) - (s - s2) * (s - s2) * (fs - f0);
      const double den = (s - s0) * (fs - f2) - (s - s2) * (fs - f0);
      if (den == 0.0 || !std::isfinite(num / den)) break;
      const double cand = std::clamp(s - 0.5 * num / den, lo_box, hi_box);
      const double fcand = f(cand);
      // ties count: near the optimum the gain is below one ulp of the value
      if (!(fcand >= fs) || cand == s) break;
      s = cand;
      fs = fcand;
    }
    Vector v = u;
    v[d] = s;
    if (detail::better(fs, v, best_val, u)) {
      u = v;
      best_val = fs;
    }
  }
  return u;
}

/// argmax over U of H(x, ·, ψ, λ, t).
inline Vector hamiltonian_argmax(const ControlProblem& problem, const Vector& x, const Vector& psi, double lambda,
                                 double t, const std::vector<Vector>& samples, const MaximizerOptions& opt = {}) {
  return maximize_over(
      problem.control_set, [&](const Vector& u) { return hamiltonian(problem, x, u, psi, lambda, t); }, samples, opt);
}

}  // namespace horizon_limit
