#pragma once

#include "horizon_limit/core.hpp"
#include "horizon_limit/ode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace horizon_limit {

struct FreeSpace {};
struct Singleton {
  Vector point;
};
struct Box {
  Vector lower;
  Vector upper;
};
struct FiniteSet {
  std::vector<Vector> points;
};

using InitialSet = std::variant<FreeSpace, Singleton, Box>;
using ControlSet = std::variant<Box, FiniteSet>;

inline bool contains(const Box& box, const Vector& v, double tol = 1e-12) {
  if (v.size() != box.lower.size()) return false;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i] < box.lower[i] - tol || v[i] > box.upper[i] + tol) return false;
  return true;
}

inline bool contains(const InitialSet& set, const Vector& b, double tol = 1e-12) {
  return std::visit(
      [&](const auto& s) -> bool {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, FreeSpace>)
          return true;
        else if constexpr (std::is_same_v<S, Singleton>)
          return s.point.size() == b.size() && (s.point - b).cwiseAbs().maxCoeff() <= tol;
        else
          return contains(s, b, tol);
      },
      set);
}

inline bool contains(const ControlSet& set, const Vector& u, double tol = 1e-12) {
  if (const auto* box = std::get_if<Box>(&set)) return contains(*box, u, tol);
  const auto& pts = std::get<FiniteSet>(set).points;
  return std::any_of(pts.begin(), pts.end(), [&](const Vector& p) {
    return p.size() == u.size() && (p - u).lpNorm<Eigen::Infinity>() <= tol;
  });
}

inline std::string describe(const InitialSet& set) {
  if (std::holds_alternative<FreeSpace>(set)) return "free";
  if (std::holds_alternative<Singleton>(set)) return "singleton";
  return "box";
}

/// Deterministic control samples: a uniform tensor grid (endpoints
/// included) for a box, every point for a finite set. The per-dimension
/// count shrinks so the total stays within `cap`.
inline std::vector<Vector> sample_controls(const ControlSet& set, std::size_t per_dim = 101, std::size_t cap = 10000) {
  if (const auto* fin = std::get_if<FiniteSet>(&set)) return fin->points;
  const auto& box = std::get<Box>(set);
  const auto dim = static_cast<std::size_t>(box.lower.size());
  std::size_t n = std::max<std::size_t>(per_dim, 1);
  while (n > 1 && std::pow(static_cast<double>(n), static_cast<double>(dim)) > static_cast<double>(cap)) --n;
  std::size_t total = 1;
  for (std::size_t d = 0; d < dim; ++d) total *= n;
  std::vector<Vector> out;
  out.reserve(total);
  std::vector<std::size_t> idx(dim, 0);
  for (std::size_t k = 0; k < total; ++k) {
    Vector u(static_cast<Eigen::Index>(dim));
    for (std::size_t d = 0; d < dim; ++d) {
      const auto i = static_cast<Eigen::Index>(d);
      const double lo = box.lower[i], hi = box.upper[i];
      u[i] = (n == 1 || lo == hi) ? 0.5 * (lo + hi) : lo + (hi - lo) * static_cast<double>(idx[d]) / double(n - 1);
    }
    out.push_back(std::move(u));
    for (std::size_t d = 0; d < dim; ++d) {
      if (++idx[d] < n) break;
      idx[d] = 0;
    }
  }
  return out;
}

/// Value function V^∞ with its growth rate H^∞ on a neighbourhood box,
/// as used by the shadow-price check.
struct ValueFunctionModel {
  std::function<double(const Vector&)> value;
  double h_infinity = 0.0;
  Box domain;
};

/// Problem data: minimize l(b) + ∫ e^{-rt} f0(x,u) dt, x' = f(x,u), u ∈ U, x(0) ∈ C.
struct ControlProblem {
  std::string id;
  int state_dim = 1;
  int control_dim = 1;
  std::function<Vector(const Vector&, const Vector&)> dynamics;
  std::function<Matrix(const Vector&, const Vector&)> dynamics_jac;
  std::function<double(const Vector&, const Vector&)> running_cost;
  std::function<Vector(const Vector&, const Vector&)> running_cost_grad;
  double discount = 0.0;
  std::function<double(const Vector&)> initial_cost;
  std::function<Vector(const Vector&)> initial_cost_grad;
  InitialSet initial_set = FreeSpace{};
  ControlSet control_set;
  /// Bound on |f0| used for tail remainders. Catalog entries give the
  /// supremum along their own candidate process.
  std::optional<double> cost_bound;
  std::optional<ValueFunctionModel> value_model;
  /// Feedback law u = policy(t, x) defining the catalog candidate.
  std::function<Vector(double, const Vector&)> policy;
  std::map<std::string, double> parameters;

  double discount_factor(double t) const { return discount == 0.0 ? 1.0 : std::exp(-discount * t); }
};

/// Worst ratio of finite-difference mismatch to the allowed tolerance;
/// the evaluators agree when both ratios are ≤ 1.
struct DerivativeCheck {
  double dynamics_ratio = 0.0;
  double cost_ratio = 0.0;
  double initial_cost_ratio = 0.0;
  bool ok() const { return dynamics_ratio <= 1.0 && cost_ratio <= 1.0 && initial_cost_ratio <= 1.0; }
};

inline DerivativeCheck check_derivatives(const ControlProblem& p, int points = 100, std::uint64_t seed = 0,
                                         double radius = 2.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  DerivativeCheck out;
  const int m = p.state_dim;
  auto random_control = [&]() {
    if (const auto* fin = std::get_if<FiniteSet>(&p.control_set)) {
      std::uniform_int_distribution<std::size_t> pick(0, fin->points.size() - 1);
      return fin->points[pick(rng)];
    }
    const auto& box = std::get<Box>(p.control_set);
    Vector u(p.control_dim);
    for (int i = 0; i < p.control_dim; ++i) {
      // wide boxes stand in for unbounded controls; keep samples moderate
      const double lo = std::max(box.lower[i], -10.0), hi = std::min(box.upper[i], 10.0);
      u[i] = lo <= hi ? lo + (hi - lo) * 0.5 * (unit(rng) + 1.0) : box.lower[i];
    }
    return u;
  };
  for (int k = 0; k < points; ++k) {
    Vector x(m);
    for (int i = 0; i < m; ++i) x[i] = radius * unit(rng);
    const Vector u = random_control();
    const Matrix jac = p.dynamics_jac(x, u);
    const Vector grad = p.running_cost_grad(x, u);
    Matrix jac_fd(m, m);
    Vector grad_fd(m);
    for (int j = 0; j < m; ++j) {
      const double h = 1e-6 * (1.0 + std::abs(x[j]));
      Vector xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      jac_fd.col(j) = (p.dynamics(xp, u) - p.dynamics(xm, u)) / (2 * h);
      grad_fd[j] = (p.running_cost(xp, u) - p.running_cost(xm, u)) / (2 * h);
    }
    out.dynamics_ratio =
        std::max(out.dynamics_ratio, (jac - jac_fd).norm() / std::max(1e-5, 1e-4 * jac.norm()));
    out.cost_ratio = std::max(out.cost_ratio, (grad - grad_fd).norm() / std::max(1e-5, 1e-4 * grad.norm()));
    Vector lgrad = p.initial_cost_grad(x), lgrad_fd(m);
    for (int j = 0; j < m; ++j) {
      const double h = 1e-6 * (1.0 + std::abs(x[j]));
      Vector xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      lgrad_fd[j] = (p.initial_cost(xp) - p.initial_cost(xm)) / (2 * h);
    }
    out.initial_cost_ratio =
        std::max(out.initial_cost_ratio, (lgrad - lgrad_fd).norm() / std::max(1e-5, 1e-4 * lgrad.norm()));
  }
  return out;
}

/// Structural and derivative invariants; throws ProblemError on violation.
inline void validate_problem(const ControlProblem& p) {
  if (p.state_dim <= 0 || p.control_dim <= 0) throw ProblemError("dimensions must be positive");
  if (!p.dynamics || !p.dynamics_jac || !p.running_cost || !p.running_cost_grad || !p.initial_cost ||
      !p.initial_cost_grad)
    throw ProblemError("problem '" + p.id + "' is missing an evaluator");
  if (!(p.discount >= 0.0) || !std::isfinite(p.discount)) throw ProblemError("discount r must be nonnegative");
  auto check_box = [](const Box& b, Eigen::Index dim, const char* what) {
    if (b.lower.size() != dim || b.upper.size() != dim) throw ProblemError(std::string(what) + " box has wrong dimension");
    for (Eigen::Index i = 0; i < dim; ++i)
      if (!(b.lower[i] <= b.upper[i])) throw ProblemError(std::string(what) + " box needs lower <= upper");
  };
  if (const auto* b = std::get_if<Box>(&p.initial_set)) check_box(*b, p.state_dim, "initial set");
  if (const auto* s = std::get_if<Singleton>(&p.initial_set))
    if (s->point.size() != p.state_dim) throw ProblemError("initial point has wrong dimension");
  if (const auto* b = std::get_if<Box>(&p.control_set)) check_box(*b, p.control_dim, "control");
  if (const auto* f = std::get_if<FiniteSet>(&p.control_set)) {
    if (f->points.empty()) throw ProblemError("finite control set is empty");
    for (const auto& u : f->points)
      if (u.size() != p.control_dim) throw ProblemError("finite control point has wrong dimension");
  }
  if (p.cost_bound && !(*p.cost_bound >= 0.0)) throw ProblemError("cost bound must be nonnegative");
  const auto d = check_derivatives(p);
  if (d.dynamics_ratio > 1.0) throw ProblemError("dynamics_jac disagrees with finite differences of dynamics");
  if (d.cost_ratio > 1.0) throw ProblemError("running_cost_grad disagrees with finite differences of running_cost");
  if (d.initial_cost_ratio > 1.0) throw ProblemError("initial cost gradient disagrees with finite differences");
}

/// Wraps user-built problem data as a `custom` catalog entry.
inline ControlProblem make_custom_problem(ControlProblem p) {
  p.id = "custom";
  if (!p.initial_cost) {
    const int m = p.state_dim;
    p.initial_cost = [](const Vector&) { return 0.0; };
    p.initial_cost_grad = [m](const Vector&) { return Vector::Zero(m).eval(); };
  }
  validate_problem(p);
  return p;
}

/// Positive root of p² + r·p − 1 = 0 (stationary Riccati gain of the
/// scalar problem x' = u, f0 = x² + u²).
inline double riccati_gain(double r) { return 0.5 * (-r + std::sqrt(r * r + 4.0)); }

namespace detail {

inline Vector scalar(double v) { return Vector::Constant(1, v); }
inline Matrix scalar_matrix(double v) { return Matrix::Constant(1, 1, v); }

inline double take(std::map<std::string, double>& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  const double v = it->second;
  params.erase(it);
  if (!std::isfinite(v)) throw ProblemError("parameter '" + key + "' must be finite");
  return v;
}

inline void reject_leftovers(const std::map<std::string, double>& params, std::string_view id) {
  if (!params.empty())
    throw ProblemError("unknown parameter '" + params.begin()->first + "' for problem " + std::string(id));
}

}  // namespace detail

inline const std::vector<std::string>& catalog_ids() {
  static const std::vector<std::string> ids{"LQ1", "LQ1F", "LQ0", "ABN1", "CONST1"};
  return ids;
}

/// Builds a catalog problem. Parameters (all optional):
///   LQ1, LQ1F: b (1), r (1, > 0), umax (1e6)
///   LQ0:       b (1), umax (1e6); r is fixed at 0
///   ABN1:      r (0.5, > 0); b is fixed at 0
///   CONST1:    c (1), r (1, > 0)
/// `custom` problems are assembled in code and passed to make_custom_problem.
inline ControlProblem instantiate_problem(std::string_view id, std::map<std::string, double> params = {}) {
  using detail::scalar;
  using detail::scalar_matrix;
  ControlProblem p;
  p.id = std::string(id);
  p.parameters = params;
  p.state_dim = 1;
  p.control_dim = 1;
  p.initial_cost = [](const Vector&) { return 0.0; };
  p.initial_cost_grad = [](const Vector&) { return scalar(0.0); };

  if (id == "LQ1" || id == "LQ1F" || id == "LQ0") {
    const bool undiscounted = id == "LQ0";
    const double b = detail::take(params, "b", 1.0);
    double r = undiscounted ? 0.0 : 1.0;
    if (params.count("r")) {
      r = detail::take(params, "r", r);
      if (undiscounted && r != 0.0) throw ProblemError("LQ0 is undiscounted; r must be 0");
      if (!undiscounted && !(r > 0.0)) throw ProblemError("parameter r out of range: must be > 0");
    }
    const double umax = detail::take(params, "umax", 1e6);
    if (!(umax > 0.0)) throw ProblemError("parameter umax out of range: must be > 0");
    detail::reject_leftovers(params, id);
    const double gain = riccati_gain(r);
    p.discount = r;
    p.dynamics = [](const Vector&, const Vector& u) { return scalar(u[0]); };
    p.dynamics_jac = [](const Vector&, const Vector&) { return scalar_matrix(0.0); };
    p.running_cost = [](const Vector& x, const Vector& u) { return x[0] * x[0] + u[0] * u[0]; };
    p.running_cost_grad = [](const Vector& x, const Vector&) { return scalar(2.0 * x[0]); };
    p.control_set = Box{scalar(-umax), scalar(umax)};
    p.policy = [gain](double, const Vector& x) { return scalar(-gain * x[0]); };
    p.cost_bound = (1.0 + gain * gain) * b * b;
    if (id == "LQ1F") {
      p.initial_set = FreeSpace{};
      p.initial_cost = [gain](const Vector& x) { return -2.0 * gain * x[0]; };
      p.initial_cost_grad = [gain](const Vector&) { return scalar(-2.0 * gain); };
    } else {
      p.initial_set = Singleton{scalar(b)};
    }
    if (undiscounted) {
      p.value_model = ValueFunctionModel{[](const Vector& x) { return x[0] * x[0]; }, 0.0,
                                         Box{scalar(b - 1.0), scalar(b + 1.0)}};
    }
  } else if (id == "ABN1") {
    const double r = detail::take(params, "r", 0.5);
    if (!(r > 0.0)) throw ProblemError("parameter r out of range: must be > 0");
    if (detail::take(params, "b", 0.0) != 0.0) throw ProblemError("ABN1 starts at b = 0");
    detail::reject_leftovers(params, id);
    p.discount = r;
    p.dynamics = [](const Vector& x, const Vector& u) { return scalar(x[0] + u[0]); };
    p.dynamics_jac = [](const Vector&, const Vector&) { return scalar_matrix(1.0); };
    p.running_cost = [](const Vector& x, const Vector&) { return x[0]; };
    p.running_cost_grad = [](const Vector&, const Vector&) { return scalar(1.0); };
    p.control_set = Box{scalar(0.0), scalar(1.0)};
    p.initial_set = Singleton{scalar(0.0)};
    p.policy = [](double, const Vector&) { return scalar(0.0); };
    p.cost_bound = 0.0;
  } else if (id == "CONST1") {
    const double c = detail::take(params, "c", 1.0);
    const double r = detail::take(params, "r", 1.0);
    if (!(r > 0.0)) throw ProblemError("parameter r out of range: must be > 0");
    detail::reject_leftovers(params, id);
    p.discount = r;
    p.dynamics = [](const Vector&, const Vector& u) { return scalar(u[0]); };
    p.dynamics_jac = [](const Vector&, const Vector&) { return scalar_matrix(0.0); };
    p.running_cost = [](const Vector& x, const Vector&) { return x[0]; };
    p.running_cost_grad = [](const Vector&, const Vector&) { return scalar(1.0); };
    p.control_set = Box{scalar(0.0), scalar(1.0)};
    p.initial_set = Singleton{scalar(c)};
    p.policy = [](double, const Vector&) { return scalar(0.0); };
    p.cost_bound = std::abs(c);
  } else if (id == "custom") {
    throw ProblemError("custom problems are built in code and passed to make_custom_problem");
  } else {
    throw ProblemError("unknown problem id '" + std::string(id) + "'");
  }
  validate_problem(p);
  return p;
}

/// Strictly increasing positive horizons τ_n.
class HorizonSequence {
 public:
  static HorizonSequence geometric(double tau0, double factor, int count) {
    if (!(factor > 1.0)) throw ProblemError("geometric horizons need factor > 1");
    std::vector<double> v;
    double tau = tau0;
    for (int i = 0; i < count; ++i, tau *= factor) v.push_back(tau);
    return HorizonSequence(std::move(v));
  }
  static HorizonSequence arithmetic(double tau0, double step, int count) {
    if (!(step > 0.0)) throw ProblemError("arithmetic horizons need step > 0");
    std::vector<double> v;
    for (int i = 0; i < count; ++i) v.push_back(tau0 + step * i);
    return HorizonSequence(std::move(v));
  }
  static HorizonSequence explicit_values(std::vector<double> values) { return HorizonSequence(std::move(values)); }

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double back() const { return values_.back(); }

 private:
  explicit HorizonSequence(std::vector<double> v) : values_(std::move(v)) {
    if (values_.size() < 2) throw ProblemError("horizon sequence needs at least 2 values");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!(values_[i] > 0.0) || !std::isfinite(values_[i])) throw ProblemError("horizons must be positive");
      if (i > 0 && !(values_[i] > values_[i - 1])) throw ProblemError("horizons must be strictly increasing");
    }
  }
  std::vector<double> values_;
};

/// Open-loop control u(t). Breakpoints are times where u may jump; the
/// integrator steps onto them exactly.
class ControlLaw {
 public:
  using Fn = std::function<Vector(double)>;

  ControlLaw() = default;
  explicit ControlLaw(Fn fn, std::vector<double> breakpoints = {})
      : fn_(std::move(fn)), breakpoints_(std::move(breakpoints)) {}

  Vector operator()(double t) const { return fn_(t); }
  std::span<const double> breakpoints() const noexcept { return breakpoints_; }
  explicit operator bool() const noexcept { return static_cast<bool>(fn_); }

 private:
  Fn fn_;
  std::vector<double> breakpoints_;
};

inline ControlLaw constant_control(Vector u) {
  return ControlLaw([u = std::move(u)](double) { return u; });
}

/// Piecewise-constant, left-continuous: values[k] holds on (t_k, t_{k+1}];
/// values[0] also holds for t ≤ t_0 and the last value past the table.
inline ControlLaw tabulated_control(std::vector<double> times, std::vector<Vector> values) {
  if (times.empty() || times.size() != values.size()) throw ProblemError("tabulated control needs matching t/u rows");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw ProblemError("tabulated control times must increase");
  auto ts = std::make_shared<const std::vector<double>>(times);
  auto us = std::make_shared<const std::vector<Vector>>(std::move(values));
  return ControlLaw(
      [ts, us](double t) -> Vector {
        auto it = std::lower_bound(ts->begin(), ts->end(), t);
        if (it == ts->begin()) return us->front();
        return (*us)[static_cast<std::size_t>(it - ts->begin()) - 1];
      },
      std::move(times));
}

/// Feedback law evaluated along a stored reference trajectory and frozen
/// as a function of time. Past the reference end the last control is held.
inline ControlLaw replay_policy(std::shared_ptr<const DenseTrajectory> reference,
                                std::function<Vector(double, const Vector&)> policy) {
  return ControlLaw([ref = std::move(reference), policy = std::move(policy)](double t) {
    const double tc = std::min(t, ref->t_end());
    return policy(tc, ref->at(tc));
  });
}

/// The process under test: b*, u*(·) and its cached trajectory x(b*, u*; ·).
struct CandidateProcess {
  Vector initial_point;
  ControlLaw control;
  DenseTrajectory trajectory;

  Vector state_at(double t) const { return trajectory.at(t); }
  Vector control_at(double t) const { return control(t); }
  double t_end() const { return trajectory.t_end(); }
};

}  // namespace horizon_limit
