#pragma once

// Adaptive Dormand-Prince 5(4) integrator with exact stops at requested
// output times and an optional cubic-Hermite dense record of accepted steps.

#include "horizon_limit/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace horizon_limit {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0;  ///< 0 selects the step automatically
  std::size_t max_steps = 5'000'000;
};

/// Piecewise cubic Hermite interpolant through (t, y, dy/dt) nodes.
/// Nodes are stored in ascending time. Repeated times are allowed and
/// mark a switch between concatenated pieces; evaluation at such a time
/// uses the later piece.
class DenseTrajectory {
 public:
  DenseTrajectory() = default;
  explicit DenseTrajectory(int dim) : dim_(dim) {}

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return t_.size(); }
  bool empty() const noexcept { return t_.empty(); }
  double t_begin() const { return t_.front(); }
  double t_end() const { return t_.back(); }
  const std::vector<double>& times() const noexcept { return t_; }

  void push_back(double t, const Vector& y, const Vector& dy) {
    if (dim_ == 0) dim_ = static_cast<int>(y.size());
    if (!t_.empty() && t < t_.back()) throw std::invalid_argument("DenseTrajectory: nodes must be ascending");
    t_.push_back(t);
    y_.insert(y_.end(), y.data(), y.data() + dim_);
    dy_.insert(dy_.end(), dy.data(), dy.data() + dim_);
  }

  /// Appends another trajectory whose first node coincides with (or
  /// follows) this one's last node.
  void append(const DenseTrajectory& other) {
    for (std::size_t i = 0; i < other.size(); ++i) push_back(other.t_[i], other.node(i), other.node_derivative(i));
  }

  Vector node(std::size_t i) const { return Eigen::Map<const Vector>(y_.data() + i * dim_, dim_); }
  Vector node_derivative(std::size_t i) const { return Eigen::Map<const Vector>(dy_.data() + i * dim_, dim_); }

  Vector at(double t) const {
    Vector out(dim_);
    eval(t, out);
    return out;
  }

  void eval(double t, Vector& out) const {
    if (t_.empty()) throw std::logic_error("DenseTrajectory: empty");
    out.resize(dim_);
    const double span = std::max(1.0, std::abs(t_.back()) + std::abs(t_.front()));
    if (t < t_.front() - 1e-9 * span || t > t_.back() + 1e-9 * span)
      throw std::out_of_range("DenseTrajectory: t=" + std::to_string(t) + " outside [" + std::to_string(t_.front()) +
                              ", " + std::to_string(t_.back()) + "]");
    if (t_.size() == 1 || t <= t_.front()) {
      out = node(0);
      return;
    }
    if (t >= t_.back()) {
      out = node(t_.size() - 1);
      return;
    }
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
    const double h = t_[i + 1] - t_[i];
    const double s = (t - t_[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    const double* y0 = y_.data() + i * dim_;
    const double* y1 = y0 + dim_;
    const double* d0 = dy_.data() + i * dim_;
    const double* d1 = d0 + dim_;
    for (int k = 0; k < dim_; ++k) out[k] = h00 * y0[k] + h10 * h * d0[k] + h01 * y1[k] + h11 * h * d1[k];
  }

 private:
  int dim_ = 0;
  std::vector<double> t_;
  std::vector<double> y_;
  std::vector<double> dy_;
};

struct OdeResult {
  std::vector<double> times;   ///< output times actually reached, in integration order
  std::vector<Vector> states;  ///< state at each output time
  DenseTrajectory dense;       ///< accepted steps (ascending), when requested
  double t_final = 0.0;
  Vector y_final;
  bool stopped = false;  ///< the observer ended the integration early
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

struct NoObserver {
  bool operator()(double, const Vector&) const noexcept { return true; }
};

namespace detail {

inline double error_norm(const Vector& err, const Vector& y0, const Vector& y1, const OdeOptions& opt) {
  double acc = 0.0;
  const Eigen::Index n = err.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sc = opt.atol + opt.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double q = err[i] / sc;
    acc += q * q;
  }
  return n == 0 ? 0.0 : std::sqrt(acc / static_cast<double>(n));
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace detail

/// Integrates y' = rhs(t, y) from t0 to t1 (either direction).
///
/// `rhs` is called as rhs(t, y, dy) and must fill dy. Every output time and
/// every stop time (control breakpoints) is hit exactly by a step endpoint.
/// `observer(t, y)` runs after every accepted step; returning false ends the
/// integration and sets `stopped`.
template <class Rhs, class Observer = NoObserver>
OdeResult integrate(Rhs&& rhs, double t0, const Vector& y0, double t1, std::span<const double> outputs,
                    const OdeOptions& opt, std::span<const double> stops = {}, bool record_dense = false,
                    Observer&& observer = Observer{}) {
  // Dormand-Prince tableau.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  OdeResult res;
  const Eigen::Index n = y0.size();
  const double dir = (t1 >= t0) ? 1.0 : -1.0;
  auto ahead = [dir](double a, double b) { return dir * (b - a) > 0; };  // b strictly ahead of a

  std::vector<double> outs(outputs.begin(), outputs.end());
  std::sort(outs.begin(), outs.end(), [dir](double a, double b) { return dir * a < dir * b; });
  for (double o : outs)
    if (ahead(o, t0) || ahead(t1, o)) throw std::invalid_argument("integrate: output time outside integration span");

  std::vector<double> targets;
  for (double o : outs)
    if (ahead(t0, o)) targets.push_back(o);
  std::vector<double> breaks;
  for (double s : stops)
    if (ahead(t0, s) && ahead(s, t1)) {
      targets.push_back(s);
      breaks.push_back(s);
    }
  std::sort(breaks.begin(), breaks.end());
  targets.push_back(t1);
  std::sort(targets.begin(), targets.end(), [dir](double a, double b) { return dir * a < dir * b; });
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

  double t = t0;
  Vector y = y0;
  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
  rhs(t, y, k1);

  if (record_dense) res.dense = DenseTrajectory(static_cast<int>(n));
  auto record_node = [&](double tn, const Vector& yn, const Vector& dn) {
    if (record_dense) {
      // store in integration order; reversed at the end for backward runs
      if (dir > 0)
        res.dense.push_back(tn, yn, dn);
      else
        res.dense.push_back(-tn, yn, dn);  // temporarily ascending in -t
    }
  };
  record_node(t, y, k1);

  std::size_t next_out = 0;
  auto emit_outputs = [&](double tn, const Vector& yn) {
    while (next_out < outs.size() && outs[next_out] == tn) {
      res.times.push_back(tn);
      res.states.push_back(yn);
      ++next_out;
    }
  };
  emit_outputs(t, y);

  const double span = std::abs(t1 - t0);
  auto finish = [&]() {
    res.t_final = t;
    res.y_final = y;
    if (record_dense && dir < 0) {
      // nodes were recorded at -t; flip back to ascending t with the same values
      DenseTrajectory fixed(static_cast<int>(n));
      const auto& ts = res.dense.times();
      for (std::size_t i = ts.size(); i-- > 0;) fixed.push_back(-ts[i], res.dense.node(i), res.dense.node_derivative(i));
      res.dense = std::move(fixed);
    }
    return std::move(res);
  };
  if (span == 0.0) return finish();

  // Initial step (Hairer, Norsett & Wanner, II.4).
  double h = opt.initial_step;
  if (h <= 0.0) {
    Vector sc = (opt.atol + opt.rtol * y.array().abs()).matrix();
    const double d0 = std::sqrt((y.array() / sc.array()).square().mean());
    const double d1 = std::sqrt((k1.array() / sc.array()).square().mean());
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    ytmp = y + dir * h0 * k1;
    rhs(t + dir * h0, ytmp, k2);
    const double d2 = std::sqrt(((k2 - k1).array() / sc.array()).square().mean()) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
    h = std::min(100 * h0, h1);
    if (!std::isfinite(h) || h <= 0) h = 1e-6;
  }
  h = std::min({h, opt.max_step, span});

  bool last_rejected = false;
  std::size_t steps = 0;
  for (double target : targets) {
    while (ahead(t, target)) {
      if (++steps > opt.max_steps) throw IntegrationError("integrate: step budget exhausted", t);
      const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
      double hs = std::min(h, opt.max_step);
      bool hits = false;
      const double remaining = std::abs(target - t);
      if (hs >= remaining * (1.0 - 1e-12)) {
        hs = remaining;
        hits = true;
      } else if (hs > 0.5 * remaining && hs < remaining) {
        hs = 0.5 * remaining;  // avoid a sliver step before the target
      }
      const double hd = dir * hs;

      ytmp = y + hd * (a21 * k1);
      rhs(t + c2 * hd, ytmp, k2);
      ytmp = y + hd * (a31 * k1 + a32 * k2);
      rhs(t + c3 * hd, ytmp, k3);
      ytmp = y + hd * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs(t + c4 * hd, ytmp, k4);
      ytmp = y + hd * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs(t + c5 * hd, ytmp, k5);
      ytmp = y + hd * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      const double t_new = hits ? target : t + hd;
      rhs(t + hd, ytmp, k6);
      ynew = y + hd * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      rhs(t_new, ynew, k7);
      err = hd * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      double en = detail::error_norm(err, y, ynew, opt);
      if (!detail::all_finite(ynew) || !detail::all_finite(k7) || !std::isfinite(en)) en = 1e10;

      if (en <= 1.0) {
        t = t_new;
        y = ynew;
        k1 = k7;
        ++res.accepted;
        record_node(t, y, k1);
        double fac = en == 0.0 ? 5.0 : 0.9 * std::pow(en, -0.2);
        fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
        const double proposal = std::min(h, opt.max_step);
        h = hs * fac;
        if (hs < proposal) h = std::max(h, proposal);  // a clipped step says nothing against the old proposal
        last_rejected = false;
        if (hits) {
          emit_outputs(t, y);
          if (std::binary_search(breaks.begin(), breaks.end(), t)) {
            // restart from the one-sided limit past a control breakpoint
            rhs(std::nextafter(t, t + dir), y, k1);
            record_node(t, y, k1);
          }
        }
        if (!observer(t, static_cast<const Vector&>(y))) {
          res.stopped = true;
          return finish();
        }
      } else {
        ++res.rejected;
        last_rejected = true;
        h = hs * std::max(0.2, 0.9 * std::pow(en, -0.2));
        if (h < h_min) throw IntegrationError("integrate: step size underflow", t);
      }
    }
  }
  return finish();
}

}  // namespace horizon_limit
