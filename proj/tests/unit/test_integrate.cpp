#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "horizon_limit/integrate.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace horizon_limit;
using fixtures::vec;

namespace {

std::vector<double> grid(double T, int n) {
  std::vector<double> g;
  for (int i = 1; i <= n; ++i) g.push_back(T * i / n);
  return g;
}

}  // namespace

TEST(GradientIntegral, Lq1MatchesClosedForm) {
  const auto p = instantiate_problem("LQ1");
  const auto c = fixtures::catalog_candidate(p);
  const auto g = grid(20.0, 40);
  const auto tr = solve_fundamental(p, c.initial_point, c.control, 20.0, g);
  ASSERT_EQ(tr.I_samples.size(), g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_NEAR(tr.I_samples[k][0], oracle::lq1::I(g[k]), 1e-8) << g[k];
    EXPECT_NEAR(tr.A_samples[k](0, 0), 1.0, 1e-15);
  }
  EXPECT_FALSE(tr.diverged);
}

TEST(GradientIntegral, Abn1GrowsAndEventuallyDiverges) {
  const auto p = instantiate_problem("ABN1");
  const auto c = fixtures::catalog_candidate(p, 10.0);
  for (double T : {1.0, 4.0, 10.0, 30.0}) {
    const auto I = gradient_integral(p, c.initial_point, c.control, T);
    EXPECT_NEAR(I[0], oracle::abn1::I(T), 1e-9 * oracle::abn1::I(T)) << T;
  }
  const double g[] = {5.0};
  const auto tr = solve_fundamental(p, c.initial_point, c.control, 5.0, g);
  EXPECT_NEAR(tr.A_samples[0](0, 0), oracle::abn1::A(5.0), 1e-8 * oracle::abn1::A(5.0));

  const auto far = solve_fundamental(p, c.initial_point, c.control, 2000.0, g);
  EXPECT_TRUE(far.diverged);
  EXPECT_LT(far.t_reached, 2000.0);
  EXPECT_TRUE(std::isinf(gradient_integral(p, c.initial_point, c.control, 2000.0)[0]));
}

TEST(GradientIntegral, Const1AndLq0) {
  const auto c1 = instantiate_problem("CONST1");
  const auto cc = fixtures::catalog_candidate(c1, 10.0);
  EXPECT_NEAR(gradient_integral(c1, cc.initial_point, cc.control, 7.0)[0], oracle::const1::I(7.0), 1e-10);
  const auto l0 = instantiate_problem("LQ0");
  const auto lc = fixtures::catalog_candidate(l0, 10.0);
  EXPECT_NEAR(gradient_integral(l0, lc.initial_point, lc.control, 7.0)[0], oracle::lq0::I(7.0), 1e-9);
}

// Property: log det A equals ∫ tr J, and det A follows Liouville's formula.
TEST(Fundamental, LiouvilleOnLinearSystem) {
  const auto p = fixtures::linear2();
  const auto law = constant_control(vec({0.3}));
  const auto g = grid(6.0, 12);
  const auto tr = solve_fundamental(p, vec({1.0, 0.0}), law, 6.0, g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_NEAR(tr.logdet_samples[k], -0.2 * g[k], 1e-12);
    EXPECT_NEAR(std::log(tr.A_samples[k].determinant()), tr.logdet_samples[k], 1e-8);
  }
}

TEST(Fundamental, LiouvilleAlongNonlinearFlow) {
  const auto p = fixtures::cubic();
  const auto law = constant_control(vec({0.5}));
  const auto g = grid(4.0, 8);
  const auto tr = solve_fundamental(p, vec({1.5}), law, 4.0, g);
  for (std::size_t k = 0; k < g.size(); ++k)
    EXPECT_NEAR(std::log(tr.A_samples[k](0, 0)), tr.logdet_samples[k], 1e-8);
}

// Property: A is the derivative of the flow map with respect to ξ.
TEST(Fundamental, MatchesFiniteDifferenceOfFlow) {
  const auto p = fixtures::cubic();
  const auto law = constant_control(vec({-0.4}));
  const double T = 3.0, h = 1e-5, xi = 0.8;
  const double g[] = {T};
  const auto tr = solve_fundamental(p, vec({xi}), law, T, g);
  const auto plus = solve_state(p, vec({xi + h}), law, T, g);
  const auto minus = solve_state(p, vec({xi - h}), law, T, g);
  const double fd = (plus.states[0][0] - minus.states[0][0]) / (2 * h);
  EXPECT_NEAR(tr.A_samples[0](0, 0), fd, 1e-7);
}

// Property: ∂J̄0(ξ; T)/∂ξ = I(ξ; T) for every catalog problem.
TEST(GradientIntegral, MatchesFiniteDifferenceOfPayoff) {
  for (const auto& id : catalog_ids()) {
    const auto p = instantiate_problem(id);
    const auto c = fixtures::catalog_candidate(p, 12.0);
    for (double T : {1.0, 5.0, 10.0}) {
      const Vector& b = c.initial_point;
      const Vector I = gradient_integral(p, b, c.control, T);
      for (int i = 0; i < p.state_dim; ++i) {
        const double h = 1e-5 * (1.0 + std::abs(b[i]));
        Vector bp = b, bm = b;
        bp[i] += h;
        bm[i] -= h;
        const double fd = (payoff(p, bp, c.control, 0.0, T) - payoff(p, bm, c.control, 0.0, T)) / (2 * h);
        EXPECT_NEAR(I[i], fd, 1e-4 * std::max(1.0, std::abs(I[i]))) << id << " T=" << T;
      }
    }
  }
}

TEST(GradientIntegral, NonlinearFiniteDifference) {
  const auto p = fixtures::cubic(0.7);
  const auto law = tabulated_control({0.0, 1.0, 2.0}, {vec({1.0}), vec({-1.0}), vec({0.2})});
  const double T = 4.0, xi = 0.6, h = 1e-5;
  const double fd = (payoff(p, vec({xi + h}), law, 0.0, T) - payoff(p, vec({xi - h}), law, 0.0, T)) / (2 * h);
  EXPECT_NEAR(gradient_integral(p, vec({xi}), law, T)[0], fd, 1e-6);
}

TEST(Payoff, Lq1ClosedForm) {
  const auto p = instantiate_problem("LQ1", {{"b", 1.5}});
  const auto c = fixtures::catalog_candidate(p, 30.0);
  PayoffAccount acc(p, c);
  for (double T : {0.5, 3.0, 20.0}) EXPECT_NEAR(acc.Jbar(c.initial_point, T), oracle::lq1::Jbar(T, 1.5), 1e-9);
  EXPECT_EQ(acc.Jbar(c.initial_point, 0.0), 0.0);
  EXPECT_THROW(acc.J0(c.initial_point, 0.0, -1.0), ProblemError);
}

// Property: J0(b, s; T) = e^{-rs} J̄0(b; T).
TEST(Payoff, DiscountShift) {
  const auto p = instantiate_problem("LQ1", {{"r", 0.4}});
  const auto c = fixtures::catalog_candidate(p, 10.0);
  PayoffAccount acc(p, c);
  for (double s : {0.0, 0.5, 3.0}) {
    const double expect = std::exp(-0.4 * s) * acc.Jbar(c.initial_point, 6.0);
    EXPECT_NEAR(acc.J0(c.initial_point, s, 6.0), expect, 1e-14 * (1.0 + std::abs(expect)));
  }
}

TEST(Payoff, JthetaIsDifferenceOfPayoffs) {
  const auto p = instantiate_problem("LQ1");
  const auto c = fixtures::catalog_candidate(p, 10.0);
  PayoffAccount acc(p, c);
  const auto& b = c.initial_point;
  EXPECT_NEAR(acc.Jtheta(b, 0.7, 2.0, 8.0), acc.J0(b, 0.7, 8.0) - acc.J0(b, 0.7, 2.0), 1e-10);
}

TEST(Tail, BoundedRemainderCoversTrueTail) {
  const auto p = instantiate_problem("LQ1");
  const auto c = fixtures::catalog_candidate(p, 40.0);
  PayoffAccount acc(p, c);
  const auto tail = acc.tail(5.0, 20.0);
  EXPECT_FALSE(tail.heuristic);
  EXPECT_NEAR(tail.value, oracle::lq1::tail(5.0, 20.0), 1e-10);
  const double q = oracle::lq1::p();
  EXPECT_GE(tail.remainder, q * std::exp(-(1.0 + 2.0 * q) * 20.0));
  const auto js = acc.jstar(40.0);
  EXPECT_NEAR(js.value, oracle::lq1::Jbar(40.0), 1e-10);
  EXPECT_LE(std::abs(js.value + js.remainder - oracle::lq1::Jbar(1e3)), js.remainder + 1e-10);
}

TEST(Tail, HeuristicWithoutCostBound) {
  auto p = instantiate_problem("LQ1");
  p.cost_bound.reset();
  const auto c = fixtures::catalog_candidate(p, 40.0);
  const auto tail = tail_payoff(p, c, 5.0, 20.0);
  EXPECT_TRUE(tail.heuristic);
  // ∫_20^∞ e^{-t}(x² + u²) dt in closed form
  const double q = oracle::lq1::p();
  const double true_rest = q * std::exp(-(1.0 + 2.0 * q) * 20.0);
  EXPECT_NEAR(tail.remainder, true_rest, 0.05 * true_rest);
}

TEST(Tail, UndiscountedNeedsNegligibleLastWindow) {
  const auto p = instantiate_problem("LQ0");
  const auto c = fixtures::catalog_candidate(p, 40.0);
  const auto ok = tail_payoff(p, c, 1.0, 40.0);
  EXPECT_NEAR(ok.value, oracle::lq0::Jbar(40.0) - oracle::lq0::Jbar(1.0), 1e-10);
  EXPECT_THROW(tail_payoff(p, c, 1.0, 4.0), CertificationError);
  EXPECT_THROW(tail_payoff(p, c, 4.0, 4.0), ProblemError);
}
