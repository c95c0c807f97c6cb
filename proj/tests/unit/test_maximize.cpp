#include <gtest/gtest.h>

#include <cmath>

#include "horizon_limit/maximize.hpp"
#include "support/fixtures.hpp"

using namespace horizon_limit;
using fixtures::vec;

TEST(Hamiltonian, Value) {
  const auto p = instantiate_problem("LQ1");
  // ψ u − λ e^{-t}(x² + u²)
  const double h = hamiltonian(p, vec({2.0}), vec({0.5}), vec({-1.0}), 1.0, 1.0);
  EXPECT_NEAR(h, -0.5 - std::exp(-1.0) * 4.25, 1e-15);
  EXPECT_EQ(hamiltonian(p, vec({2.0}), vec({0.5}), vec({-1.0}), 0.0, 1.0), -0.5);
}

TEST(Argmax, InteriorMaximumMatchesStationaryPoint) {
  const auto p = instantiate_problem("LQ1", {{"umax", 10.0}});
  const auto samples = sample_controls(p.control_set);
  for (double psi : {-1.2, -0.3, 0.0, 0.77}) {
    for (double t : {0.0, 1.5}) {
      // ∂H/∂u = ψ − 2 e^{-t} u = 0
      const double expect = psi * std::exp(t) / 2.0;
      const Vector u = hamiltonian_argmax(p, vec({1.0}), vec({psi}), 1.0, t, samples);
      EXPECT_NEAR(u[0], expect, 1e-10 * (1.0 + std::abs(expect))) << psi << " " << t;
    }
  }
}

TEST(Argmax, WideBoxStillResolvesSmallControls) {
  const auto p = instantiate_problem("LQ1");
  const auto samples = sample_controls(p.control_set);
  const Vector u = hamiltonian_argmax(p, vec({1.0}), vec({-1.2360679775}), 1.0, 0.0, samples);
  EXPECT_NEAR(u[0], -0.6180339887, 1e-6);
}

TEST(Argmax, BoundaryMaximum) {
  const auto p = instantiate_problem("ABN1");
  const auto samples = sample_controls(p.control_set);
  // H = ψ (x + u) − λ e^{-rt} x is linear in u on [0, 1]
  EXPECT_EQ(hamiltonian_argmax(p, vec({0.0}), vec({1.0}), 1.0, 0.0, samples)[0], 1.0);
  EXPECT_EQ(hamiltonian_argmax(p, vec({0.0}), vec({-1.0}), 1.0, 0.0, samples)[0], 0.0);
}

TEST(Argmax, TieBreakPrefersSmallestNorm) {
  const auto p = instantiate_problem("ABN1");
  const auto samples = sample_controls(p.control_set);
  // ψ = 0: H is constant in u
  EXPECT_EQ(hamiltonian_argmax(p, vec({0.0}), vec({0.0}), 0.0, 0.0, samples)[0], 0.0);
}

TEST(Argmax, FiniteSet) {
  const FiniteSet set{{vec({-1.0}), vec({0.5}), vec({2.0}), vec({-2.0})}};
  auto objective = [](const Vector& u) { return -(u[0] - 0.4) * (u[0] - 0.4); };
  EXPECT_EQ(maximize_over(set, objective, set.points)[0], 0.5);
  // tie between −2 and 2: equal norms, lexicographically smaller wins
  auto flat = [](const Vector& u) { return u[0] * u[0]; };
  EXPECT_EQ(maximize_over(set, flat, set.points)[0], -2.0);
}

TEST(Argmax, TwoDimensionalBox) {
  const Box box{vec({-1.0, -1.0}), vec({1.0, 1.0})};
  auto objective = [](const Vector& u) { return -(u[0] - 0.3) * (u[0] - 0.3) - 2.0 * (u[1] + 0.45) * (u[1] + 0.45); };
  const Vector u = maximize_over(box, objective, sample_controls(box));
  EXPECT_NEAR(u[0], 0.3, 1e-8);
  EXPECT_NEAR(u[1], -0.45, 1e-8);
}

TEST(Argmax, RefinementNeverWorsensTheSample) {
  const Box box{vec({-1.0}), vec({1.0})};
  // kink at a grid point: the sampled point is already optimal
  auto objective = [](const Vector& u) { return -std::abs(u[0] - 0.2); };
  const auto samples = sample_controls(box);
  double best = -INFINITY;
  for (const auto& s : samples) best = std::max(best, objective(s));
  const Vector u = maximize_over(box, objective, samples);
  EXPECT_GE(objective(u), best);
}

TEST(Argmax, EmptySamplerThrows) {
  const Box box{vec({-1.0}), vec({1.0})};
  EXPECT_THROW(maximize_over(box, [](const Vector&) { return 0.0; }, {}), ProblemError);
}
