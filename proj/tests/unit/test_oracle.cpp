#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "horizon_limit/costate.hpp"
#include "horizon_limit/oracle.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace horizon_limit;
using fixtures::vec;

namespace {

// Backward discrete Riccati recursion for the Euler transcription of LQ1:
// cost-to-go e^{-r t_k} Q_k x², gains K_k with u_k = −K_k x_k.
struct DiscreteRiccati {
  std::vector<double> Q, K;
  DiscreteRiccati(double r, double T, int N) : Q(N + 1, 0.0), K(N, 0.0) {
    const double dt = T / N, beta = std::exp(-r * dt);
    for (int k = N - 1; k >= 0; --k) {
      const double q = beta * Q[k + 1];
      K[k] = q / (1.0 + q * dt);
      Q[k] = dt * (1.0 + K[k] * K[k]) + q * (1.0 - dt * K[k]) * (1.0 - dt * K[k]);
    }
  }
};

const Transcription& lq1_400() {
  static const Transcription tr = transcribe(instantiate_problem("LQ1"), vec({1.0}), 8.0, 400);
  return tr;
}

}  // namespace

TEST(DiscreteRiccati, StationaryValueAtStepHundredth) {
  const DiscreteRiccati dr(1.0, 8.0, 800);
  EXPECT_NEAR(dr.Q[0], 0.6239036, 1e-7);
}

TEST(Transcription, MatchesDiscreteRiccati) {
  const auto& tr = lq1_400();
  const DiscreteRiccati dr(1.0, 8.0, 400);
  EXPECT_EQ(tr.status, "converged");
  EXPECT_NEAR(tr.value, dr.Q[0], 1e-8);
  for (int k : {0, 17, 133, 399}) EXPECT_NEAR(tr.controls[k][0], -dr.K[k] * tr.states[k][0], 1e-6) << k;
  EXPECT_EQ(tr.states.size(), 401u);
  EXPECT_EQ(tr.controls.size(), 400u);
  EXPECT_EQ(tr.multipliers.size(), 401u);
  EXPECT_EQ(tr.dt, 0.02);
  EXPECT_EQ(tr.t(400), 8.0);
}

TEST(Transcription, TerminalMultiplierVanishes) {
  const auto& tr = lq1_400();
  EXPECT_EQ(tr.multipliers.back()[0], 0.0);
  // p_0 approximates ψ_n(0)/λ_n = −I(b; 8)
  EXPECT_NEAR(tr.multipliers.front()[0], -oracle::lq1::I(8.0), 3e-2);
}

// Property: first-order optimality of the discrete problem at random k.
TEST(Transcription, StationarityCertificate) {
  const auto& tr = lq1_400();
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pick(0, tr.steps - 1);
  for (int i = 0; i < 50; ++i) {
    const int k = pick(rng);
    // ∂V/∂u_k = Δt (2 e^{-r t_k} u_k − p_{k+1})
    const double g = 2.0 * std::exp(-tr.t(k)) * tr.controls[k][0] - tr.multipliers[k + 1][0];
    EXPECT_LE(std::abs(g), 1e-5) << k;
  }
}

TEST(Transcription, FirstOrderInStepSize) {
  const auto p = instantiate_problem("LQ1");
  const double target = oracle::lq1::p();
  const double psi_target = -oracle::lq1::I(8.0);
  const auto a = transcribe(p, vec({1.0}), 8.0, 200);
  const auto b = transcribe(p, vec({1.0}), 8.0, 400);
  const double value_ratio = (a.value - target) / (b.value - target);
  const double p0_ratio = (a.multipliers[0][0] - psi_target) / (b.multipliers[0][0] - psi_target);
  EXPECT_NEAR(value_ratio, 2.0, 0.1);
  EXPECT_NEAR(p0_ratio, 2.0, 0.1);
}

TEST(Transcription, ZeroCostProblem) {
  const auto p = fixtures::zero_cost();
  const auto tr = transcribe(p, vec({1.0}), 4.0, 80);
  EXPECT_EQ(tr.value, 0.0);
  for (const auto& m : tr.multipliers) EXPECT_EQ(m[0], 0.0);
  EXPECT_NEAR(tr.states.back()[0], 5.0, 1e-12);
}

TEST(Transcription, InitialCostIsIncluded) {
  const auto p = instantiate_problem("LQ1F");
  const auto tr = transcribe(p, vec({1.0}), 8.0, 100);
  const auto ref = transcribe(instantiate_problem("LQ1"), vec({1.0}), 8.0, 100);
  EXPECT_NEAR(tr.value, ref.value + p.initial_cost(vec({1.0})), 1e-10);
}

TEST(Transcription, Abn1StaysAtOrigin) {
  const auto tr = transcribe(instantiate_problem("ABN1"), vec({0.0}), 8.0, 200);
  EXPECT_EQ(tr.value, 0.0);
  for (const auto& u : tr.controls) EXPECT_EQ(u[0], 0.0);
}

TEST(Transcription, FiniteControlSet) {
  auto p = instantiate_problem("LQ1");
  p.control_set = FiniteSet{{vec({-1.0}), vec({0.0}), vec({1.0})}};
  const auto tr = transcribe(p, vec({1.0}), 2.0, 60);
  for (const auto& u : tr.controls) EXPECT_TRUE(contains(p.control_set, u));
  const auto idle = transcribe(p, vec({1.0}), 2.0, 60, {.max_sweeps = 1});
  EXPECT_LE(tr.value, idle.value);
}

TEST(Transcription, RestartsAreDeterministic) {
  const auto p = instantiate_problem("LQ1");
  TranscriptionOptions opt;
  opt.restarts = 3;
  opt.seed = 11;
  Transcription one, many;
  {
    fixtures::ThreadEnv env("1");
    one = transcribe(p, vec({1.0}), 4.0, 60, opt);
  }
  {
    fixtures::ThreadEnv env("4");
    many = transcribe(p, vec({1.0}), 4.0, 60, opt);
  }
  EXPECT_EQ(one.value, many.value);
  for (int k = 0; k < 60; ++k) EXPECT_EQ(one.controls[k][0], many.controls[k][0]);
  const auto plain = transcribe(p, vec({1.0}), 4.0, 60);
  EXPECT_LE(one.value, plain.value + 1e-12);
}

TEST(Transcription, Validation) {
  const auto p = instantiate_problem("LQ1");
  EXPECT_THROW(transcribe(p, vec({1.0}), 0.0, 10), ProblemError);
  EXPECT_THROW(transcribe(p, vec({1.0}), 8.0, 0), ProblemError);
  EXPECT_THROW(transcribe(p, vec({2.0}), 8.0, 10), ProblemError);
  EXPECT_THROW(transcribe(p, vec({1.0, 0.0}), 8.0, 10), ProblemError);
  EXPECT_THROW(transcribe(p, vec({1.0}), 8.0, 200000), ProblemError);
  EXPECT_THROW(transcribe(p, vec({1.0}), 8.0, 10, {.max_sweeps = 0}), ProblemError);
}
