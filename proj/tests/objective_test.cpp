//
// Copyright 2026 The fairpost Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//


#include "fairpost/objective.hpp"

#include <random>

#include "gtest/gtest.h"
#include "reference.hpp"

namespace fairpost {
namespace {

TEST(XiTest, Branches) {
  EXPECT_DOUBLE_EQ(Xi(0.3, 0.3, 0.5), 0.0);
  EXPECT_NEAR(Xi(0.1, 0.3, 0.5), 0.04, 1e-15);
  EXPECT_NEAR(Xi(-0.5, 0.3, 0.5), 0.55, 1e-15);
  EXPECT_THROW(Xi(0.0, 0.0, 0.0), UsageError);
  EXPECT_THROW(XiPrime(0.0, 0.0, -1.0), UsageError);
}

TEST(XiPrimeTest, Branches) {
  EXPECT_DOUBLE_EQ(XiPrime(1.0, 0.3, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(XiPrime(-1.0, 0.3, 0.5), -1.0);
  EXPECT_NEAR(XiPrime(0.05, 0.3, 0.5), -0.5, 1e-15);
}

TEST(XiTest, AgreesWithConjugateForm) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0), g(1e-4, 1.0);
  for (int i = 0; i < 20000; ++i) {
    const double z = u(rng), theta = u(rng), gamma = g(rng);
    EXPECT_NEAR(Xi(z, theta, gamma), ref::XiConjugate(z, theta, gamma), 1e-12);
  }
}

TEST(XiTest, ConvexWithinHalfGammaOfReluAndLipschitz) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 3.0), g(1e-3, 1.0), l(0.0, 1.0);
  for (int i = 0; i < 20000; ++i) {
    const double theta = u(rng), gamma = g(rng), z1 = u(rng), z2 = u(rng), lam = l(rng);
    const double mid = Xi(lam * z1 + (1 - lam) * z2, theta, gamma);
    EXPECT_LE(mid, lam * Xi(z1, theta, gamma) + (1 - lam) * Xi(z2, theta, gamma) + 1e-12);
    const double relu = std::max(0.0, theta - z1);
    EXPECT_LE(std::abs(Xi(z1, theta, gamma) - relu), 0.5 * gamma + 1e-12);
    EXPECT_LE(std::abs(XiPrime(z1, theta, gamma)), 1.0);
  }
  // Worst case of the ReLU gap is attained at z = theta - gamma.
  EXPECT_NEAR(std::max(0.0, 0.2 - (0.2 - 0.1)) - Xi(0.1, 0.2, 0.1), 0.05, 1e-15);
}

TEST(XiPrimeTest, MatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0), g(0.05, 1.0);
  const double h = 1e-5;
  for (int i = 0; i < 5000; ++i) {
    const double z = u(rng), theta = u(rng), gamma = g(rng);
    const double fd = (Xi(z + h, theta, gamma) - Xi(z - h, theta, gamma)) / (2 * h);
    const double gap = theta - z;
    const bool near_branch = std::abs(gap) < 2 * h || std::abs(gap - gamma) < 2 * h;
    // O(h) at the kinks of the second derivative, O(h^2) elsewhere.
    EXPECT_NEAR(fd, XiPrime(z, theta, gamma), near_branch ? 10 * h / gamma : 1e-8);
  }
}

Cohort OneExample(double f, bool sensitive) {
  return Cohort({{f, 0, sensitive, std::nullopt}}, 1);
}

TEST(ObjectiveValueTest, Examples) {
  std::vector<ScoredExample> minus_one(5, {-1.0, 0, false, std::nullopt});
  minus_one[0].sensitive = true;
  const Cohort all_negative(minus_one, 1);
  const ThresholdModel m = MakeModel(all_negative, ConditionalParity{}, 0.01);
  const std::vector<double> zero{0.0};
  EXPECT_DOUBLE_EQ(ObjectiveValue(zero, all_negative, m), 0.0);

  const Cohort one = OneExample(1.0, false);
  const ThresholdModel pe = MakeModel(one, PredictiveEquality{0.0}, 0.01);
  EXPECT_NEAR(ObjectiveValue(zero, one, pe), 0.995, 1e-15);
  EXPECT_NEAR(MeanObjective(zero, one, pe), 0.995, 1e-15);
  const std::vector<double> wrong_size{0.0, 0.0};
  EXPECT_THROW(ObjectiveValue(wrong_size, one, pe), UsageError);
}

TEST(ObjectiveValueTest, AgreesWithDirectSum) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 50; ++trial) {
    const Cohort cohort = ref::RandomCohort(rng, 5 + trial, 1 + trial % 4, 0.3);
    for (const Criterion& c : {Criterion{ConditionalParity{}}, Criterion{PredictiveEquality{0.4}}}) {
      const ThresholdModel m = MakeModel(cohort, c, 0.05);
      std::vector<double> mu(cohort.group_count());
      for (double& v : mu) v = u(rng);
      EXPECT_NEAR(ObjectiveValue(mu, cohort, m), ref::ObjectiveDirect(mu, cohort, c, 0.05), 1e-11);
    }
  }
}

TEST(StochasticGradientTest, Examples) {
  const std::vector<double> zero{0.0};
  ThresholdModel m;
  m.mu = zero;
  m.rho = {0.5};
  m.degenerate = {false};
  m.gamma = 0.01;
  ScoredExample e{-1.0, 0, true, std::nullopt};
  EXPECT_DOUBLE_EQ(StochasticGradient(e, zero, m).value, 0.0);
  m.criterion = PredictiveEquality{0.0};
  e.score = 1.0;
  EXPECT_DOUBLE_EQ(StochasticGradient(e, zero, m).value, -1.0);
  m.criterion = PredictiveEquality{0.4};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    e.score = u(rng);
    const std::vector<double> mu{1.2 * u(rng)};
    EXPECT_LE(std::abs(StochasticGradient(e, mu, m).value), 1.4);
  }
}

TEST(StochasticGradientTest, MatchesFiniteDifferenceOfObjective) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double h = 1e-5;
  int checked = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const bool parity = trial % 2 == 0;
    const ScoredExample e{u(rng), 0, u(rng) > 0.0, std::nullopt};
    ThresholdModel m;
    m.mu = {0.0};
    m.rho = {0.5 + 0.4 * u(rng)};
    m.degenerate = {false};
    m.gamma = 0.05;
    if (!parity) m.criterion = PredictiveEquality{0.5 + 0.5 * u(rng)};
    const Cohort cohort({e}, 1);
    const double mu_k = 1.1 * u(rng);
    const double tau = Tau(e, m);
    const double gap = e.score - tau * mu_k;
    if (std::abs(gap) < 4 * h || std::abs(gap - m.gamma) < 4 * h) continue;
    const std::vector<double> up{mu_k + h}, down{mu_k - h}, at{mu_k};
    const double fd = (ObjectiveValue(up, cohort, m) - ObjectiveValue(down, cohort, m)) / (2 * h);
    EXPECT_NEAR(StochasticGradient(e, at, m).value, fd, 1e-6);
    ++checked;
  }
  EXPECT_GT(checked, 1500);
}

}  // namespace
}  // namespace fairpost
