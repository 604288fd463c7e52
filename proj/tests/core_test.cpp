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


#include "fairpost/core.hpp"

#include <random>

#include "gtest/gtest.h"
#include "reference.hpp"

namespace fairpost {
namespace {

Cohort SingleGroup(std::initializer_list<int> flags) {
  std::vector<ScoredExample> examples;
  for (int s : flags) examples.push_back({0.0, 0, s == 1, std::nullopt});
  return Cohort(std::move(examples), 1);
}

TEST(ComputeRhoTest, MatchesCounts) {
  EXPECT_DOUBLE_EQ(ComputeRho(SingleGroup({1, 0, 1, 0}))[0], 0.5);
  EXPECT_DOUBLE_EQ(ComputeRho(SingleGroup({1, 1, 1}))[0], 1.0);
  EXPECT_DOUBLE_EQ(ComputeRho(SingleGroup({1, 0, 0, 0, 0}))[0], 0.2);
}

TEST(ComputeRhoTest, EmptyGroupIsDataError) {
  Cohort cohort({{0.1, 0, true, std::nullopt}}, 2);
  EXPECT_THROW(ComputeRho(cohort), DataError);
}

TEST(DegenerateGroupsTest, FlagsAllOrNothing) {
  const std::vector<double> rho{0.0, 0.3, 1.0};
  const auto d = DegenerateGroups(rho);
  EXPECT_TRUE(d[0]);
  EXPECT_FALSE(d[1]);
  EXPECT_TRUE(d[2]);
}

TEST(TauTest, Substitution) {
  ThresholdModel model;
  model.mu = {0.0};
  model.rho = {0.3};
  model.degenerate = {false};
  ScoredExample e{0.0, 0, true, std::nullopt};
  EXPECT_DOUBLE_EQ(Tau(e, model), 0.7);
  e.sensitive = false;
  EXPECT_DOUBLE_EQ(Tau(e, model), -0.3);
  model.criterion = PredictiveEquality{0.4};
  EXPECT_DOUBLE_EQ(Tau(e, model), 1.0);
  e.sensitive = true;
  EXPECT_DOUBLE_EQ(Tau(e, model), 1.0);
}

TEST(TauTest, SumsToZeroPerGroupAndBounded) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Cohort cohort = ref::RandomCohort(rng, 3 + trial % 17, 1 + trial % 5);
    const ThresholdModel model = MakeModel(cohort, ConditionalParity{}, 0.01);
    std::vector<double> sums(cohort.group_count(), 0.0);
    for (const auto& e : cohort.examples()) {
      const double t = Tau(e, model);
      EXPECT_LE(std::abs(t), 1.0);
      sums[e.group] += t;
    }
    for (std::size_t k = 0; k < sums.size(); ++k) {
      EXPECT_NEAR(sums[k], 0.0, 1e-12 * static_cast<double>(cohort.group_size(k)));
    }
  }
}

TEST(NormalizeScoreTest, ClampCountsAndStrictRejects) {
  std::size_t clamped = 0;
  EXPECT_DOUBLE_EQ(NormalizeScore(1.5, ScorePolicy::kClamp, &clamped), 1.0);
  EXPECT_DOUBLE_EQ(NormalizeScore(-3.0, ScorePolicy::kClamp, &clamped), -1.0);
  EXPECT_DOUBLE_EQ(NormalizeScore(0.25, ScorePolicy::kClamp, &clamped), 0.25);
  EXPECT_EQ(clamped, 2u);
  EXPECT_THROW(NormalizeScore(1.5, ScorePolicy::kStrict, nullptr), DataError);
  EXPECT_THROW(NormalizeScore(std::nan(""), ScorePolicy::kClamp, nullptr), DataError);
}

TEST(CohortTest, ValidatesGroupsAndScores) {
  EXPECT_THROW(Cohort({}, 1), DataError);
  EXPECT_THROW(Cohort({{0.0, 2, false, std::nullopt}}, 2), DataError);
  EXPECT_THROW(Cohort({{1.2, 0, false, std::nullopt}}, 1), DataError);
  EXPECT_THROW(Cohort({{0.0, 0, false, std::nullopt}}, 0), UsageError);
  Cohort c({{0.1, 1, true, true}, {0.2, 0, false, false}, {0.3, 1, false, true}}, 2);
  EXPECT_EQ(c.group_size(0), 1u);
  EXPECT_EQ(c.group_size(1), 2u);
  EXPECT_EQ(c.members(1)[1], 2u);
  EXPECT_TRUE(c.has_labels());
}

TEST(CriterionTest, ParseResolveAndValidate) {
  EXPECT_TRUE(IsParity(ParseCriterion("parity")));
  EXPECT_FALSE(IsParity(ParseCriterion("equality")));
  EXPECT_THROW(ParseCriterion("odds"), UsageError);
  Cohort c({{0.5, 0, true, std::nullopt}, {-0.5, 0, false, std::nullopt},
            {0.7, 0, false, std::nullopt}, {-0.1, 0, true, std::nullopt}},
           1);
  const Criterion resolved = ResolveCriterion(PredictiveEquality{}, c);
  EXPECT_DOUBLE_EQ(*std::get<PredictiveEquality>(resolved).target_rate, 0.5);
  EXPECT_THROW(ResolveCriterion(PredictiveEquality{1.5}, c), UsageError);
}

TEST(MakeModelTest, ParityAndEquality) {
  Cohort c({{0.5, 0, true, std::nullopt}, {-0.5, 0, false, std::nullopt},
            {0.7, 1, true, std::nullopt}, {-0.1, 1, true, std::nullopt}},
           2);
  const ThresholdModel parity = MakeModel(c, ConditionalParity{}, 0.01);
  EXPECT_EQ(parity.mu, std::vector<double>({0.0, 0.0}));
  EXPECT_DOUBLE_EQ(parity.rho[0], 0.5);
  EXPECT_FALSE(parity.degenerate[0]);
  EXPECT_TRUE(parity.degenerate[1]);
  EXPECT_DOUBLE_EQ(parity.linear_coefficient(), 0.0);

  const ThresholdModel eq = MakeModel(c, PredictiveEquality{0.3}, 0.01);
  EXPECT_DOUBLE_EQ(eq.linear_coefficient(), 0.3);
  EXPECT_THROW(MakeModel(c, ConditionalParity{}, 0.0), UsageError);

  ThresholdModel unresolved = parity;
  unresolved.criterion = PredictiveEquality{};
  EXPECT_THROW(unresolved.linear_coefficient(), UsageError);
}

}  // namespace
}  // namespace fairpost
