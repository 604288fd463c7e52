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

#include <cmath>

#include "fairpost/kernels.hpp"

namespace fairpost {
namespace {

void CheckGamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw UsageError("smoothing width gamma must be > 0");
  }
}

}  // namespace

double Xi(double z, double theta, double gamma) {
  CheckGamma(gamma);
  return XiUnchecked(z, theta, gamma);
}

double XiPrime(double z, double theta, double gamma) {
  CheckGamma(gamma);
  return XiPrimeUnchecked(z, theta, gamma);
}

double ObjectiveValue(std::span<const double> mu, const Cohort& cohort,
                      const ThresholdModel& context) {
  CheckGamma(context.gamma);
  if (mu.size() != cohort.group_count() || context.group_count() != cohort.group_count()) {
    throw UsageError("mu / model / cohort group counts disagree");
  }
  return kernels::ObjectiveSum(cohort.examples(), mu, context);
}

double MeanObjective(std::span<const double> mu, const Cohort& cohort,
                     const ThresholdModel& context) {
  return ObjectiveValue(mu, cohort, context) / static_cast<double>(cohort.size());
}

GroupGradient StochasticGradient(const ScoredExample& example, std::span<const double> mu,
                                 const ThresholdModel& context) {
  const double tau = Tau(example, context);
  const double mu_k = mu[example.group];
  return {example.group, context.linear_coefficient() +
                             tau * XiPrimeUnchecked(tau * mu_k, example.score, context.gamma)};
}

}  // namespace fairpost
