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

#ifndef FAIRPOST_DECISION_HPP_
#define FAIRPOST_DECISION_HPP_

#include <vector>

#include "fairpost/core.hpp"
#include "fairpost/random.hpp"

namespace fairpost {

// Probability of predicting the positive class.
struct DecisionProbability {
  double q = 0.0;
};

// Ramp of width gamma starting at `threshold`: 0 at or below it, 1 at or
// above threshold + gamma, linear in between.
inline double RampProbability(double score, double threshold, double gamma) {
  if (score <= threshold) return 0.0;
  if (score >= threshold + gamma) return 1.0;
  return (score - threshold) / gamma;
}

// mu_k * (1_S(x) - rho_k) under parity, mu_k under predictive equality.
inline double DecisionThreshold(const ScoredExample& example, const ThresholdModel& model) {
  return model.mu[example.group] * Tau(example, model);
}

// Throws DataError if the example's group is outside the model.
DecisionProbability Decide(const ScoredExample& example, const ThresholdModel& model);

// Decide over a whole cohort (OpenMP-parallel kernel).
std::vector<double> DecideAll(const Cohort& cohort, const ThresholdModel& model);

// Draws a hard label; consumes exactly one value from `rng`.
bool Sample(DecisionProbability probability, CounterRng& rng);

// One hard label per probability, drawn from a stream keyed by (seed, index)
// so the i-th label does not depend on the others.
std::vector<bool> SampleAll(std::span<const double> q, std::uint64_t seed);

}  // namespace fairpost

#endif  // FAIRPOST_DECISION_HPP_
