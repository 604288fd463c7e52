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


#include "fairpost/decision.hpp"

#include "fairpost/kernels.hpp"

namespace fairpost {

DecisionProbability Decide(const ScoredExample& example, const ThresholdModel& model) {
  if (example.group >= model.group_count()) {
    throw DataError("group " + std::to_string(example.group) + " is not known to the model");
  }
  return {RampProbability(example.score, DecisionThreshold(example, model), model.gamma)};
}

std::vector<double> DecideAll(const Cohort& cohort, const ThresholdModel& model) {
  if (cohort.group_count() > model.group_count()) {
    throw DataError("cohort has more groups than the model");
  }
  std::vector<double> q(cohort.size());
  kernels::DecideBatch(cohort.examples(), model, q);
  return q;
}

bool Sample(DecisionProbability probability, CounterRng& rng) {
  return rng.Uniform() < probability.q;
}

std::vector<bool> SampleAll(std::span<const double> q, std::uint64_t seed) {
  const CounterRng rng(seed, /*stream=*/0x5a3b1e);
  std::vector<bool> out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double u = static_cast<double>(rng.At(i) >> 11) * 0x1.0p-53;
    out[i] = u < q[i];
  }
  return out;
}

}  // namespace fairpost
