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

#include "fairpost/kernels.hpp"

#include <omp.h>

#include <array>
#include <cmath>

#include "fairpost/decision.hpp"
#include "fairpost/objective.hpp"

namespace fairpost::kernels {
namespace {

inline double Term(const ScoredExample& e, std::span<const double> mu, const ThresholdModel& m,
                   double b) {
  const double mu_k = mu[e.group];
  return b * mu_k + XiUnchecked(Tau(e, m) * mu_k, e.score, m.gamma);
}

std::size_t BlockCount(std::size_t n) { return (n + kBlockSize - 1) / kBlockSize; }

}  // namespace

double PairwiseSum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return PairwiseSum(values.first(half)) + PairwiseSum(values.subspan(half));
}

double ObjectiveSum(std::span<const ScoredExample> examples, std::span<const double> mu,
                    const ThresholdModel& context) {
  const double b = context.linear_coefficient();
  const std::size_t n = examples.size();
  const auto blocks = static_cast<std::ptrdiff_t>(BlockCount(n));
  std::vector<double> block_sums(static_cast<std::size_t>(blocks));

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t blk = 0; blk < blocks; ++blk) {
    std::array<double, kBlockSize> terms;
    const std::size_t begin = static_cast<std::size_t>(blk) * kBlockSize;
    const std::size_t len = std::min(kBlockSize, n - begin);
    for (std::size_t j = 0; j < len; ++j) terms[j] = Term(examples[begin + j], mu, context, b);
    block_sums[static_cast<std::size_t>(blk)] = PairwiseSum(std::span(terms.data(), len));
  }
  return PairwiseSum(block_sums);
}

void DecideBatch(std::span<const ScoredExample> examples, const ThresholdModel& model,
                 std::span<double> q_out) {
  const auto n = static_cast<std::ptrdiff_t>(examples.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& e = examples[static_cast<std::size_t>(i)];
    q_out[static_cast<std::size_t>(i)] =
        RampProbability(e.score, DecisionThreshold(e, model), model.gamma);
  }
}

std::vector<double> GroupWeightedSums(const Cohort& cohort, std::span<const double> weights,
                                      std::span<const double> q) {
  const auto groups = static_cast<std::ptrdiff_t>(cohort.group_count());
  std::vector<double> sums(cohort.group_count());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < groups; ++k) {
    const auto members = cohort.members(static_cast<GroupId>(k));
    std::vector<double> terms(members.size());
    for (std::size_t j = 0; j < members.size(); ++j) {
      terms[j] = weights[members[j]] * q[members[j]];
    }
    sums[static_cast<std::size_t>(k)] = PairwiseSum(terms);
  }
  return sums;
}

namespace serial {

double CompensatedSum(std::span<const double> values) {
  double sum = 0.0;
  double c = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

double ObjectiveSum(std::span<const ScoredExample> examples, std::span<const double> mu,
                    const ThresholdModel& context) {
  const double b = context.linear_coefficient();
  std::vector<double> terms;
  terms.reserve(examples.size());
  for (const auto& e : examples) terms.push_back(Term(e, mu, context, b));
  return CompensatedSum(terms);
}

void DecideBatch(std::span<const ScoredExample> examples, const ThresholdModel& model,
                 std::span<double> q_out) {
  for (std::size_t i = 0; i < examples.size(); ++i) {
    q_out[i] = RampProbability(examples[i].score, DecisionThreshold(examples[i], model),
                               model.gamma);
  }
}

std::vector<double> GroupWeightedSums(const Cohort& cohort, std::span<const double> weights,
                                      std::span<const double> q) {
  std::vector<std::vector<double>> terms(cohort.group_count());
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    terms[cohort[i].group].push_back(weights[i] * q[i]);
  }
  std::vector<double> sums;
  for (const auto& t : terms) sums.push_back(CompensatedSum(t));
  return sums;
}

}  // namespace serial

void SetThreadCount(int threads) { omp_set_num_threads(threads); }

int MaxThreadCount() { return omp_get_max_threads(); }

}  // namespace fairpost::kernels
