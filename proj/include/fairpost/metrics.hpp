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


#ifndef FAIRPOST_METRICS_HPP_
#define FAIRPOST_METRICS_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairpost/core.hpp"

namespace fairpost {

// E[q s | mask] - E[q | mask] E[s | mask] over the masked examples. q is the
// probability of a positive decision, so the value is exact for randomized
// rules. Throws DataError on an empty mask.
double ConditionalCovariance(std::span<const double> q, std::span<const std::uint8_t> flags,
                             std::span<const std::uint8_t> mask);

// r_k = |X_k|^-1 |sum_{i in X_k} (tau_i q_i - b)|, i.e. the normalized
// violation of group k's linear constraint under the model's criterion and rho.
std::vector<double> ResidualBias(const Cohort& cohort, std::span<const double> q,
                                 const ThresholdModel& model);

// Expected 0-1 loss of a randomized rule: mean of (1 - q) on positives and q
// on negatives.
double ErrorRate(std::span<const double> q, std::span<const std::uint8_t> labels);
// Throws DataError if any example is unlabeled.
double ErrorRate(const Cohort& cohort, std::span<const double> q);

struct GroupBias {
  std::string label;
  std::size_t size = 0;
  double rho = 0.0;
  bool degenerate = false;
  double positive_rate = 0.0;
  double covariance_sensitive = 0.0;   // C(q, 1_S; x in X_k)
  double covariance_membership = 0.0;  // C(q, 1_{X_k}) over the cohort
  double residual = 0.0;
};

struct BiasReport {
  std::string criterion;
  std::size_t size = 0;
  double positive_rate = 0.0;
  std::optional<double> error_rate;
  std::vector<GroupBias> groups;
};

// `criterion` must be resolved. rho is recomputed on `cohort`; `labels` may
// be empty, in which case groups are named by index.
BiasReport BuildBiasReport(const Cohort& cohort, std::span<const double> q,
                           const Criterion& criterion, std::span<const std::string> labels = {});

// Hard decisions of the unadjusted classifier: q = 1{score > 0}.
std::vector<double> UnadjustedDecisions(const Cohort& cohort);

// key=value lines, keys prefixed with `prefix` (e.g. "after.").
void WriteKeyValue(std::ostream& out, const BiasReport& report, const std::string& prefix = "");

// One row per (stage, group).
void WriteCsv(std::ostream& out,
              std::span<const std::pair<std::string, BiasReport>> staged_reports);

// A finite instance for the accuracy/fairness tradeoff bound.
struct ImpossibilityInput {
  std::vector<double> mass;
  std::vector<double> propensity;         // p(1_S = 1 | x)
  std::vector<std::uint8_t> prediction;   // f(x) in {0, 1}

  void Validate() const;
};

struct ImpossibilityResult {
  double lower_bound = 0.0;
  double witness_lhs = 0.0;
  std::vector<std::uint8_t> witness;  // 1 where x is in W
};

// sum over the two parts P of p(P) |C(f, propensity; x in P)|. Empty parts
// contribute zero.
double PartitionCovariance(const ImpossibilityInput& input,
                           std::span<const std::uint8_t> partition);

// Lower bound 1/2 E|g - g_bar| min(Ef, 1 - Ef) together with the witness
// partition W = {g > g_bar, f = 1} u {g <= g_bar, f = 0} and its value.
ImpossibilityResult ImpossibilityBound(const ImpossibilityInput& input);

}  // namespace fairpost

#endif  // FAIRPOST_METRICS_HPP_
