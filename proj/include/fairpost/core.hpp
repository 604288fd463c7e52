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

#ifndef FAIRPOST_CORE_HPP_
#define FAIRPOST_CORE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fairpost {

// Error categories. The CLI maps these onto exit codes 1, 2 and 3.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using GroupId = std::uint32_t;

// One observation as seen by the post-processor. The score estimates
// 2*eta(x) - 1 and lives in [-1, 1]; raw features are never stored.
struct ScoredExample {
  double score = 0.0;
  GroupId group = 0;
  bool sensitive = false;
  std::optional<bool> label;
};

enum class ScorePolicy { kClamp, kStrict };

// Brings a raw score into [-1, 1]. Clamps (and bumps *clamped) under kClamp,
// throws DataError under kStrict. Non-finite scores are always rejected.
double NormalizeScore(double raw, ScorePolicy policy, std::size_t* clamped);

// Ordered examples partitioned into `group_count` dense groups. Immutable.
// Individual groups may be empty (e.g. a test split); the cohort may not.
class Cohort {
 public:
  Cohort(std::vector<ScoredExample> examples, std::size_t group_count);

  std::span<const ScoredExample> examples() const { return examples_; }
  const ScoredExample& operator[](std::size_t i) const { return examples_[i]; }
  std::size_t size() const { return examples_.size(); }
  std::size_t group_count() const { return members_.size(); }
  std::size_t group_size(GroupId k) const { return members_.at(k).size(); }

  // Indices of the examples in group k, in cohort order.
  std::span<const std::size_t> members(GroupId k) const { return members_.at(k); }

  bool has_labels() const;

 private:
  std::vector<ScoredExample> examples_;
  std::vector<std::vector<std::size_t>> members_;
};

struct ConditionalParity {
  friend bool operator==(const ConditionalParity&, const ConditionalParity&) = default;
};

// Equal positive-decision rate across groups. An unset target rate must be
// resolved (see ResolveCriterion) before fitting.
struct PredictiveEquality {
  std::optional<double> target_rate;
  friend bool operator==(const PredictiveEquality&, const PredictiveEquality&) = default;
};

using Criterion = std::variant<ConditionalParity, PredictiveEquality>;

inline bool IsParity(const Criterion& c) {
  return std::holds_alternative<ConditionalParity>(c);
}

std::string CriterionName(const Criterion& c);
Criterion ParseCriterion(const std::string& name);

// Fraction of examples with score > 0, i.e. the positive rate of the
// unadjusted hard classifier.
double EmpiricalPositiveRate(const Cohort& cohort);

// Fills an unset predictive-equality target with EmpiricalPositiveRate and
// validates target_rate in [0, 1]. Parity passes through unchanged.
Criterion ResolveCriterion(const Criterion& criterion, const Cohort& cohort);

// Per-group dual variables plus everything needed to evaluate the
// randomized rule. rho is only meaningful under conditional parity.
struct ThresholdModel {
  std::vector<double> mu;
  std::vector<double> rho;
  std::vector<bool> degenerate;
  double gamma = 0.01;
  Criterion criterion = ConditionalParity{};

  std::size_t group_count() const { return mu.size(); }

  // Linear term of the smoothed dual: 0 under parity, the target rate under
  // predictive equality.
  double linear_coefficient() const;

  // Throws UsageError on inconsistent sizes, gamma <= 0 or a missing rate.
  void Validate() const;
};

// rho[k] = |S ∩ X_k| / |X_k|. Throws DataError naming the first empty group.
std::vector<double> ComputeRho(const Cohort& cohort);

// Groups whose rho is exactly 0 or 1 carry no parity constraint.
std::vector<bool> DegenerateGroups(std::span<const double> rho);

// Fresh model with mu = 0 for the given cohort and criterion.
ThresholdModel MakeModel(const Cohort& cohort, const Criterion& criterion, double gamma);

// Constraint weight of one example: 1_S(x) - rho_k under parity, 1 under
// predictive equality. Always within [-1, 1].
inline double Tau(const ScoredExample& example, const ThresholdModel& model) {
  if (IsParity(model.criterion)) {
    return (example.sensitive ? 1.0 : 0.0) - model.rho[example.group];
  }
  return 1.0;
}

}  // namespace fairpost

#endif  // FAIRPOST_CORE_HPP_
