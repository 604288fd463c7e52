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

#include <algorithm>
#include <cmath>

namespace fairpost {

double NormalizeScore(double raw, ScorePolicy policy, std::size_t* clamped) {
  if (!std::isfinite(raw)) {
    throw DataError("score is not finite");
  }
  if (raw >= -1.0 && raw <= 1.0) return raw;
  if (policy == ScorePolicy::kStrict) {
    throw DataError("score " + std::to_string(raw) + " outside [-1, 1]");
  }
  if (clamped != nullptr) ++*clamped;
  return std::clamp(raw, -1.0, 1.0);
}

Cohort::Cohort(std::vector<ScoredExample> examples, std::size_t group_count)
    : examples_(std::move(examples)), members_(group_count) {
  if (group_count == 0) throw UsageError("cohort needs at least one group");
  if (examples_.empty()) throw DataError("cohort is empty");
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    const ScoredExample& e = examples_[i];
    if (e.group >= group_count) {
      throw DataError("example " + std::to_string(i) + " has group " +
                      std::to_string(e.group) + " but K = " + std::to_string(group_count));
    }
    if (!std::isfinite(e.score) || e.score < -1.0 || e.score > 1.0) {
      throw DataError("example " + std::to_string(i) + " has score outside [-1, 1]");
    }
    members_[e.group].push_back(i);
  }
}

bool Cohort::has_labels() const {
  return std::all_of(examples_.begin(), examples_.end(),
                     [](const ScoredExample& e) { return e.label.has_value(); });
}

std::string CriterionName(const Criterion& c) {
  return IsParity(c) ? "parity" : "equality";
}

Criterion ParseCriterion(const std::string& name) {
  if (name == "parity") return ConditionalParity{};
  if (name == "equality") return PredictiveEquality{};
  throw UsageError("unknown criterion '" + name + "' (expected parity|equality)");
}

double EmpiricalPositiveRate(const Cohort& cohort) {
  std::size_t positives = 0;
  for (const auto& e : cohort.examples()) positives += e.score > 0.0 ? 1 : 0;
  return static_cast<double>(positives) / static_cast<double>(cohort.size());
}

Criterion ResolveCriterion(const Criterion& criterion, const Cohort& cohort) {
  if (IsParity(criterion)) return criterion;
  PredictiveEquality pe = std::get<PredictiveEquality>(criterion);
  if (!pe.target_rate) pe.target_rate = EmpiricalPositiveRate(cohort);
  if (!(*pe.target_rate >= 0.0 && *pe.target_rate <= 1.0)) {
    throw UsageError("predictive-equality target rate must lie in [0, 1]");
  }
  return pe;
}

double ThresholdModel::linear_coefficient() const {
  if (IsParity(criterion)) return 0.0;
  const auto& rate = std::get<PredictiveEquality>(criterion).target_rate;
  if (!rate) throw UsageError("predictive-equality target rate is unresolved");
  return *rate;
}

void ThresholdModel::Validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw UsageError("gamma must be > 0");
  if (mu.empty()) throw UsageError("model has no groups");
  if (rho.size() != mu.size() || degenerate.size() != mu.size()) {
    throw UsageError("model group vectors disagree in length");
  }
  for (double r : rho) {
    if (!(r >= 0.0 && r <= 1.0)) throw UsageError("rho outside [0, 1]");
  }
  linear_coefficient();
}

std::vector<double> ComputeRho(const Cohort& cohort) {
  std::vector<double> rho(cohort.group_count());
  for (GroupId k = 0; k < cohort.group_count(); ++k) {
    const auto members = cohort.members(k);
    if (members.empty()) throw DataError("group " + std::to_string(k) + " is empty");
    std::size_t sensitive = 0;
    for (std::size_t i : members) sensitive += cohort[i].sensitive ? 1 : 0;
    rho[k] = static_cast<double>(sensitive) / static_cast<double>(members.size());
  }
  return rho;
}

std::vector<bool> DegenerateGroups(std::span<const double> rho) {
  std::vector<bool> out(rho.size());
  for (std::size_t k = 0; k < rho.size(); ++k) out[k] = rho[k] == 0.0 || rho[k] == 1.0;
  return out;
}

ThresholdModel MakeModel(const Cohort& cohort, const Criterion& criterion, double gamma) {
  ThresholdModel model;
  model.gamma = gamma;
  model.criterion = ResolveCriterion(criterion, cohort);
  model.mu.assign(cohort.group_count(), 0.0);
  if (IsParity(model.criterion)) {
    model.rho = ComputeRho(cohort);
    model.degenerate = DegenerateGroups(model.rho);
  } else {
    model.rho.assign(cohort.group_count(), 0.0);
    model.degenerate.assign(cohort.group_count(), false);
    for (GroupId k = 0; k < cohort.group_count(); ++k) {
      if (cohort.members(k).empty()) throw DataError("group " + std::to_string(k) + " is empty");
    }
  }
  model.Validate();
  return model;
}

}  // namespace fairpost
