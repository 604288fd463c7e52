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


#include "fairpost/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "fairpost/format.hpp"
#include "fairpost/objective.hpp"
#include "fairpost/random.hpp"

namespace fairpost {

LearningRate LearningRate::Parse(const std::string& text) {
  if (text == "auto") return {Kind::kAuto, 0.0};
  if (text == "preset") return {Kind::kPreset, 0.0};
  double value = 0.0;
  if (!ParseDouble(text, &value) || !(value > 0.0) || !std::isfinite(value)) {
    throw UsageError("learning rate must be 'auto', 'preset' or a positive number, got '" +
                     text + "'");
  }
  return {Kind::kFixed, value};
}

std::string LearningRate::ToString() const {
  switch (kind) {
    case Kind::kAuto:
      return "auto";
    case Kind::kPreset:
      return "preset";
    case Kind::kFixed:
      break;
  }
  return FormatDouble(value);
}

double ResolveLearningRate(const LearningRate& rate, double gamma, double b, std::size_t groups,
                           std::uint64_t steps) {
  const double scale = std::sqrt(static_cast<double>(groups) / static_cast<double>(steps));
  switch (rate.kind) {
    case LearningRate::Kind::kAuto:
      return ((1.0 + gamma) / (1.0 + b)) * scale;
    case LearningRate::Kind::kPreset:
      return 0.1 * scale;
    case LearningRate::Kind::kFixed:
      break;
  }
  return rate.value;
}

double SuboptimalityBound(double gamma, double b, std::size_t groups, std::uint64_t steps) {
  return 2.0 * (1.0 + gamma) / (1.0 + b) *
         std::sqrt(static_cast<double>(groups) / static_cast<double>(steps));
}

FitResult Fit(const Cohort& cohort, const Criterion& criterion, double gamma,
              const SgdConfig& config) {
  if (config.steps == 0) throw UsageError("SGD needs at least one step");
  if (!IsParity(criterion) && !std::get<PredictiveEquality>(criterion).target_rate) {
    throw UsageError("predictive-equality target rate is unresolved");
  }
  ThresholdModel model = MakeModel(cohort, criterion, gamma);
  const std::size_t groups = model.group_count();
  const double b = model.linear_coefficient();

  TrainTrace trace;
  trace.steps = config.steps;
  trace.learning_rate = ResolveLearningRate(config.learning_rate, gamma, b, groups, config.steps);
  trace.projection_bound = config.projection_bound.value_or(1.0 + gamma);
  if (!(trace.projection_bound > 0.0)) throw UsageError("projection bound must be > 0");
  trace.updates_per_group.assign(groups, 0);
  trace.averaged_mu.assign(groups, 0.0);
  const std::uint64_t trace_every =
      config.trace_every > 0 ? config.trace_every : std::max<std::uint64_t>(1, config.steps / 100);

  const double alpha = trace.learning_rate;
  const double bound = trace.projection_bound;
  const std::uint64_t n = cohort.size();
  CounterRng rng(config.seed);
  std::vector<std::uint64_t> order;
  if (config.sampling == SamplingMode::kShuffledEpochs) {
    order.resize(n);
  }

  std::vector<double> mu(groups, 0.0);
  trace.points.push_back({0, MeanObjective(mu, cohort, model), mu});

  for (std::uint64_t t = 1; t <= config.steps; ++t) {
    std::uint64_t index;
    if (config.sampling == SamplingMode::kWithReplacement) {
      index = rng.UniformIndex(n);
    } else {
      const std::uint64_t pos = (t - 1) % n;
      if (pos == 0) {
        std::iota(order.begin(), order.end(), std::uint64_t{0});
        for (std::uint64_t i = n - 1; i > 0; --i) {
          std::swap(order[i], order[rng.UniformIndex(i + 1)]);
        }
      }
      index = order[pos];
    }

    const ScoredExample& example = cohort[index];
    const GroupId k = example.group;
    if (!model.degenerate[k]) {
      const double grad = StochasticGradient(example, mu, model).value;
      mu[k] = std::clamp(mu[k] - alpha * grad, -bound, bound);
      ++trace.updates_per_group[k];
    }

    const double inv_t = 1.0 / static_cast<double>(t);
    for (std::size_t j = 0; j < groups; ++j) {
      trace.averaged_mu[j] += (mu[j] - trace.averaged_mu[j]) * inv_t;
    }
    if (t % trace_every == 0 || t == config.steps) {
      trace.points.push_back({t, MeanObjective(mu, cohort, model), mu});
    }
  }

  model.mu = trace.averaged_mu;
  return {std::move(model), std::move(trace)};
}

void WriteTraceCsv(std::ostream& out, const TrainTrace& trace) {
  out << "step,objective";
  const std::size_t groups = trace.averaged_mu.size();
  for (std::size_t k = 0; k < groups; ++k) out << ",mu_" << k;
  out << '\n';
  for (const auto& p : trace.points) {
    out << p.step << ',' << FormatDouble(p.objective);
    for (double m : p.mu) out << ',' << FormatDouble(m);
    out << '\n';
  }
}

}  // namespace fairpost
