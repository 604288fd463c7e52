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


#ifndef FAIRPOST_OPTIMIZER_HPP_
#define FAIRPOST_OPTIMIZER_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fairpost/core.hpp"

namespace fairpost {

// Step size of projected SGD.
//   kAuto    ((1 + gamma) / (1 + b)) * sqrt(K / T), the rate that
//            minimizes the averaged-iterate suboptimality bound.
//   kPreset  0.1 * sqrt(K / T).
//   kFixed   `value`.
struct LearningRate {
  enum class Kind { kAuto, kPreset, kFixed };
  Kind kind = Kind::kAuto;
  double value = 0.0;

  // Accepts "auto", "preset" or a positive number.
  static LearningRate Parse(const std::string& text);
  std::string ToString() const;
};

enum class SamplingMode {
  kWithReplacement,  // i_t uniform on {0..N-1}, independent across steps
  kShuffledEpochs,   // a fresh permutation every N steps
};

struct SgdConfig {
  std::uint64_t steps = 10000;
  LearningRate learning_rate;
  std::uint64_t seed = 0;
  std::optional<double> projection_bound;  // default 1 + gamma
  std::uint64_t trace_every = 0;           // 0: max(1, steps / 100)
  SamplingMode sampling = SamplingMode::kWithReplacement;
};

double ResolveLearningRate(const LearningRate& rate, double gamma, double b, std::size_t groups,
                           std::uint64_t steps);

// 2 (1 + gamma) / (1 + b) * sqrt(K / T): expected suboptimality of the
// averaged iterate, on the per-example (F / N) scale, at the auto rate.
double SuboptimalityBound(double gamma, double b, std::size_t groups, std::uint64_t steps);

struct TracePoint {
  std::uint64_t step = 0;
  double objective = 0.0;  // F(mu_t) / N at the current iterate
  std::vector<double> mu;
};

struct TrainTrace {
  std::vector<TracePoint> points;
  std::vector<double> averaged_mu;
  std::vector<std::uint64_t> updates_per_group;
  double learning_rate = 0.0;
  double projection_bound = 0.0;
  std::uint64_t steps = 0;

  // Steps expressed in passes over the data.
  double epochs(std::size_t cohort_size) const {
    return static_cast<double>(steps) / static_cast<double>(cohort_size);
  }
};

struct FitResult {
  ThresholdModel model;  // mu holds the averaged iterate
  TrainTrace trace;
};

// Projected SGD from mu = 0. Single-threaded and bit-reproducible for a given
// (cohort order, criterion, gamma, config).
FitResult Fit(const Cohort& cohort, const Criterion& criterion, double gamma,
              const SgdConfig& config);

// CSV: step,objective,mu_0,...,mu_{K-1}
void WriteTraceCsv(std::ostream& out, const TrainTrace& trace);

}  // namespace fairpost

#endif  // FAIRPOST_OPTIMIZER_HPP_
