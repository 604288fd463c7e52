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

#ifndef FAIRPOST_KERNELS_HPP_
#define FAIRPOST_KERNELS_HPP_

// Data-parallel inner loops. The default namespace holds the OpenMP
// versions; kernels::serial holds plain single-threaded reference loops used
// by the tests and the benchmark.
//
// The OpenMP reductions are deterministic: work is cut into fixed blocks of
// kBlockSize, each block is reduced by pairwise summation, and block results
// are combined pairwise in block order. Results are bitwise independent of
// the thread count.

#include <cstddef>
#include <span>
#include <vector>

#include "fairpost/core.hpp"

namespace fairpost::kernels {

inline constexpr std::size_t kBlockSize = 2048;

// Recursive pairwise summation; error O(eps log n).
double PairwiseSum(std::span<const double> values);

double ObjectiveSum(std::span<const ScoredExample> examples, std::span<const double> mu,
                    const ThresholdModel& context);

void DecideBatch(std::span<const ScoredExample> examples, const ThresholdModel& model,
                 std::span<double> q_out);

// Per group k: sum over members i of weight_i * q_i (weights from `weights`,
// indexed like q). Parallel over groups.
std::vector<double> GroupWeightedSums(const Cohort& cohort, std::span<const double> weights,
                                      std::span<const double> q);

namespace serial {

// Neumaier-compensated running sum; a different algorithm from PairwiseSum so
// the two can check each other.
double CompensatedSum(std::span<const double> values);

double ObjectiveSum(std::span<const ScoredExample> examples, std::span<const double> mu,
                    const ThresholdModel& context);

void DecideBatch(std::span<const ScoredExample> examples, const ThresholdModel& model,
                 std::span<double> q_out);

std::vector<double> GroupWeightedSums(const Cohort& cohort, std::span<const double> weights,
                                      std::span<const double> q);

}  // namespace serial

// Thread count used by the OpenMP kernels (wraps omp_set_num_threads).
void SetThreadCount(int threads);
int MaxThreadCount();

}  // namespace fairpost::kernels

#endif  // FAIRPOST_KERNELS_HPP_
