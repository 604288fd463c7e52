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


// OpenMP kernels against their serial references, plus the two solvers.

#include <benchmark/benchmark.h>

#include <map>

#include "fairpost/decision.hpp"
#include "fairpost/kernels.hpp"
#include "fairpost/optimizer.hpp"
#include "fairpost/oracle.hpp"

namespace fairpost {
namespace {

SynthSpec BenchSpec() {
  SynthSpec s;
  s.group_weights = {0.25, 0.25, 0.25, 0.25};
  s.sensitive_rates = {0.3, 0.5, 0.6, 0.4};
  s.group_shifts = {0.0, 0.5, -0.5, 0.2};
  s.correlation = 0.6;
  s.spread = 1.5;
  return s;
}

const Cohort& BenchCohort(std::size_t n) {
  static std::map<std::size_t, Cohort> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, Synthesize(BenchSpec(), n, 1)).first;
  return it->second;
}

ThresholdModel BenchModel(const Cohort& cohort) {
  ThresholdModel m = MakeModel(cohort, ConditionalParity{}, 0.01);
  m.mu = {0.5, 0.55, 0.6, 0.45};
  return m;
}

void BM_ObjectiveSum(benchmark::State& state) {
  const Cohort& cohort = BenchCohort(static_cast<std::size_t>(state.range(0)));
  const ThresholdModel m = BenchModel(cohort);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::ObjectiveSum(cohort.examples(), m.mu, m));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ObjectiveSumSerial(benchmark::State& state) {
  const Cohort& cohort = BenchCohort(static_cast<std::size_t>(state.range(0)));
  const ThresholdModel m = BenchModel(cohort);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::serial::ObjectiveSum(cohort.examples(), m.mu, m));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_DecideBatch(benchmark::State& state) {
  const Cohort& cohort = BenchCohort(static_cast<std::size_t>(state.range(0)));
  const ThresholdModel m = BenchModel(cohort);
  std::vector<double> q(cohort.size());
  for (auto _ : state) {
    kernels::DecideBatch(cohort.examples(), m, q);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_DecideBatchSerial(benchmark::State& state) {
  const Cohort& cohort = BenchCohort(static_cast<std::size_t>(state.range(0)));
  const ThresholdModel m = BenchModel(cohort);
  std::vector<double> q(cohort.size());
  for (auto _ : state) {
    kernels::serial::DecideBatch(cohort.examples(), m, q);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_GroupWeightedSums(benchmark::State& state) {
  const Cohort& cohort = BenchCohort(static_cast<std::size_t>(state.range(0)));
  const std::vector<double> q = DecideAll(cohort, BenchModel(cohort));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::GroupWeightedSums(cohort, q, q));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_GroupWeightedSumsSerial(benchmark::State& state) {
  const Cohort& cohort = BenchCohort(static_cast<std::size_t>(state.range(0)));
  const std::vector<double> q = DecideAll(cohort, BenchModel(cohort));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::GroupWeightedSums(cohort, q, q));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SolveQp(benchmark::State& state) {
  const Cohort& cohort = BenchCohort(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(SolveQp(cohort, ConditionalParity{}, 0.01));
}

void BM_Fit(benchmark::State& state) {
  const Cohort& cohort = BenchCohort(10000);
  SgdConfig config;
  config.steps = static_cast<std::uint64_t>(state.range(0));
  config.trace_every = config.steps;
  for (auto _ : state) benchmark::DoNotOptimize(Fit(cohort, ConditionalParity{}, 0.01, config));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_ObjectiveSum)->Arg(10000)->Arg(1000000);
BENCHMARK(BM_ObjectiveSumSerial)->Arg(10000)->Arg(1000000);
BENCHMARK(BM_DecideBatch)->Arg(10000)->Arg(1000000);
BENCHMARK(BM_DecideBatchSerial)->Arg(10000)->Arg(1000000);
BENCHMARK(BM_GroupWeightedSums)->Arg(10000)->Arg(1000000);
BENCHMARK(BM_GroupWeightedSumsSerial)->Arg(10000)->Arg(1000000);
BENCHMARK(BM_SolveQp)->Arg(10000)->Arg(1000000);
BENCHMARK(BM_Fit)->Arg(100000);

}  // namespace
}  // namespace fairpost

BENCHMARK_MAIN();
