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


#ifndef FAIRPOST_TESTS_REFERENCE_HPP_
#define FAIRPOST_TESTS_REFERENCE_HPP_

// Brute-force and closed-form references used only by the tests. Nothing
// here calls into the library's numerical code; each routine computes its
// answer by a different method from the one under test.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "fairpost/core.hpp"
#include "fairpost/metrics.hpp"
#include "fairpost/oracle.hpp"

namespace fairpost::ref {

// Conjugate form of the smoothed hinge: max over q in [0, 1] of
// q (theta - z) - gamma q^2 / 2.
double XiConjugate(double z, double theta, double gamma);

// |S n X_k| / |X_k| by counting.
std::vector<double> CountRho(const Cohort& cohort);

// Dual objective summed in long double from the conjugate form.
double ObjectiveDirect(std::span<const double> mu, const Cohort& cohort, const Criterion& resolved,
                       double gamma);

struct LpResult {
  bool feasible = false;
  double value = 0.0;
  std::vector<double> p;
};

// min c.p subject to a.p = d, p in [0, 1]^n, by enumerating every vertex
// (all coordinates at a bound except at most one). n <= 20.
LpResult MinimizeOnSlice(std::span<const double> c, std::span<const double> a, double d);

// Discrete fair optimum: per group, minimize the expected 0-1 error subject to
// the group's affine constraint, by vertex enumeration.
struct DiscreteOptimum {
  double error = 0.0;
  std::vector<double> probability;
};
DiscreteOptimum BruteForceFairRule(const DiscreteInstance& instance,
                                   const AffineConstraint& constraint);

// argmin of sum_i w_i [(gamma/2) q_i^2 - h_i q_i] over the box [0, 1]^n cut
// by sum_i w_i tau_i q_i = c, by Dykstra's alternating projections in the
// w-weighted norm.
std::vector<double> DykstraGroupQp(std::span<const double> h, std::span<const double> w,
                                   std::span<const double> tau, double c, double gamma,
                                   int max_sweeps = 200000);

// sup over all binary partitions of sum_P p(P) |C(f, gamma; P)|, n <= 20.
double ExhaustivePartitionSup(const ImpossibilityInput& input);

// Random cohort with K groups; every group gets both sensitive values when
// n_per_group >= 2.
Cohort RandomCohort(std::mt19937_64& rng, std::size_t n_per_group, std::size_t groups,
                    double bias = 0.0);

}  // namespace fairpost::ref

#endif  // FAIRPOST_TESTS_REFERENCE_HPP_
