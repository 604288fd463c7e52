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

#ifndef FAIRPOST_OBJECTIVE_HPP_
#define FAIRPOST_OBJECTIVE_HPP_

#include <span>

#include "fairpost/core.hpp"

namespace fairpost {

// Smoothed hinge max(0, theta - z), quadratic on (theta - gamma, theta).
//
//   xi(z) = 0                            z >= theta
//         = (theta - z)^2 / (2 gamma)    theta - gamma < z < theta
//         = theta - z - gamma / 2        z <= theta - gamma
//
// C^1 and convex for gamma > 0; within gamma/2 of the plain hinge.
// Both branch points fall on the closed (outer) branches.
inline double XiUnchecked(double z, double theta, double gamma) {
  if (z >= theta) return 0.0;
  const double gap = theta - z;
  if (gap >= gamma) return gap - 0.5 * gamma;
  return gap * gap / (2.0 * gamma);
}

// d xi / dz, in [-1, 0]. Equals -q where q is the randomized decision.
inline double XiPrimeUnchecked(double z, double theta, double gamma) {
  if (z >= theta) return 0.0;
  const double gap = theta - z;
  if (gap >= gamma) return -1.0;
  return -gap / gamma;
}

// Checked variants; throw UsageError when gamma <= 0.
double Xi(double z, double theta, double gamma);
double XiPrime(double z, double theta, double gamma);

struct SmoothedObjectiveParams {
  double gamma;
  double b;

  static SmoothedObjectiveParams FromModel(const ThresholdModel& model) {
    return {model.gamma, model.linear_coefficient()};
  }
};

// F(mu) = sum_i [ b mu_{k(i)} + xi(tau_i mu_{k(i)}; f_i) ] using the model's
// gamma, rho and criterion (the model's own mu is ignored). Deterministic
// blocked pairwise reduction; OpenMP-parallel over blocks.
double ObjectiveValue(std::span<const double> mu, const Cohort& cohort,
                      const ThresholdModel& context);

// F(mu) / N. This is the scale on which averaged-SGD suboptimality bounds
// are stated, since each sampled gradient is unbiased for F / N.
double MeanObjective(std::span<const double> mu, const Cohort& cohort,
                     const ThresholdModel& context);

struct GroupGradient {
  GroupId group;
  double value;
};

// Gradient of one example's term w.r.t. its group's mu:
// b + tau * xi'(tau mu_k; f). Bounded by 1 + |b| in magnitude.
GroupGradient StochasticGradient(const ScoredExample& example, std::span<const double> mu,
                                 const ThresholdModel& context);

}  // namespace fairpost

#endif  // FAIRPOST_OBJECTIVE_HPP_
