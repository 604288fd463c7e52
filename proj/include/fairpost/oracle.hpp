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


#ifndef FAIRPOST_ORACLE_HPP_
#define FAIRPOST_ORACLE_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "fairpost/core.hpp"

namespace fairpost {

// One group's regularized problem
//
//   minimize   sum_i w_i [ (gamma/2) q_i^2 - h_i q_i ]
//   subject to sum_i w_i tau_i q_i = c,   0 <= q_i <= 1.
//
// For a multiplier mu the inner minimizer is q_i(mu) = clip((h_i - mu tau_i)
// / gamma, 0, 1), and g(mu) = sum_i w_i tau_i q_i(mu) - c is continuous and
// non-increasing, so the optimal mu is a root of g found by bisection.
struct GroupProblem {
  std::span<const double> score;   // h_i
  std::span<const double> weight;  // w_i >= 0
  std::span<const double> tau;
  double target = 0.0;             // c
  double gamma = 0.01;
};

struct GroupSolution {
  double mu = 0.0;
  double constraint_residual = 0.0;  // g(mu)
  bool degenerate = false;           // every w_i tau_i is zero
  bool outside_projection = false;   // |mu| > 1 + gamma
  int iterations = 0;
};

inline constexpr double kDualTolerance = 1e-10;
inline constexpr double kDualWidthTolerance = 1e-12;

// Throws NumericalError when the target is unreachable or g fails the
// monotonicity check.
GroupSolution SolveGroupDual(const GroupProblem& problem);

struct QpSolution {
  std::vector<double> mu;
  std::vector<double> q;
  std::vector<bool> degenerate;
  std::vector<bool> outside_projection;
  double primal_objective = 0.0;  // sum_i (gamma/2) q_i^2 - f_i q_i
  double dual_objective = 0.0;    // F(mu*), equal to -primal_objective at optimum
};

// Exact (to tolerance) primal-dual pair of the per-group constrained QP.
// `criterion` must be resolved. Groups are solved in parallel.
QpSolution SolveQp(const Cohort& cohort, const Criterion& criterion, double gamma);

// ThresholdModel carrying the oracle's mu*.
ThresholdModel OracleModel(const Cohort& cohort, const Criterion& criterion, double gamma);

// ---------------------------------------------------------------------------
// Finite instances.

struct DiscretePoint {
  double mass = 0.0;
  double eta = 0.0;         // p(y = 1 | x)
  double propensity = 0.0;  // p(1_S = 1 | x); 0 or 1 when deterministic
  GroupId group = 0;
};

struct DiscreteInstance {
  std::vector<DiscretePoint> points;

  std::size_t group_count() const;
  void Validate() const;
};

// Text format: one point per line, "mass, eta, propensity, group" separated
// by commas and/or whitespace. '#' starts a comment. An optional fifth
// column (a 0/1 prediction) is returned through `predictions` if non-null.
DiscreteInstance ReadDiscreteInstance(std::istream& in,
                                      std::vector<std::uint8_t>* predictions = nullptr);
void WriteDiscreteInstance(std::ostream& out, const DiscreteInstance& instance);

// Affine group constraints E[w(x) f(x) | x in X_k] = b_k.
struct AffineConstraint {
  std::vector<double> weight;  // per point
  std::vector<double> offset;  // per group
};

// w(x) = propensity(x) - E[propensity | X_k], b_k = 0.
AffineConstraint StatisticalParityConstraint(const DiscreteInstance& instance);
// w(x) = 1, b_k = rate.
AffineConstraint PredictiveEqualityConstraint(const DiscreteInstance& instance, double rate);
// w = 0, b = 0.
AffineConstraint VacuousConstraint(const DiscreteInstance& instance);

struct BayesOptimalRule {
  std::vector<double> threshold;      // t_k, on the eta scale
  std::vector<double> randomization;  // tau_k
  std::vector<bool> pure_threshold;   // false if group k is not a single eta-threshold
  std::vector<double> probability;    // p(f* = 1 | x), per point
  double error_rate = 0.0;            // expected 0-1 loss of the rule

  // Per smoothing width in the continuation schedule.
  std::vector<double> gamma_path;
  std::vector<std::vector<double>> threshold_path;
  std::vector<std::vector<double>> randomization_path;
};

// Continuation schedule used by BayesOptimalDiscrete.
std::vector<double> ContinuationGammas();

// Bayes-optimal randomized rule under the constraint: solves the population
// QP with masses as weights at gamma = 1e-2 ... 1e-6 and reads the threshold
// and randomization mass off the smallest width. Throws NumericalError when
// no constant rule c in (0, 1) satisfies the constraint.
BayesOptimalRule BayesOptimalDiscrete(const DiscreteInstance& instance,
                                      const AffineConstraint& constraint);

// Expected 0-1 loss on the instance of a rule given per point.
double InstanceErrorRate(const DiscreteInstance& instance, std::span<const double> probability);

// ---------------------------------------------------------------------------
// Synthetic data.

// Per example: group k ~ Categorical(group_weights); s ~ Bernoulli(
// sensitive_rates[k]); z ~ Normal(group_shifts[k] + correlation (2s - 1),
// spread); eta = logistic(z); score = 2 eta - 1; label ~ Bernoulli(eta).
struct SynthSpec {
  std::vector<double> group_weights;
  std::vector<double> sensitive_rates;
  std::vector<double> group_shifts;
  double correlation = 0.0;
  double spread = 1.0;

  void Validate() const;
  // key = value lines; list values are whitespace separated.
  static SynthSpec Read(std::istream& in);
};

Cohort Synthesize(const SynthSpec& spec, std::size_t n, std::uint64_t seed);

// i.i.d. draws from a finite instance: score = 2 eta - 1, s ~ Bernoulli(
// propensity), label ~ Bernoulli(eta).
Cohort SampleInstance(const DiscreteInstance& instance, std::size_t n, std::uint64_t seed);

}  // namespace fairpost

#endif  // FAIRPOST_ORACLE_HPP_
