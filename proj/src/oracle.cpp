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


#include "fairpost/oracle.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "fairpost/decision.hpp"
#include "fairpost/format.hpp"
#include "fairpost/kernels.hpp"
#include "fairpost/objective.hpp"
#include "fairpost/random.hpp"

namespace fairpost {
namespace {

constexpr int kMonotonicityGrid = 17;
constexpr int kMaxBisections = 400;

double DualResidual(const GroupProblem& p, double mu) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.score.size(); ++i) {
    if (p.weight[i] == 0.0 || p.tau[i] == 0.0) continue;
    sum += p.weight[i] * p.tau[i] * RampProbability(p.score[i], mu * p.tau[i], p.gamma);
  }
  return sum - p.target;
}

}  // namespace

GroupSolution SolveGroupDual(const GroupProblem& p) {
  if (!(p.gamma > 0.0)) throw UsageError("gamma must be > 0");
  if (p.score.size() != p.weight.size() || p.score.size() != p.tau.size()) {
    throw UsageError("group problem arrays differ in length");
  }

  double scale = 0.0, reach_high = 0.0, reach_low = 0.0, max_score = 0.0;
  double min_tau = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.score.size(); ++i) {
    const double wt = p.weight[i] * p.tau[i];
    scale += std::abs(wt);
    if (wt > 0.0) reach_high += wt;
    if (wt < 0.0) reach_low += wt;
    if (wt != 0.0) min_tau = std::min(min_tau, std::abs(p.tau[i]));
    max_score = std::max(max_score, std::abs(p.score[i]));
  }

  GroupSolution sol;
  const double feasibility_slack = 1e-12 * std::max(1.0, scale);
  if (scale == 0.0) {
    if (std::abs(p.target) > feasibility_slack) {
      throw NumericalError("constraint has no weight but a nonzero target");
    }
    sol.degenerate = true;
    return sol;
  }
  if (reach_high - p.target < -feasibility_slack || reach_low - p.target > feasibility_slack) {
    throw NumericalError("constraint target " + FormatDouble(p.target) +
                         " is outside the achievable range [" + FormatDouble(reach_low) + ", " +
                         FormatDouble(reach_high) + "]");
  }

  // Roots can form an interval; prefer 0 when it is one of them.
  if (std::abs(DualResidual(p, 0.0)) <= kDualTolerance) {
    sol.constraint_residual = DualResidual(p, 0.0);
    return sol;
  }

  // The usual bracket is [-(1+gamma), 1+gamma]; small |tau| can push the root
  // further out, up to (max|h| + gamma) / min|tau|, where q saturates.
  const double box = 1.0 + p.gamma;
  const double wide = (max_score + p.gamma) / min_tau + 1.0;
  double lo = -box, hi = box;
  double g_lo = DualResidual(p, lo), g_hi = DualResidual(p, hi);
  if (g_lo < 0.0) {
    lo = -wide;
    g_lo = DualResidual(p, lo);
  }
  if (g_hi > 0.0) {
    hi = wide;
    g_hi = DualResidual(p, hi);
  }

  const double monotone_slack = 1e-12 * scale;
  double previous = g_lo;
  for (int j = 1; j <= kMonotonicityGrid; ++j) {
    const double mu = lo + (hi - lo) * j / (kMonotonicityGrid + 1);
    const double g = DualResidual(p, mu);
    if (g > previous + monotone_slack) throw NumericalError("dual residual is not monotone");
    previous = g;
  }

  double mu = 0.5 * (lo + hi);
  for (sol.iterations = 0; sol.iterations < kMaxBisections; ++sol.iterations) {
    if (std::abs(g_lo) <= kDualTolerance) {
      mu = lo;
      break;
    }
    if (std::abs(g_hi) <= kDualTolerance) {
      mu = hi;
      break;
    }
    if (hi - lo <= kDualWidthTolerance) {
      // g is piecewise linear; interpolate inside the final bracket.
      mu = g_lo == g_hi ? lo : lo + g_lo * (hi - lo) / (g_lo - g_hi);
      mu = std::clamp(mu, lo, hi);
      if (std::abs(DualResidual(p, mu)) > std::min(std::abs(g_lo), std::abs(g_hi))) {
        mu = std::abs(g_lo) < std::abs(g_hi) ? lo : hi;
      }
      break;
    }
    const double mid = 0.5 * (lo + hi);
    const double g_mid = DualResidual(p, mid);
    if (g_mid > 0.0) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
      g_hi = g_mid;
    }
  }
  sol.mu = mu;
  sol.constraint_residual = DualResidual(p, mu);
  sol.outside_projection = std::abs(mu) > box;
  return sol;
}

QpSolution SolveQp(const Cohort& cohort, const Criterion& criterion, double gamma) {
  const ThresholdModel context = MakeModel(cohort, criterion, gamma);
  const std::size_t groups = cohort.group_count();
  const double b = context.linear_coefficient();

  QpSolution out;
  out.mu.assign(groups, 0.0);
  out.degenerate.assign(groups, false);
  out.outside_projection.assign(groups, false);
  std::vector<std::exception_ptr> errors(groups);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(groups); ++kk) {
    const auto k = static_cast<GroupId>(kk);
    try {
      const auto members = cohort.members(k);
      std::vector<double> score, weight(members.size(), 1.0), tau;
      score.reserve(members.size());
      tau.reserve(members.size());
      for (std::size_t i : members) {
        score.push_back(cohort[i].score);
        tau.push_back(Tau(cohort[i], context));
      }
      const GroupProblem problem{score, weight, tau,
                                 b * static_cast<double>(members.size()), gamma};
      const GroupSolution sol = SolveGroupDual(problem);
      out.mu[k] = sol.mu;
      out.degenerate[k] = sol.degenerate || context.degenerate[k];
      out.outside_projection[k] = sol.outside_projection;
    } catch (const NumericalError& e) {
      errors[k] = std::make_exception_ptr(
          NumericalError("group " + std::to_string(k) + ": " + e.what()));
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ThresholdModel model = context;
  model.mu = out.mu;
  out.q = DecideAll(cohort, model);
  std::vector<double> terms(cohort.size());
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    terms[i] = 0.5 * gamma * out.q[i] * out.q[i] - cohort[i].score * out.q[i];
  }
  out.primal_objective = kernels::PairwiseSum(terms);
  out.dual_objective = ObjectiveValue(out.mu, cohort, model);
  return out;
}

ThresholdModel OracleModel(const Cohort& cohort, const Criterion& criterion, double gamma) {
  ThresholdModel model = MakeModel(cohort, criterion, gamma);
  model.mu = SolveQp(cohort, model.criterion, gamma).mu;
  return model;
}

// ---------------------------------------------------------------------------

std::size_t DiscreteInstance::group_count() const {
  GroupId max_group = 0;
  for (const auto& p : points) max_group = std::max(max_group, p.group);
  return points.empty() ? 0 : static_cast<std::size_t>(max_group) + 1;
}

void DiscreteInstance::Validate() const {
  if (points.empty()) throw DataError("instance has no points");
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const std::string where = " at point " + std::to_string(i);
    if (!(p.mass >= 0.0)) throw DataError("negative mass" + where);
    if (!(p.eta >= 0.0 && p.eta <= 1.0)) throw DataError("eta outside [0, 1]" + where);
    if (!(p.propensity >= 0.0 && p.propensity <= 1.0)) {
      throw DataError("propensity outside [0, 1]" + where);
    }
    total += p.mass;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DataError("masses sum to " + FormatDouble(total));
  std::vector<double> group_mass(group_count(), 0.0);
  for (const auto& p : points) group_mass[p.group] += p.mass;
  for (std::size_t k = 0; k < group_mass.size(); ++k) {
    if (group_mass[k] <= 0.0) throw DataError("group " + std::to_string(k) + " has no mass");
  }
}

DiscreteInstance ReadDiscreteInstance(std::istream& in, std::vector<std::uint8_t>* predictions) {
  DiscreteInstance instance;
  if (predictions != nullptr) predictions->clear();
  std::string line;
  std::size_t line_no = 0;
  bool with_prediction = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string t; fields >> t;) tokens.push_back(t);
    if (tokens.empty()) continue;
    const std::string where = "instance line " + std::to_string(line_no);
    if (tokens.size() != 4 && tokens.size() != 5) {
      throw DataError(where + ": expected 4 or 5 fields, got " + std::to_string(tokens.size()));
    }
    if (instance.points.empty()) {
      with_prediction = tokens.size() == 5;
    } else if (with_prediction != (tokens.size() == 5)) {
      throw DataError(where + ": inconsistent column count");
    }
    DiscretePoint p;
    double group = 0.0;
    if (!ParseDouble(tokens[0], &p.mass) || !ParseDouble(tokens[1], &p.eta) ||
        !ParseDouble(tokens[2], &p.propensity) || !ParseDouble(tokens[3], &group) ||
        group < 0.0 || group != std::floor(group) || group > 1e6) {
      throw DataError(where + ": malformed number");
    }
    p.group = static_cast<GroupId>(group);
    instance.points.push_back(p);
    if (with_prediction) {
      double f = 0.0;
      if (!ParseDouble(tokens[4], &f) || (f != 0.0 && f != 1.0)) {
        throw DataError(where + ": prediction must be 0 or 1");
      }
      if (predictions != nullptr) predictions->push_back(static_cast<std::uint8_t>(f));
    }
  }
  instance.Validate();
  return instance;
}

void WriteDiscreteInstance(std::ostream& out, const DiscreteInstance& instance) {
  out << "# mass, eta, propensity, group\n";
  for (const auto& p : instance.points) {
    out << FormatDouble(p.mass) << ", " << FormatDouble(p.eta) << ", "
        << FormatDouble(p.propensity) << ", " << p.group << '\n';
  }
}

AffineConstraint StatisticalParityConstraint(const DiscreteInstance& instance) {
  const std::size_t groups = instance.group_count();
  std::vector<double> mass(groups, 0.0), sensitive(groups, 0.0);
  for (const auto& p : instance.points) {
    mass[p.group] += p.mass;
    sensitive[p.group] += p.mass * p.propensity;
  }
  AffineConstraint c;
  c.offset.assign(groups, 0.0);
  for (const auto& p : instance.points) {
    c.weight.push_back(p.propensity - sensitive[p.group] / mass[p.group]);
  }
  return c;
}

AffineConstraint PredictiveEqualityConstraint(const DiscreteInstance& instance, double rate) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw UsageError("rate must lie in [0, 1]");
  return {std::vector<double>(instance.points.size(), 1.0),
          std::vector<double>(instance.group_count(), rate)};
}

AffineConstraint VacuousConstraint(const DiscreteInstance& instance) {
  return {std::vector<double>(instance.points.size(), 0.0),
          std::vector<double>(instance.group_count(), 0.0)};
}

std::vector<double> ContinuationGammas() { return {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}; }

double InstanceErrorRate(const DiscreteInstance& instance, std::span<const double> probability) {
  double err = 0.0;
  for (std::size_t i = 0; i < instance.points.size(); ++i) {
    const auto& p = instance.points[i];
    err += p.mass * (p.eta * (1.0 - probability[i]) + (1.0 - p.eta) * probability[i]);
  }
  return err;
}

namespace {

constexpr double kFractionalEps = 1e-9;
constexpr double kPureTolerance = 1e-6;

struct ThresholdReadout {
  double threshold = 0.0;
  double randomization = 0.0;
  bool pure = true;
};

ThresholdReadout ReadThreshold(const DiscreteInstance& instance, std::span<const std::size_t> idx,
                               std::span<const double> q) {
  ThresholdReadout r;
  std::size_t fractional = idx.size();
  double max_zero_eta = -1.0, min_one_eta = 2.0;
  for (std::size_t i : idx) {
    const double qi = q[i];
    if (qi > kFractionalEps && qi < 1.0 - kFractionalEps) {
      if (fractional == idx.size() || instance.points[i].mass > instance.points[fractional].mass) {
        fractional = i;
      }
    } else if (qi <= kFractionalEps) {
      max_zero_eta = std::max(max_zero_eta, instance.points[i].eta);
    } else {
      min_one_eta = std::min(min_one_eta, instance.points[i].eta);
    }
  }
  if (fractional != idx.size()) {
    r.threshold = instance.points[fractional].eta;
    r.randomization = q[fractional];
  } else if (max_zero_eta >= 0.0) {
    r.threshold = max_zero_eta;
    r.randomization = 0.0;
  } else {
    r.threshold = min_one_eta;
    r.randomization = 1.0;
  }
  for (std::size_t i : idx) {
    const double eta = instance.points[i].eta;
    const double expected = eta > r.threshold ? 1.0 : (eta == r.threshold ? r.randomization : 0.0);
    if (std::abs(q[i] - expected) > kPureTolerance) r.pure = false;
  }
  return r;
}

}  // namespace

BayesOptimalRule BayesOptimalDiscrete(const DiscreteInstance& instance,
                                      const AffineConstraint& constraint) {
  instance.Validate();
  const std::size_t groups = instance.group_count();
  if (constraint.weight.size() != instance.points.size() || constraint.offset.size() != groups) {
    throw UsageError("constraint does not match the instance");
  }

  std::vector<std::vector<std::size_t>> members(groups);
  std::vector<double> group_mass(groups, 0.0), weighted(groups, 0.0);
  for (std::size_t i = 0; i < instance.points.size(); ++i) {
    const auto& p = instance.points[i];
    members[p.group].push_back(i);
    group_mass[p.group] += p.mass;
    weighted[p.group] += p.mass * constraint.weight[i];
  }

  // Slater-type condition: one constant rule c in (0, 1) meets every group.
  std::optional<double> pinned;
  for (std::size_t k = 0; k < groups; ++k) {
    const double rhs = constraint.offset[k] * group_mass[k];
    if (std::abs(weighted[k]) <= 1e-14) {
      if (std::abs(rhs) > 1e-12) {
        throw NumericalError("group " + std::to_string(k) + " admits no constant rule");
      }
      continue;
    }
    const double c = rhs / weighted[k];
    if (pinned && std::abs(*pinned - c) > 1e-9) {
      throw NumericalError("groups require different constant rules; constraint infeasible");
    }
    pinned = c;
  }
  if (pinned && !(*pinned > 0.0 && *pinned < 1.0)) {
    throw NumericalError("the constant rule satisfying the constraint is not in (0, 1)");
  }

  BayesOptimalRule rule;
  std::vector<double> q(instance.points.size(), 0.0);
  for (double gamma : ContinuationGammas()) {
    std::vector<double> thresholds(groups), masses(groups);
    for (std::size_t k = 0; k < groups; ++k) {
      std::vector<double> h, w, tau;
      for (std::size_t i : members[k]) {
        h.push_back(2.0 * instance.points[i].eta - 1.0);
        w.push_back(instance.points[i].mass);
        tau.push_back(constraint.weight[i]);
      }
      const GroupSolution sol = SolveGroupDual(
          {h, w, tau, constraint.offset[k] * group_mass[k], gamma});
      for (std::size_t j = 0; j < members[k].size(); ++j) {
        q[members[k][j]] = RampProbability(h[j], sol.mu * tau[j], gamma);
      }
      const ThresholdReadout r = ReadThreshold(instance, members[k], q);
      thresholds[k] = r.threshold;
      masses[k] = r.randomization;
    }
    rule.gamma_path.push_back(gamma);
    rule.threshold_path.push_back(thresholds);
    rule.randomization_path.push_back(masses);
  }

  rule.probability = q;
  rule.threshold.resize(groups);
  rule.randomization.resize(groups);
  rule.pure_threshold.resize(groups);
  for (std::size_t k = 0; k < groups; ++k) {
    const ThresholdReadout r = ReadThreshold(instance, members[k], q);
    rule.threshold[k] = r.threshold;
    rule.randomization[k] = r.randomization;
    rule.pure_threshold[k] = r.pure;
  }
  rule.error_rate = InstanceErrorRate(instance, q);
  return rule;
}

// ---------------------------------------------------------------------------

void SynthSpec::Validate() const {
  const std::size_t k = group_weights.size();
  if (k == 0) throw UsageError("synth spec needs at least one group");
  if (sensitive_rates.size() != k || group_shifts.size() != k) {
    throw UsageError("synth spec lists must have one entry per group");
  }
  double total = 0.0;
  for (double w : group_weights) {
    if (!(w >= 0.0)) throw UsageError("group weights must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw UsageError("group weights sum to zero");
  for (double r : sensitive_rates) {
    if (!(r >= 0.0 && r <= 1.0)) throw UsageError("sensitive rates must lie in [0, 1]");
  }
  for (double s : group_shifts) {
    if (!std::isfinite(s)) throw UsageError("group shifts must be finite");
  }
  if (!std::isfinite(correlation)) throw UsageError("correlation must be finite");
  if (!(spread >= 0.0) || !std::isfinite(spread)) throw UsageError("spread must be >= 0");
}

SynthSpec SynthSpec::Read(std::istream& in) {
  SynthSpec spec;
  std::string line;
  std::size_t line_no = 0;
  auto list = [](std::string text, const std::string& where) {
    std::replace(text.begin(), text.end(), ',', ' ');
    std::istringstream s(text);
    std::vector<double> out;
    for (std::string t; s >> t;) {
      double v = 0.0;
      if (!ParseDouble(t, &v)) throw UsageError(where + ": malformed number '" + t + "'");
      out.push_back(v);
    }
    return out;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw UsageError("synth spec line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = line.substr(0, eq);
    key.erase(key.find_last_not_of(" \t") + 1);
    key.erase(0, key.find_first_not_of(" \t"));
    const std::string where = "synth spec line " + std::to_string(line_no);
    const std::vector<double> values = list(line.substr(eq + 1), where);
    auto scalar = [&]() {
      if (values.size() != 1) throw UsageError(where + ": '" + key + "' takes one value");
      return values[0];
    };
    if (key == "group_weights") {
      spec.group_weights = values;
    } else if (key == "sensitive_rates") {
      spec.sensitive_rates = values;
    } else if (key == "group_shifts") {
      spec.group_shifts = values;
    } else if (key == "correlation") {
      spec.correlation = scalar();
    } else if (key == "spread") {
      spec.spread = scalar();
    } else {
      throw UsageError(where + ": unknown key '" + key + "'");
    }
  }
  spec.Validate();
  return spec;
}

namespace {

double StandardNormal(CounterRng& rng) {
  // Box-Muller; 1 - U keeps the log argument in (0, 1].
  const double u1 = 1.0 - rng.Uniform();
  const double u2 = rng.Uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::size_t Categorical(std::span<const double> cumulative, CounterRng& rng) {
  const double u = rng.Uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                               cumulative.size() - 1);
}

}  // namespace

Cohort Synthesize(const SynthSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.Validate();
  if (n == 0) throw UsageError("synthetic cohort size must be > 0");
  std::vector<double> cumulative;
  double acc = 0.0;
  for (double w : spec.group_weights) cumulative.push_back(acc += w);

  CounterRng rng(seed, /*stream=*/1);
  std::vector<ScoredExample> examples;
  examples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ScoredExample e;
    e.group = static_cast<GroupId>(Categorical(cumulative, rng));
    e.sensitive = rng.Uniform() < spec.sensitive_rates[e.group];
    const double z = spec.group_shifts[e.group] + spec.correlation * (e.sensitive ? 1.0 : -1.0) +
                     spec.spread * StandardNormal(rng);
    const double eta = 1.0 / (1.0 + std::exp(-z));
    e.score = std::clamp(2.0 * eta - 1.0, -1.0, 1.0);
    e.label = rng.Uniform() < eta;
    examples.push_back(e);
  }
  return Cohort(std::move(examples), spec.group_weights.size());
}

Cohort SampleInstance(const DiscreteInstance& instance, std::size_t n, std::uint64_t seed) {
  instance.Validate();
  if (n == 0) throw UsageError("sample size must be > 0");
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& p : instance.points) cumulative.push_back(acc += p.mass);

  CounterRng rng(seed, /*stream=*/2);
  std::vector<ScoredExample> examples;
  examples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const DiscretePoint& p = instance.points[Categorical(cumulative, rng)];
    ScoredExample e;
    e.group = p.group;
    e.score = 2.0 * p.eta - 1.0;
    e.sensitive = rng.Uniform() < p.propensity;
    e.label = rng.Uniform() < p.eta;
    examples.push_back(e);
  }
  return Cohort(std::move(examples), instance.group_count());
}

}  // namespace fairpost
