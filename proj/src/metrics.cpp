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


#include "fairpost/metrics.hpp"

#include <cmath>
#include <ostream>

#include "fairpost/format.hpp"
#include "fairpost/kernels.hpp"

namespace fairpost {

double ConditionalCovariance(std::span<const double> q, std::span<const std::uint8_t> flags,
                             std::span<const std::uint8_t> mask) {
  if (q.size() != flags.size() || q.size() != mask.size()) {
    throw UsageError("covariance inputs differ in length");
  }
  double n = 0.0, sum_q = 0.0, sum_s = 0.0, sum_qs = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!mask[i]) continue;
    const double s = flags[i] ? 1.0 : 0.0;
    n += 1.0;
    sum_q += q[i];
    sum_s += s;
    sum_qs += q[i] * s;
  }
  if (n == 0.0) throw DataError("covariance mask selects no examples");
  return sum_qs / n - (sum_q / n) * (sum_s / n);
}

std::vector<double> ResidualBias(const Cohort& cohort, std::span<const double> q,
                                 const ThresholdModel& model) {
  if (q.size() != cohort.size()) throw UsageError("q length differs from cohort size");
  std::vector<double> tau(cohort.size());
  for (std::size_t i = 0; i < cohort.size(); ++i) tau[i] = Tau(cohort[i], model);
  const std::vector<double> sums = kernels::GroupWeightedSums(cohort, tau, q);
  const double b = model.linear_coefficient();
  std::vector<double> residual(cohort.group_count());
  for (GroupId k = 0; k < cohort.group_count(); ++k) {
    const auto n = static_cast<double>(cohort.group_size(k));
    if (n == 0.0) throw DataError("group " + std::to_string(k) + " is empty");
    residual[k] = std::abs(sums[k] - b * n) / n;
  }
  return residual;
}

double ErrorRate(std::span<const double> q, std::span<const std::uint8_t> labels) {
  if (q.size() != labels.size()) throw UsageError("q and labels differ in length");
  if (q.empty()) throw DataError("no labeled examples");
  std::vector<double> losses(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) losses[i] = labels[i] ? 1.0 - q[i] : q[i];
  return kernels::PairwiseSum(losses) / static_cast<double>(q.size());
}

double ErrorRate(const Cohort& cohort, std::span<const double> q) {
  std::vector<std::uint8_t> labels(cohort.size());
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    if (!cohort[i].label) throw DataError("example " + std::to_string(i) + " has no label");
    labels[i] = *cohort[i].label ? 1 : 0;
  }
  return ErrorRate(q, labels);
}

std::vector<double> UnadjustedDecisions(const Cohort& cohort) {
  std::vector<double> q(cohort.size());
  for (std::size_t i = 0; i < cohort.size(); ++i) q[i] = cohort[i].score > 0.0 ? 1.0 : 0.0;
  return q;
}

BiasReport BuildBiasReport(const Cohort& cohort, std::span<const double> q,
                           const Criterion& criterion, std::span<const std::string> labels) {
  const ThresholdModel context = MakeModel(cohort, criterion, /*gamma=*/1.0);
  BiasReport report;
  report.criterion = CriterionName(criterion);
  report.size = cohort.size();
  report.positive_rate = kernels::PairwiseSum(q) / static_cast<double>(cohort.size());
  if (cohort.has_labels()) report.error_rate = ErrorRate(cohort, q);

  const std::vector<double> rho = ComputeRho(cohort);
  const std::vector<double> residual = ResidualBias(cohort, q, context);
  std::vector<std::uint8_t> flags(cohort.size()), mask(cohort.size()), all(cohort.size(), 1);
  for (std::size_t i = 0; i < cohort.size(); ++i) flags[i] = cohort[i].sensitive ? 1 : 0;

  for (GroupId k = 0; k < cohort.group_count(); ++k) {
    GroupBias g;
    g.label = k < labels.size() ? labels[k] : std::to_string(k);
    g.size = cohort.group_size(k);
    g.rho = rho[k];
    g.degenerate = rho[k] == 0.0 || rho[k] == 1.0;
    double sum_q = 0.0;
    for (std::size_t i = 0; i < cohort.size(); ++i) {
      mask[i] = cohort[i].group == k ? 1 : 0;
      if (mask[i]) sum_q += q[i];
    }
    g.positive_rate = sum_q / static_cast<double>(g.size);
    g.covariance_sensitive = ConditionalCovariance(q, flags, mask);
    g.covariance_membership = ConditionalCovariance(q, mask, all);
    g.residual = residual[k];
    report.groups.push_back(std::move(g));
  }
  return report;
}

void WriteKeyValue(std::ostream& out, const BiasReport& report, const std::string& prefix) {
  out << prefix << "criterion=" << report.criterion << '\n';
  out << prefix << "n=" << report.size << '\n';
  out << prefix << "positive_rate=" << FormatDouble(report.positive_rate) << '\n';
  if (report.error_rate) out << prefix << "error_rate=" << FormatDouble(*report.error_rate) << '\n';
  out << prefix << "groups=" << report.groups.size() << '\n';
  for (std::size_t k = 0; k < report.groups.size(); ++k) {
    const GroupBias& g = report.groups[k];
    const std::string p = prefix + "group." + std::to_string(k) + ".";
    out << p << "label=" << g.label << '\n'
        << p << "n=" << g.size << '\n'
        << p << "rho=" << FormatDouble(g.rho) << '\n'
        << p << "degenerate=" << (g.degenerate ? 1 : 0) << '\n'
        << p << "positive_rate=" << FormatDouble(g.positive_rate) << '\n'
        << p << "covariance_sensitive=" << FormatDouble(g.covariance_sensitive) << '\n'
        << p << "covariance_membership=" << FormatDouble(g.covariance_membership) << '\n'
        << p << "residual=" << FormatDouble(g.residual) << '\n';
  }
}

void WriteCsv(std::ostream& out,
              std::span<const std::pair<std::string, BiasReport>> staged_reports) {
  out << "stage,group,label,n,rho,degenerate,positive_rate,covariance_sensitive,"
         "covariance_membership,residual,error_rate\n";
  for (const auto& [stage, report] : staged_reports) {
    for (std::size_t k = 0; k < report.groups.size(); ++k) {
      const GroupBias& g = report.groups[k];
      out << stage << ',' << k << ',' << g.label << ',' << g.size << ',' << FormatDouble(g.rho)
          << ',' << (g.degenerate ? 1 : 0) << ',' << FormatDouble(g.positive_rate) << ','
          << FormatDouble(g.covariance_sensitive) << ',' << FormatDouble(g.covariance_membership)
          << ',' << FormatDouble(g.residual) << ','
          << (report.error_rate ? FormatDouble(*report.error_rate) : "") << '\n';
    }
  }
}

void ImpossibilityInput::Validate() const {
  if (mass.empty()) throw DataError("instance has no points");
  if (propensity.size() != mass.size() || prediction.size() != mass.size()) {
    throw DataError("instance columns differ in length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (!(mass[i] >= 0.0)) throw DataError("negative mass at point " + std::to_string(i));
    if (!(propensity[i] >= 0.0 && propensity[i] <= 1.0)) {
      throw DataError("propensity outside [0, 1] at point " + std::to_string(i));
    }
    if (prediction[i] > 1) throw DataError("prediction must be 0 or 1");
    total += mass[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw DataError("masses do not sum to 1");
}

double PartitionCovariance(const ImpossibilityInput& input,
                           std::span<const std::uint8_t> partition) {
  double result = 0.0;
  for (std::uint8_t side : {std::uint8_t{0}, std::uint8_t{1}}) {
    double p = 0.0, ef = 0.0, eg = 0.0, efg = 0.0;
    for (std::size_t i = 0; i < input.mass.size(); ++i) {
      if ((partition[i] ? 1 : 0) != side) continue;
      const double m = input.mass[i];
      const double f = input.prediction[i];
      p += m;
      ef += m * f;
      eg += m * input.propensity[i];
      efg += m * f * input.propensity[i];
    }
    if (p <= 0.0) continue;
    const double cov = efg / p - (ef / p) * (eg / p);
    result += p * std::abs(cov);
  }
  return result;
}

ImpossibilityResult ImpossibilityBound(const ImpossibilityInput& input) {
  input.Validate();
  double g_bar = 0.0, ef = 0.0;
  for (std::size_t i = 0; i < input.mass.size(); ++i) {
    g_bar += input.mass[i] * input.propensity[i];
    ef += input.mass[i] * input.prediction[i];
  }
  double spread = 0.0;
  for (std::size_t i = 0; i < input.mass.size(); ++i) {
    spread += input.mass[i] * std::abs(input.propensity[i] - g_bar);
  }

  ImpossibilityResult result;
  result.lower_bound = 0.5 * spread * std::min(ef, 1.0 - ef);
  result.witness.resize(input.mass.size());
  for (std::size_t i = 0; i < input.mass.size(); ++i) {
    const bool above = input.propensity[i] > g_bar;
    result.witness[i] = (above && input.prediction[i] == 1) || (!above && input.prediction[i] == 0);
  }
  result.witness_lhs = PartitionCovariance(input, result.witness);
  return result;
}

}  // namespace fairpost
