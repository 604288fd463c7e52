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


#include "fairpost/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "fairpost/core.hpp"
#include "fairpost/format.hpp"

namespace fairpost {
namespace {

// log(1 + exp(z)) without overflow.
double Softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double NegLogLikelihood(std::span<const double> m, std::span<const std::uint8_t> y, double a,
                        double b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double z = a * m[i] + b;
    sum += Softplus(z) - (y[i] ? 0.0 : z);
  }
  return sum / static_cast<double>(m.size());
}

bool PerfectlySeparated(std::span<const double> m, std::span<const std::uint8_t> y) {
  double pos_min = std::numeric_limits<double>::infinity(), pos_max = -pos_min;
  double neg_min = pos_min, neg_max = -pos_min;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (y[i]) {
      pos_min = std::min(pos_min, m[i]);
      pos_max = std::max(pos_max, m[i]);
    } else {
      neg_min = std::min(neg_min, m[i]);
      neg_max = std::max(neg_max, m[i]);
    }
  }
  return neg_max < pos_min || pos_max < neg_min;
}

}  // namespace

double CalibrationParams::Probability(double margin) const {
  const double z = a * margin + b;
  // 1 / (1 + e^z), evaluated on the stable side.
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

double CalibrationParams::Score(double margin) const {
  return 2.0 * Probability(margin) - 1.0;
}

CalibrationResult Calibrate(std::span<const double> margins,
                            std::span<const std::uint8_t> labels) {
  if (margins.size() != labels.size()) throw UsageError("margins and labels differ in length");
  std::size_t positives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!std::isfinite(margins[i])) throw DataError("margin " + std::to_string(i) + " not finite");
    positives += labels[i] ? 1 : 0;
  }
  const std::size_t negatives = labels.size() - positives;
  if (positives < 2 || negatives < 2) {
    throw DataError("calibration needs at least two examples of each label");
  }

  const auto n = static_cast<double>(margins.size());
  CalibrationResult result;
  CalibrationParams& p = result.params;
  p.a = 0.0;
  p.b = std::log(static_cast<double>(negatives) / static_cast<double>(positives));
  result.separated = PerfectlySeparated(margins, labels);

  double value = NegLogLikelihood(margins, labels, p.a, p.b);
  for (result.iterations = 0; result.iterations < kCalibrationMaxIterations;
       ++result.iterations) {
    double ga = 0.0, gb = 0.0, haa = 1e-12, hab = 0.0, hbb = 1e-12;
    for (std::size_t i = 0; i < margins.size(); ++i) {
      const double prob = p.Probability(margins[i]);
      const double r = (labels[i] ? 1.0 : 0.0) - prob;
      const double w = prob * (1.0 - prob);
      ga += r * margins[i];
      gb += r;
      haa += w * margins[i] * margins[i];
      hab += w * margins[i];
      hbb += w;
    }
    ga /= n;
    gb /= n;
    haa /= n;
    hab /= n;
    hbb /= n;
    result.gradient_norm = std::hypot(ga, gb);
    // Separated labels have no finite optimum; keep going to the cap.
    if (!result.separated && result.gradient_norm <= kCalibrationGradientTolerance) {
      result.converged = true;
      break;
    }
    const double det = haa * hbb - hab * hab;
    const double da = -(hbb * ga - hab * gb) / det;
    const double db = -(-hab * ga + haa * gb) / det;
    const double slope = ga * da + gb * db;

    double step = 1.0;
    bool moved = false;
    while (step >= 1e-10) {
      const double trial = NegLogLikelihood(margins, labels, p.a + step * da, p.b + step * db);
      if (trial <= value + 1e-4 * step * slope) {
        p.a += step * da;
        p.b += step * db;
        value = trial;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return result;
}

void WriteCalibration(std::ostream& out, const CalibrationParams& params) {
  out << "a=" << FormatDouble(params.a) << '\n' << "b=" << FormatDouble(params.b) << '\n';
}

CalibrationParams ReadCalibration(std::istream& in) {
  CalibrationParams params;
  bool seen_a = false, seen_b = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("calibration file: expected key=value");
    const std::string key = line.substr(0, eq);
    double v = 0.0;
    if (!ParseDouble(line.substr(eq + 1), &v)) throw DataError("calibration file: bad number");
    if (key == "a") {
      params.a = v;
      seen_a = true;
    } else if (key == "b") {
      params.b = v;
      seen_b = true;
    } else {
      throw DataError("calibration file: unknown key '" + key + "'");
    }
  }
  if (!seen_a || !seen_b) throw DataError("calibration file needs both a and b");
  return params;
}

}  // namespace fairpost
