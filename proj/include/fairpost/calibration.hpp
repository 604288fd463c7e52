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


#ifndef FAIRPOST_CALIBRATION_HPP_
#define FAIRPOST_CALIBRATION_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>

namespace fairpost {

// Logistic map from raw classifier margins to probabilities,
// p = 1 / (1 + exp(a m + b)). a < 0 means larger margins are more positive.
struct CalibrationParams {
  double a = -1.0;
  double b = 0.0;

  double Probability(double margin) const;
  // 2p - 1, strictly inside (-1, 1) for finite margins.
  double Score(double margin) const;
};

struct CalibrationResult {
  CalibrationParams params;
  int iterations = 0;
  bool converged = false;
  bool separated = false;  // labels are perfectly separated by the margin
  double gradient_norm = 0.0;
};

inline constexpr int kCalibrationMaxIterations = 50;
inline constexpr double kCalibrationGradientTolerance = 1e-8;

// Maximum-likelihood fit by damped Newton (Armijo backtracking). The gradient
// tolerance applies to the per-example mean log-likelihood. Needs at least
// two examples of each label, else throws DataError.
CalibrationResult Calibrate(std::span<const double> margins, std::span<const std::uint8_t> labels);

void WriteCalibration(std::ostream& out, const CalibrationParams& params);
CalibrationParams ReadCalibration(std::istream& in);

}  // namespace fairpost

#endif  // FAIRPOST_CALIBRATION_HPP_
