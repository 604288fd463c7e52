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


#ifndef FAIRPOST_IO_HPP_
#define FAIRPOST_IO_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairpost/calibration.hpp"
#include "fairpost/core.hpp"

namespace fairpost {

// Header plus raw string cells. Supports RFC 4180 style quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(const std::string& name) const;
};

CsvTable ReadCsv(std::istream& in);
void WriteCsvRow(std::ostream& out, std::span<const std::string> cells);

// Accepts 0/1, true/false, yes/no (case-insensitive). Anything else throws
// DataError mentioning `where`.
bool ParseBool(const std::string& text, const std::string& where);

struct IngestSchema {
  std::string score_column = "score";
  // When set, scores come from this column through `calibration`.
  std::string margin_column;
  std::optional<CalibrationParams> calibration;
  std::string group_column = "group";
  std::string sensitive_column = "sensitive";
  std::string label_column = "label";
  bool require_sensitive = true;
  bool require_labels = false;
  ScorePolicy policy = ScorePolicy::kClamp;
  // Fixed group universe (e.g. from a model). Empty: distinct labels of the
  // file in sorted order.
  std::vector<std::string> known_groups;
};

struct IngestReport {
  std::size_t rows = 0;
  std::size_t clamped = 0;
  std::vector<std::size_t> group_sizes;
  std::vector<double> rho;  // NaN for empty groups
};

struct IngestResult {
  Cohort cohort;
  std::vector<std::string> group_labels;
  IngestReport report;
  CsvTable table;
};

IngestResult Ingest(std::istream& in, const IngestSchema& schema);
IngestResult IngestFile(const std::string& path, const IngestSchema& schema);

void WriteIngestReport(std::ostream& out, const IngestResult& result);

struct FitMetadata {
  std::string method = "sgd";  // sgd | oracle
  std::uint64_t n = 0;
  std::uint64_t steps = 0;
  std::string learning_rate = "auto";
  double alpha = 0.0;
  std::uint64_t seed = 0;
};

// Versioned key=value model file.
struct ModelFile {
  ThresholdModel model;
  std::vector<std::string> group_labels;
  FitMetadata fit;
};

inline constexpr const char* kModelMagic = "fairpost-model";
inline constexpr int kModelVersion = 1;

void WriteModelFile(std::ostream& out, const ModelFile& file);
ModelFile ReadModelFile(std::istream& in);

}  // namespace fairpost

#endif  // FAIRPOST_IO_HPP_
