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


#include "fairpost/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include "fairpost/format.hpp"

namespace fairpost {

std::optional<std::size_t> CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable ReadCsv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string cell;
  bool quoted = false, cell_started = false;
  std::size_t line = 1;
  char c;
  auto end_record = [&]() {
    if (cell_started || !record.empty()) {
      record.push_back(cell);
      records.push_back(std::move(record));
    }
    record.clear();
    cell.clear();
    cell_started = false;
  };
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          cell.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        cell.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        cell_started = true;
        break;
      case ',':
        record.push_back(cell);
        cell.clear();
        cell_started = true;
        break;
      case '\r':
        break;
      case '\n':
        ++line;
        end_record();
        break;
      default:
        cell.push_back(c);
        cell_started = true;
    }
  }
  if (quoted) throw DataError("CSV: unterminated quote before line " + std::to_string(line));
  end_record();

  CsvTable table;
  if (records.empty()) throw DataError("CSV: missing header");
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw DataError("CSV row " + std::to_string(r) + ": expected " +
                      std::to_string(table.header.size()) + " fields, got " +
                      std::to_string(records[r].size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

void WriteCsvRow(std::ostream& out, std::span<const std::string> cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out << ',';
    const std::string& s = cells[i];
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
      out << s;
      continue;
    }
    out << '"';
    for (char c : s) {
      if (c == '"') out << '"';
      out << c;
    }
    out << '"';
  }
  out << '\n';
}

bool ParseBool(const std::string& text, const std::string& where) {
  std::string t;
  for (char c : text) {
    if (c != ' ' && c != '\t') t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (t == "1" || t == "true" || t == "yes") return true;
  if (t == "0" || t == "false" || t == "no") return false;
  throw DataError(where + ": cannot read '" + text + "' as a boolean (0/1, true/false, yes/no)");
}

namespace {

std::size_t RequireColumn(const CsvTable& table, const std::string& name, const char* role) {
  const auto col = table.column(name);
  if (!col) throw DataError(std::string("missing ") + role + " column '" + name + "'");
  return *col;
}

}  // namespace

IngestResult Ingest(std::istream& in, const IngestSchema& schema) {
  CsvTable table = ReadCsv(in);
  if (table.rows.empty()) throw DataError("CSV has a header but no rows");

  const bool from_margin = !schema.margin_column.empty();
  if (from_margin && !schema.calibration) {
    throw UsageError("margin column given without calibration parameters");
  }
  const std::size_t score_col = from_margin ? RequireColumn(table, schema.margin_column, "margin")
                                            : RequireColumn(table, schema.score_column, "score");
  const std::size_t group_col = RequireColumn(table, schema.group_column, "group");
  std::optional<std::size_t> sensitive_col = table.column(schema.sensitive_column);
  if (!sensitive_col && schema.require_sensitive) {
    RequireColumn(table, schema.sensitive_column, "sensitive");
  }
  std::optional<std::size_t> label_col = table.column(schema.label_column);
  if (!label_col && schema.require_labels) RequireColumn(table, schema.label_column, "label");

  std::vector<std::string> labels = schema.known_groups;
  if (labels.empty()) {
    std::set<std::string> distinct;
    for (const auto& row : table.rows) distinct.insert(row[group_col]);
    labels.assign(distinct.begin(), distinct.end());
  }
  std::map<std::string, GroupId> ids;
  for (std::size_t k = 0; k < labels.size(); ++k) ids.emplace(labels[k], static_cast<GroupId>(k));

  IngestReport report;
  report.rows = table.rows.size();
  std::vector<ScoredExample> examples;
  examples.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = "row " + std::to_string(r + 1);
    ScoredExample e;
    double raw = 0.0;
    if (!ParseDouble(row[score_col], &raw)) {
      throw DataError(where + ": non-numeric " + (from_margin ? "margin" : "score") + " '" +
                      row[score_col] + "'");
    }
    if (from_margin) raw = schema.calibration->Score(raw);
    try {
      e.score = NormalizeScore(raw, schema.policy, &report.clamped);
    } catch (const DataError& err) {
      throw DataError(where + ": " + err.what());
    }
    const auto id = ids.find(row[group_col]);
    if (id == ids.end()) {
      throw DataError(where + ": group '" + row[group_col] + "' is not in the group universe");
    }
    e.group = id->second;
    if (sensitive_col) e.sensitive = ParseBool(row[*sensitive_col], where);
    if (label_col && !row[*label_col].empty()) e.label = ParseBool(row[*label_col], where);
    if (schema.require_labels && !e.label) throw DataError(where + ": missing label");
    examples.push_back(e);
  }

  report.group_sizes.assign(labels.size(), 0);
  std::vector<std::size_t> sensitive(labels.size(), 0);
  for (const auto& e : examples) {
    ++report.group_sizes[e.group];
    sensitive[e.group] += e.sensitive ? 1 : 0;
  }
  for (std::size_t k = 0; k < labels.size(); ++k) {
    report.rho.push_back(report.group_sizes[k] == 0
                             ? std::numeric_limits<double>::quiet_NaN()
                             : static_cast<double>(sensitive[k]) /
                                   static_cast<double>(report.group_sizes[k]));
  }
  Cohort cohort(std::move(examples), labels.size());
  return {std::move(cohort), std::move(labels), std::move(report), std::move(table)};
}

IngestResult IngestFile(const std::string& path, const IngestSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return Ingest(in, schema);
}

void WriteIngestReport(std::ostream& out, const IngestResult& result) {
  out << "rows=" << result.report.rows << '\n' << "clamped=" << result.report.clamped << '\n';
  for (std::size_t k = 0; k < result.group_labels.size(); ++k) {
    out << "group." << k << ".label=" << result.group_labels[k] << '\n'
        << "group." << k << ".n=" << result.report.group_sizes[k] << '\n'
        << "group." << k << ".rho=" << FormatDouble(result.report.rho[k]) << '\n';
  }
}

void WriteModelFile(std::ostream& out, const ModelFile& file) {
  const ThresholdModel& m = file.model;
  m.Validate();
  if (file.group_labels.size() != m.group_count()) {
    throw UsageError("model file needs one label per group");
  }
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "criterion=" << CriterionName(m.criterion) << '\n';
  if (!IsParity(m.criterion)) out << "target_rate=" << FormatDouble(m.linear_coefficient()) << '\n';
  out << "gamma=" << FormatDouble(m.gamma) << '\n';
  out << "groups=" << m.group_count() << '\n';
  for (std::size_t k = 0; k < m.group_count(); ++k) {
    const std::string& label = file.group_labels[k];
    if (label.find_first_of("\r\n") != std::string::npos) {
      throw UsageError("group labels may not contain line breaks");
    }
    const std::string p = "group." + std::to_string(k) + ".";
    out << p << "label=" << label << '\n'
        << p << "mu=" << FormatDouble(m.mu[k]) << '\n'
        << p << "rho=" << FormatDouble(m.rho[k]) << '\n'
        << p << "degenerate=" << (m.degenerate[k] ? 1 : 0) << '\n';
  }
  out << "fit.method=" << file.fit.method << '\n'
      << "fit.n=" << file.fit.n << '\n'
      << "fit.steps=" << file.fit.steps << '\n'
      << "fit.learning_rate=" << file.fit.learning_rate << '\n'
      << "fit.alpha=" << FormatDouble(file.fit.alpha) << '\n'
      << "fit.seed=" << file.fit.seed << '\n';
}

namespace {

class KeyValues {
 public:
  explicit KeyValues(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  const std::string& Get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw DataError("model file: missing key '" + key + "'");
    return it->second;
  }
  double Real(const std::string& key) const {
    double v = 0.0;
    if (!ParseDouble(Get(key), &v)) throw DataError("model file: '" + key + "' is not a number");
    return v;
  }
  std::uint64_t Count(const std::string& key) const {
    const std::string& s = Get(key);
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw DataError("model file: '" + key + "' is not a non-negative integer");
    }
    return v;
  }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace

ModelFile ReadModelFile(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("model file is empty");
  if (line != std::string(kModelMagic) + " " + std::to_string(kModelVersion)) {
    throw DataError("model file: unsupported header '" + line + "'");
  }
  std::map<std::string, std::string> raw;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("model file: expected key=value, got '" + line + "'");
    if (!raw.emplace(line.substr(0, eq), line.substr(eq + 1)).second) {
      throw DataError("model file: duplicate key '" + line.substr(0, eq) + "'");
    }
  }
  const KeyValues kv(std::move(raw));

  ModelFile file;
  ThresholdModel& m = file.model;
  m.criterion = ParseCriterion(kv.Get("criterion"));
  if (!IsParity(m.criterion)) m.criterion = PredictiveEquality{kv.Real("target_rate")};
  m.gamma = kv.Real("gamma");
  const std::uint64_t groups = kv.Count("groups");
  if (groups == 0 || groups > (1u << 24)) throw DataError("model file: bad group count");
  for (std::uint64_t k = 0; k < groups; ++k) {
    const std::string p = "group." + std::to_string(k) + ".";
    file.group_labels.push_back(kv.Get(p + "label"));
    m.mu.push_back(kv.Real(p + "mu"));
    m.rho.push_back(kv.Real(p + "rho"));
    const std::uint64_t d = kv.Count(p + "degenerate");
    if (d > 1) throw DataError("model file: degenerate flag must be 0 or 1");
    m.degenerate.push_back(d == 1);
  }
  file.fit.method = kv.Get("fit.method");
  file.fit.n = kv.Count("fit.n");
  file.fit.steps = kv.Count("fit.steps");
  file.fit.learning_rate = kv.Get("fit.learning_rate");
  file.fit.alpha = kv.Real("fit.alpha");
  file.fit.seed = kv.Count("fit.seed");
  try {
    m.Validate();
  } catch (const UsageError& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  return file;
}

}  // namespace fairpost
