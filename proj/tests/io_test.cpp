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

#include <cmath>
#include <random>
#include <sstream>

#include "fairpost/calibration.hpp"
#include "gtest/gtest.h"

namespace fairpost {
namespace {

IngestResult IngestText(const std::string& text, IngestSchema schema = {}) {
  std::istringstream in(text);
  return Ingest(in, schema);
}

TEST(CsvTest, QuotesCrlfAndRowWidth) {
  std::istringstream in("a,b\r\n\"x,1\",\"say \"\"hi\"\"\"\r\n2,\n");
  const CsvTable t = ReadCsv(in);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "x,1");
  EXPECT_EQ(t.rows[0][1], "say \"hi\"");
  EXPECT_EQ(t.rows[1][1], "");
  EXPECT_EQ(t.column("b"), 1u);
  EXPECT_FALSE(t.column("c"));
  std::ostringstream out;
  WriteCsvRow(out, t.rows[0]);
  EXPECT_EQ(out.str(), "\"x,1\",\"say \"\"hi\"\"\"\n");
  std::istringstream ragged("a,b\n1\n");
  EXPECT_THROW(ReadCsv(ragged), DataError);
}

TEST(ParseBoolTest, AcceptedEncodings) {
  for (const char* t : {"1", "true", "TRUE", "yes", "Yes"}) EXPECT_TRUE(ParseBool(t, "x"));
  for (const char* f : {"0", "false", "no", "NO"}) EXPECT_FALSE(ParseBool(f, "x"));
  for (const char* bad : {"", "2", "y", "t", "on"}) EXPECT_THROW(ParseBool(bad, "x"), DataError);
}

TEST(IngestTest, FourRowsTwoGroups) {
  const IngestResult r = IngestText(
      "score,group,sensitive,label\n0.5,b,1,1\n-0.2,a,0,0\n0.1,b,0,yes\n0.9,a,true,false\n");
  EXPECT_EQ(r.cohort.group_count(), 2u);
  EXPECT_EQ(r.group_labels, std::vector<std::string>({"a", "b"}));
  EXPECT_EQ(r.cohort[0].group, 1u);
  EXPECT_DOUBLE_EQ(r.report.rho[0], 0.5);
  EXPECT_DOUBLE_EQ(r.report.rho[1], 0.5);
  EXPECT_EQ(r.report.group_sizes, std::vector<std::size_t>({2, 2}));
  EXPECT_TRUE(r.cohort.has_labels());
  std::ostringstream report;
  WriteIngestReport(report, r);
  EXPECT_NE(report.str().find("rows=4\n"), std::string::npos);
}

TEST(IngestTest, ClampAndStrict) {
  const std::string text = "score,group,sensitive\n1.5,a,1\n0.2,a,0\n";
  const IngestResult r = IngestText(text);
  EXPECT_EQ(r.cohort[0].score, 1.0);
  EXPECT_EQ(r.report.clamped, 1u);
  IngestSchema strict;
  strict.policy = ScorePolicy::kStrict;
  try {
    IngestText(text, strict);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
  }
}

TEST(IngestTest, RowAddressedErrors) {
  try {
    IngestText("score,group\n0.1,a\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("'sensitive'"), std::string::npos);
  }
  IngestSchema equality;
  equality.require_sensitive = false;
  EXPECT_EQ(IngestText("score,group\n0.1,a\n", equality).cohort.size(), 1u);
  try {
    IngestText("score,group,sensitive\n0.1,a,1\nabc,a,0\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
  try {
    IngestText("score,group,sensitive\n0.1,a,maybe\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
  }
  IngestSchema known;
  known.known_groups = {"a"};
  EXPECT_THROW(IngestText("score,group,sensitive\n0.1,b,1\n", known), DataError);
}

TEST(IngestTest, DeterministicIdsAndMarginColumn) {
  const std::string text = "m,group,sensitive\n2,z,1\n-2,y,0\n0,z,0\n";
  IngestSchema schema;
  schema.margin_column = "m";
  schema.calibration = CalibrationParams{-1.0, 0.0};
  const IngestResult a = IngestText(text, schema);
  const IngestResult b = IngestText(text, schema);
  EXPECT_EQ(a.group_labels, b.group_labels);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.cohort[i].group, b.cohort[i].group);
    EXPECT_EQ(a.cohort[i].score, b.cohort[i].score);
  }
  EXPECT_NEAR(a.cohort[0].score, std::tanh(1.0), 1e-15);
  EXPECT_EQ(a.cohort[2].score, 0.0);
  schema.calibration.reset();
  EXPECT_THROW(IngestText(text, schema), UsageError);
}

ModelFile SampleModel() {
  ModelFile f;
  f.model.mu = {0.1234567890123, -1.01};
  f.model.rho = {1.0 / 3.0, 0.0};
  f.model.degenerate = {false, true};
  f.model.gamma = 0.01;
  f.group_labels = {"north", "south east"};
  f.fit.n = 1000;
  f.fit.steps = 10000;
  f.fit.alpha = 0.02;
  f.fit.seed = 42;
  return f;
}

TEST(ModelFileTest, RoundTripIsByteIdentical) {
  for (const Criterion& c : {Criterion{ConditionalParity{}}, Criterion{PredictiveEquality{0.3}}}) {
    ModelFile f = SampleModel();
    f.model.criterion = c;
    std::ostringstream first;
    WriteModelFile(first, f);
    std::istringstream in(first.str());
    const ModelFile loaded = ReadModelFile(in);
    EXPECT_EQ(loaded.model.mu, f.model.mu);
    EXPECT_EQ(loaded.group_labels, f.group_labels);
    EXPECT_EQ(loaded.model.criterion, c);
    std::ostringstream second;
    WriteModelFile(second, loaded);
    EXPECT_EQ(first.str(), second.str());
  }
}

TEST(ModelFileTest, RejectsMalformedFiles) {
  std::ostringstream good;
  WriteModelFile(good, SampleModel());
  const std::string text = good.str();
  auto read = [](const std::string& t) {
    std::istringstream in(t);
    return ReadModelFile(in);
  };
  EXPECT_THROW(read(""), DataError);
  EXPECT_THROW(read("fairpost-model 2\n" + text.substr(text.find('\n') + 1)), DataError);
  EXPECT_THROW(read(text + "gamma=0.5\n"), DataError);
  std::string no_gamma = text;
  no_gamma.erase(no_gamma.find("gamma="), no_gamma.find('\n', no_gamma.find("gamma=")) -
                                              no_gamma.find("gamma=") + 1);
  EXPECT_THROW(read(no_gamma), DataError);
  std::string bad_gamma = text;
  bad_gamma.replace(bad_gamma.find("gamma=0.01"), 10, "gamma=-1");
  EXPECT_THROW(read(bad_gamma), DataError);
}

TEST(CalibrateTest, SymmetricBalancedGivesZeroIntercept) {
  std::vector<double> m;
  std::vector<std::uint8_t> y;
  std::mt19937_64 rng(71);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double v = noise(rng);
    const bool label = noise(rng) < v;
    // Mirror every example so the likelihood is symmetric under m -> -m, y -> 1 - y.
    m.push_back(v);
    y.push_back(label);
    m.push_back(-v);
    y.push_back(!label);
  }
  const CalibrationResult r = Calibrate(m, y);
  EXPECT_TRUE(r.converged);
  EXPECT_FALSE(r.separated);
  EXPECT_NEAR(r.params.b, 0.0, 1e-6);
  EXPECT_LT(r.params.a, 0.0);
  EXPECT_GT(r.params.Probability(1.0), r.params.Probability(-1.0));
  EXPECT_LT(std::abs(r.params.Score(3.0)), 1.0);
}

TEST(CalibrateTest, IndependentLabelsGiveBaseRate) {
  // Each margin carries the same label mix, so margins carry no information.
  std::vector<double> m;
  std::vector<std::uint8_t> y;
  for (int j = 0; j < 40; ++j) {
    const double v = -2.0 + 0.1 * j;
    for (int r = 0; r < 10; ++r) {
      m.push_back(v);
      y.push_back(r < 3);
    }
  }
  const CalibrationResult r = Calibrate(m, y);
  EXPECT_TRUE(r.converged);
  for (double v : {-5.0, -1.0, 0.0, 0.7, 3.0}) EXPECT_NEAR(r.params.Probability(v), 0.3, 1e-3);
}

TEST(CalibrateTest, SeparatedHitsIterationCap) {
  const std::vector<double> m{-3, -2, -1, 1, 2, 3};
  const std::vector<std::uint8_t> y{0, 0, 0, 1, 1, 1};
  const CalibrationResult r = Calibrate(m, y);
  EXPECT_TRUE(r.separated);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, kCalibrationMaxIterations);
  EXPECT_GT(std::abs(r.params.a), 5.0);
}

TEST(CalibrateTest, ErrorsAndRoundTrip) {
  EXPECT_THROW(Calibrate(std::vector<double>{1, 2, 3}, std::vector<std::uint8_t>{1, 1, 0}),
               DataError);
  std::ostringstream out;
  WriteCalibration(out, {-1.25, 0.5});
  std::istringstream in(out.str());
  const CalibrationParams p = ReadCalibration(in);
  EXPECT_EQ(p.a, -1.25);
  EXPECT_EQ(p.b, 0.5);
  std::istringstream missing("a=1\n");
  EXPECT_THROW(ReadCalibration(missing), DataError);
}

}  // namespace
}  // namespace fairpost
