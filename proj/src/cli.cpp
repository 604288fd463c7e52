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


#include "fairpost/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "fairpost/decision.hpp"
#include "fairpost/format.hpp"
#include "fairpost/io.hpp"
#include "fairpost/metrics.hpp"
#include "fairpost/objective.hpp"
#include "fairpost/optimizer.hpp"
#include "fairpost/oracle.hpp"

namespace fairpost {
namespace {

struct SchemaFlags {
  std::string score_column = "score";
  std::string margin_column;
  std::string calibration_path;
  std::string group_column = "group";
  std::string sensitive_column = "sensitive";
  std::string label_column = "label";
  bool strict = false;

  void Register(CLI::App* cmd) {
    cmd->add_option("--score-column", score_column, "Column holding scores in [-1, 1]");
    cmd->add_option("--margin-column", margin_column,
                    "Column of raw margins, mapped through --calibration");
    cmd->add_option("--calibration", calibration_path, "Calibration parameters file");
    cmd->add_option("--group-column", group_column, "Column holding the group label");
    cmd->add_option("--sensitive-column", sensitive_column, "Column holding the sensitive flag");
    cmd->add_option("--label-column", label_column, "Column holding the true label");
    cmd->add_flag("--strict", strict, "Reject scores outside [-1, 1] instead of clamping");
  }

  IngestSchema Build(bool require_sensitive) const {
    IngestSchema s;
    s.score_column = score_column;
    s.margin_column = margin_column;
    s.group_column = group_column;
    s.sensitive_column = sensitive_column;
    s.label_column = label_column;
    s.require_sensitive = require_sensitive;
    s.policy = strict ? ScorePolicy::kStrict : ScorePolicy::kClamp;
    if (!margin_column.empty()) {
      if (calibration_path.empty()) throw UsageError("--margin-column needs --calibration");
      std::ifstream in(calibration_path);
      if (!in) throw DataError("cannot open '" + calibration_path + "'");
      s.calibration = ReadCalibration(in);
    }
    return s;
  }
};

std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

std::ifstream OpenIn(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

Criterion CriterionFromFlags(const std::string& name, double target_rate) {
  Criterion c = ParseCriterion(name);
  if (!IsParity(c) && target_rate >= 0.0) c = PredictiveEquality{target_rate};
  return c;
}

void CheckGamma(double gamma) {
  if (!(gamma > 0.0)) throw UsageError("--gamma must be > 0");
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Group-fair post-processing of classifier scores"};
  app.require_subcommand(1);

  SchemaFlags schema;
  std::string input, output, model_path, criterion_name = "parity", lr_text = "auto";
  std::string trace_path, csv_path, method = "sgd", instance_path, spec_path, fractions_text;
  double gamma = 0.01, target_rate = -1.0, rate = -1.0;
  std::uint64_t steps = 100000, seed = 0, n = 0;
  bool shuffle = false;

  auto* fit = app.add_subcommand("fit", "Learn per-group thresholds");
  fit->add_option("--input", input, "Training CSV")->required();
  fit->add_option("--criterion", criterion_name, "parity | equality");
  fit->add_option("--target-rate", target_rate,
                  "Positive rate for --criterion equality (default: unadjusted rate)");
  fit->add_option("--gamma", gamma, "Randomization width");
  fit->add_option("--steps", steps, "SGD steps");
  fit->add_option("--lr", lr_text, "auto | preset | <value>");
  fit->add_option("--seed", seed, "Sampling seed");
  fit->add_option("--method", method, "sgd | oracle");
  fit->add_flag("--shuffle", shuffle, "Sample in shuffled epochs instead of with replacement");
  fit->add_option("--out", output, "Model file")->required();
  fit->add_option("--trace", trace_path, "Trace CSV (default <out>.trace.csv)");
  schema.Register(fit);

  auto* apply = app.add_subcommand("apply", "Apply a model; writes q and sampled labels");
  apply->add_option("--input", input)->required();
  apply->add_option("--model", model_path)->required();
  apply->add_option("--out", output)->required();
  apply->add_option("--seed", seed, "Seed for sampled labels");
  schema.Register(apply);

  auto* audit = app.add_subcommand("audit", "Bias report before (and after) adjustment");
  audit->add_option("--input", input)->required();
  audit->add_option("--model", model_path, "Model to evaluate (optional)");
  audit->add_option("--criterion", criterion_name, "Criterion when no model is given");
  audit->add_option("--target-rate", target_rate);
  audit->add_option("--out", output, "key=value report")->required();
  audit->add_option("--csv", csv_path, "Per-group CSV report");
  schema.Register(audit);

  auto* check = app.add_subcommand("oracle-check", "SGD suboptimality against the exact dual");
  check->add_option("--input", input)->required();
  check->add_option("--criterion", criterion_name);
  check->add_option("--target-rate", target_rate);
  check->add_option("--gamma", gamma);
  check->add_option("--steps", steps);
  check->add_option("--lr", lr_text);
  check->add_option("--seed", seed);
  schema.Register(check);

  auto* bound = app.add_subcommand("bound", "Accuracy/fairness tradeoff lower bound");
  bound->add_option("--instance", instance_path, "mass, eta, propensity, group[, prediction]")
      ->required();

  auto* bayes = app.add_subcommand("bayes", "Bayes-optimal fair rule on a finite instance");
  bayes->add_option("--instance", instance_path)->required();
  bayes->add_option("--criterion", criterion_name);
  bayes->add_option("--rate", rate, "Positive rate for --criterion equality");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic scored cohort");
  synth->add_option("--spec", spec_path)->required();
  synth->add_option("--n", n)->required();
  synth->add_option("--seed", seed);
  synth->add_option("--out", output)->required();

  auto* split = app.add_subcommand("split", "Seeded train/calibration/test split");
  split->add_option("--input", input)->required();
  split->add_option("--fractions", fractions_text, "Comma-separated, default 0.6,0.2,0.2");
  split->add_option("--seed", seed);
  split->add_option("--out-prefix", output)->required();

  auto* calibrate = app.add_subcommand("calibrate", "Fit logistic calibration of margins");
  calibrate->add_option("--input", input)->required();
  calibrate->add_option("--margin-column", schema.margin_column)->required();
  calibrate->add_option("--label-column", schema.label_column);
  calibrate->add_option("--out", output)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fit->parsed()) {
      CheckGamma(gamma);
      const Criterion requested = CriterionFromFlags(criterion_name, target_rate);
      const IngestResult data = IngestFile(input, schema.Build(IsParity(requested)));
      const Criterion criterion = ResolveCriterion(requested, data.cohort);
      ModelFile file;
      file.group_labels = data.group_labels;
      file.fit.n = data.cohort.size();
      file.fit.seed = seed;
      if (method == "oracle") {
        file.model = OracleModel(data.cohort, criterion, gamma);
        file.fit.method = "oracle";
        file.fit.learning_rate = "none";
      } else if (method == "sgd") {
        SgdConfig config;
        config.steps = steps;
        config.learning_rate = LearningRate::Parse(lr_text);
        config.seed = seed;
        config.sampling = shuffle ? SamplingMode::kShuffledEpochs : SamplingMode::kWithReplacement;
        FitResult result = Fit(data.cohort, criterion, gamma, config);
        file.model = std::move(result.model);
        file.fit.steps = steps;
        file.fit.learning_rate = config.learning_rate.ToString();
        file.fit.alpha = result.trace.learning_rate;
        auto trace = OpenOut(trace_path.empty() ? output + ".trace.csv" : trace_path);
        WriteTraceCsv(trace, result.trace);
      } else {
        throw UsageError("--method must be sgd or oracle");
      }
      auto model_out = OpenOut(output);
      WriteModelFile(model_out, file);
      WriteIngestReport(out, data);
      const auto q = DecideAll(data.cohort, file.model);
      const auto residual = ResidualBias(data.cohort, q, file.model);
      for (std::size_t k = 0; k < residual.size(); ++k) {
        out << "group." << k << ".mu=" << FormatDouble(file.model.mu[k]) << '\n'
            << "group." << k << ".residual=" << FormatDouble(residual[k]) << '\n';
      }
      return kExitOk;
    }

    if (apply->parsed()) {
      auto model_in = OpenIn(model_path);
      const ModelFile file = ReadModelFile(model_in);
      IngestSchema s = schema.Build(IsParity(file.model.criterion));
      s.known_groups = file.group_labels;
      const IngestResult data = IngestFile(input, s);
      const auto q = DecideAll(data.cohort, file.model);
      const auto labels = SampleAll(q, seed);
      auto csv = OpenOut(output);
      std::vector<std::string> header = data.table.header;
      header.push_back("q");
      header.push_back("sampled_label");
      WriteCsvRow(csv, header);
      for (std::size_t i = 0; i < data.table.rows.size(); ++i) {
        std::vector<std::string> row = data.table.rows[i];
        row.push_back(FormatDouble(q[i]));
        row.push_back(labels[i] ? "1" : "0");
        WriteCsvRow(csv, row);
      }
      out << "rows=" << q.size() << '\n' << "clamped=" << data.report.clamped << '\n';
      return kExitOk;
    }

    if (audit->parsed()) {
      std::optional<ModelFile> file;
      if (!model_path.empty()) {
        auto model_in = OpenIn(model_path);
        file = ReadModelFile(model_in);
      }
      const Criterion requested =
          file ? file->model.criterion : CriterionFromFlags(criterion_name, target_rate);
      IngestSchema s = schema.Build(IsParity(requested));
      if (file) s.known_groups = file->group_labels;
      const IngestResult data = IngestFile(input, s);
      const Criterion criterion = ResolveCriterion(requested, data.cohort);

      std::vector<std::pair<std::string, BiasReport>> reports;
      reports.emplace_back("before", BuildBiasReport(data.cohort, UnadjustedDecisions(data.cohort),
                                                     criterion, data.group_labels));
      if (file) {
        const auto q = DecideAll(data.cohort, file->model);
        reports.emplace_back("after", BuildBiasReport(data.cohort, q, criterion, data.group_labels));
      }
      auto kv = OpenOut(output);
      for (const auto& [stage, report] : reports) WriteKeyValue(kv, report, stage + ".");
      if (!csv_path.empty()) {
        auto csv = OpenOut(csv_path);
        WriteCsv(csv, reports);
      }
      for (const auto& [stage, report] : reports) {
        for (std::size_t k = 0; k < report.groups.size(); ++k) {
          out << stage << ".group." << k << ".residual="
              << FormatDouble(report.groups[k].residual) << '\n';
        }
      }
      return kExitOk;
    }

    if (check->parsed()) {
      CheckGamma(gamma);
      const Criterion requested = CriterionFromFlags(criterion_name, target_rate);
      const IngestResult data = IngestFile(input, schema.Build(IsParity(requested)));
      const Criterion criterion = ResolveCriterion(requested, data.cohort);
      SgdConfig config;
      config.steps = steps;
      config.learning_rate = LearningRate::Parse(lr_text);
      config.seed = seed;
      const FitResult fitted = Fit(data.cohort, criterion, gamma, config);
      const QpSolution exact = SolveQp(data.cohort, criterion, gamma);
      const double f_sgd = MeanObjective(fitted.model.mu, data.cohort, fitted.model);
      const double f_star = exact.dual_objective / static_cast<double>(data.cohort.size());
      const double b = fitted.model.linear_coefficient();
      const double limit = SuboptimalityBound(gamma, b, data.cohort.group_count(), steps);
      out << "objective_sgd=" << FormatDouble(f_sgd) << '\n'
          << "objective_oracle=" << FormatDouble(f_star) << '\n'
          << "gap=" << FormatDouble(f_sgd - f_star) << '\n'
          << "bound=" << FormatDouble(limit) << '\n'
          << "within_bound=" << (f_sgd - f_star <= limit ? "yes" : "no") << '\n';
      for (std::size_t k = 0; k < exact.mu.size(); ++k) {
        out << "group." << k << ".mu_sgd=" << FormatDouble(fitted.model.mu[k]) << '\n'
            << "group." << k << ".mu_oracle=" << FormatDouble(exact.mu[k]) << '\n';
      }
      return kExitOk;
    }

    if (bound->parsed()) {
      auto in = OpenIn(instance_path);
      std::vector<std::uint8_t> predictions;
      const DiscreteInstance instance = ReadDiscreteInstance(in, &predictions);
      ImpossibilityInput input_bound;
      for (std::size_t i = 0; i < instance.points.size(); ++i) {
        const auto& p = instance.points[i];
        input_bound.mass.push_back(p.mass);
        input_bound.propensity.push_back(p.propensity);
        input_bound.prediction.push_back(predictions.empty() ? (p.eta > 0.5 ? 1 : 0)
                                                             : predictions[i]);
      }
      const ImpossibilityResult r = ImpossibilityBound(input_bound);
      out << "lower_bound=" << FormatDouble(r.lower_bound) << '\n'
          << "witness_lhs=" << FormatDouble(r.witness_lhs) << '\n'
          << "witness=";
      for (auto w : r.witness) out << static_cast<int>(w);
      out << '\n';
      return kExitOk;
    }

    if (bayes->parsed()) {
      auto in = OpenIn(instance_path);
      const DiscreteInstance instance = ReadDiscreteInstance(in);
      const Criterion c = ParseCriterion(criterion_name);
      AffineConstraint constraint;
      if (IsParity(c)) {
        constraint = StatisticalParityConstraint(instance);
      } else {
        if (rate < 0.0) throw UsageError("--criterion equality needs --rate");
        constraint = PredictiveEqualityConstraint(instance, rate);
      }
      const BayesOptimalRule rule = BayesOptimalDiscrete(instance, constraint);
      for (std::size_t i = 0; i < rule.probability.size(); ++i) {
        out << "point." << i << ".probability=" << FormatDouble(rule.probability[i]) << '\n';
      }
      for (std::size_t k = 0; k < rule.threshold.size(); ++k) {
        out << "group." << k << ".threshold=" << FormatDouble(rule.threshold[k]) << '\n'
            << "group." << k << ".randomization=" << FormatDouble(rule.randomization[k]) << '\n'
            << "group." << k << ".pure_threshold=" << (rule.pure_threshold[k] ? 1 : 0) << '\n';
      }
      out << "error_rate=" << FormatDouble(rule.error_rate) << '\n';
      return kExitOk;
    }

    if (synth->parsed()) {
      auto in = OpenIn(spec_path);
      const SynthSpec spec = SynthSpec::Read(in);
      const Cohort cohort = Synthesize(spec, n, seed);
      auto csv = OpenOut(output);
      csv << "score,group,sensitive,label\n";
      for (const auto& e : cohort.examples()) {
        csv << FormatDouble(e.score) << ",g" << e.group << ',' << (e.sensitive ? 1 : 0) << ','
            << (*e.label ? 1 : 0) << '\n';
      }
      out << "rows=" << cohort.size() << '\n';
      return kExitOk;
    }

    if (split->parsed()) {
      std::vector<double> fractions{0.6, 0.2, 0.2};
      if (!fractions_text.empty()) {
        fractions.clear();
        std::stringstream ss(fractions_text);
        for (std::string part; std::getline(ss, part, ',');) {
          double v = 0.0;
          if (!ParseDouble(part, &v) || v < 0.0) throw UsageError("bad --fractions entry");
          fractions.push_back(v);
        }
      }
      double total = 0.0;
      for (double f : fractions) total += f;
      if (fractions.size() != 3 || std::abs(total - 1.0) > 1e-9) {
        throw UsageError("--fractions needs three values summing to 1");
      }
      auto in = OpenIn(input);
      const CsvTable table = ReadCsv(in);
      const std::size_t rows = table.rows.size();
      std::vector<std::size_t> order(rows);
      for (std::size_t i = 0; i < rows; ++i) order[i] = i;
      CounterRng rng(seed, /*stream=*/3);
      for (std::size_t i = rows; i > 1; --i) std::swap(order[i - 1], order[rng.UniformIndex(i)]);
      const auto train_end = static_cast<std::size_t>(std::llround(fractions[0] * rows));
      const auto calib_end =
          std::min(rows, train_end + static_cast<std::size_t>(std::llround(fractions[1] * rows)));
      const std::pair<const char*, std::pair<std::size_t, std::size_t>> parts[] = {
          {"train", {0, train_end}}, {"calibration", {train_end, calib_end}},
          {"test", {calib_end, rows}}};
      for (const auto& [name, range] : parts) {
        std::vector<std::size_t> chosen(order.begin() + static_cast<std::ptrdiff_t>(range.first),
                                        order.begin() + static_cast<std::ptrdiff_t>(range.second));
        std::sort(chosen.begin(), chosen.end());
        auto csv = OpenOut(output + "." + name + ".csv");
        WriteCsvRow(csv, table.header);
        for (std::size_t i : chosen) WriteCsvRow(csv, table.rows[i]);
        out << name << "=" << chosen.size() << '\n';
      }
      return kExitOk;
    }

    if (calibrate->parsed()) {
      auto in = OpenIn(input);
      const CsvTable table = ReadCsv(in);
      const auto m_col = table.column(schema.margin_column);
      const auto y_col = table.column(schema.label_column);
      if (!m_col) throw DataError("missing margin column '" + schema.margin_column + "'");
      if (!y_col) throw DataError("missing label column '" + schema.label_column + "'");
      std::vector<double> margins;
      std::vector<std::uint8_t> labels;
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string where = "row " + std::to_string(r + 1);
        double m = 0.0;
        if (!ParseDouble(table.rows[r][*m_col], &m)) throw DataError(where + ": non-numeric margin");
        margins.push_back(m);
        labels.push_back(ParseBool(table.rows[r][*y_col], where) ? 1 : 0);
      }
      const CalibrationResult result = Calibrate(margins, labels);
      auto params_out = OpenOut(output);
      WriteCalibration(params_out, result.params);
      out << "a=" << FormatDouble(result.params.a) << '\n'
          << "b=" << FormatDouble(result.params.b) << '\n'
          << "iterations=" << result.iterations << '\n'
          << "converged=" << (result.converged ? 1 : 0) << '\n';
      if (result.separated) err << "warning: labels are perfectly separated by the margin\n";
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace fairpost
