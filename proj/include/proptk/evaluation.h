// Copyright 2026 The proptk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PROPTK_EVALUATION_H_
#define PROPTK_EVALUATION_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "proptk/corpus.h"

namespace proptk {

using CountMatrix =
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using CountVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

// Rows are gold labels, columns predictions. Unparseable predictions are
// tallied per gold row in `unparseable`.
struct ConfusionMatrix {
  std::vector<int> labels;
  CountMatrix counts;
  CountVector unparseable;
  // Predictions whose item had no gold label; not counted.
  std::vector<std::string> excluded_items;

  std::size_t IndexOf(int label) const;
  std::int64_t total() const { return counts.sum() + unparseable.sum(); }
};

// Tallies `predictions` at `level` (kMain or kHigh) against `gold`. Items
// without gold are excluded with a warning. Gold or predicted ids outside
// `labels` raise ValidationError.
ConfusionMatrix Confusion(const std::map<std::string, int>& gold,
                          std::span<const PredictionRecord> predictions,
                          LabelLevel level, const std::vector<int>& labels);

// Collapses to labels {0 = non-propaganda, 1 = propaganda}.
ConfusionMatrix BinaryCollapse(const ConfusionMatrix& confusion,
                               int non_propaganda_label);

struct ClassScore {
  int label = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
  std::int64_t predicted = 0;
  // No support and no predictions: F1 is undefined and scored as 0.
  bool undefined = false;
};

struct ScoreReport {
  std::vector<ClassScore> classes;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  double accuracy = 0.0;
  // Macro-F1 without the excluded (non-propaganda) class, when requested.
  std::optional<int> excluded_label;
  std::optional<double> macro_f1_excluding;
  std::int64_t n_items = 0;
  std::int64_t n_unparseable = 0;
};

// Per-class P/R/F1 with 0 for every vanishing denominator. Unparseable
// predictions are false negatives of their gold class. Throws
// PreconditionError on an empty matrix.
ScoreReport Scores(const ConfusionMatrix& confusion,
                   std::optional<int> excluded_label = std::nullopt);

nlohmann::ordered_json ScoreReportToJson(const ScoreReport& report);
// Header "gold\pred,<ids...>,unparseable".
std::string ConfusionToCsv(const ConfusionMatrix& confusion);
nlohmann::ordered_json ConfusionToJson(const ConfusionMatrix& confusion);

// One cell of a results table.
struct ResultRow {
  std::string schema;
  std::string regime;
  Strategy strategy = Strategy::kDirectHigh;
  std::string model;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
};

// CSV with header schema,regime,strategy,model,macro_f1,weighted_f1.
std::vector<ResultRow> ReadResultsCsv(std::istream& in,
                                      std::string_view source = "<stream>");

// Markdown table with one row per (schema, regime, strategy) and an M and W
// column per model, in first-appearance order. The best value of each
// column within a schema block is bold.
std::string RenderResultsTable(std::span<const ResultRow> rows);

}  // namespace proptk

#endif  // PROPTK_EVALUATION_H_
