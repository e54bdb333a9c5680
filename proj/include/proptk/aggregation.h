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

// Dawid-Skene EM over multi-annotator nominal labels.
//
// Each item has a latent true class c with prior p_c; annotator a reports
// label l with probability pi_a[c][l], independently of the other reports.
// The EM here maximises the log-likelihood plus a symmetric Dirichlet
// pseudo-count penalty, so with pseudo_count > 0 the monotone quantity is
// `objective`, which equals `log_likelihood` when pseudo_count == 0.
//
// An annotator may report several labels on one item (multi-label technique
// sets); each report is then an independent observation.

#ifndef PROPTK_AGGREGATION_H_
#define PROPTK_AGGREGATION_H_

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "proptk/agreement.h"
#include "proptk/corpus.h"

namespace proptk {

struct DSConfig {
  int max_iterations = 200;
  double tolerance = 1e-7;     // on the objective delta
  double pseudo_count = 0.01;  // Dirichlet smoothing in the M-step

  void Validate() const;
};

// Observed reports, label ids sorted ascending.
struct DSData {
  std::vector<std::string> items;
  std::vector<std::string> annotators;
  std::vector<int> labels;
  // Per item: (annotator index, label id) for every report.
  std::vector<std::vector<std::pair<std::size_t, int>>> observations;
};

// Reports at `level`: kMain (prominent technique), kHigh, or kTechniques
// (every technique marked present).
DSData BuildDSData(const AnnotationSet& set, LabelLevel level);
DSData DSDataFromTable(const RatingTable& table);

struct DSModel {
  std::vector<int> labels;
  std::vector<std::string> items;
  std::vector<std::string> annotators;

  Eigen::VectorXd class_priors;
  // One K x K row-stochastic matrix per annotator: rows true, cols reported.
  std::vector<Eigen::MatrixXd> annotator_confusions;
  Eigen::MatrixXd item_posteriors;  // items x K
  // Distinct label ids reported on each item, ascending.
  std::vector<std::vector<int>> item_observed_labels;

  double log_likelihood = 0.0;
  double objective = 0.0;
  std::vector<double> objective_trace;  // one entry per EM iteration
  int iterations = 0;
  bool converged = false;

  std::size_t LabelIndex(int label) const;
  int MapLabel(std::size_t item) const;
};

// Throws PreconditionError on empty input or fewer than 2 distinct labels.
// Runs to the tolerance or max_iterations; check `converged`. A single
// annotator stops after one EM step (the model is not identifiable).
DSModel RunDawidSkene(const DSData& data, const DSConfig& config = {});

// Mean posterior over items whose reports include `label`, renormalised.
// Throws PreconditionError if the label was never reported.
Eigen::VectorXd PosteriorProfile(const DSModel& model, int label);

nlohmann::ordered_json DSModelToJson(const DSModel& model);
DSModel DSModelFromJson(const nlohmann::json& json);

}  // namespace proptk

#endif  // PROPTK_AGGREGATION_H_
