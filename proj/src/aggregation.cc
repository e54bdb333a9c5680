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

#include "proptk/aggregation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "proptk/diagnostics.h"
#include "proptk/error.h"

namespace proptk {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Params {
  Eigen::VectorXd log_priors;
  std::vector<Eigen::MatrixXd> log_confusions;
  Eigen::VectorXd priors;
  std::vector<Eigen::MatrixXd> confusions;
};

// Observations with label ids replaced by dense indices.
using IndexedObs = std::vector<std::vector<std::pair<std::size_t, std::size_t>>>;

double SafeLog(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

Params MStep(const Eigen::MatrixXd& posteriors, const IndexedObs& obs,
             std::size_t n_annotators, double s) {
  const Eigen::Index k = posteriors.cols();
  const double kd = static_cast<double>(k);
  Params p;
  p.priors = (posteriors.colwise().sum().transpose().array() + s) /
             (static_cast<double>(posteriors.rows()) + kd * s);

  std::vector<Eigen::MatrixXd> counts(n_annotators,
                                      Eigen::MatrixXd::Zero(k, k));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    for (const auto& [a, l] : obs[i]) {
      counts[a].col(static_cast<Eigen::Index>(l)) +=
          posteriors.row(static_cast<Eigen::Index>(i)).transpose();
    }
  }
  p.confusions.resize(n_annotators);
  for (std::size_t a = 0; a < n_annotators; ++a) {
    Eigen::MatrixXd m = counts[a].array() + s;
    for (Eigen::Index c = 0; c < k; ++c) {
      const double row = m.row(c).sum();
      if (row > 0.0) {
        m.row(c) /= row;
      } else {
        // No mass for this class at all (pseudo-count 0): uniform row.
        m.row(c).setConstant(1.0 / kd);
      }
    }
    p.confusions[a] = std::move(m);
  }

  p.log_priors = p.priors.unaryExpr(&SafeLog);
  p.log_confusions.reserve(n_annotators);
  for (const auto& m : p.confusions) {
    p.log_confusions.push_back(m.unaryExpr(&SafeLog));
  }
  return p;
}

// Fills `posteriors` and returns the data log-likelihood.
double EStep(const Params& p, const IndexedObs& obs,
             Eigen::MatrixXd& posteriors) {
  const Eigen::Index k = p.priors.size();
  double ll = 0.0;
  Eigen::VectorXd log_joint(k);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    log_joint = p.log_priors;
    for (const auto& [a, l] : obs[i]) {
      log_joint += p.log_confusions[a].col(static_cast<Eigen::Index>(l));
    }
    const double mx = log_joint.maxCoeff();
    auto row = posteriors.row(static_cast<Eigen::Index>(i));
    if (mx == kNegInf) {
      // Impossible under the current parameters; keep it uniform.
      row.setConstant(1.0 / static_cast<double>(k));
      ll += kNegInf;
      continue;
    }
    Eigen::VectorXd w = (log_joint.array() - mx).exp();
    const double z = w.sum();
    row = (w / z).transpose();
    ll += mx + std::log(z);
  }
  return ll;
}

double Penalty(const Params& p, double s) {
  if (s == 0.0) return 0.0;
  double total = p.log_priors.sum();
  for (const auto& m : p.log_confusions) total += m.sum();
  return s * total;
}

}  // namespace

void DSConfig::Validate() const {
  if (max_iterations < 1) {
    throw PreconditionError("max_iterations must be at least 1");
  }
  if (!(tolerance > 0.0)) throw PreconditionError("tolerance must be > 0");
  if (!(pseudo_count >= 0.0)) {
    throw PreconditionError("pseudo_count must be >= 0");
  }
}

DSData BuildDSData(const AnnotationSet& set, LabelLevel level) {
  DSData data;
  data.annotators = set.Annotators();
  std::map<std::string, std::size_t> column;
  for (std::size_t a = 0; a < data.annotators.size(); ++a) {
    column.emplace(data.annotators[a], a);
  }
  std::set<int> labels;
  for (std::size_t i = 0; i < set.size(); ++i) {
    data.items.push_back(set.items()[i].item_id);
    auto& obs = data.observations.emplace_back();
    for (const auto& r : set.RecordsAt(i)) {
      for (int label : r.Labels(level)) {
        obs.emplace_back(column.at(r.annotator_id), label);
        labels.insert(label);
      }
    }
  }
  data.labels.assign(labels.begin(), labels.end());
  return data;
}

DSData DSDataFromTable(const RatingTable& table) {
  DSData data;
  data.items = table.items;
  data.annotators = table.annotators;
  std::set<int> labels;
  for (const auto& row : table.ratings) {
    auto& obs = data.observations.emplace_back();
    for (std::size_t a = 0; a < row.size(); ++a) {
      if (!row[a]) continue;
      obs.emplace_back(a, *row[a]);
      labels.insert(*row[a]);
    }
  }
  data.labels.assign(labels.begin(), labels.end());
  return data;
}

std::size_t DSModel::LabelIndex(int label) const {
  auto it = std::lower_bound(labels.begin(), labels.end(), label);
  if (it == labels.end() || *it != label) {
    throw PreconditionError("label " + std::to_string(label) +
                            " is not in the model");
  }
  return static_cast<std::size_t>(it - labels.begin());
}

int DSModel::MapLabel(std::size_t item) const {
  Eigen::Index best = 0;
  item_posteriors.row(static_cast<Eigen::Index>(item)).maxCoeff(&best);
  return labels[static_cast<std::size_t>(best)];
}

DSModel RunDawidSkene(const DSData& data, const DSConfig& config) {
  config.Validate();
  const std::size_t n_items = data.observations.size();
  const bool any = std::any_of(data.observations.begin(),
                               data.observations.end(),
                               [](const auto& o) { return !o.empty(); });
  if (n_items == 0 || !any) {
    throw PreconditionError("Dawid-Skene needs at least one rated item");
  }
  if (data.labels.size() < 2) {
    throw PreconditionError(
        "Dawid-Skene needs at least 2 distinct labels; got " +
        std::to_string(data.labels.size()));
  }
  if (!std::is_sorted(data.labels.begin(), data.labels.end())) {
    throw PreconditionError("DSData labels must be sorted");
  }

  DSModel model;
  model.labels = data.labels;
  model.items = data.items;
  model.annotators = data.annotators;
  const auto k = static_cast<Eigen::Index>(data.labels.size());

  IndexedObs obs(n_items);
  model.item_observed_labels.resize(n_items);
  for (std::size_t i = 0; i < n_items; ++i) {
    std::set<int> seen;
    for (const auto& [a, label] : data.observations[i]) {
      if (a >= data.annotators.size()) {
        throw PreconditionError("observation names an unknown annotator");
      }
      obs[i].emplace_back(a, model.LabelIndex(label));
      seen.insert(label);
    }
    model.item_observed_labels[i].assign(seen.begin(), seen.end());
  }

  // Majority-vote initialisation: each item's vote shares.
  Eigen::MatrixXd posteriors = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(n_items), k);
  for (std::size_t i = 0; i < n_items; ++i) {
    auto row = posteriors.row(static_cast<Eigen::Index>(i));
    if (obs[i].empty()) {
      row.setConstant(1.0 / static_cast<double>(k));
      continue;
    }
    for (const auto& [a, l] : obs[i]) row(static_cast<Eigen::Index>(l)) += 1.0;
    row /= static_cast<double>(obs[i].size());
  }

  // One annotator leaves the model unidentifiable: every factorisation of
  // the label marginal is a likelihood maximum, and smoothing alone would
  // drift EM towards a collapsed solution. Stop at the first fixed-point
  // candidate, which reproduces the annotator's labels.
  int max_iterations = config.max_iterations;
  const bool single_annotator = data.annotators.size() == 1;
  if (single_annotator) {
    Warn("single annotator: Dawid-Skene is not identifiable; "
         "stopping after one EM step");
    max_iterations = 1;
  }

  Params params;
  double previous = kNegInf;
  for (int iter = 1; iter <= max_iterations; ++iter) {
    params = MStep(posteriors, obs, data.annotators.size(),
                   config.pseudo_count);
    const double ll = EStep(params, obs, posteriors);
    const double objective = ll + Penalty(params, config.pseudo_count);
    model.objective_trace.push_back(objective);
    model.iterations = iter;
    model.log_likelihood = ll;
    model.objective = objective;
    if (iter > 1 && objective - previous < config.tolerance) {
      model.converged = true;
      break;
    }
    previous = objective;
  }

  if (single_annotator) model.converged = true;
  model.class_priors = params.priors;
  model.annotator_confusions = params.confusions;
  model.item_posteriors = std::move(posteriors);
  return model;
}

Eigen::VectorXd PosteriorProfile(const DSModel& model, int label) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(model.labels.size()));
  std::size_t used = 0;
  for (std::size_t i = 0; i < model.item_observed_labels.size(); ++i) {
    const auto& seen = model.item_observed_labels[i];
    if (!std::binary_search(seen.begin(), seen.end(), label)) continue;
    sum += model.item_posteriors.row(static_cast<Eigen::Index>(i)).transpose();
    ++used;
  }
  if (used == 0) {
    throw PreconditionError("label " + std::to_string(label) +
                            " was never reported");
  }
  const double total = sum.sum();
  return total > 0.0 ? Eigen::VectorXd(sum / total) : sum;
}

nlohmann::ordered_json DSModelToJson(const DSModel& model) {
  using nlohmann::ordered_json;
  const auto row_vector = [](const auto& row) {
    std::vector<double> v(static_cast<std::size_t>(row.size()));
    for (Eigen::Index c = 0; c < row.size(); ++c) {
      v[static_cast<std::size_t>(c)] = row(c);
    }
    return v;
  };
  ordered_json j;
  j["labels"] = model.labels;
  j["class_priors"] = row_vector(model.class_priors);
  ordered_json confusions = ordered_json::object();
  for (std::size_t a = 0; a < model.annotators.size(); ++a) {
    ordered_json rows = ordered_json::array();
    const auto& m = model.annotator_confusions[a];
    for (Eigen::Index c = 0; c < m.rows(); ++c) rows.push_back(row_vector(m.row(c)));
    confusions[model.annotators[a]] = std::move(rows);
  }
  j["annotator_confusions"] = std::move(confusions);
  ordered_json items = ordered_json::array();
  for (std::size_t i = 0; i < model.items.size(); ++i) {
    items.push_back(
        {{"item_id", model.items[i]},
         {"posterior",
          row_vector(model.item_posteriors.row(static_cast<Eigen::Index>(i)))},
         {"observed_labels", model.item_observed_labels[i]}});
  }
  j["items"] = std::move(items);
  j["log_likelihood"] = model.log_likelihood;
  j["objective"] = model.objective;
  j["objective_trace"] = model.objective_trace;
  j["iterations"] = model.iterations;
  j["converged"] = model.converged;
  return j;
}

DSModel DSModelFromJson(const nlohmann::json& j) {
  try {
    DSModel model;
    model.labels = j.at("labels").get<std::vector<int>>();
    const auto k = static_cast<Eigen::Index>(model.labels.size());
    const auto priors = j.at("class_priors").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(priors.size()) != k) {
      throw ValidationError("class_priors size mismatch");
    }
    model.class_priors = Eigen::Map<const Eigen::VectorXd>(priors.data(), k);
    // nlohmann::json objects iterate in key order; that is the annotator order.
    for (const auto& [annotator, rows] : j.at("annotator_confusions").items()) {
      model.annotators.push_back(annotator);
      Eigen::MatrixXd m(k, k);
      if (static_cast<Eigen::Index>(rows.size()) != k) {
        throw ValidationError("confusion size mismatch for " + annotator);
      }
      for (Eigen::Index c = 0; c < k; ++c) {
        const auto row = rows.at(static_cast<std::size_t>(c))
                             .get<std::vector<double>>();
        if (static_cast<Eigen::Index>(row.size()) != k) {
          throw ValidationError("confusion size mismatch for " + annotator);
        }
        for (Eigen::Index l = 0; l < k; ++l) {
          m(c, l) = row[static_cast<std::size_t>(l)];
        }
      }
      model.annotator_confusions.push_back(std::move(m));
    }
    const auto& items = j.at("items");
    model.item_posteriors.resize(static_cast<Eigen::Index>(items.size()), k);
    for (std::size_t i = 0; i < items.size(); ++i) {
      model.items.push_back(items[i].at("item_id").get<std::string>());
      const auto post = items[i].at("posterior").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(post.size()) != k) {
        throw ValidationError("posterior size mismatch");
      }
      for (Eigen::Index c = 0; c < k; ++c) {
        model.item_posteriors(static_cast<Eigen::Index>(i), c) =
            post[static_cast<std::size_t>(c)];
      }
      model.item_observed_labels.push_back(
          items[i].at("observed_labels").get<std::vector<int>>());
    }
    model.log_likelihood = j.value("log_likelihood", 0.0);
    model.objective = j.value("objective", 0.0);
    model.objective_trace =
        j.value("objective_trace", std::vector<double>{});
    model.iterations = j.value("iterations", 0);
    model.converged = j.value("converged", false);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed DS model: ") + e.what());
  }
}

}  // namespace proptk
