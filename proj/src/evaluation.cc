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

#include "proptk/evaluation.h"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "proptk/diagnostics.h"
#include "proptk/error.h"

namespace proptk {
namespace {

std::string Fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::vector<std::string> SplitCsvLine(std::string_view line,
                                      const std::string& where) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back().push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back().push_back(c);
    }
  }
  if (quoted) throw ValidationError(where + "unterminated quote");
  return fields;
}

double ParseScore(const std::string& text, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw ValidationError(where + "bad score '" + text + "'");
  }
  return v;
}

std::string_view StrategyLabel(Strategy s) {
  return s == Strategy::kDirectHigh ? "Direct" : "M→H";
}

}  // namespace

std::size_t ConfusionMatrix::IndexOf(int label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    throw ValidationError("label " + std::to_string(label) +
                          " is not in the confusion matrix");
  }
  return static_cast<std::size_t>(it - labels.begin());
}

ConfusionMatrix Confusion(const std::map<std::string, int>& gold,
                          std::span<const PredictionRecord> predictions,
                          LabelLevel level, const std::vector<int>& labels) {
  if (level == LabelLevel::kTechniques) {
    throw PreconditionError("confusion needs a single-label level");
  }
  ConfusionMatrix cm;
  cm.labels = labels;
  std::sort(cm.labels.begin(), cm.labels.end());
  if (std::adjacent_find(cm.labels.begin(), cm.labels.end()) !=
      cm.labels.end()) {
    throw ValidationError("duplicate label in confusion label list");
  }
  const auto n = static_cast<Eigen::Index>(cm.labels.size());
  cm.counts = CountMatrix::Zero(n, n);
  cm.unparseable = CountVector::Zero(n);

  for (const PredictionRecord& p : predictions) {
    auto g = gold.find(p.item_id);
    if (g == gold.end()) {
      cm.excluded_items.push_back(p.item_id);
      continue;
    }
    auto row = static_cast<Eigen::Index>(cm.IndexOf(g->second));
    std::optional<int> pred;
    if (p.parsed()) {
      if (level == LabelLevel::kHigh) {
        pred = p.high_pred;
      } else if (p.main_pred) {
        pred = p.main_pred;
      } else {
        throw PreconditionError("prediction for " + p.item_id +
                                " carries no fine-grained label");
      }
    }
    if (pred) {
      cm.counts(row, static_cast<Eigen::Index>(cm.IndexOf(*pred))) += 1;
    } else {
      cm.unparseable(row) += 1;
    }
  }
  if (!cm.excluded_items.empty()) {
    std::sort(cm.excluded_items.begin(), cm.excluded_items.end());
    std::string list;
    for (std::size_t i = 0; i < cm.excluded_items.size() && i < 10; ++i) {
      list += (i ? ", " : "") + cm.excluded_items[i];
    }
    if (cm.excluded_items.size() > 10) list += ", ...";
    Warn(std::to_string(cm.excluded_items.size()) +
         " prediction(s) without a gold label excluded: " + list);
  }
  return cm;
}

ConfusionMatrix BinaryCollapse(const ConfusionMatrix& confusion,
                               int non_propaganda_label) {
  const auto np = static_cast<Eigen::Index>(confusion.IndexOf(non_propaganda_label));
  auto side = [np](Eigen::Index i) -> Eigen::Index { return i == np ? 0 : 1; };
  ConfusionMatrix out;
  out.labels = {0, 1};
  out.counts = CountMatrix::Zero(2, 2);
  out.unparseable = CountVector::Zero(2);
  out.excluded_items = confusion.excluded_items;
  for (Eigen::Index r = 0; r < confusion.counts.rows(); ++r) {
    for (Eigen::Index c = 0; c < confusion.counts.cols(); ++c) {
      out.counts(side(r), side(c)) += confusion.counts(r, c);
    }
    out.unparseable(side(r)) += confusion.unparseable(r);
  }
  return out;
}

ScoreReport Scores(const ConfusionMatrix& confusion,
                   std::optional<int> excluded_label) {
  ScoreReport report;
  report.n_items = confusion.total();
  report.n_unparseable = confusion.unparseable.sum();
  if (confusion.labels.empty() || report.n_items == 0) {
    throw PreconditionError("cannot score an empty confusion matrix");
  }
  if (excluded_label) confusion.IndexOf(*excluded_label);

  std::int64_t correct = 0;
  double weighted = 0.0;
  double macro_sum = 0.0;
  double macro_excl_sum = 0.0;
  std::size_t macro_excl_n = 0;
  for (std::size_t i = 0; i < confusion.labels.size(); ++i) {
    auto k = static_cast<Eigen::Index>(i);
    ClassScore s;
    s.label = confusion.labels[i];
    std::int64_t tp = confusion.counts(k, k);
    s.support = confusion.counts.row(k).sum() + confusion.unparseable(k);
    s.predicted = confusion.counts.col(k).sum();
    s.precision = s.predicted > 0 ? static_cast<double>(tp) /
                                        static_cast<double>(s.predicted)
                                  : 0.0;
    s.recall = s.support > 0 ? static_cast<double>(tp) /
                                   static_cast<double>(s.support)
                             : 0.0;
    s.f1 = s.precision + s.recall > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    s.undefined = s.support == 0 && s.predicted == 0;
    if (s.undefined) {
      Warn("class " + std::to_string(s.label) +
           " has no support and no predictions; F1 scored as 0");
    }
    correct += tp;
    weighted += static_cast<double>(s.support) * s.f1;
    macro_sum += s.f1;
    if (!excluded_label || *excluded_label != s.label) {
      macro_excl_sum += s.f1;
      ++macro_excl_n;
    }
    report.classes.push_back(s);
  }
  const double n = static_cast<double>(report.n_items);
  report.macro_f1 = macro_sum / static_cast<double>(confusion.labels.size());
  report.weighted_f1 = weighted / n;
  report.accuracy = static_cast<double>(correct) / n;
  if (excluded_label) {
    report.excluded_label = excluded_label;
    report.macro_f1_excluding =
        macro_excl_n > 0 ? macro_excl_sum / static_cast<double>(macro_excl_n)
                         : 0.0;
  }
  return report;
}

nlohmann::ordered_json ScoreReportToJson(const ScoreReport& report) {
  nlohmann::ordered_json j;
  j["n_items"] = report.n_items;
  j["n_unparseable"] = report.n_unparseable;
  j["accuracy"] = report.accuracy;
  j["macro_f1"] = report.macro_f1;
  j["weighted_f1"] = report.weighted_f1;
  if (report.excluded_label) {
    j["macro_f1_excluding_label"] = *report.excluded_label;
    j["macro_f1_excluding"] = *report.macro_f1_excluding;
  }
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (const ClassScore& s : report.classes) {
    nlohmann::ordered_json c;
    c["label"] = s.label;
    c["precision"] = s.precision;
    c["recall"] = s.recall;
    c["f1"] = s.f1;
    c["support"] = s.support;
    c["predicted"] = s.predicted;
    c["undefined"] = s.undefined;
    classes.push_back(std::move(c));
  }
  j["classes"] = std::move(classes);
  return j;
}

std::string ConfusionToCsv(const ConfusionMatrix& confusion) {
  std::ostringstream out;
  out << "gold\\pred";
  for (int label : confusion.labels) out << ',' << label;
  out << ",unparseable\n";
  for (std::size_t i = 0; i < confusion.labels.size(); ++i) {
    auto r = static_cast<Eigen::Index>(i);
    out << confusion.labels[i];
    for (Eigen::Index c = 0; c < confusion.counts.cols(); ++c) {
      out << ',' << confusion.counts(r, c);
    }
    out << ',' << confusion.unparseable(r) << '\n';
  }
  return out.str();
}

nlohmann::ordered_json ConfusionToJson(const ConfusionMatrix& confusion) {
  nlohmann::ordered_json j;
  j["labels"] = confusion.labels;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < confusion.counts.rows(); ++r) {
    std::vector<std::int64_t> row(confusion.counts.cols());
    for (Eigen::Index c = 0; c < confusion.counts.cols(); ++c) {
      row[static_cast<std::size_t>(c)] = confusion.counts(r, c);
    }
    rows.push_back(row);
  }
  j["counts"] = std::move(rows);
  std::vector<std::int64_t> unp(confusion.unparseable.data(),
                                confusion.unparseable.data() +
                                    confusion.unparseable.size());
  j["unparseable"] = unp;
  j["excluded_items"] = confusion.excluded_items;
  return j;
}

std::vector<ResultRow> ReadResultsCsv(std::istream& in,
                                      std::string_view source) {
  static const std::vector<std::string> kHeader = {
      "schema", "regime", "strategy", "model", "macro_f1", "weighted_f1"};
  std::vector<ResultRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string where =
        std::string(source) + ":" + std::to_string(line_no) + ": ";
    std::vector<std::string> f = SplitCsvLine(line, where);
    if (!header_seen) {
      if (f != kHeader) {
        throw ValidationError(where +
                              "expected header "
                              "schema,regime,strategy,model,macro_f1,"
                              "weighted_f1");
      }
      header_seen = true;
      continue;
    }
    if (f.size() != kHeader.size()) {
      throw ValidationError(where + "expected 6 fields, got " +
                            std::to_string(f.size()));
    }
    ResultRow r;
    r.schema = f[0];
    r.regime = f[1];
    try {
      r.strategy = ParseStrategy(f[2]);
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
    r.model = f[3];
    r.macro_f1 = ParseScore(f[4], where);
    r.weighted_f1 = ParseScore(f[5], where);
    rows.push_back(std::move(r));
  }
  if (!header_seen) {
    throw ValidationError(std::string(source) + ": empty results file");
  }
  return rows;
}

std::string RenderResultsTable(std::span<const ResultRow> rows) {
  using Key = std::tuple<std::string, std::string, Strategy>;
  std::vector<std::string> models;
  std::vector<Key> keys;
  std::map<std::pair<Key, std::string>, const ResultRow*> cells;
  for (const ResultRow& r : rows) {
    if (std::find(models.begin(), models.end(), r.model) == models.end()) {
      models.push_back(r.model);
    }
    Key key{r.schema, r.regime, r.strategy};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      keys.push_back(key);
    }
    if (!cells.emplace(std::make_pair(key, r.model), &r).second) {
      throw ValidationError("duplicate result for " + r.schema + "/" +
                            r.regime + "/" +
                            std::string(StrategyName(r.strategy)) + "/" +
                            r.model);
    }
  }
  // Blocks keep first-appearance order of schemas.
  std::vector<std::string> schemas;
  for (const Key& k : keys) {
    if (std::find(schemas.begin(), schemas.end(), std::get<0>(k)) ==
        schemas.end()) {
      schemas.push_back(std::get<0>(k));
    }
  }

  // Best displayed value per (schema, model, metric).
  std::map<std::tuple<std::string, std::string, int>, std::string> best;
  for (const ResultRow& r : rows) {
    for (int metric = 0; metric < 2; ++metric) {
      std::string v = Fixed3(metric == 0 ? r.macro_f1 : r.weighted_f1);
      auto& b = best[{r.schema, r.model, metric}];
      if (b.empty() || std::stod(v) > std::stod(b)) b = v;
    }
  }

  std::ostringstream out;
  out << "| Schema | Regime | Strategy |";
  for (const std::string& m : models) out << ' ' << m << " M | " << m << " W |";
  out << "\n|---|---|---|";
  for (std::size_t i = 0; i < models.size(); ++i) out << "---:|---:|";
  out << '\n';
  for (const std::string& schema : schemas) {
    bool first = true;
    for (const Key& k : keys) {
      if (std::get<0>(k) != schema) continue;
      out << "| " << (first ? schema : "") << " | " << std::get<1>(k) << " | "
          << StrategyLabel(std::get<2>(k)) << " |";
      first = false;
      for (const std::string& m : models) {
        auto it = cells.find({k, m});
        for (int metric = 0; metric < 2; ++metric) {
          if (it == cells.end()) {
            out << " n/a |";
            continue;
          }
          std::string v = Fixed3(metric == 0 ? it->second->macro_f1
                                             : it->second->weighted_f1);
          if (v == best[{schema, m, metric}]) v = "**" + v + "**";
          out << ' ' << v << " |";
        }
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace proptk
