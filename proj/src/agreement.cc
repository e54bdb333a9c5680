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

#include "proptk/agreement.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "proptk/diagnostics.h"
#include "proptk/error.h"

namespace proptk {
namespace {

// Chance-corrected ratio (observed - expected) / (1 - expected).
double ChanceCorrected(double observed, double expected, const char* what) {
  if (1.0 - expected <= 1e-15) {
    throw UndefinedStatistic(std::string(what) +
                             " is undefined: chance agreement is 1");
  }
  return (observed - expected) / (1.0 - expected);
}

// Dense label index over every label in the table.
std::unordered_map<int, std::size_t> IndexLabels(const RatingTable& table) {
  std::set<int> labels;
  for (const auto& row : table.ratings) {
    for (const auto& r : row) {
      if (r) labels.insert(*r);
    }
  }
  std::unordered_map<int, std::size_t> index;
  for (int label : labels) index.emplace(label, index.size());
  return index;
}

struct Coincidences {
  std::vector<double> value_totals;  // n_c
  double total = 0.0;                // n
  double disagreement = 0.0;         // sum over c != k of o_ck
};

Coincidences BuildCoincidences(
    const RatingTable& table,
    const std::unordered_map<int, std::size_t>& index) {
  Coincidences out;
  out.value_totals.assign(index.size(), 0.0);
  std::vector<double> counts(index.size());
  for (const auto& row : table.ratings) {
    std::fill(counts.begin(), counts.end(), 0.0);
    double m = 0.0;
    for (const auto& r : row) {
      if (!r) continue;
      counts[index.at(*r)] += 1.0;
      m += 1.0;
    }
    if (m < 2.0) continue;
    // Ordered pairs of values from distinct raters, weighted by 1/(m - 1).
    double agreeing = 0.0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      agreeing += counts[c] * (counts[c] - 1.0);
      out.value_totals[c] += counts[c];
    }
    out.disagreement += (m * (m - 1.0) - agreeing) / (m - 1.0);
    out.total += m;
  }
  return out;
}

// D_e * n * (n - 1), i.e. ordered pairs of pairable values that differ.
double ExpectedDisagreeingPairs(const std::vector<double>& totals, double n) {
  double same = 0.0;
  for (double t : totals) same += t * t;
  return n * n - same;
}

}  // namespace

RatingTable RatingTable::FromRows(
    std::vector<std::vector<std::optional<int>>> rows) {
  RatingTable table;
  const std::size_t width = rows.empty() ? 0 : rows.front().size();
  for (const auto& row : rows) {
    if (row.size() != width) {
      throw PreconditionError("rating rows must have equal width");
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    table.items.push_back("i" + std::to_string(i));
  }
  for (std::size_t a = 0; a < width; ++a) {
    table.annotators.push_back("a" + std::to_string(a));
  }
  table.ratings = std::move(rows);
  return table;
}

std::size_t RatingTable::RatingsOn(std::size_t item) const {
  return static_cast<std::size_t>(
      std::count_if(ratings[item].begin(), ratings[item].end(),
                    [](const std::optional<int>& r) { return r.has_value(); }));
}

RatingTable RatingTable::SelectAnnotators(
    const std::vector<std::string>& ids) const {
  std::vector<std::size_t> columns;
  for (const auto& id : ids) {
    auto it = std::find(annotators.begin(), annotators.end(), id);
    if (it == annotators.end()) {
      throw ValidationError("unknown annotator '" + id + "'");
    }
    columns.push_back(static_cast<std::size_t>(it - annotators.begin()));
  }
  RatingTable out;
  out.items = items;
  out.annotators = ids;
  for (const auto& row : ratings) {
    std::vector<std::optional<int>> selected;
    for (std::size_t c : columns) selected.push_back(row[c]);
    out.ratings.push_back(std::move(selected));
  }
  return out;
}

RatingTable RatingTable::Relabel(
    const std::function<std::optional<int>(int)>& mapping) const {
  RatingTable out = *this;
  for (auto& row : out.ratings) {
    for (auto& r : row) {
      if (r) r = mapping(*r);
    }
  }
  return out;
}

RatingTable BuildRatingTable(const AnnotationSet& set, LabelLevel level,
                             const std::vector<std::string>& annotators) {
  if (level == LabelLevel::kTechniques) {
    throw PreconditionError("rating tables need a single-label level");
  }
  RatingTable table;
  table.annotators = annotators.empty() ? set.Annotators() : annotators;
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t a = 0; a < table.annotators.size(); ++a) {
    column.emplace(table.annotators[a], a);
  }
  for (std::size_t i = 0; i < set.size(); ++i) {
    table.items.push_back(set.items()[i].item_id);
    std::vector<std::optional<int>> row(table.annotators.size());
    for (const auto& r : set.RecordsAt(i)) {
      auto it = column.find(r.annotator_id);
      if (it != column.end()) row[it->second] = r.Label(level);
    }
    table.ratings.push_back(std::move(row));
  }
  return table;
}

double CohenKappa(const RatingTable& table) {
  if (table.annotator_count() != 2) {
    throw PreconditionError("Cohen's kappa needs exactly 2 annotators, got " +
                            std::to_string(table.annotator_count()));
  }
  if (table.item_count() == 0) {
    throw PreconditionError("Cohen's kappa needs at least one item");
  }
  std::map<int, double> first, second;
  double agree = 0.0;
  for (std::size_t i = 0; i < table.item_count(); ++i) {
    const auto& a = table.ratings[i][0];
    const auto& b = table.ratings[i][1];
    if (!a || !b) {
      throw PreconditionError("Cohen's kappa needs both annotators on item '" +
                              table.items[i] + "'");
    }
    first[*a] += 1.0;
    second[*b] += 1.0;
    if (*a == *b) agree += 1.0;
  }
  const double n = static_cast<double>(table.item_count());
  double expected = 0.0;
  for (const auto& [label, count] : first) {
    auto it = second.find(label);
    if (it != second.end()) expected += (count / n) * (it->second / n);
  }
  return ChanceCorrected(agree / n, expected, "Cohen's kappa");
}

double MeanPairwiseCohenKappa(const RatingTable& table) {
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < table.annotator_count(); ++a) {
    for (std::size_t b = a + 1; b < table.annotator_count(); ++b) {
      RatingTable pair;
      pair.annotators = {table.annotators[a], table.annotators[b]};
      for (std::size_t i = 0; i < table.item_count(); ++i) {
        const auto& ra = table.ratings[i][a];
        const auto& rb = table.ratings[i][b];
        if (ra && rb) {
          pair.items.push_back(table.items[i]);
          pair.ratings.push_back({ra, rb});
        }
      }
      const std::string name =
          "'" + pair.annotators[0] + "'/'" + pair.annotators[1] + "'";
      if (pair.items.empty()) continue;
      try {
        sum += CohenKappa(pair);
        ++pairs;
      } catch (const UndefinedStatistic&) {
        Warn("Cohen's kappa undefined for pair " + name + "; skipped");
      }
    }
  }
  if (pairs == 0) {
    throw UndefinedStatistic("no annotator pair has a defined Cohen's kappa");
  }
  return sum / static_cast<double>(pairs);
}

double FleissKappa(const RatingTable& table) {
  const auto index = IndexLabels(table);
  std::size_t m = 0;
  std::vector<double> totals(index.size(), 0.0);
  std::vector<double> counts(index.size());
  double per_item_agreement = 0.0;
  std::size_t n_items = 0;
  for (std::size_t i = 0; i < table.item_count(); ++i) {
    const std::size_t rated = table.RatingsOn(i);
    if (rated == 0) continue;
    if (m == 0) m = rated;
    if (rated != m) {
      throw PreconditionError(
          "Fleiss' kappa needs the same number of ratings on every item (item "
          "'" + table.items[i] + "' has " + std::to_string(rated) +
          ", expected " + std::to_string(m) +
          "); use Krippendorff's alpha for incomplete tables");
    }
    std::fill(counts.begin(), counts.end(), 0.0);
    for (const auto& r : table.ratings[i]) {
      if (r) counts[index.at(*r)] += 1.0;
    }
    double same = 0.0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      same += counts[c] * (counts[c] - 1.0);
      totals[c] += counts[c];
    }
    const double md = static_cast<double>(m);
    per_item_agreement += same / (md * (md - 1.0));
    ++n_items;
  }
  if (n_items == 0 || m < 2) {
    throw PreconditionError("Fleiss' kappa needs at least 2 ratings per item");
  }
  const double n = static_cast<double>(n_items);
  const double all = n * static_cast<double>(m);
  double expected = 0.0;
  for (double t : totals) expected += (t / all) * (t / all);
  return ChanceCorrected(per_item_agreement / n, expected, "Fleiss' kappa");
}

double KrippendorffAlphaNominal(const RatingTable& table) {
  const auto index = IndexLabels(table);
  const Coincidences co = BuildCoincidences(table, index);
  if (co.total < 2.0) {
    throw PreconditionError(
        "Krippendorff's alpha needs an item with at least 2 ratings");
  }
  const double expected_pairs =
      ExpectedDisagreeingPairs(co.value_totals, co.total);
  if (expected_pairs <= 0.0) {
    throw UndefinedStatistic(
        "Krippendorff's alpha is undefined: expected disagreement is 0");
  }
  // 1 - D_o / D_e with D_o = dis / n and D_e = pairs / (n (n - 1)).
  return 1.0 - (co.total - 1.0) * co.disagreement / expected_pairs;
}

std::map<std::string, double> PerItemAlpha(const RatingTable& table,
                                           ExpectedDisagreement expected) {
  const auto index = IndexLabels(table);
  double global_de = 0.0;
  if (expected == ExpectedDisagreement::kGlobal) {
    const Coincidences co = BuildCoincidences(table, index);
    if (co.total < 2.0) {
      throw PreconditionError(
          "per-item alpha needs an item with at least 2 ratings");
    }
    global_de = ExpectedDisagreeingPairs(co.value_totals, co.total) /
                (co.total * (co.total - 1.0));
    if (global_de <= 0.0) {
      throw UndefinedStatistic(
          "per-item alpha is undefined: table-wide expected disagreement is 0");
    }
  }
  std::map<std::string, double> out;
  std::vector<double> counts(index.size());
  for (std::size_t i = 0; i < table.item_count(); ++i) {
    const double m = static_cast<double>(table.RatingsOn(i));
    if (m < 2.0) {
      Warn("item '" + table.items[i] + "' has fewer than 2 ratings; skipped");
      continue;
    }
    std::fill(counts.begin(), counts.end(), 0.0);
    for (const auto& r : table.ratings[i]) {
      if (r) counts[index.at(*r)] += 1.0;
    }
    double agreeing = 0.0;
    for (double c : counts) agreeing += c * (c - 1.0);
    const double pairs = m * (m - 1.0);
    const double observed = (pairs - agreeing) / pairs;
    double de = global_de;
    if (expected == ExpectedDisagreement::kLocal) {
      de = ExpectedDisagreeingPairs(counts, m) / pairs;
      if (de <= 0.0) {
        Warn("item '" + table.items[i] +
             "' has no local expected disagreement; skipped");
        continue;
      }
    }
    out.emplace(table.items[i], 1.0 - observed / de);
  }
  return out;
}

DualRatingTable BuildDualRatingTable(
    const AnnotationSet& set, const std::vector<std::string>& annotators) {
  DualRatingTable table;
  table.annotators = annotators.empty() ? set.Annotators() : annotators;
  for (std::size_t i = 0; i < set.size(); ++i) {
    table.items.push_back(set.items()[i].item_id);
    std::vector<std::optional<DualLabel>> row(table.annotators.size());
    for (const auto& r : set.RecordsAt(i)) {
      auto it = std::find(table.annotators.begin(), table.annotators.end(),
                          r.annotator_id);
      if (it == table.annotators.end() || !r.high_level) continue;
      row[static_cast<std::size_t>(it - table.annotators.begin())] =
          DualLabel{*r.high_level, r.secondary_high_level};
    }
    table.ratings.push_back(std::move(row));
  }
  return table;
}

OverlapReport OverlapStrictLenient(const DualRatingTable& table) {
  const auto strict_match = [](const DualLabel& a, const DualLabel& b) {
    return a.primary == b.primary;
  };
  const auto lenient_match = [](const DualLabel& a, const DualLabel& b) {
    if (a.primary == b.primary) return true;
    if (b.secondary && a.primary == *b.secondary) return true;
    if (a.secondary && *a.secondary == b.primary) return true;
    return a.secondary && b.secondary && *a.secondary == *b.secondary;
  };

  const std::size_t n_ann = table.annotators.size();
  std::vector<double> pair_strict(n_ann * n_ann, 0.0);
  std::vector<double> pair_lenient(n_ann * n_ann, 0.0);
  std::vector<std::size_t> pair_items(n_ann * n_ann, 0);

  OverlapReport report;
  double strict_sum = 0.0;
  double lenient_sum = 0.0;
  for (const auto& row : table.ratings) {
    double pairs = 0.0, strict = 0.0, lenient = 0.0;
    for (std::size_t a = 0; a < n_ann; ++a) {
      if (!row[a]) continue;
      for (std::size_t b = a + 1; b < n_ann; ++b) {
        if (!row[b]) continue;
        const bool s = strict_match(*row[a], *row[b]);
        const bool l = lenient_match(*row[a], *row[b]);
        pairs += 1.0;
        strict += s;
        lenient += l;
        pair_strict[a * n_ann + b] += s;
        pair_lenient[a * n_ann + b] += l;
        ++pair_items[a * n_ann + b];
      }
    }
    if (pairs == 0.0) continue;
    strict_sum += strict / pairs;
    lenient_sum += lenient / pairs;
    ++report.n_items;
  }
  if (report.n_items == 0) {
    throw PreconditionError("overlap needs an item with at least 2 raters");
  }
  report.strict = strict_sum / static_cast<double>(report.n_items);
  report.lenient = lenient_sum / static_cast<double>(report.n_items);
  for (std::size_t a = 0; a < n_ann; ++a) {
    for (std::size_t b = a + 1; b < n_ann; ++b) {
      const std::size_t n = pair_items[a * n_ann + b];
      if (n == 0) continue;
      report.pairs.push_back(
          {table.annotators[a], table.annotators[b],
           pair_strict[a * n_ann + b] / static_cast<double>(n),
           pair_lenient[a * n_ann + b] / static_cast<double>(n), n});
    }
  }
  return report;
}

}  // namespace proptk
