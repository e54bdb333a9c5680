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

// Inter-annotator agreement over nominal labels.
//
// Cohen's and Fleiss' kappa need complete tables; Krippendorff's alpha takes
// missing ratings natively and drops units with fewer than two values.

#ifndef PROPTK_AGREEMENT_H_
#define PROPTK_AGREEMENT_H_

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "proptk/corpus.h"

namespace proptk {

// Items x annotators matrix of nominal labels; nullopt is a missing rating.
struct RatingTable {
  std::vector<std::string> items;
  std::vector<std::string> annotators;
  std::vector<std::vector<std::optional<int>>> ratings;  // [item][annotator]

  // Builds a table with generated ids ("i0", "a0", ...). Rows must share a
  // width.
  static RatingTable FromRows(
      std::vector<std::vector<std::optional<int>>> rows);

  std::size_t item_count() const { return items.size(); }
  std::size_t annotator_count() const { return annotators.size(); }
  std::size_t RatingsOn(std::size_t item) const;

  // Keeps only the listed annotators, in the given order.
  RatingTable SelectAnnotators(const std::vector<std::string>& ids) const;
  // Maps every label; a nullopt result drops that rating.
  RatingTable Relabel(
      const std::function<std::optional<int>(int)>& mapping) const;
};

// One row per item, one column per annotator (sorted ids), at `level`
// (kMain or kHigh). `annotators` restricts and orders the columns.
RatingTable BuildRatingTable(const AnnotationSet& set, LabelLevel level,
                             const std::vector<std::string>& annotators = {});

struct AgreementReport {
  std::string metric;
  double value = 0.0;
  std::size_t n_items = 0;
  std::size_t n_annotators = 0;
};

// Exactly two annotators who both rated every item.
// Throws UndefinedStatistic when chance agreement is 1.
double CohenKappa(const RatingTable& table);

// Mean of CohenKappa over annotator pairs, each on the items both rated.
// Pairs with no shared items or undefined kappa are skipped with a warning.
double MeanPairwiseCohenKappa(const RatingTable& table);

// Every item rated by the same number m >= 2 of annotators. Items without
// any rating are ignored.
double FleissKappa(const RatingTable& table);

// Nominal alpha = 1 - D_o / D_e from the coincidence matrix.
double KrippendorffAlphaNominal(const RatingTable& table);

// Expected disagreement used for a single item's alpha.
enum class ExpectedDisagreement {
  kGlobal,  // D_e of the whole table (default)
  kLocal,   // D_e of the item's own values
};

// Alpha of each item's ratings. Items with fewer than two ratings (or an
// undefined local D_e) are left out with a warning.
std::map<std::string, double> PerItemAlpha(
    const RatingTable& table,
    ExpectedDisagreement expected = ExpectedDisagreement::kGlobal);

// Primary label with an optional second choice, for lenient overlap.
struct DualLabel {
  int primary = 0;
  std::optional<int> secondary;
};

struct DualRatingTable {
  std::vector<std::string> items;
  std::vector<std::string> annotators;
  std::vector<std::vector<std::optional<DualLabel>>> ratings;
};

// high_level as primary, secondary_high_level as secondary.
DualRatingTable BuildDualRatingTable(
    const AnnotationSet& set, const std::vector<std::string>& annotators = {});

struct PairOverlap {
  std::string first;
  std::string second;
  double strict = 0.0;
  double lenient = 0.0;
  std::size_t n_items = 0;
};

struct OverlapReport {
  double strict = 0.0;
  double lenient = 0.0;
  std::size_t n_items = 0;
  std::vector<PairOverlap> pairs;
};

// Strict: share of annotator pairs per item with equal primaries, averaged
// over items with two or more raters. Lenient: the pair matches if their
// {primary, secondary} sets intersect.
OverlapReport OverlapStrictLenient(const DualRatingTable& table);

}  // namespace proptk

#endif  // PROPTK_AGREEMENT_H_
