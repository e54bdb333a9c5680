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

// Data model for two-tier propaganda taxonomies, multi-annotator corpora and
// model predictions, plus loaders for their line-oriented file formats.
//
//   schema.json        one object: techniques, high-level categories and the
//                      many-to-many membership between them.
//   annotations.jsonl  one annotator's judgement of one item per line.
//   predictions.jsonl  one model verdict per item per line.

#ifndef PROPTK_CORPUS_H_
#define PROPTK_CORPUS_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace proptk {

enum class Split { kTrain, kVal, kTest };

std::string_view SplitName(Split split);
// Accepts "train", "val"/"validation"/"dev", "test". Throws ValidationError.
Split ParseSplit(std::string_view name);

// Which annotation field a statistic or model reads.
//   kMain        the single most prominent technique
//   kHigh        the high-level category
//   kTechniques  every technique marked present (multi-label)
enum class LabelLevel { kMain, kHigh, kTechniques };

std::string_view LabelLevelName(LabelLevel level);
LabelLevel ParseLabelLevel(std::string_view name);

struct TechniqueLabel {
  int id = 0;
  std::string name;
  std::string description;

  bool operator==(const TechniqueLabel&) const = default;
};

struct HighLevelCategory {
  int id = 0;
  std::string name;
  std::string description;
  // Sorted, unique. Memberships may overlap across categories.
  std::vector<int> member_technique_ids;

  bool operator==(const HighLevelCategory&) const = default;
};

struct Schema {
  std::string schema_id;
  int non_propaganda_technique_id = 0;
  std::vector<TechniqueLabel> techniques;
  std::vector<HighLevelCategory> high_levels;

  const TechniqueLabel* FindTechnique(int id) const;
  const HighLevelCategory* FindHighLevel(int id) const;
  bool HasTechnique(int id) const { return FindTechnique(id) != nullptr; }
  bool HasHighLevel(int id) const { return FindHighLevel(id) != nullptr; }

  // Id of the category holding exactly the non-propaganda technique.
  int NonPropagandaHighLevelId() const;

  std::vector<int> TechniqueIds() const;
  std::vector<int> HighLevelIds() const;
  // Ids of every category listing `technique_id` as a member, ascending.
  std::vector<int> CategoriesOf(int technique_id) const;

  bool operator==(const Schema&) const = default;
};

// Throws ValidationError on duplicate ids, dangling membership references or
// a missing/ill-formed non-propaganda designation.
void ValidateSchema(const Schema& schema);

Schema SchemaFromJson(const nlohmann::json& json);
nlohmann::ordered_json SchemaToJson(const Schema& schema);
Schema LoadSchema(const std::filesystem::path& path);

struct Item {
  std::string item_id;
  std::string text;
  Split split = Split::kTrain;

  bool operator==(const Item&) const = default;
};

struct AnnotationRecord {
  std::string item_id;
  std::string annotator_id;
  std::vector<int> techniques_present;  // sorted, unique
  std::optional<int> prominent_technique;
  std::optional<int> high_level;
  // Second-choice high-level label; only used by the lenient overlap score.
  std::optional<int> secondary_high_level;

  // Single label at `level`; kTechniques has no single label and returns
  // nullopt.
  std::optional<int> Label(LabelLevel level) const;
  // All labels at `level` (one or zero for kMain/kHigh).
  std::vector<int> Labels(LabelLevel level) const;

  bool operator==(const AnnotationRecord&) const = default;
};

// Records grouped by item, items kept in first-seen order.
class AnnotationSet {
 public:
  // Adds an item, or checks consistency with an already-present one.
  void AddItem(const Item& item);
  // The record's item must already exist. (item, annotator) pairs are unique.
  void AddRecord(AnnotationRecord record);

  const std::vector<Item>& items() const { return items_; }
  const Item* FindItem(std::string_view item_id) const;
  std::span<const AnnotationRecord> RecordsFor(std::string_view item_id) const;
  std::span<const AnnotationRecord> RecordsAt(std::size_t item_index) const {
    return records_[item_index];
  }

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  std::size_t record_count() const;

  std::map<Split, std::size_t> SplitSizes() const;
  // item_id -> number of annotators who labelled it.
  std::map<std::string, std::size_t> AnnotatorCounts() const;
  // Sorted distinct annotator ids.
  std::vector<std::string> Annotators() const;

  AnnotationSet FilterSplit(Split split) const;
  void SetSplit(std::string_view item_id, Split split);

  bool operator==(const AnnotationSet& other) const {
    return items_ == other.items_ && records_ == other.records_;
  }

 private:
  std::vector<Item> items_;
  std::vector<std::vector<AnnotationRecord>> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Parses JSONL. Errors carry `source:line`.
AnnotationSet ReadAnnotations(std::istream& in, const Schema& schema,
                              std::string_view source = "<stream>");
AnnotationSet LoadAnnotations(const std::filesystem::path& path,
                              const Schema& schema);
void WriteAnnotations(const AnnotationSet& set, std::ostream& out);

// Re-splits items from a two-column `item_id<TAB>split` manifest. Items not
// listed keep their split; unknown item ids are a ValidationError.
void ApplySplitManifest(AnnotationSet& set,
                        const std::filesystem::path& manifest);

enum class Strategy { kDirectHigh, kMainHigh };

// Wire names: "direct_high", "main_high".
std::string_view StrategyName(Strategy strategy);
// Accepts wire names and the CLI spellings "direct-high"/"main-high".
Strategy ParseStrategy(std::string_view name);

struct PredictionRecord {
  std::string item_id;
  Strategy strategy = Strategy::kDirectHigh;
  std::optional<int> main_pred;
  // nullopt marks an explicit unparseable verdict.
  std::optional<int> high_pred;
  std::string raw_response;
  std::string model_id;
  std::string prompt_hash;

  bool parsed() const { return high_pred.has_value(); }

  bool operator==(const PredictionRecord&) const = default;
};

nlohmann::ordered_json PredictionToJson(const PredictionRecord& record);
// Checks the strategy/main_pred invariant and, when `schema` is given, ids.
PredictionRecord PredictionFromJson(const nlohmann::json& json,
                                    const Schema* schema = nullptr);
std::vector<PredictionRecord> ReadPredictions(std::istream& in,
                                              const Schema* schema = nullptr,
                                              std::string_view source =
                                                  "<stream>");
std::vector<PredictionRecord> LoadPredictions(
    const std::filesystem::path& path, const Schema* schema = nullptr);
void WritePredictions(std::span<const PredictionRecord> records,
                      std::ostream& out);

enum class TieRule { kReport, kLowestId };

TieRule ParseTieRule(std::string_view name);

// Outcome of a plurality vote: a winning label, or the tied set.
struct GoldLabel {
  std::optional<int> label;
  std::vector<int> tied;  // ascending; empty unless this is a tie

  bool is_tie() const { return !label.has_value(); }
  bool operator==(const GoldLabel&) const = default;
};

// Most-voted label among records populating `level` (kMain or kHigh).
// Throws PreconditionError when no record has the level populated.
GoldLabel PluralityGold(std::span<const AnnotationRecord> records,
                        LabelLevel level, TieRule tie_rule);

// Plurality gold for every item in `set`. Items with no vote at `level`, or
// with a reported tie, are skipped with a warning.
std::map<std::string, int> GoldLabels(const AnnotationSet& set,
                                      LabelLevel level, TieRule tie_rule);

}  // namespace proptk

#endif  // PROPTK_CORPUS_H_
