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

#include "proptk/corpus.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "proptk/diagnostics.h"
#include "proptk/error.h"

namespace proptk {
namespace {

using nlohmann::json;

std::string Where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line) + ": ";
}

std::ifstream OpenForRead(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

int RequireInt(const json& j, const char* field) {
  if (!j.is_number_integer()) {
    throw ValidationError(std::string("field '") + field +
                          "' must be an integer");
  }
  return j.get<int>();
}

std::optional<int> OptionalInt(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return RequireInt(*it, field);
}

std::string RequireString(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw ValidationError(std::string("missing field '") + field + "'");
  }
  if (!it->is_string()) {
    throw ValidationError(std::string("field '") + field +
                          "' must be a string");
  }
  return it->get<std::string>();
}

std::string OptionalString(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) {
    throw ValidationError(std::string("field '") + field +
                          "' must be a string");
  }
  return it->get<std::string>();
}

template <typename T>
json OptionalToJson(const std::optional<T>& value) {
  return value ? json(*value) : json(nullptr);
}

}  // namespace

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val" || name == "validation" || name == "dev") {
    return Split::kVal;
  }
  if (name == "test") return Split::kTest;
  throw ValidationError("unknown split '" + std::string(name) + "'");
}

std::string_view LabelLevelName(LabelLevel level) {
  switch (level) {
    case LabelLevel::kMain: return "main";
    case LabelLevel::kHigh: return "high";
    case LabelLevel::kTechniques: return "techniques";
  }
  return "main";
}

LabelLevel ParseLabelLevel(std::string_view name) {
  if (name == "main" || name == "prominent") return LabelLevel::kMain;
  if (name == "high") return LabelLevel::kHigh;
  if (name == "techniques" || name == "present") {
    return LabelLevel::kTechniques;
  }
  throw ValidationError("unknown label level '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Schema

const TechniqueLabel* Schema::FindTechnique(int id) const {
  for (const auto& t : techniques) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

const HighLevelCategory* Schema::FindHighLevel(int id) const {
  for (const auto& h : high_levels) {
    if (h.id == id) return &h;
  }
  return nullptr;
}

int Schema::NonPropagandaHighLevelId() const {
  for (const auto& h : high_levels) {
    if (h.member_technique_ids.size() == 1 &&
        h.member_technique_ids.front() == non_propaganda_technique_id) {
      return h.id;
    }
  }
  throw ValidationError("schema '" + schema_id +
                        "' has no non-propaganda category");
}

std::vector<int> Schema::TechniqueIds() const {
  std::vector<int> ids;
  for (const auto& t : techniques) ids.push_back(t.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<int> Schema::HighLevelIds() const {
  std::vector<int> ids;
  for (const auto& h : high_levels) ids.push_back(h.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<int> Schema::CategoriesOf(int technique_id) const {
  std::vector<int> ids;
  for (const auto& h : high_levels) {
    if (std::binary_search(h.member_technique_ids.begin(),
                           h.member_technique_ids.end(), technique_id)) {
      ids.push_back(h.id);
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

void ValidateSchema(const Schema& schema) {
  const std::string prefix = "schema '" + schema.schema_id + "': ";
  if (schema.techniques.empty()) {
    throw ValidationError(prefix + "no techniques");
  }
  std::set<int> technique_ids;
  for (const auto& t : schema.techniques) {
    if (!technique_ids.insert(t.id).second) {
      throw ValidationError(prefix + "duplicate technique id " +
                            std::to_string(t.id));
    }
  }
  if (!technique_ids.count(schema.non_propaganda_technique_id)) {
    throw ValidationError(prefix + "non-propaganda technique id " +
                          std::to_string(schema.non_propaganda_technique_id) +
                          " is not a technique");
  }
  std::set<int> high_ids;
  int np_categories = 0;
  for (const auto& h : schema.high_levels) {
    if (!high_ids.insert(h.id).second) {
      throw ValidationError(prefix + "duplicate high-level id " +
                            std::to_string(h.id));
    }
    if (!std::is_sorted(h.member_technique_ids.begin(),
                        h.member_technique_ids.end()) ||
        std::adjacent_find(h.member_technique_ids.begin(),
                           h.member_technique_ids.end()) !=
            h.member_technique_ids.end()) {
      throw ValidationError(prefix + "members of category " +
                            std::to_string(h.id) +
                            " must be sorted and unique");
    }
    for (int member : h.member_technique_ids) {
      if (!technique_ids.count(member)) {
        throw ValidationError(prefix + "category " + std::to_string(h.id) +
                              " references unknown technique " +
                              std::to_string(member));
      }
    }
    const bool holds_np =
        std::binary_search(h.member_technique_ids.begin(),
                           h.member_technique_ids.end(),
                           schema.non_propaganda_technique_id);
    if (holds_np) {
      if (h.member_technique_ids.size() != 1) {
        throw ValidationError(
            prefix + "non-propaganda category " + std::to_string(h.id) +
            " must contain only the non-propaganda technique");
      }
      ++np_categories;
    }
  }
  if (np_categories != 1) {
    throw ValidationError(
        prefix + "exactly one category must hold the non-propaganda "
                 "technique, found " +
        std::to_string(np_categories));
  }
}

Schema SchemaFromJson(const json& j) {
  if (!j.is_object()) throw ValidationError("schema must be a JSON object");
  Schema schema;
  schema.schema_id = OptionalString(j, "schema_id");
  auto np = j.find("non_propaganda_technique_id");
  if (np == j.end() || np->is_null()) {
    throw ValidationError("schema '" + schema.schema_id +
                          "': missing non_propaganda_technique_id");
  }
  schema.non_propaganda_technique_id =
      RequireInt(*np, "non_propaganda_technique_id");

  auto techniques = j.find("techniques");
  if (techniques == j.end() || !techniques->is_array()) {
    throw ValidationError("schema: 'techniques' must be an array");
  }
  for (const auto& t : *techniques) {
    if (!t.is_object() || !t.contains("id")) {
      throw ValidationError("schema: technique entries need an 'id'");
    }
    schema.techniques.push_back({RequireInt(t["id"], "id"),
                                 OptionalString(t, "name"),
                                 OptionalString(t, "description")});
  }

  auto highs = j.find("high_levels");
  if (highs != j.end()) {
    if (!highs->is_array()) {
      throw ValidationError("schema: 'high_levels' must be an array");
    }
    for (const auto& h : *highs) {
      if (!h.is_object() || !h.contains("id")) {
        throw ValidationError("schema: high-level entries need an 'id'");
      }
      HighLevelCategory category{RequireInt(h["id"], "id"),
                                 OptionalString(h, "name"),
                                 OptionalString(h, "description"),
                                 {}};
      if (auto members = h.find("member_technique_ids");
          members != h.end()) {
        if (!members->is_array()) {
          throw ValidationError("schema: member_technique_ids must be an "
                                "array");
        }
        for (const auto& m : *members) {
          category.member_technique_ids.push_back(
              RequireInt(m, "member_technique_ids"));
        }
      }
      std::sort(category.member_technique_ids.begin(),
                category.member_technique_ids.end());
      category.member_technique_ids.erase(
          std::unique(category.member_technique_ids.begin(),
                      category.member_technique_ids.end()),
          category.member_technique_ids.end());
      schema.high_levels.push_back(std::move(category));
    }
  }
  ValidateSchema(schema);
  return schema;
}

nlohmann::ordered_json SchemaToJson(const Schema& schema) {
  nlohmann::ordered_json j;
  j["schema_id"] = schema.schema_id;
  j["non_propaganda_technique_id"] = schema.non_propaganda_technique_id;
  j["techniques"] = nlohmann::ordered_json::array();
  for (const auto& t : schema.techniques) {
    j["techniques"].push_back(
        {{"id", t.id}, {"name", t.name}, {"description", t.description}});
  }
  j["high_levels"] = nlohmann::ordered_json::array();
  for (const auto& h : schema.high_levels) {
    j["high_levels"].push_back({{"id", h.id},
                                {"name", h.name},
                                {"description", h.description},
                                {"member_technique_ids",
                                 h.member_technique_ids}});
  }
  return j;
}

Schema LoadSchema(const std::filesystem::path& path) {
  auto in = OpenForRead(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": parse error: " + e.what());
  }
  try {
    return SchemaFromJson(j);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Annotations

std::optional<int> AnnotationRecord::Label(LabelLevel level) const {
  switch (level) {
    case LabelLevel::kMain: return prominent_technique;
    case LabelLevel::kHigh: return high_level;
    case LabelLevel::kTechniques: return std::nullopt;
  }
  return std::nullopt;
}

std::vector<int> AnnotationRecord::Labels(LabelLevel level) const {
  if (level == LabelLevel::kTechniques) return techniques_present;
  auto label = Label(level);
  return label ? std::vector<int>{*label} : std::vector<int>{};
}

void AnnotationSet::AddItem(const Item& item) {
  auto it = index_.find(item.item_id);
  if (it == index_.end()) {
    index_.emplace(item.item_id, items_.size());
    items_.push_back(item);
    records_.emplace_back();
    return;
  }
  const Item& existing = items_[it->second];
  if (existing.text != item.text || existing.split != item.split) {
    throw ValidationError("item '" + item.item_id +
                          "' appears with conflicting text or split");
  }
}

void AnnotationSet::AddRecord(AnnotationRecord record) {
  auto it = index_.find(record.item_id);
  if (it == index_.end()) {
    throw ValidationError("annotation for unknown item '" + record.item_id +
                          "'");
  }
  auto& bucket = records_[it->second];
  for (const auto& r : bucket) {
    if (r.annotator_id == record.annotator_id) {
      throw ValidationError("duplicate annotation of item '" +
                            record.item_id + "' by '" + record.annotator_id +
                            "'");
    }
  }
  bucket.push_back(std::move(record));
}

const Item* AnnotationSet::FindItem(std::string_view item_id) const {
  auto it = index_.find(std::string(item_id));
  return it == index_.end() ? nullptr : &items_[it->second];
}

std::span<const AnnotationRecord> AnnotationSet::RecordsFor(
    std::string_view item_id) const {
  auto it = index_.find(std::string(item_id));
  if (it == index_.end()) return {};
  return records_[it->second];
}

std::size_t AnnotationSet::record_count() const {
  std::size_t n = 0;
  for (const auto& bucket : records_) n += bucket.size();
  return n;
}

std::map<Split, std::size_t> AnnotationSet::SplitSizes() const {
  std::map<Split, std::size_t> sizes;
  for (const auto& item : items_) ++sizes[item.split];
  return sizes;
}

std::map<std::string, std::size_t> AnnotationSet::AnnotatorCounts() const {
  std::map<std::string, std::size_t> counts;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    counts[items_[i].item_id] = records_[i].size();
  }
  return counts;
}

std::vector<std::string> AnnotationSet::Annotators() const {
  std::set<std::string> ids;
  for (const auto& bucket : records_) {
    for (const auto& r : bucket) ids.insert(r.annotator_id);
  }
  return {ids.begin(), ids.end()};
}

AnnotationSet AnnotationSet::FilterSplit(Split split) const {
  AnnotationSet out;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (items_[i].split != split) continue;
    out.AddItem(items_[i]);
    for (const auto& r : records_[i]) out.AddRecord(r);
  }
  return out;
}

void AnnotationSet::SetSplit(std::string_view item_id, Split split) {
  auto it = index_.find(std::string(item_id));
  if (it == index_.end()) {
    throw ValidationError("unknown item '" + std::string(item_id) + "'");
  }
  items_[it->second].split = split;
}

namespace {

const std::set<std::string>& AnnotationFields() {
  static const std::set<std::string> fields = {
      "item_id",         "text",
      "split",           "annotator_id",
      "techniques_present", "prominent_technique",
      "high_level",      "secondary_high_level"};
  return fields;
}

void ParseAnnotationLine(const json& obj, const Schema& schema,
                         AnnotationSet& set) {
  if (!obj.is_object()) throw ValidationError("line is not a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (!AnnotationFields().count(key)) {
      throw ValidationError("unknown field '" + key + "'");
    }
  }
  Item item{RequireString(obj, "item_id"), OptionalString(obj, "text"),
            ParseSplit(RequireString(obj, "split"))};

  AnnotationRecord record;
  record.item_id = item.item_id;
  record.annotator_id = RequireString(obj, "annotator_id");
  if (auto it = obj.find("techniques_present");
      it != obj.end() && !it->is_null()) {
    if (!it->is_array()) {
      throw ValidationError("field 'techniques_present' must be an array");
    }
    for (const auto& v : *it) {
      record.techniques_present.push_back(
          RequireInt(v, "techniques_present"));
    }
  }
  auto& present = record.techniques_present;
  std::sort(present.begin(), present.end());
  present.erase(std::unique(present.begin(), present.end()), present.end());
  record.prominent_technique = OptionalInt(obj, "prominent_technique");
  record.high_level = OptionalInt(obj, "high_level");
  record.secondary_high_level = OptionalInt(obj, "secondary_high_level");

  for (int id : present) {
    if (!schema.HasTechnique(id)) {
      throw ValidationError("unknown technique id " + std::to_string(id));
    }
  }
  if (record.prominent_technique) {
    if (!schema.HasTechnique(*record.prominent_technique)) {
      throw ValidationError("unknown technique id " +
                            std::to_string(*record.prominent_technique));
    }
    if (!present.empty() &&
        !std::binary_search(present.begin(), present.end(),
                            *record.prominent_technique)) {
      throw ValidationError("prominent_technique " +
                            std::to_string(*record.prominent_technique) +
                            " is not among techniques_present");
    }
  }
  for (const auto& high : {record.high_level, record.secondary_high_level}) {
    if (high && !schema.HasHighLevel(*high)) {
      throw ValidationError("unknown high-level id " + std::to_string(*high));
    }
  }
  set.AddItem(item);
  set.AddRecord(std::move(record));
}

}  // namespace

AnnotationSet ReadAnnotations(std::istream& in, const Schema& schema,
                              std::string_view source) {
  AnnotationSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json obj;
      try {
        obj = json::parse(line);
      } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed JSON: ") + e.what());
      }
      ParseAnnotationLine(obj, schema, set);
    } catch (const ValidationError& e) {
      throw ValidationError(Where(source, line_no) + e.what());
    }
  }
  return set;
}

AnnotationSet LoadAnnotations(const std::filesystem::path& path,
                              const Schema& schema) {
  auto in = OpenForRead(path);
  return ReadAnnotations(in, schema, path.string());
}

void WriteAnnotations(const AnnotationSet& set, std::ostream& out) {
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Item& item = set.items()[i];
    for (const auto& r : set.RecordsAt(i)) {
      nlohmann::ordered_json j;
      j["item_id"] = item.item_id;
      j["text"] = item.text;
      j["split"] = SplitName(item.split);
      j["annotator_id"] = r.annotator_id;
      j["techniques_present"] = r.techniques_present;
      j["prominent_technique"] = OptionalToJson(r.prominent_technique);
      j["high_level"] = OptionalToJson(r.high_level);
      if (r.secondary_high_level) {
        j["secondary_high_level"] = *r.secondary_high_level;
      }
      out << j.dump() << "\n";
    }
  }
}

void ApplySplitManifest(AnnotationSet& set,
                        const std::filesystem::path& manifest) {
  auto in = OpenForRead(manifest);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ValidationError(Where(manifest.string(), line_no) +
                            "expected item_id<TAB>split");
    }
    try {
      set.SetSplit(line.substr(0, tab), ParseSplit(line.substr(tab + 1)));
    } catch (const ValidationError& e) {
      throw ValidationError(Where(manifest.string(), line_no) + e.what());
    }
  }
}

// ---------------------------------------------------------------------------
// Predictions

std::string_view StrategyName(Strategy strategy) {
  return strategy == Strategy::kDirectHigh ? "direct_high" : "main_high";
}

Strategy ParseStrategy(std::string_view name) {
  if (name == "direct_high" || name == "direct-high") {
    return Strategy::kDirectHigh;
  }
  if (name == "main_high" || name == "main-high") return Strategy::kMainHigh;
  throw ValidationError("unknown strategy '" + std::string(name) + "'");
}

nlohmann::ordered_json PredictionToJson(const PredictionRecord& record) {
  nlohmann::ordered_json j;
  j["item_id"] = record.item_id;
  j["strategy"] = StrategyName(record.strategy);
  j["main_pred"] = OptionalToJson(record.main_pred);
  j["high_pred"] = OptionalToJson(record.high_pred);
  j["raw_response"] = record.raw_response;
  j["model_id"] = record.model_id;
  j["prompt_hash"] = record.prompt_hash;
  return j;
}

PredictionRecord PredictionFromJson(const json& j, const Schema* schema) {
  if (!j.is_object()) throw ValidationError("prediction is not an object");
  static const std::set<std::string> fields = {
      "item_id",      "strategy", "main_pred", "high_pred",
      "raw_response", "model_id", "prompt_hash"};
  for (const auto& [key, value] : j.items()) {
    if (!fields.count(key)) {
      throw ValidationError("unknown field '" + key + "'");
    }
  }
  PredictionRecord r;
  r.item_id = RequireString(j, "item_id");
  r.strategy = ParseStrategy(RequireString(j, "strategy"));
  r.main_pred = OptionalInt(j, "main_pred");
  r.high_pred = OptionalInt(j, "high_pred");
  r.raw_response = OptionalString(j, "raw_response");
  r.model_id = OptionalString(j, "model_id");
  r.prompt_hash = OptionalString(j, "prompt_hash");
  if (r.strategy == Strategy::kDirectHigh && r.main_pred) {
    throw ValidationError("direct_high prediction carries a main_pred");
  }
  if (r.strategy == Strategy::kMainHigh && r.high_pred && !r.main_pred) {
    throw ValidationError("main_high prediction lacks main_pred");
  }
  if (schema) {
    if (r.main_pred && !schema->HasTechnique(*r.main_pred)) {
      throw ValidationError("main_pred " + std::to_string(*r.main_pred) +
                            " is not a technique id");
    }
    if (r.high_pred && !schema->HasHighLevel(*r.high_pred)) {
      throw ValidationError("high_pred " + std::to_string(*r.high_pred) +
                            " is not a high-level id");
    }
  }
  return r;
}

std::vector<PredictionRecord> ReadPredictions(std::istream& in,
                                              const Schema* schema,
                                              std::string_view source) {
  std::vector<PredictionRecord> records;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json obj;
      try {
        obj = json::parse(line);
      } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed JSON: ") + e.what());
      }
      records.push_back(PredictionFromJson(obj, schema));
      if (!seen.insert(records.back().item_id).second) {
        throw ValidationError("duplicate prediction for item '" +
                              records.back().item_id + "'");
      }
    } catch (const ValidationError& e) {
      throw ValidationError(Where(source, line_no) + e.what());
    }
  }
  return records;
}

std::vector<PredictionRecord> LoadPredictions(
    const std::filesystem::path& path, const Schema* schema) {
  auto in = OpenForRead(path);
  return ReadPredictions(in, schema, path.string());
}

void WritePredictions(std::span<const PredictionRecord> records,
                      std::ostream& out) {
  for (const auto& r : records) out << PredictionToJson(r).dump() << "\n";
}

// ---------------------------------------------------------------------------
// Plurality gold

TieRule ParseTieRule(std::string_view name) {
  if (name == "report") return TieRule::kReport;
  if (name == "lowest_id" || name == "lowest-id") return TieRule::kLowestId;
  throw ValidationError("unknown tie rule '" + std::string(name) + "'");
}

GoldLabel PluralityGold(std::span<const AnnotationRecord> records,
                        LabelLevel level, TieRule tie_rule) {
  if (level == LabelLevel::kTechniques) {
    throw PreconditionError("plurality gold needs a single-label level");
  }
  std::map<int, int> votes;
  for (const auto& r : records) {
    if (auto label = r.Label(level)) ++votes[*label];
  }
  if (votes.empty()) {
    throw PreconditionError("no record has a " +
                            std::string(LabelLevelName(level)) + " label");
  }
  int best = 0;
  for (const auto& [label, count] : votes) best = std::max(best, count);
  std::vector<int> winners;
  for (const auto& [label, count] : votes) {
    if (count == best) winners.push_back(label);
  }
  if (winners.size() == 1 || tie_rule == TieRule::kLowestId) {
    return {winners.front(), {}};
  }
  return {std::nullopt, std::move(winners)};
}

std::map<std::string, int> GoldLabels(const AnnotationSet& set,
                                      LabelLevel level, TieRule tie_rule) {
  std::map<std::string, int> gold;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& item_id = set.items()[i].item_id;
    const auto records = set.RecordsAt(i);
    const bool any = std::any_of(records.begin(), records.end(),
                                 [&](const AnnotationRecord& r) {
                                   return r.Label(level).has_value();
                                 });
    if (!any) {
      Warn("item '" + item_id + "' has no " +
           std::string(LabelLevelName(level)) + " label; skipped");
      continue;
    }
    GoldLabel label = PluralityGold(records, level, tie_rule);
    if (label.is_tie()) {
      std::ostringstream tied;
      for (std::size_t k = 0; k < label.tied.size(); ++k) {
        tied << (k ? "," : "") << label.tied[k];
      }
      Warn("item '" + item_id + "' has a plurality tie {" + tied.str() +
           "}; skipped");
      continue;
    }
    gold.emplace(item_id, *label.label);
  }
  return gold;
}

}  // namespace proptk
