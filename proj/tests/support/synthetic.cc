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

#include "support/synthetic.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace proptk::testing {

namespace fs = std::filesystem;

fs::path SourceDir() { return fs::path(PROPTK_SOURCE_DIR); }

fs::path IntentSchemaPath() {
  return SourceDir() / "data" / "schemas" / "intent.json";
}

Schema IntentSchema() { return LoadSchema(IntentSchemaPath()); }

Schema SahitajSchema() {
  return LoadSchema(SourceDir() / "data" / "schemas" /
                    "sahitaj_clustered.json");
}

ScopedTempDir::ScopedTempDir() {
  static std::atomic<int> counter{0};
  std::random_device rd;
  for (int attempt = 0; attempt < 100; ++attempt) {
    fs::path p = fs::temp_directory_path() /
                 ("proptk-test-" + std::to_string(::getpid()) + "-" +
                  std::to_string(counter++) + "-" + std::to_string(rd() % 100000));
    if (fs::create_directory(p)) {
      path_ = p;
      return;
    }
  }
  throw std::runtime_error("could not create a temp dir");
}

ScopedTempDir::~ScopedTempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

namespace {

const std::vector<std::vector<std::string>>& TopicWords() {
  static const std::vector<std::vector<std::string>> words = {
      {"ukraine", "war", "russia", "people", "news", "today", "city"},
      {"history", "soviet", "fake", "rumor", "archive", "staged", "hoax"},
      {"victim", "nato", "provoked", "iraq", "forced", "defend", "blame"},
      {"nazis", "liars", "clowns", "corrupt", "puppets", "thugs", "regime"},
      {"victory", "proud", "nation", "unity", "heroes", "together", "strong"},
      {"conspiracy", "labs", "secret", "coup", "agenda", "hidden", "doubt"},
  };
  return words;
}

const std::vector<std::string>& Filler() {
  static const std::vector<std::string> words = {
      "the", "and", "is", "are", "they", "we", "will", "again", "now", "all"};
  return words;
}

std::string MakeText(std::mt19937& rng, const std::string& id, int high) {
  const auto& topic = TopicWords()[static_cast<std::size_t>(high) %
                                   TopicWords().size()];
  std::uniform_int_distribution<std::size_t> pick_topic(0, topic.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_fill(0, Filler().size() - 1);
  std::string text = "item " + id + ":";
  for (int w = 0; w < 8; ++w) {
    text += ' ';
    text += (w % 3 == 2) ? Filler()[pick_fill(rng)] : topic[pick_topic(rng)];
  }
  return text;
}

Split SplitFor(std::size_t i, std::size_t n) {
  // 210 / 90 / 200 of 500.
  if (i * 500 < n * 210) return Split::kTrain;
  if (i * 500 < n * 300) return Split::kVal;
  return Split::kTest;
}

}  // namespace

SyntheticCorpus MakeSyntheticCorpus(const Schema& schema, std::size_t n_items,
                                    std::uint32_t seed,
                                    std::size_t n_annotators,
                                    double accuracy) {
  std::mt19937 rng(seed);
  const std::vector<int> techniques = schema.TechniqueIds();
  std::uniform_int_distribution<std::size_t> pick(0, techniques.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto high_of = [&](int t) { return schema.CategoriesOf(t).front(); };

  SyntheticCorpus out;
  for (std::size_t i = 0; i < n_items; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "t%04zu", i);
    const std::string id = buf;
    const int truth = techniques[pick(rng)];
    const int high = high_of(truth);
    out.true_main[id] = truth;
    out.true_high[id] = high;
    out.set.AddItem({id, MakeText(rng, id, high), SplitFor(i, n_items)});
    for (std::size_t a = 0; a < n_annotators; ++a) {
      AnnotationRecord r;
      r.item_id = id;
      r.annotator_id = "ann" + std::to_string(a + 1);
      int label = unit(rng) < accuracy ? truth : techniques[pick(rng)];
      r.prominent_technique = label;
      r.high_level = high_of(label);
      r.techniques_present = {label};
      if (label != schema.non_propaganda_technique_id && unit(rng) < 0.4) {
        int extra = techniques[pick(rng)];
        if (extra != schema.non_propaganda_technique_id && extra != label) {
          r.techniques_present.push_back(extra);
          std::sort(r.techniques_present.begin(), r.techniques_present.end());
        }
      }
      out.set.AddRecord(std::move(r));
    }
  }
  return out;
}

SyntheticCorpus MakeTestSplitCorpus(const Schema& schema, std::size_t n_items,
                                    std::uint32_t seed) {
  SyntheticCorpus corpus = MakeSyntheticCorpus(schema, n_items, seed);
  for (const Item& item : std::vector<Item>(corpus.set.items())) {
    corpus.set.SetSplit(item.item_id, Split::kTest);
  }
  return corpus;
}

void WriteAnnotationsFile(const AnnotationSet& set, const fs::path& path) {
  std::ostringstream out;
  WriteAnnotations(set, out);
  WriteFile(path, out.str());
}

oracle::Table RandomTable(std::mt19937& rng, int items, int raters, int labels,
                          double missing) {
  std::uniform_int_distribution<int> label(0, labels - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  oracle::Table t(items, std::vector<int>(raters));
  for (auto& row : t) {
    for (int& v : row) v = unit(rng) < missing ? -1 : label(rng);
  }
  return t;
}

RatingTable ToRatingTable(const oracle::Table& table) {
  std::vector<std::vector<std::optional<int>>> rows;
  for (const auto& row : table) {
    std::vector<std::optional<int>> r;
    for (int v : row) r.push_back(v < 0 ? std::nullopt : std::optional<int>(v));
    rows.push_back(std::move(r));
  }
  return RatingTable::FromRows(std::move(rows));
}

}  // namespace proptk::testing
