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

#ifndef PROPTK_TESTS_SUPPORT_SYNTHETIC_H_
#define PROPTK_TESTS_SUPPORT_SYNTHETIC_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "proptk/agreement.h"
#include "proptk/corpus.h"
#include "support/oracles.h"

namespace proptk::testing {

std::filesystem::path SourceDir();
Schema IntentSchema();
Schema SahitajSchema();
std::filesystem::path IntentSchemaPath();

// Removed with its contents on destruction.
class ScopedTempDir {
 public:
  ScopedTempDir();
  ~ScopedTempDir();
  ScopedTempDir(const ScopedTempDir&) = delete;
  ScopedTempDir& operator=(const ScopedTempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, const std::string& text);

// A seeded corpus whose items carry a true technique; annotators copy it
// with probability `accuracy` and otherwise pick a random technique. Every
// text contains "item <id>" so a mock endpoint can recognise it. Splits
// follow the 210/90/200 proportions.
struct SyntheticCorpus {
  AnnotationSet set;
  std::map<std::string, int> true_main;
  std::map<std::string, int> true_high;
};
SyntheticCorpus MakeSyntheticCorpus(const Schema& schema, std::size_t n_items,
                                    std::uint32_t seed,
                                    std::size_t n_annotators = 3,
                                    double accuracy = 0.8);
// Same items, every item in the test split.
SyntheticCorpus MakeTestSplitCorpus(const Schema& schema, std::size_t n_items,
                                    std::uint32_t seed);
void WriteAnnotationsFile(const AnnotationSet& set,
                          const std::filesystem::path& path);

// Ratings in [0, labels) with probability `missing` of -1 per cell.
oracle::Table RandomTable(std::mt19937& rng, int items, int raters,
                          int labels, double missing);
RatingTable ToRatingTable(const oracle::Table& table);

}  // namespace proptk::testing

#endif  // PROPTK_TESTS_SUPPORT_SYNTHETIC_H_
