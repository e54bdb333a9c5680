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

// Lexical error analysis over confusion cells: normalize tweet text, pool the
// tokens of every (gold, predicted) cell, rank them, and project the cells to
// 2-D through TF-IDF and PCA.

#ifndef PROPTK_ERROR_ANALYSIS_H_
#define PROPTK_ERROR_ANALYSIS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <nlohmann/json_fwd.hpp>

#include "proptk/corpus.h"

namespace proptk {

enum class NormalizationMode { kSurface, kSuffixStrip, kLemmaMap };

std::string_view NormalizationModeName(NormalizationMode mode);
NormalizationMode ParseNormalizationMode(std::string_view name);

struct TokenizerConfig {
  bool lowercase = true;  // ASCII letters only
  NormalizationMode mode = NormalizationMode::kSurface;
  // Checked against the normalized token.
  std::unordered_set<std::string> stopwords;
  // token -> lemma, used by kLemmaMap; unmapped tokens pass through.
  std::unordered_map<std::string, std::string> lemma_map;
};

// One word per line; blank lines and lines starting with '#' are skipped.
std::unordered_set<std::string> LoadStopwords(
    const std::filesystem::path& path);
// "token<TAB>lemma" per line. Throws ValidationError naming the line of a
// malformed entry.
std::unordered_map<std::string, std::string> LoadLemmaMap(
    const std::filesystem::path& path);

// URLs (http://, https://, www.) are dropped, @mentions become "user", '#'
// is stripped from hashtags. Tokens are runs of ASCII letters, digits, '_'
// and non-ASCII bytes, keeping apostrophes between word characters (U+2019
// is read as an apostrophe).
std::vector<std::string> Normalize(std::string_view text,
                                   const TokenizerConfig& config);

// Suffix table, first matching rule wins:
//   's           -> removed
//   ies          -> y          (word longer than 4)
//   ing, ed      -> removed    (stem of 3+; a doubled final consonant other
//                               than l, s, z is undoubled)
//   es           -> removed    after s, x, z, ch, sh (stem of 2+)
//   s            -> removed    unless after s, u, i (word longer than 3)
std::string StripSuffix(std::string_view token);

struct BinaryPartition {
  // Sorted item ids; propaganda is the positive class.
  std::vector<std::string> tp, tn, fp, fn;
};

// High-level gold vs. predictions. Unparseable predictions and items
// without gold are left out.
BinaryPartition BinaryErrorPartition(
    const std::map<std::string, int>& gold,
    std::span<const PredictionRecord> predictions, int non_propaganda_label);

struct CellDoc {
  int gold = 0;
  int pred = 0;
  std::vector<std::string> item_ids;  // sorted
  std::map<std::string, std::int64_t> counts;
  std::int64_t n_tokens = 0;

  std::size_t n_items() const { return item_ids.size(); }
  bool diagonal() const { return gold == pred; }
};

// Pools normalized tokens per (gold, high-level prediction) cell. Cells are
// ordered by (gold, pred); empty cells are absent. Unparseable predictions
// and items lacking gold or text are skipped with a warning.
std::vector<CellDoc> BuildCellDocs(
    const std::map<std::string, int>& gold,
    std::span<const PredictionRecord> predictions,
    const std::map<std::string, std::string>& texts,
    const TokenizerConfig& config);

// Most frequent tokens, count descending then token ascending. top_k = 0
// keeps all.
std::vector<std::pair<std::string, std::int64_t>> TopTokens(
    const CellDoc& doc, std::size_t top_k);

// Markdown table: true label, predicted label, #tokens, top tokens with
// counts. Labels are shown as "Name (id)" when `schema` is given.
std::string RenderCellTokens(std::span<const CellDoc> docs, std::size_t top_k,
                             const Schema* schema = nullptr);

struct TfidfMatrix {
  std::vector<std::string> vocabulary;  // sorted
  Eigen::SparseMatrix<double, Eigen::RowMajor> values;  // docs x vocabulary
};

// tf = count / n_tokens, idf = ln((1 + N) / (1 + df)) + 1, rows scaled to
// unit L2 norm. Throws PreconditionError on an empty vocabulary.
TfidfMatrix Tfidf(std::span<const CellDoc> docs);

struct PcaResult {
  Eigen::MatrixXd coordinates;  // rows x 2
  Eigen::MatrixXd components;   // 2 x columns, orthonormal rows
  Eigen::Vector2d explained_variance = Eigen::Vector2d::Zero();
  Eigen::Vector2d explained_variance_ratio = Eigen::Vector2d::Zero();
};

// Top two principal components of the row-centered data (sample
// covariance, divisor rows - 1). Each component's largest-magnitude loading
// is positive. Missing components (rank < 2) are completed to an
// orthonormal pair from the standard basis. Needs at least 2 rows and 2
// columns.
PcaResult Pca2d(const Eigen::MatrixXd& data);

// "cell,x,y,true,pred,n_items", one row per cell in `docs` order.
std::string PcaToCsv(std::span<const CellDoc> docs, const PcaResult& pca);
// Scatter plot: colour = gold label, filled circle = correct cell, cross =
// error cell.
std::string PcaToSvg(std::span<const CellDoc> docs, const PcaResult& pca,
                     const Schema* schema = nullptr);

nlohmann::ordered_json TokenizerConfigToJson(const TokenizerConfig& config);

}  // namespace proptk

#endif  // PROPTK_ERROR_ANALYSIS_H_
