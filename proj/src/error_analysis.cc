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

#include "proptk/error_analysis.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "proptk/diagnostics.h"
#include "proptk/error.h"

namespace proptk {
namespace {

enum class ByteKind { kWord, kApostrophe, kSeparator };

// Classifies the character at text[i] and reports its byte length.
ByteKind Classify(std::string_view text, std::size_t i, std::size_t* len) {
  auto c = static_cast<unsigned char>(text[i]);
  *len = 1;
  if (c == '\'') return ByteKind::kApostrophe;
  if (c < 0x80) {
    return (std::isalnum(c) || c == '_') ? ByteKind::kWord
                                         : ByteKind::kSeparator;
  }
  // U+2000..U+206F general punctuation: E2 80 xx, E2 81 80..AF.
  if (c == 0xE2 && i + 2 < text.size()) {
    auto c1 = static_cast<unsigned char>(text[i + 1]);
    auto c2 = static_cast<unsigned char>(text[i + 2]);
    if (c1 == 0x80 || (c1 == 0x81 && c2 <= 0xAF)) {
      *len = 3;
      if (c1 == 0x80 && c2 == 0x99) return ByteKind::kApostrophe;
      return ByteKind::kSeparator;
    }
  }
  return ByteKind::kWord;
}

bool StartsWithIgnoreCase(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) {
      return false;
    }
  }
  return true;
}

bool IsUrl(std::string_view chunk) {
  return StartsWithIgnoreCase(chunk, "http://") ||
         StartsWithIgnoreCase(chunk, "https://") ||
         StartsWithIgnoreCase(chunk, "www.");
}

// Raw tokens of one whitespace-free chunk.
void TokenizeChunk(std::string_view chunk, std::vector<std::string>& out) {
  std::size_t i = 0;
  while (i < chunk.size()) {
    std::size_t len = 0;
    ByteKind kind = Classify(chunk, i, &len);
    if (chunk[i] == '@' && i + 1 < chunk.size()) {
      std::size_t next_len = 0;
      if (Classify(chunk, i + 1, &next_len) == ByteKind::kWord) {
        i += 1;
        while (i < chunk.size() &&
               Classify(chunk, i, &next_len) == ByteKind::kWord) {
          i += next_len;
        }
        out.emplace_back("user");
        continue;
      }
    }
    if (kind != ByteKind::kWord) {
      i += len;
      continue;
    }
    std::string token;
    while (i < chunk.size()) {
      kind = Classify(chunk, i, &len);
      if (kind == ByteKind::kWord) {
        token.append(chunk.substr(i, len));
        i += len;
        continue;
      }
      if (kind == ByteKind::kApostrophe && i + len < chunk.size()) {
        std::size_t after_len = 0;
        if (Classify(chunk, i + len, &after_len) == ByteKind::kWord) {
          token.push_back('\'');
          i += len;
          continue;
        }
      }
      break;
    }
    out.push_back(std::move(token));
  }
}

bool EndsWith(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

bool IsVowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

std::string Undouble(std::string stem) {
  std::size_t n = stem.size();
  if (n >= 2 && stem[n - 1] == stem[n - 2]) {
    char c = stem[n - 1];
    bool consonant = std::isalpha(static_cast<unsigned char>(c)) && !IsVowel(c);
    if (consonant && c != 'l' && c != 's' && c != 'z') stem.pop_back();
  }
  return stem;
}

std::string Fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  std::string s(buf);
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) {
    s.erase(0, 1);
  }
  return s;
}

std::string XmlEscape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string LabelText(int id, const Schema* schema) {
  if (schema) {
    if (const HighLevelCategory* c = schema->FindHighLevel(id)) {
      return c->name + " (" + std::to_string(id) + ")";
    }
  }
  return std::to_string(id);
}

std::string CellName(const CellDoc& doc) {
  return std::to_string(doc.gold) + "->" + std::to_string(doc.pred);
}

}  // namespace

std::string_view NormalizationModeName(NormalizationMode mode) {
  switch (mode) {
    case NormalizationMode::kSurface:
      return "surface";
    case NormalizationMode::kSuffixStrip:
      return "suffix_strip";
    case NormalizationMode::kLemmaMap:
      return "lemma_map";
  }
  return "unknown";
}

NormalizationMode ParseNormalizationMode(std::string_view name) {
  if (name == "surface") return NormalizationMode::kSurface;
  if (name == "suffix_strip" || name == "suffix-strip") {
    return NormalizationMode::kSuffixStrip;
  }
  if (name == "lemma_map" || name == "lemma-map") {
    return NormalizationMode::kLemmaMap;
  }
  throw ValidationError("unknown normalization mode '" + std::string(name) +
                        "'");
}

std::unordered_set<std::string> LoadStopwords(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) {
      line.pop_back();
    }
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    words.insert(line.substr(start));
  }
  return words;
}

std::unordered_map<std::string, std::string> LoadLemmaMap(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::unordered_map<std::string, std::string> map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected 'token<TAB>lemma'");
    }
    map[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return map;
}

std::string StripSuffix(std::string_view token) {
  std::string w(token);
  if (EndsWith(w, "'s")) return w.substr(0, w.size() - 2);
  if (EndsWith(w, "ies") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
  for (std::string_view suffix : {std::string_view("ing"), std::string_view("ed")}) {
    if (EndsWith(w, suffix) && w.size() - suffix.size() >= 3) {
      return Undouble(w.substr(0, w.size() - suffix.size()));
    }
  }
  if (EndsWith(w, "es") && w.size() >= 4) {
    std::string stem = w.substr(0, w.size() - 2);
    if (EndsWith(stem, "s") || EndsWith(stem, "x") || EndsWith(stem, "z") ||
        EndsWith(stem, "ch") || EndsWith(stem, "sh")) {
      return stem;
    }
  }
  if (EndsWith(w, "s") && w.size() > 3 && !EndsWith(w, "ss") &&
      !EndsWith(w, "us") && !EndsWith(w, "is")) {
    return w.substr(0, w.size() - 1);
  }
  return w;
}

std::vector<std::string> Normalize(std::string_view text,
                                   const TokenizerConfig& config) {
  std::vector<std::string> raw;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    std::size_t start = i;
    while (i < text.size() &&
           !std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    std::string_view chunk = text.substr(start, i - start);
    if (chunk.empty() || IsUrl(chunk)) continue;
    TokenizeChunk(chunk, raw);
  }

  std::vector<std::string> out;
  out.reserve(raw.size());
  for (std::string& token : raw) {
    if (config.lowercase) {
      for (char& c : token) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      }
    }
    switch (config.mode) {
      case NormalizationMode::kSurface:
        break;
      case NormalizationMode::kSuffixStrip:
        token = StripSuffix(token);
        break;
      case NormalizationMode::kLemmaMap: {
        auto it = config.lemma_map.find(token);
        if (it != config.lemma_map.end()) token = it->second;
        break;
      }
    }
    if (token.empty() || config.stopwords.count(token)) continue;
    out.push_back(std::move(token));
  }
  return out;
}

BinaryPartition BinaryErrorPartition(
    const std::map<std::string, int>& gold,
    std::span<const PredictionRecord> predictions, int non_propaganda_label) {
  BinaryPartition out;
  for (const PredictionRecord& p : predictions) {
    if (!p.parsed()) continue;
    auto g = gold.find(p.item_id);
    if (g == gold.end()) continue;
    bool gold_prop = g->second != non_propaganda_label;
    bool pred_prop = *p.high_pred != non_propaganda_label;
    if (gold_prop && pred_prop) {
      out.tp.push_back(p.item_id);
    } else if (!gold_prop && !pred_prop) {
      out.tn.push_back(p.item_id);
    } else if (pred_prop) {
      out.fp.push_back(p.item_id);
    } else {
      out.fn.push_back(p.item_id);
    }
  }
  for (auto* v : {&out.tp, &out.tn, &out.fp, &out.fn}) {
    std::sort(v->begin(), v->end());
  }
  return out;
}

std::vector<CellDoc> BuildCellDocs(
    const std::map<std::string, int>& gold,
    std::span<const PredictionRecord> predictions,
    const std::map<std::string, std::string>& texts,
    const TokenizerConfig& config) {
  std::map<std::pair<int, int>, CellDoc> cells;
  std::size_t skipped_unparseable = 0;
  std::size_t skipped_gold = 0;
  std::size_t skipped_text = 0;
  for (const PredictionRecord& p : predictions) {
    if (!p.parsed()) {
      ++skipped_unparseable;
      continue;
    }
    auto g = gold.find(p.item_id);
    if (g == gold.end()) {
      ++skipped_gold;
      continue;
    }
    auto t = texts.find(p.item_id);
    if (t == texts.end()) {
      ++skipped_text;
      continue;
    }
    CellDoc& doc = cells[{g->second, *p.high_pred}];
    doc.gold = g->second;
    doc.pred = *p.high_pred;
    doc.item_ids.push_back(p.item_id);
    for (std::string& token : Normalize(t->second, config)) {
      doc.counts[std::move(token)] += 1;
      doc.n_tokens += 1;
    }
  }
  if (skipped_unparseable) {
    Warn(std::to_string(skipped_unparseable) +
         " unparseable prediction(s) left out of the cell analysis");
  }
  if (skipped_gold) {
    Warn(std::to_string(skipped_gold) + " prediction(s) without gold skipped");
  }
  if (skipped_text) {
    Warn(std::to_string(skipped_text) + " prediction(s) without text skipped");
  }
  std::vector<CellDoc> out;
  out.reserve(cells.size());
  for (auto& [key, doc] : cells) {
    std::sort(doc.item_ids.begin(), doc.item_ids.end());
    out.push_back(std::move(doc));
  }
  return out;
}

std::vector<std::pair<std::string, std::int64_t>> TopTokens(
    const CellDoc& doc, std::size_t top_k) {
  std::vector<std::pair<std::string, std::int64_t>> ranked(doc.counts.begin(),
                                                           doc.counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  if (top_k > 0 && ranked.size() > top_k) ranked.resize(top_k);
  return ranked;
}

std::string RenderCellTokens(std::span<const CellDoc> docs, std::size_t top_k,
                             const Schema* schema) {
  std::ostringstream out;
  out << "| True label | Pred label | #tokens | Most frequent tokens (count) |\n";
  out << "|---|---|---:|---|\n";
  for (const CellDoc& doc : docs) {
    out << "| " << LabelText(doc.gold, schema) << " | "
        << LabelText(doc.pred, schema) << " | " << doc.n_tokens << " | ";
    bool first = true;
    for (const auto& [token, count] : TopTokens(doc, top_k)) {
      out << (first ? "" : ", ") << token << " (" << count << ")";
      first = false;
    }
    out << " |\n";
  }
  return out.str();
}

TfidfMatrix Tfidf(std::span<const CellDoc> docs) {
  std::set<std::string> vocab;
  for (const CellDoc& doc : docs) {
    for (const auto& [token, count] : doc.counts) {
      if (count > 0) vocab.insert(token);
    }
  }
  if (vocab.empty()) throw PreconditionError("TF-IDF over an empty vocabulary");

  TfidfMatrix out;
  out.vocabulary.assign(vocab.begin(), vocab.end());
  std::map<std::string, std::size_t> column;
  for (std::size_t j = 0; j < out.vocabulary.size(); ++j) {
    column.emplace(out.vocabulary[j], j);
  }
  std::vector<double> df(out.vocabulary.size(), 0.0);
  for (const CellDoc& doc : docs) {
    for (const auto& [token, count] : doc.counts) {
      if (count > 0) df[column.at(token)] += 1.0;
    }
  }
  const double n = static_cast<double>(docs.size());

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> triplets;
  for (std::size_t r = 0; r < docs.size(); ++r) {
    const CellDoc& doc = docs[r];
    std::vector<std::pair<std::size_t, double>> row;
    double norm2 = 0.0;
    for (const auto& [token, count] : doc.counts) {
      if (count <= 0) continue;
      std::size_t j = column.at(token);
      double tf = static_cast<double>(count) / static_cast<double>(doc.n_tokens);
      double idf = std::log((1.0 + n) / (1.0 + df[j])) + 1.0;
      row.emplace_back(j, tf * idf);
      norm2 += tf * idf * tf * idf;
    }
    if (norm2 == 0.0) {
      Warn("cell " + CellName(doc) + " has no tokens; its TF-IDF row is zero");
      continue;
    }
    double norm = std::sqrt(norm2);
    for (const auto& [j, v] : row) {
      triplets.emplace_back(static_cast<int>(r), static_cast<int>(j), v / norm);
    }
  }
  out.values.resize(static_cast<Eigen::Index>(docs.size()),
                    static_cast<Eigen::Index>(out.vocabulary.size()));
  out.values.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

PcaResult Pca2d(const Eigen::MatrixXd& data) {
  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  if (n < 2) throw PreconditionError("PCA needs at least 2 rows");
  if (d < 2) throw PreconditionError("PCA needs at least 2 columns");

  Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  // Eigen-decompose the n x n Gram matrix; cells are few, vocabularies large.
  Eigen::MatrixXd gram = centered * centered.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) {
    throw Error("PCA eigen-decomposition failed");
  }
  const double trace = std::max(gram.trace(), 0.0);
  const double cutoff = 1e-12 * std::max(trace, 1e-300);

  PcaResult out;
  out.components = Eigen::MatrixXd::Zero(2, d);
  int found = 0;
  for (Eigen::Index k = n - 1; k >= 0 && found < 2; --k) {
    double lambda = solver.eigenvalues()(k);
    if (!(lambda > cutoff) || trace == 0.0) break;
    Eigen::VectorXd v = centered.transpose() * solver.eigenvectors().col(k);
    v /= std::sqrt(lambda);
    // Re-orthonormalize against the previous component for stability.
    for (int p = 0; p < found; ++p) {
      v -= out.components.row(p).dot(v) * out.components.row(p).transpose();
    }
    v.normalize();
    out.components.row(found) = v.transpose();
    out.explained_variance(found) = lambda / static_cast<double>(n - 1);
    out.explained_variance_ratio(found) = lambda / trace;
    ++found;
  }
  if (found == 0) {
    Warn("PCA input has rank 0 (all rows equal); coordinates are zero");
  }
  // Complete the pair from the standard basis.
  for (Eigen::Index e = 0; found < 2 && e < d; ++e) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(d, e);
    for (int p = 0; p < found; ++p) {
      v -= out.components.row(p).dot(v) * out.components.row(p).transpose();
    }
    if (v.norm() < 1e-6) continue;
    v.normalize();
    out.components.row(found) = v.transpose();
    ++found;
  }
  for (int p = 0; p < 2; ++p) {
    Eigen::Index arg = 0;
    out.components.row(p).cwiseAbs().maxCoeff(&arg);
    if (out.components(p, arg) < 0.0) out.components.row(p) *= -1.0;
  }
  out.coordinates = centered * out.components.transpose();
  if (out.explained_variance(0) == 0.0) out.coordinates.setZero();
  if (out.explained_variance(1) == 0.0) out.coordinates.col(1).setZero();
  return out;
}

std::string PcaToCsv(std::span<const CellDoc> docs, const PcaResult& pca) {
  if (static_cast<Eigen::Index>(docs.size()) != pca.coordinates.rows()) {
    throw PreconditionError("PCA rows do not match the cells");
  }
  std::ostringstream out;
  out << "cell,x,y,true,pred,n_items\n";
  for (std::size_t i = 0; i < docs.size(); ++i) {
    auto r = static_cast<Eigen::Index>(i);
    out << CellName(docs[i]) << ',' << Fixed(pca.coordinates(r, 0), 9) << ','
        << Fixed(pca.coordinates(r, 1), 9) << ',' << docs[i].gold << ','
        << docs[i].pred << ',' << docs[i].n_items() << '\n';
  }
  return out.str();
}

std::string PcaToSvg(std::span<const CellDoc> docs, const PcaResult& pca,
                     const Schema* schema) {
  if (static_cast<Eigen::Index>(docs.size()) != pca.coordinates.rows()) {
    throw PreconditionError("PCA rows do not match the cells");
  }
  static constexpr const char* kPalette[] = {
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
      "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  constexpr double kWidth = 720, kHeight = 520;
  constexpr double kLeft = 60, kRight = 200, kTop = 40, kBottom = 50;

  std::set<int> gold_labels;
  for (const CellDoc& doc : docs) gold_labels.insert(doc.gold);
  auto colour = [&](int label) {
    auto pos = std::distance(gold_labels.begin(), gold_labels.find(label));
    return kPalette[static_cast<std::size_t>(pos) % std::size(kPalette)];
  };

  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  if (pca.coordinates.rows() > 0) {
    xmin = pca.coordinates.col(0).minCoeff();
    xmax = pca.coordinates.col(0).maxCoeff();
    ymin = pca.coordinates.col(1).minCoeff();
    ymax = pca.coordinates.col(1).maxCoeff();
  }
  auto widen = [](double& lo, double& hi) {
    double span = hi - lo;
    if (span < 1e-9) {
      lo -= 1.0;
      hi += 1.0;
    } else {
      lo -= 0.08 * span;
      hi += 0.08 * span;
    }
  };
  widen(xmin, xmax);
  widen(ymin, ymax);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
  auto py = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * plot_h; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" fill=\"white\"/>\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15
      << "\" text-anchor=\"middle\">PC1 ("
      << Fixed(100.0 * pca.explained_variance_ratio(0), 1) << "%)</text>\n";
  out << "<text x=\"15\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << kTop + plot_h / 2 << ")\">PC2 ("
      << Fixed(100.0 * pca.explained_variance_ratio(1), 1) << "%)</text>\n";

  for (std::size_t i = 0; i < docs.size(); ++i) {
    auto r = static_cast<Eigen::Index>(i);
    std::string x = Fixed(px(pca.coordinates(r, 0)), 2);
    std::string y = Fixed(py(pca.coordinates(r, 1)), 2);
    const char* c = colour(docs[i].gold);
    out << "<g><title>" << XmlEscape(CellName(docs[i])) << " n="
        << docs[i].n_items() << "</title>";
    if (docs[i].diagonal()) {
      out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"6\" fill=\""
          << c << "\"/>";
    } else {
      double cx = px(pca.coordinates(r, 0));
      double cy = py(pca.coordinates(r, 1));
      out << "<path d=\"M" << Fixed(cx - 5, 2) << ' ' << Fixed(cy - 5, 2)
          << " L" << Fixed(cx + 5, 2) << ' ' << Fixed(cy + 5, 2) << " M"
          << Fixed(cx - 5, 2) << ' ' << Fixed(cy + 5, 2) << " L"
          << Fixed(cx + 5, 2) << ' ' << Fixed(cy - 5, 2) << "\" stroke=\"" << c
          << "\" stroke-width=\"2.5\" fill=\"none\"/>";
    }
    out << "<text x=\"" << Fixed(px(pca.coordinates(r, 0)) + 8, 2)
        << "\" y=\"" << Fixed(py(pca.coordinates(r, 1)) - 6, 2) << "\">"
        << docs[i].gold << "&#8594;" << docs[i].pred << "</text></g>\n";
  }

  double ly = kTop + 10;
  const double lx = kWidth - kRight + 20;
  out << "<text x=\"" << lx << "\" y=\"" << ly << "\" font-weight=\"bold\">"
      << "True label</text>\n";
  for (int label : gold_labels) {
    ly += 18;
    out << "<circle cx=\"" << lx + 5 << "\" cy=\"" << ly - 4
        << "\" r=\"5\" fill=\"" << colour(label) << "\"/><text x=\"" << lx + 16
        << "\" y=\"" << ly << "\">" << XmlEscape(LabelText(label, schema))
        << "</text>\n";
  }
  ly += 30;
  out << "<circle cx=\"" << lx + 5 << "\" cy=\"" << ly - 4
      << "\" r=\"5\" fill=\"#444\"/><text x=\"" << lx + 16 << "\" y=\"" << ly
      << "\">correct</text>\n";
  ly += 18;
  out << "<path d=\"M" << lx << ' ' << ly - 9 << " L" << lx + 10 << ' '
      << ly + 1 << " M" << lx << ' ' << ly + 1 << " L" << lx + 10 << ' '
      << ly - 9 << "\" stroke=\"#444\" stroke-width=\"2.5\"/><text x=\""
      << lx + 16 << "\" y=\"" << ly << "\">error</text>\n";
  out << "</svg>\n";
  return out.str();
}

nlohmann::ordered_json TokenizerConfigToJson(const TokenizerConfig& config) {
  nlohmann::ordered_json j;
  j["lowercase"] = config.lowercase;
  j["urls"] = "drop";
  j["mentions"] = "user";
  j["hashtags"] = "strip_hash";
  j["mode"] = NormalizationModeName(config.mode);
  j["n_stopwords"] = config.stopwords.size();
  j["n_lemma_map_entries"] = config.lemma_map.size();
  j["tfidf"] = "tf=count/n_tokens; idf=ln((1+N)/(1+df))+1; l2 rows";
  return j;
}

}  // namespace proptk
