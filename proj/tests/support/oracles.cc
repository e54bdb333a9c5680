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

#include "support/oracles.h"

#include <cmath>
#include <map>
#include <set>

namespace proptk::oracle {

std::optional<double> Cohen(const std::vector<int>& a,
                            const std::vector<int>& b) {
  const std::size_t n = a.size();
  if (n == 0) return std::nullopt;
  double agree = 0;
  for (std::size_t i = 0; i < n; ++i) agree += a[i] == b[i];
  // Chance: probability two independent draws, one from each rater, match.
  double chance = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) chance += a[i] == b[j];
  }
  double po = agree / n;
  double pe = chance / (double(n) * n);
  if (pe >= 1.0 - 1e-15) return std::nullopt;
  return (po - pe) / (1 - pe);
}

std::optional<double> Fleiss(const Table& table) {
  if (table.empty()) return std::nullopt;
  const std::size_t m = table[0].size();
  if (m < 2) return std::nullopt;
  double pbar = 0;
  for (const auto& row : table) {
    double same = 0;
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t s = 0; s < m; ++s) {
        if (r != s && row[r] == row[s]) same += 1;
      }
    }
    pbar += same / (double(m) * (m - 1));
  }
  pbar /= table.size();
  // Chance: two ratings drawn with replacement from the pooled ratings.
  double same = 0;
  double total = double(table.size()) * m;
  for (const auto& r1 : table) {
    for (int x : r1) {
      for (const auto& r2 : table) {
        for (int y : r2) same += x == y;
      }
    }
  }
  double pe = same / (total * total);
  if (pe >= 1.0 - 1e-15) return std::nullopt;
  return (pbar - pe) / (1 - pe);
}

std::optional<double> KrippendorffNominal(const Table& table) {
  // Pairable values: those in units with at least two values.
  std::vector<std::vector<int>> units;
  for (const auto& row : table) {
    std::vector<int> values;
    for (int v : row) {
      if (v >= 0) values.push_back(v);
    }
    if (values.size() >= 2) units.push_back(values);
  }
  std::vector<int> pooled;
  for (const auto& u : units) pooled.insert(pooled.end(), u.begin(), u.end());
  const double n = pooled.size();
  if (n < 2) return std::nullopt;
  double observed = 0;
  for (const auto& u : units) {
    double dis = 0;
    for (std::size_t r = 0; r < u.size(); ++r) {
      for (std::size_t s = 0; s < u.size(); ++s) {
        if (r != s && u[r] != u[s]) dis += 1;
      }
    }
    observed += dis / (u.size() - 1.0);
  }
  observed /= n;
  double expected = 0;
  for (std::size_t p = 0; p < pooled.size(); ++p) {
    for (std::size_t q = 0; q < pooled.size(); ++q) {
      if (p != q && pooled[p] != pooled[q]) expected += 1;
    }
  }
  expected /= n * (n - 1);
  if (expected <= 0) return std::nullopt;
  return 1 - observed / expected;
}

DSResult DawidSkene(const Table& table, int k, double s, int iterations) {
  const std::size_t n_items = table.size();
  const std::size_t n_ann = n_items ? table[0].size() : 0;
  DSResult r;
  r.posteriors.assign(n_items, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < n_items; ++i) {
    int votes = 0;
    for (int v : table[i]) {
      if (v >= 0) {
        r.posteriors[i][v] += 1;
        ++votes;
      }
    }
    for (int c = 0; c < k; ++c) {
      r.posteriors[i][c] = votes ? r.posteriors[i][c] / votes : 1.0 / k;
    }
  }
  for (int it = 0; it < iterations; ++it) {
    // M-step.
    r.priors.assign(k, 0.0);
    for (int c = 0; c < k; ++c) {
      double mass = 0;
      for (std::size_t i = 0; i < n_items; ++i) mass += r.posteriors[i][c];
      r.priors[c] = (mass + s) / (n_items + k * s);
    }
    r.confusions.assign(n_ann, std::vector<std::vector<double>>(
                                   k, std::vector<double>(k, 0.0)));
    for (std::size_t a = 0; a < n_ann; ++a) {
      for (int c = 0; c < k; ++c) {
        double row = 0;
        for (int l = 0; l < k; ++l) {
          double m = s;
          for (std::size_t i = 0; i < n_items; ++i) {
            if (table[i][a] == l) m += r.posteriors[i][c];
          }
          r.confusions[a][c][l] = m;
          row += m;
        }
        for (int l = 0; l < k; ++l) {
          r.confusions[a][c][l] = row > 0 ? r.confusions[a][c][l] / row : 1.0 / k;
        }
      }
    }
    // E-step.
    for (std::size_t i = 0; i < n_items; ++i) {
      double z = 0;
      std::vector<double> joint(k);
      for (int c = 0; c < k; ++c) {
        double p = r.priors[c];
        for (std::size_t a = 0; a < n_ann; ++a) {
          if (table[i][a] >= 0) p *= r.confusions[a][c][table[i][a]];
        }
        joint[c] = p;
        z += p;
      }
      for (int c = 0; c < k; ++c) {
        r.posteriors[i][c] = z > 0 ? joint[c] / z : 1.0 / k;
      }
    }
  }
  return r;
}

F1Result F1Scores(const std::vector<int>& gold, const std::vector<int>& pred,
                  int n_labels) {
  F1Result out;
  double weighted = 0;
  long total = 0;
  for (int c = 0; c < n_labels; ++c) {
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      bool g = gold[i] == c;
      bool p = pred[i] == c;
      tp += g && p;
      fp += !g && p;
      fn += g && !p;
    }
    double f1 = tp == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
    out.f1.push_back(f1);
    out.support.push_back(tp + fn);
    weighted += f1 * (tp + fn);
    total += tp + fn;
    out.macro += f1;
  }
  out.macro /= n_labels;
  out.weighted = total ? weighted / total : 0.0;
  return out;
}

std::vector<std::vector<double>> Tfidf(
    const std::vector<std::vector<std::string>>& docs,
    std::vector<std::string>* vocabulary) {
  std::set<std::string> vocab;
  for (const auto& d : docs) vocab.insert(d.begin(), d.end());
  std::vector<std::string> words(vocab.begin(), vocab.end());
  const double n = docs.size();
  std::vector<std::vector<double>> rows;
  for (const auto& d : docs) {
    std::vector<double> row;
    double norm = 0;
    for (const std::string& w : words) {
      double count = 0;
      for (const auto& t : d) count += t == w;
      double df = 0;
      for (const auto& other : docs) {
        for (const auto& t : other) {
          if (t == w) {
            df += 1;
            break;
          }
        }
      }
      double v = d.empty() ? 0.0
                           : (count / d.size()) *
                                 (std::log((1 + n) / (1 + df)) + 1);
      row.push_back(v);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : row) v = norm > 0 ? v / norm : 0.0;
    rows.push_back(row);
  }
  if (vocabulary) *vocabulary = words;
  return rows;
}

}  // namespace proptk::oracle
