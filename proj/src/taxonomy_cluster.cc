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

#include "proptk/taxonomy_cluster.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <iterator>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "proptk/diagnostics.h"
#include "proptk/error.h"

namespace proptk {
namespace {

constexpr double kTieEpsilon = 1e-12;

std::string FormatNumber(double value, const char* format) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, value);
  return buf;
}

}  // namespace

std::string_view SimilarityKindName(SimilarityKind kind) {
  switch (kind) {
    case SimilarityKind::kJaccard: return "jaccard";
    case SimilarityKind::kDSProfile: return "ds_profile";
    case SimilarityKind::kHybrid: return "hybrid";
  }
  return "hybrid";
}

void SimilarityMatrix::Validate() const {
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (values.rows() != n || values.cols() != n) {
    throw PreconditionError("similarity matrix shape does not match labels");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(values(i, i) - 1.0) > 1e-12) {
      throw PreconditionError("similarity diagonal must be 1");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = values(i, j);
      if (!(v >= -1e-12 && v <= 1.0 + 1e-12)) {
        throw PreconditionError("similarity entries must lie in [0, 1]");
      }
      if (std::abs(v - values(j, i)) > 1e-12) {
        throw PreconditionError("similarity matrix must be symmetric");
      }
    }
  }
}

std::size_t SimilarityMatrix::IndexOf(int label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    throw PreconditionError("label " + std::to_string(label) +
                            " is not in the similarity matrix");
  }
  return static_cast<std::size_t>(it - labels.begin());
}

SimilarityMatrix JaccardMatrix(const AnnotationSet& set, LabelLevel level,
                               const std::vector<int>& labels) {
  // Item indices carrying each label, ascending.
  std::vector<std::vector<std::size_t>> support(labels.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (std::size_t l = 0; l < labels.size(); ++l) {
      for (const auto& r : set.RecordsAt(i)) {
        const auto carried = r.Labels(level);
        if (std::find(carried.begin(), carried.end(), labels[l]) !=
            carried.end()) {
          support[l].push_back(i);
          break;
        }
      }
    }
  }
  for (std::size_t l = 0; l < labels.size(); ++l) {
    if (support[l].empty()) {
      Warn("label " + std::to_string(labels[l]) +
           " is carried by no item; its Jaccard similarities are 0");
    }
  }

  SimilarityMatrix s;
  s.labels = labels;
  s.kind = SimilarityKind::kJaccard;
  s.lambda = 1.0;
  const auto n = static_cast<Eigen::Index>(labels.size());
  s.values = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t a = 0; a < labels.size(); ++a) {
    for (std::size_t b = a + 1; b < labels.size(); ++b) {
      std::vector<std::size_t> common;
      std::set_intersection(support[a].begin(), support[a].end(),
                            support[b].begin(), support[b].end(),
                            std::back_inserter(common));
      const std::size_t unite =
          support[a].size() + support[b].size() - common.size();
      const double j =
          unite == 0 ? 0.0
                     : static_cast<double>(common.size()) /
                           static_cast<double>(unite);
      s.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = j;
      s.values(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = j;
    }
  }
  return s;
}

SimilarityMatrix DSSimilarity(const DSModel& model,
                              const std::vector<int>& labels) {
  SimilarityMatrix s;
  s.labels = labels.empty() ? model.labels : labels;
  s.kind = SimilarityKind::kDSProfile;
  s.lambda = 0.0;
  const auto n = static_cast<Eigen::Index>(s.labels.size());
  std::vector<Eigen::VectorXd> profiles;
  for (int label : s.labels) {
    Eigen::VectorXd p = PosteriorProfile(model, label);
    const double norm = p.norm();
    if (norm == 0.0) {
      throw PreconditionError("posterior profile of label " +
                              std::to_string(label) + " has zero norm");
    }
    profiles.push_back(p / norm);
  }
  s.values = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const double c = std::clamp(
          profiles[static_cast<std::size_t>(a)].dot(
              profiles[static_cast<std::size_t>(b)]),
          0.0, 1.0);
      s.values(a, b) = c;
      s.values(b, a) = c;
    }
  }
  return s;
}

SimilarityMatrix HybridSimilarity(const SimilarityMatrix& jaccard,
                                  const SimilarityMatrix& ds, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw PreconditionError("lambda must lie in [0, 1]");
  }
  if (jaccard.labels != ds.labels) {
    throw PreconditionError(
        "Jaccard and DS similarities use different label orders");
  }
  SimilarityMatrix s;
  s.labels = jaccard.labels;
  s.kind = SimilarityKind::kHybrid;
  s.lambda = lambda;
  s.values = lambda * jaccard.values + (1.0 - lambda) * ds.values;
  return s;
}

std::optional<int> ClusterAssignment::GroupOf(int label) const {
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (std::binary_search(groups[g].begin(), groups[g].end(), label)) {
      return static_cast<int>(g);
    }
  }
  return std::nullopt;
}

ClusterAssignment ConstrainedCluster(const SimilarityMatrix& similarity,
                                     int target_groups,
                                     const std::set<int>& pinned) {
  for (int p : pinned) similarity.IndexOf(p);
  const int n_labels = static_cast<int>(similarity.labels.size());
  const int n_pinned = static_cast<int>(pinned.size());
  if (target_groups < 1 + n_pinned || target_groups > n_labels) {
    throw PreconditionError(
        "cannot form " + std::to_string(target_groups) + " groups from " +
        std::to_string(n_labels) + " labels with " +
        std::to_string(n_pinned) + " pinned");
  }

  std::vector<std::vector<int>> clusters;
  {
    std::vector<int> free;
    for (int label : similarity.labels) {
      if (!pinned.count(label)) free.push_back(label);
    }
    std::sort(free.begin(), free.end());
    for (int label : free) clusters.push_back({label});
  }
  const auto distance = [&](int a, int b) {
    return 1.0 - similarity.values(
                     static_cast<Eigen::Index>(similarity.IndexOf(a)),
                     static_cast<Eigen::Index>(similarity.IndexOf(b)));
  };
  // Sums run over sorted members so the result is independent of the
  // matrix's label order.
  const auto linkage = [&](const std::vector<int>& a,
                           const std::vector<int>& b) {
    double sum = 0.0;
    for (int x : a) {
      for (int y : b) sum += distance(x, y);
    }
    return sum / static_cast<double>(a.size() * b.size());
  };

  ClusterAssignment out;
  out.pinned = pinned;
  out.lambda = similarity.lambda;
  const std::size_t wanted = static_cast<std::size_t>(target_groups - n_pinned);
  while (clusters.size() > wanted) {
    std::size_t best_a = 0, best_b = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        const double d = linkage(clusters[a], clusters[b]);
        // Clusters stay ordered by minimum, so (a, b) visits pairs in
        // lexicographic (min id, max id) order and strict < keeps the first.
        if (d < best - kTieEpsilon) {
          best = d;
          best_a = a;
          best_b = b;
        }
      }
    }
    if (!out.merge_distances.empty() &&
        best < out.merge_distances.back() - 1e-9) {
      throw std::logic_error("average-linkage merge distance decreased");
    }
    out.merge_distances.push_back(best);
    auto& keep = clusters[best_a];
    keep.insert(keep.end(), clusters[best_b].begin(), clusters[best_b].end());
    std::sort(keep.begin(), keep.end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best_b));
    std::sort(clusters.begin(), clusters.end(),
              [](const auto& x, const auto& y) { return x.front() < y.front(); });
  }
  out.groups = std::move(clusters);
  for (int p : pinned) out.groups.push_back({p});
  return out;
}

std::vector<double> DefaultLambdaGrid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  return grid;
}

SweepReport LambdaSweep(const SimilarityMatrix& jaccard,
                        const SimilarityMatrix& ds,
                        const std::vector<double>& grid, int target_groups,
                        const std::set<int>& pinned,
                        const RatingTable& technique_table) {
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw PreconditionError("lambda grid must be strictly increasing");
    }
  }
  {
    std::set<int> outside;
    for (const auto& row : technique_table.ratings) {
      for (const auto& r : row) {
        if (r && std::find(jaccard.labels.begin(), jaccard.labels.end(), *r) ==
                     jaccard.labels.end()) {
          outside.insert(*r);
        }
      }
    }
    for (int label : outside) {
      Warn("label " + std::to_string(label) +
           " is not clustered; its ratings are dropped from the sweep");
    }
  }

  const auto run = [&](double lambda) {
    SweepRow row;
    row.lambda = lambda;
    row.assignment =
        ConstrainedCluster(HybridSimilarity(jaccard, ds, lambda),
                           target_groups, pinned);
    const RatingTable grouped = technique_table.Relabel(
        [&](int label) { return row.assignment.GroupOf(label); });
    try {
      row.fleiss_kappa = FleissKappa(grouped);
    } catch (const Error& e) {
      Warn("lambda " + FormatNumber(lambda, "%g") +
           ": Fleiss' kappa not reported: " + e.what());
    }
    try {
      row.krippendorff_alpha = KrippendorffAlphaNominal(grouped);
    } catch (const Error& e) {
      Warn("lambda " + FormatNumber(lambda, "%g") +
           ": Krippendorff's alpha not reported: " + e.what());
    }
    return row;
  };

  std::vector<std::future<SweepRow>> futures;
  futures.reserve(grid.size());
  for (double lambda : grid) {
    futures.push_back(std::async(std::launch::async, run, lambda));
  }
  SweepReport report;
  for (auto& f : futures) report.rows.push_back(f.get());
  return report;
}

nlohmann::ordered_json ClusterAssignmentToJson(const ClusterAssignment& a) {
  nlohmann::ordered_json j;
  j["lambda"] = a.lambda;
  j["linkage"] = a.linkage;
  j["pinned"] = std::vector<int>(a.pinned.begin(), a.pinned.end());
  j["groups"] = a.groups;
  j["merge_distances"] = a.merge_distances;
  return j;
}

std::string FormatGroups(const std::vector<std::vector<int>>& groups) {
  std::ostringstream out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    out << (g ? ";" : "") << "{";
    for (std::size_t i = 0; i < groups[g].size(); ++i) {
      out << (i ? "," : "") << groups[g][i];
    }
    out << "}";
  }
  return out.str();
}

std::string SweepToCsv(const SweepReport& report) {
  std::ostringstream out;
  out << "lambda,fleiss_kappa,krippendorff_alpha,groups\n";
  for (const auto& row : report.rows) {
    out << FormatNumber(row.lambda, "%g") << ","
        << (row.fleiss_kappa ? FormatNumber(*row.fleiss_kappa, "%.6f") : "")
        << ","
        << (row.krippendorff_alpha
                ? FormatNumber(*row.krippendorff_alpha, "%.6f")
                : "")
        << ",\"" << FormatGroups(row.assignment.groups) << "\"\n";
  }
  return out.str();
}

}  // namespace proptk
