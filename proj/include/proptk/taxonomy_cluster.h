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

// Induction of high-level label groups from fine-grained annotations.
//
// Two label x label similarities are blended, S = lambda * J + (1 - lambda) * DS:
//   J   Jaccard overlap of the item sets carrying each label
//   DS  cosine of Dawid-Skene posterior profiles
// and the labels are grouped by average-linkage agglomeration on 1 - S, with
// pinned labels (non-propaganda) held out as singletons.

#ifndef PROPTK_TAXONOMY_CLUSTER_H_
#define PROPTK_TAXONOMY_CLUSTER_H_

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "proptk/aggregation.h"
#include "proptk/agreement.h"
#include "proptk/corpus.h"

namespace proptk {

enum class SimilarityKind { kJaccard, kDSProfile, kHybrid };

std::string_view SimilarityKindName(SimilarityKind kind);

struct SimilarityMatrix {
  std::vector<int> labels;  // row/column order
  Eigen::MatrixXd values;
  SimilarityKind kind = SimilarityKind::kJaccard;
  double lambda = 1.0;  // meaningful for kHybrid

  // Throws PreconditionError unless square, symmetric (1e-12), unit diagonal
  // and within [0, 1].
  void Validate() const;
  std::size_t IndexOf(int label) const;
};

// J_ij over `labels` from the items carrying each label at `level` (union over
// annotators). A label carried by no item gets J_ij = 0 off the diagonal and
// a warning.
SimilarityMatrix JaccardMatrix(const AnnotationSet& set, LabelLevel level,
                               const std::vector<int>& labels);

// Cosine of posterior profiles, clamped to [0, 1], over `labels` (defaults to
// every label of the model). Throws on a zero-norm profile.
SimilarityMatrix DSSimilarity(const DSModel& model,
                              const std::vector<int>& labels = {});

SimilarityMatrix HybridSimilarity(const SimilarityMatrix& jaccard,
                                  const SimilarityMatrix& ds, double lambda);

struct ClusterAssignment {
  // Non-pinned groups ordered by smallest member, then pinned singletons.
  // Every group is sorted ascending.
  std::vector<std::vector<int>> groups;
  std::set<int> pinned;
  double lambda = 0.0;
  std::string linkage = "average";
  // Distance (1 - S average) of every merge, in merge order.
  std::vector<double> merge_distances;

  // Group index of `label`, or nullopt.
  std::optional<int> GroupOf(int label) const;
};

// Average-linkage agglomeration on D = 1 - S over the non-pinned labels until
// target_groups - |pinned| groups remain. Ties (within 1e-12) merge the pair
// with the lexicographically smallest (min id, max id) of group minima.
ClusterAssignment ConstrainedCluster(const SimilarityMatrix& similarity,
                                     int target_groups,
                                     const std::set<int>& pinned);

struct SweepRow {
  double lambda = 0.0;
  std::optional<double> fleiss_kappa;  // nullopt when the table is ragged
  std::optional<double> krippendorff_alpha;
  ClusterAssignment assignment;
};

struct SweepReport {
  std::vector<SweepRow> rows;
};

// 0.0, 0.1, ..., 1.0.
std::vector<double> DefaultLambdaGrid();

// For each lambda: cluster the hybrid similarity, map every rating of
// `technique_table` through the grouping and score agreement. Labels outside
// the grouping are dropped from the table with a warning. Lambdas run in
// parallel.
SweepReport LambdaSweep(const SimilarityMatrix& jaccard,
                        const SimilarityMatrix& ds,
                        const std::vector<double>& grid, int target_groups,
                        const std::set<int>& pinned,
                        const RatingTable& technique_table);

nlohmann::ordered_json ClusterAssignmentToJson(const ClusterAssignment& a);
// Groups rendered as "{5,15};{9,16};{18}".
std::string FormatGroups(const std::vector<std::vector<int>>& groups);
// CSV with columns lambda,fleiss_kappa,krippendorff_alpha,groups.
std::string SweepToCsv(const SweepReport& report);

}  // namespace proptk

#endif  // PROPTK_TAXONOMY_CLUSTER_H_
