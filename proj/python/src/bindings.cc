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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "proptk/agreement.h"
#include "proptk/aggregation.h"
#include "proptk/cli.h"
#include "proptk/error.h"
#include "proptk/error_analysis.h"
#include "proptk/taxonomy_cluster.h"

namespace py = pybind11;

namespace proptk {
namespace {

using Rows = std::vector<std::vector<std::optional<int>>>;

SimilarityMatrix Matrix(const std::vector<int>& labels,
                        const Eigen::MatrixXd& values, SimilarityKind kind) {
  SimilarityMatrix s;
  s.labels = labels;
  s.values = values;
  s.kind = kind;
  s.Validate();
  return s;
}

}  // namespace
}  // namespace proptk

PYBIND11_MODULE(_core, m) {
  using namespace proptk;
  m.doc() = "Propaganda annotation analytics toolkit";

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<ValidationError>(m, "ValidationError", error.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", error.ptr());
  py::register_exception<UndefinedStatistic>(m, "UndefinedStatistic",
                                             error.ptr());
  py::register_exception<EndpointError>(m, "EndpointError", error.ptr());

  m.def("cohen_kappa", [](const Rows& rows) {
    return CohenKappa(RatingTable::FromRows(rows));
  }, py::arg("rows"), "Cohen's kappa of a two-column table (None = missing).");
  m.def("mean_pairwise_cohen_kappa", [](const Rows& rows) {
    return MeanPairwiseCohenKappa(RatingTable::FromRows(rows));
  }, py::arg("rows"));
  m.def("fleiss_kappa", [](const Rows& rows) {
    return FleissKappa(RatingTable::FromRows(rows));
  }, py::arg("rows"));
  m.def("krippendorff_alpha", [](const Rows& rows) {
    return KrippendorffAlphaNominal(RatingTable::FromRows(rows));
  }, py::arg("rows"), "Nominal Krippendorff's alpha.");

  m.def(
      "dawid_skene",
      [](const Rows& rows, int max_iterations, double tolerance,
         double pseudo_count) {
        DSConfig config;
        config.max_iterations = max_iterations;
        config.tolerance = tolerance;
        config.pseudo_count = pseudo_count;
        DSModel model =
            RunDawidSkene(DSDataFromTable(RatingTable::FromRows(rows)), config);
        py::dict out;
        out["labels"] = model.labels;
        out["posteriors"] = model.item_posteriors;
        out["priors"] = model.class_priors;
        out["confusions"] = model.annotator_confusions;
        out["objective_trace"] = model.objective_trace;
        out["iterations"] = model.iterations;
        out["converged"] = model.converged;
        return out;
      },
      py::arg("rows"), py::arg("max_iterations") = 200,
      py::arg("tolerance") = 1e-7, py::arg("pseudo_count") = 0.01);

  m.def(
      "hybrid_cluster",
      [](const std::vector<int>& labels, const Eigen::MatrixXd& jaccard,
         const Eigen::MatrixXd& ds, double lambda, int groups,
         const std::set<int>& pinned) {
        SimilarityMatrix s = HybridSimilarity(
            Matrix(labels, jaccard, SimilarityKind::kJaccard),
            Matrix(labels, ds, SimilarityKind::kDSProfile), lambda);
        ClusterAssignment a = ConstrainedCluster(s, groups, pinned);
        return std::make_pair(a.groups, a.merge_distances);
      },
      py::arg("labels"), py::arg("jaccard"), py::arg("ds"), py::arg("lam"),
      py::arg("groups"), py::arg("pinned") = std::set<int>{},
      "Returns (groups, merge_distances).");

  m.def(
      "normalize",
      [](const std::string& text, const std::string& mode, bool lowercase) {
        TokenizerConfig config;
        config.mode = ParseNormalizationMode(mode);
        config.lowercase = lowercase;
        return Normalize(text, config);
      },
      py::arg("text"), py::arg("mode") = "surface", py::arg("lowercase") = true);
  m.def("strip_suffix", [](const std::string& t) { return StripSuffix(t); });

  m.def(
      "pca2d",
      [](const Eigen::MatrixXd& data) {
        PcaResult p = Pca2d(data);
        py::dict out;
        out["coordinates"] = p.coordinates;
        out["components"] = p.components;
        out["explained_variance"] = p.explained_variance;
        out["explained_variance_ratio"] = p.explained_variance_ratio;
        return out;
      },
      py::arg("data"));

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "proptk");
        py::gil_scoped_release release;
        return RunCli(args);
      },
      py::arg("args"), "Runs a proptk subcommand; returns the exit code.");
}
