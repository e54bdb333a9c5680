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

#include "proptk/cli.h"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "proptk/aggregation.h"
#include "proptk/agreement.h"
#include "proptk/corpus.h"
#include "proptk/diagnostics.h"
#include "proptk/error.h"
#include "proptk/error_analysis.h"
#include "proptk/evaluation.h"
#include "proptk/prompting.h"
#include "proptk/taxonomy_cluster.h"

namespace proptk {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string Fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

void WriteText(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << content;
  if (!out) throw ValidationError("failed writing " + path.string());
}

void WriteJson(const fs::path& path, const ojson& j) {
  WriteText(path, j.dump(2) + "\n");
}

void RequireFile(const std::string& path, const char* what) {
  if (path.empty()) throw ValidationError(std::string(what) + " is required");
  if (!fs::is_regular_file(path)) {
    throw ValidationError(std::string(what) + " not found: " + path);
  }
}

// --- shared corpus options -----------------------------------------------

struct CorpusOptions {
  std::string schema;
  std::string annotations;
  std::string split_manifest;
  std::string split = "all";
};

void AddCorpusOptions(CLI::App* cmd, CorpusOptions& o,
                      const std::string& default_split) {
  o.split = default_split;
  cmd->add_option("--schema", o.schema, "Schema JSON file")->required();
  cmd->add_option("--annotations", o.annotations, "Annotation JSONL file")
      ->required();
  cmd->add_option("--split-manifest", o.split_manifest,
                  "TSV of item_id<TAB>split overriding the file's splits");
  cmd->add_option("--split", o.split, "train, val, test or all")
      ->capture_default_str();
}

struct Corpus {
  Schema schema;
  AnnotationSet set;
};

Corpus LoadCorpus(const CorpusOptions& o) {
  RequireFile(o.schema, "--schema");
  RequireFile(o.annotations, "--annotations");
  Corpus c;
  c.schema = LoadSchema(o.schema);
  c.set = LoadAnnotations(o.annotations, c.schema);
  if (!o.split_manifest.empty()) {
    RequireFile(o.split_manifest, "--split-manifest");
    ApplySplitManifest(c.set, o.split_manifest);
  }
  if (o.split != "all") c.set = c.set.FilterSplit(ParseSplit(o.split));
  if (c.set.empty()) {
    throw ValidationError("no items in split '" + o.split + "'");
  }
  return c;
}

LabelLevel SingleLevel(const std::string& name) {
  LabelLevel level = ParseLabelLevel(name);
  if (level == LabelLevel::kTechniques) {
    throw ValidationError("level '" + name + "' is multi-label; use main or high");
  }
  return level;
}

int NonPropagandaLabel(const Schema& schema, LabelLevel level) {
  return level == LabelLevel::kHigh ? schema.NonPropagandaHighLevelId()
                                    : schema.non_propaganda_technique_id;
}

std::vector<int> LevelLabels(const Schema& schema, LabelLevel level) {
  return level == LabelLevel::kHigh ? schema.HighLevelIds()
                                    : schema.TechniqueIds();
}

ojson OptionalNumber(const std::optional<double>& v) {
  return v ? ojson(*v) : ojson();
}

// Runs `f`, turning an undefined statistic into nullopt plus a reason.
template <typename F>
std::optional<double> TryStatistic(F f, const std::string& name,
                                   ojson& reasons) {
  try {
    return f();
  } catch (const UndefinedStatistic& e) {
    reasons[name] = e.what();
  } catch (const PreconditionError& e) {
    reasons[name] = e.what();
  }
  Warn(name + " undefined: " + reasons[name].get<std::string>());
  return std::nullopt;
}

std::string CellOrDash(const std::optional<double>& v) {
  return v ? Fixed(*v, 3) : "n/a";
}

// --- agreement -----------------------------------------------------------

struct AgreementOptions {
  CorpusOptions corpus;
  std::string level = "main";
  std::vector<std::string> annotators;
  bool propaganda_only = false;
  bool per_item = false;
  bool overlap = false;
  std::string schema_name;
  std::string out_dir = ".";
};

int CmdAgreement(const AgreementOptions& o) {
  Corpus c = LoadCorpus(o.corpus);
  LabelLevel level = SingleLevel(o.level);
  AnnotationSet set = c.set;
  if (o.propaganda_only) {
    AnnotationSet kept;
    const int np = NonPropagandaLabel(c.schema, LabelLevel::kMain);
    for (std::size_t i = 0; i < set.size(); ++i) {
      auto records = set.RecordsAt(i);
      GoldLabel g = PluralityGold(records, LabelLevel::kMain, TieRule::kReport);
      bool np_item = g.label && *g.label == np;
      if (np_item) continue;
      kept.AddItem(set.items()[i]);
      for (const AnnotationRecord& r : records) kept.AddRecord(r);
    }
    set = std::move(kept);
    if (set.empty()) throw ValidationError("no propaganda items left");
  }

  RatingTable table = BuildRatingTable(set, level, o.annotators);
  ojson reasons = ojson::object();
  std::string cohen_kind =
      table.annotator_count() == 2 ? "cohen_kappa" : "mean_pairwise_cohen_kappa";
  std::optional<double> cohen = TryStatistic(
      [&] {
        return table.annotator_count() == 2 ? CohenKappa(table)
                                            : MeanPairwiseCohenKappa(table);
      },
      cohen_kind, reasons);
  std::optional<double> fleiss =
      TryStatistic([&] { return FleissKappa(table); }, "fleiss_kappa", reasons);
  std::optional<double> alpha = TryStatistic(
      [&] { return KrippendorffAlphaNominal(table); }, "krippendorff_alpha",
      reasons);

  const std::string name =
      o.schema_name.empty() ? c.schema.schema_id : o.schema_name;
  ojson report;
  report["schema"] = name;
  report["level"] = LabelLevelName(level);
  report["split"] = o.corpus.split;
  report["propaganda_only"] = o.propaganda_only;
  report["n_items"] = table.item_count();
  report["n_annotators"] = table.annotator_count();
  report["annotators"] = table.annotators;
  report["cohen_kappa_kind"] = cohen_kind;
  report["cohen_kappa"] = OptionalNumber(cohen);
  report["fleiss_kappa"] = OptionalNumber(fleiss);
  report["krippendorff_alpha"] = OptionalNumber(alpha);
  if (!reasons.empty()) report["undefined"] = reasons;

  if (o.overlap) {
    OverlapReport ov = OverlapStrictLenient(BuildDualRatingTable(set, o.annotators));
    ojson j;
    j["strict"] = ov.strict;
    j["lenient"] = ov.lenient;
    j["n_items"] = ov.n_items;
    ojson pairs = ojson::array();
    for (const PairOverlap& p : ov.pairs) {
      pairs.push_back({{"first", p.first},
                       {"second", p.second},
                       {"strict", p.strict},
                       {"lenient", p.lenient},
                       {"n_items", p.n_items}});
    }
    j["pairs"] = pairs;
    report["overlap"] = j;
  }

  fs::path dir(o.out_dir);
  WriteJson(dir / "agreement_report.json", report);
  std::ostringstream md;
  md << "| Schema | Cohen's κ | Krippendorff's α |\n";
  md << "|---|---:|---:|\n";
  md << "| " << name << " | " << CellOrDash(cohen) << " | " << CellOrDash(alpha)
     << " |\n";
  WriteText(dir / "agreement.md", md.str());

  if (o.per_item) {
    std::ostringstream csv;
    csv << "item_id,alpha\n";
    try {
      for (const auto& [item, value] : PerItemAlpha(table)) {
        csv << item << ',' << Fixed(value, 6) << '\n';
      }
      WriteText(dir / "per_item_alpha.csv", csv.str());
    } catch (const UndefinedStatistic& e) {
      Warn(std::string("per-item alpha undefined: ") + e.what());
    }
  }

  std::cout << md.str();
  std::cout << "fleiss_kappa " << CellOrDash(fleiss) << "\n";
  return kExitOk;
}

// --- aggregate -----------------------------------------------------------

struct DSOptions {
  int max_iterations = DSConfig{}.max_iterations;
  double tolerance = DSConfig{}.tolerance;
  double pseudo_count = DSConfig{}.pseudo_count;

  DSConfig ToConfig() const {
    DSConfig c;
    c.max_iterations = max_iterations;
    c.tolerance = tolerance;
    c.pseudo_count = pseudo_count;
    c.Validate();
    return c;
  }
};

void AddDSOptions(CLI::App* cmd, DSOptions& o) {
  cmd->add_option("--max-iter", o.max_iterations, "EM iteration cap")
      ->capture_default_str();
  cmd->add_option("--tol", o.tolerance, "Convergence tolerance")
      ->capture_default_str();
  cmd->add_option("--pseudo-count", o.pseudo_count, "M-step smoothing")
      ->capture_default_str();
}

struct AggregateOptions {
  CorpusOptions corpus;
  DSOptions ds;
  std::string level = "main";
  std::string out_dir = ".";
};

int CmdAggregate(const AggregateOptions& o) {
  Corpus c = LoadCorpus(o.corpus);
  DSModel model =
      RunDawidSkene(BuildDSData(c.set, ParseLabelLevel(o.level)), o.ds.ToConfig());
  fs::path dir(o.out_dir);
  WriteJson(dir / "ds_model.json", DSModelToJson(model));
  std::ostringstream csv;
  csv << "item_id,map_label,posterior\n";
  for (std::size_t i = 0; i < model.items.size(); ++i) {
    int label = model.MapLabel(i);
    csv << model.items[i] << ',' << label << ','
        << Fixed(model.item_posteriors(static_cast<Eigen::Index>(i),
                                       static_cast<Eigen::Index>(
                                           model.LabelIndex(label))),
                 6)
        << '\n';
  }
  WriteText(dir / "ds_labels.csv", csv.str());
  std::cout << "iterations " << model.iterations << " converged "
            << (model.converged ? "yes" : "no") << " log_likelihood "
            << Fixed(model.log_likelihood, 6) << "\n";
  return kExitOk;
}

// --- cluster / sweep -----------------------------------------------------

struct ClusterOptions {
  CorpusOptions corpus;
  DSOptions ds;
  std::string ds_level = "main";
  std::string jaccard_level = "techniques";
  std::string table_level = "main";
  double lambda = 0.5;
  std::vector<double> grid;
  int groups = 6;
  std::vector<int> pin;
  std::string out_dir = ".";
};

void AddClusterOptions(CLI::App* cmd, ClusterOptions& o) {
  AddCorpusOptions(cmd, o.corpus, "train");
  AddDSOptions(cmd, o.ds);
  cmd->add_option("--ds-level", o.ds_level, "Level fed to Dawid-Skene")
      ->capture_default_str();
  cmd->add_option("--jaccard-level", o.jaccard_level,
                  "Level used for label co-occurrence")
      ->capture_default_str();
  cmd->add_option("--groups", o.groups, "Number of groups, pinned included")
      ->capture_default_str();
  cmd->add_option("--pin", o.pin,
                  "Labels kept as singletons (default: non-propaganda)")
      ->delimiter(',');
  cmd->add_option("--out-dir", o.out_dir, "Output directory")
      ->capture_default_str();
}

struct ClusterInputs {
  Corpus corpus;
  DSModel model;
  SimilarityMatrix jaccard;
  SimilarityMatrix ds;
  std::set<int> pinned;
  std::vector<int> unassigned;
};

ClusterInputs PrepareClustering(const ClusterOptions& o) {
  ClusterInputs in;
  in.corpus = LoadCorpus(o.corpus);
  LabelLevel ds_level = ParseLabelLevel(o.ds_level);
  in.model = RunDawidSkene(BuildDSData(in.corpus.set, ds_level), o.ds.ToConfig());
  const std::vector<int>& labels = in.model.labels;
  const std::vector<int> schema_labels =
      ds_level == LabelLevel::kHigh ? in.corpus.schema.HighLevelIds()
                                    : in.corpus.schema.TechniqueIds();
  for (int id : schema_labels) {
    if (!std::binary_search(labels.begin(), labels.end(), id)) {
      in.unassigned.push_back(id);
    }
  }
  if (!in.unassigned.empty()) {
    std::string list;
    for (int id : in.unassigned) list += (list.empty() ? "" : ",") + std::to_string(id);
    Warn("labels never observed in the clustering split are left unassigned: " +
         list);
  }
  in.jaccard = JaccardMatrix(in.corpus.set, ParseLabelLevel(o.jaccard_level),
                             labels);
  in.ds = DSSimilarity(in.model, labels);
  if (o.pin.empty()) {
    in.pinned = {in.corpus.schema.non_propaganda_technique_id};
  } else {
    in.pinned.insert(o.pin.begin(), o.pin.end());
  }
  for (int p : in.pinned) {
    if (!std::binary_search(labels.begin(), labels.end(), p)) {
      throw ValidationError("pinned label " + std::to_string(p) +
                            " is not observed in the clustering split");
    }
  }
  return in;
}

int CmdCluster(const ClusterOptions& o) {
  ClusterInputs in = PrepareClustering(o);
  ClusterAssignment a = ConstrainedCluster(
      HybridSimilarity(in.jaccard, in.ds, o.lambda), o.groups, in.pinned);
  ojson j = ClusterAssignmentToJson(a);
  j["labels"] = in.model.labels;
  j["unassigned"] = in.unassigned;
  j["split"] = o.corpus.split;
  WriteJson(fs::path(o.out_dir) / "clusters.json", j);
  std::cout << FormatGroups(a.groups) << "\n";
  return kExitOk;
}

int CmdSweep(const ClusterOptions& o) {
  ClusterInputs in = PrepareClustering(o);
  std::vector<double> grid = o.grid.empty() ? DefaultLambdaGrid() : o.grid;
  RatingTable table =
      BuildRatingTable(in.corpus.set, SingleLevel(o.table_level));
  SweepReport report =
      LambdaSweep(in.jaccard, in.ds, grid, o.groups, in.pinned, table);
  std::string csv = SweepToCsv(report);
  WriteText(fs::path(o.out_dir) / "sweep.csv", csv);
  ojson all = ojson::array();
  for (const SweepRow& row : report.rows) {
    ojson r = ClusterAssignmentToJson(row.assignment);
    r["fleiss_kappa"] = OptionalNumber(row.fleiss_kappa);
    r["krippendorff_alpha"] = OptionalNumber(row.krippendorff_alpha);
    all.push_back(std::move(r));
  }
  ojson j;
  j["labels"] = in.model.labels;
  j["unassigned"] = in.unassigned;
  j["split"] = o.corpus.split;
  j["rows"] = std::move(all);
  WriteJson(fs::path(o.out_dir) / "sweep.json", j);
  std::cout << csv;
  return kExitOk;
}

// --- classify ------------------------------------------------------------

struct ClassifyCliOptions {
  std::string schema;
  std::string annotations;
  std::string items;
  std::string split_manifest;
  std::string split = "test";
  std::string strategy = "direct-high";
  bool two_call = false;
  bool dry_run = false;
  std::string prompts_out;
  EndpointConfig endpoint;
  std::string cache;
  std::string out;
};

std::vector<Item> ReadItemsFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::vector<Item> items;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string where = path + ":" + std::to_string(line_no) + ": ";
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (!j.is_object() || !j.contains("item_id") || !j["item_id"].is_string() ||
        !j.contains("text") || !j["text"].is_string()) {
      throw ValidationError(where + "expected {\"item_id\", \"text\"}");
    }
    Item item;
    item.item_id = j["item_id"];
    item.text = j["text"];
    item.split = j.contains("split") ? ParseSplit(j["split"].get<std::string>())
                                     : Split::kTest;
    if (!seen.insert(item.item_id).second) {
      throw ValidationError(where + "duplicate item_id " + item.item_id);
    }
    items.push_back(std::move(item));
  }
  return items;
}

int CmdClassify(const ClassifyCliOptions& o) {
  // Everything local is validated before the first request.
  RequireFile(o.schema, "--schema");
  Schema schema = LoadSchema(o.schema);
  std::vector<Item> items;
  if (!o.items.empty()) {
    RequireFile(o.items, "--items");
    items = ReadItemsFile(o.items);
  } else if (!o.annotations.empty()) {
    RequireFile(o.annotations, "--annotations");
    AnnotationSet set = LoadAnnotations(o.annotations, schema);
    if (!o.split_manifest.empty()) {
      RequireFile(o.split_manifest, "--split-manifest");
      ApplySplitManifest(set, o.split_manifest);
    }
    items = set.items();
  } else {
    throw ValidationError("--items or --annotations is required");
  }
  if (o.split != "all") {
    Split split = ParseSplit(o.split);
    std::erase_if(items, [&](const Item& i) { return i.split != split; });
  }
  if (items.empty()) throw ValidationError("no items in split '" + o.split + "'");

  ClassifyOptions options;
  options.strategy = ParseStrategy(o.strategy);
  options.two_call = o.two_call;
  if (options.two_call && options.strategy != Strategy::kMainHigh) {
    throw ValidationError("--two-call only applies to main-high");
  }
  if (o.endpoint.model.empty()) throw ValidationError("--model is required");

  if (o.dry_run) {
    std::vector<RenderedPrompt> prompts =
        RenderPrompts(items, schema, options, o.endpoint.model);
    std::ostringstream out;
    for (const RenderedPrompt& p : prompts) {
      ojson j;
      j["item_id"] = p.item_id;
      j["prompt_hash"] = p.prompt_hash;
      j["messages"] = MessagesToJson(p.messages);
      out << j.dump() << '\n';
    }
    if (o.prompts_out.empty()) {
      std::cout << out.str();
    } else {
      WriteText(o.prompts_out, out.str());
    }
    std::cerr << "dry run: " << prompts.size() << " prompt(s), 0 requests\n";
    return kExitOk;
  }

  if (o.out.empty()) throw ValidationError("--out is required");
  if (o.endpoint.base_url.empty()) throw ValidationError("--endpoint is required");
  o.endpoint.Validate();
  fs::path out_path(o.out);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  std::optional<PredictionCache> cache;
  if (!o.cache.empty()) cache.emplace(o.cache);
  HttpChatClient client(o.endpoint);

  ClassifyResult result = ClassifySplit(items, schema, options, o.endpoint,
                                        client, cache ? &*cache : nullptr);
  std::ostringstream jsonl;
  WritePredictions(result.records, jsonl);
  WriteText(out_path, jsonl.str());

  ojson meta;
  meta["template_version"] = kPromptTemplateVersion;
  meta["template_hash"] = PromptTemplateHash();
  meta["schema_id"] = schema.schema_id;
  meta["strategy"] = StrategyName(options.strategy);
  meta["two_call"] = options.two_call;
  meta["model"] = o.endpoint.model;
  meta["temperature"] = o.endpoint.temperature;
  meta["max_tokens"] = o.endpoint.max_tokens;
  meta["max_retries"] = o.endpoint.max_retries;
  meta["split"] = o.split;
  meta["n_items"] = result.records.size();
  meta["n_unparseable"] = result.stats.unparseable;
  fs::path meta_path = out_path;
  meta_path += ".meta.json";
  WriteJson(meta_path, meta);

  std::cerr << "items " << result.records.size() << " network_calls "
            << result.stats.network_calls << " cache_hits "
            << result.stats.cache_hits << " unparseable "
            << result.stats.unparseable << " endpoint_failures "
            << result.stats.endpoint_failures << "\n";
  return result.stats.unparseable > 0 ? kExitPartial : kExitOk;
}

// --- evaluate ------------------------------------------------------------

struct EvaluateOptions {
  CorpusOptions corpus;
  std::string predictions;
  std::string level = "high";
  std::string tie_rule = "report";
  std::string schema_name;
  std::string regime = "unspecified";
  std::string out_dir = ".";
};

int CmdEvaluate(const EvaluateOptions& o) {
  Corpus c = LoadCorpus(o.corpus);
  RequireFile(o.predictions, "--predictions");
  std::vector<PredictionRecord> preds = LoadPredictions(o.predictions, &c.schema);
  if (preds.empty()) throw ValidationError("no predictions in " + o.predictions);
  LabelLevel level = SingleLevel(o.level);
  std::map<std::string, int> gold =
      GoldLabels(c.set, level, ParseTieRule(o.tie_rule));

  ConfusionMatrix cm = Confusion(gold, preds, level, LevelLabels(c.schema, level));
  const int np = NonPropagandaLabel(c.schema, level);
  ScoreReport scores = Scores(cm, np);
  ConfusionMatrix binary = BinaryCollapse(cm, np);
  ScoreReport binary_scores = Scores(binary);

  ojson j;
  j["schema"] = o.schema_name.empty() ? c.schema.schema_id : o.schema_name;
  j["regime"] = o.regime;
  j["strategy"] = StrategyName(preds.front().strategy);
  j["model"] = preds.front().model_id;
  j["level"] = LabelLevelName(level);
  j["split"] = o.corpus.split;
  j["scores"] = ScoreReportToJson(scores);
  j["binary"] = ScoreReportToJson(binary_scores);
  j["confusion"] = ConfusionToJson(cm);
  fs::path dir(o.out_dir);
  WriteJson(dir / "scores.json", j);
  WriteText(dir / "confusion.csv", ConfusionToCsv(cm));
  WriteText(dir / "binary_confusion.csv", ConfusionToCsv(binary));
  std::cout << "macro_f1 " << Fixed(scores.macro_f1, 3) << " weighted_f1 "
            << Fixed(scores.weighted_f1, 3) << " unparseable "
            << scores.n_unparseable << "\n";
  return kExitOk;
}

// --- analyze -------------------------------------------------------------

struct AnalyzeOptions {
  CorpusOptions corpus;
  std::string predictions;
  std::string tie_rule = "report";
  std::string mode = "surface";
  std::string lemma_map;
  std::string stopwords;
  bool no_lowercase = false;
  std::size_t top_k = 10;
  std::string out_dir = ".";
};

struct AnalysisInputs {
  Corpus corpus;
  std::vector<CellDoc> docs;
  TokenizerConfig tokenizer;
  std::vector<PredictionRecord> predictions;
  std::map<std::string, int> gold;
};

AnalysisInputs PrepareAnalysis(const AnalyzeOptions& o) {
  AnalysisInputs in;
  in.corpus = LoadCorpus(o.corpus);
  RequireFile(o.predictions, "--predictions");
  in.tokenizer.lowercase = !o.no_lowercase;
  in.tokenizer.mode = ParseNormalizationMode(o.mode);
  if (in.tokenizer.mode == NormalizationMode::kLemmaMap) {
    RequireFile(o.lemma_map, "--lemma-map");
    in.tokenizer.lemma_map = LoadLemmaMap(o.lemma_map);
  }
  if (!o.stopwords.empty()) {
    RequireFile(o.stopwords, "--stopwords");
    in.tokenizer.stopwords = LoadStopwords(o.stopwords);
  }
  in.predictions = LoadPredictions(o.predictions, &in.corpus.schema);
  in.gold = GoldLabels(in.corpus.set, LabelLevel::kHigh, ParseTieRule(o.tie_rule));
  std::map<std::string, std::string> texts;
  for (const Item& item : in.corpus.set.items()) texts[item.item_id] = item.text;
  in.docs = BuildCellDocs(in.gold, in.predictions, texts, in.tokenizer);
  if (in.docs.empty()) throw ValidationError("no scored items to analyze");
  return in;
}

int CmdAnalyzeTokens(const AnalyzeOptions& o) {
  AnalysisInputs in = PrepareAnalysis(o);
  fs::path dir(o.out_dir);
  std::string md = RenderCellTokens(in.docs, o.top_k, &in.corpus.schema);
  WriteText(dir / "cells_tokens.md", md);
  BinaryPartition part = BinaryErrorPartition(
      in.gold, in.predictions, in.corpus.schema.NonPropagandaHighLevelId());
  ojson j;
  j["tp"] = part.tp;
  j["tn"] = part.tn;
  j["fp"] = part.fp;
  j["fn"] = part.fn;
  WriteJson(dir / "error_partition.json", j);
  std::cout << md;
  return kExitOk;
}

int CmdAnalyzePca(const AnalyzeOptions& o) {
  AnalysisInputs in = PrepareAnalysis(o);
  TfidfMatrix tfidf = Tfidf(in.docs);
  PcaResult pca = Pca2d(Eigen::MatrixXd(tfidf.values));
  fs::path dir(o.out_dir);
  WriteText(dir / "pca.csv", PcaToCsv(in.docs, pca));
  WriteText(dir / "pca.svg", PcaToSvg(in.docs, pca, &in.corpus.schema));
  ojson meta;
  meta["tokenizer"] = TokenizerConfigToJson(in.tokenizer);
  meta["n_cells"] = in.docs.size();
  meta["vocabulary_size"] = tfidf.vocabulary.size();
  meta["explained_variance"] = {pca.explained_variance(0),
                                pca.explained_variance(1)};
  meta["explained_variance_ratio"] = {pca.explained_variance_ratio(0),
                                      pca.explained_variance_ratio(1)};
  WriteJson(dir / "analysis_meta.json", meta);
  std::cout << "cells " << in.docs.size() << " vocabulary "
            << tfidf.vocabulary.size() << "\n";
  return kExitOk;
}

// --- report --------------------------------------------------------------

struct ReportOptions {
  std::vector<std::string> inputs;
  std::string out;
};

int CmdReport(const ReportOptions& o) {
  std::vector<ResultRow> rows;
  for (const std::string& path : o.inputs) {
    RequireFile(path, "--results");
    std::ifstream in(path);
    if (fs::path(path).extension() == ".json") {
      nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
      if (j.is_discarded() || !j.contains("scores")) {
        throw ValidationError(path + ": not a scores.json file");
      }
      ResultRow r;
      r.schema = j.value("schema", "");
      r.regime = j.value("regime", "");
      r.strategy = ParseStrategy(j.value("strategy", ""));
      r.model = j.value("model", "");
      r.macro_f1 = j["scores"].at("macro_f1").get<double>();
      r.weighted_f1 = j["scores"].at("weighted_f1").get<double>();
      rows.push_back(std::move(r));
    } else {
      std::vector<ResultRow> more = ReadResultsCsv(in, path);
      rows.insert(rows.end(), more.begin(), more.end());
    }
  }
  std::string md = RenderResultsTable(rows);
  if (o.out.empty()) {
    std::cout << md;
  } else {
    WriteText(o.out, md);
  }
  return kExitOk;
}

}  // namespace

int RunCli(int argc, const char* const* argv) {
  CLI::App app{"Propaganda annotation analytics and classification toolkit",
               "proptk"};
  app.set_config("--config", "", "Read options from a TOML/INI file");
  app.require_subcommand(1);
  app.set_version_flag("--version", "proptk 0.1.0");

  AgreementOptions agreement;
  CLI::App* agreement_cmd =
      app.add_subcommand("agreement", "Inter-annotator agreement report");
  AddCorpusOptions(agreement_cmd, agreement.corpus, "all");
  agreement_cmd->add_option("--level", agreement.level, "main or high")
      ->capture_default_str();
  agreement_cmd->add_option("--annotators", agreement.annotators,
                            "Annotator subset")
      ->delimiter(',');
  agreement_cmd->add_flag("--propaganda-only", agreement.propaganda_only,
                          "Drop items whose plurality label is non-propaganda");
  agreement_cmd->add_flag("--per-item", agreement.per_item,
                          "Write per_item_alpha.csv");
  agreement_cmd->add_flag("--overlap", agreement.overlap,
                          "Add strict/lenient overlap");
  agreement_cmd->add_option("--schema-name", agreement.schema_name,
                            "Row name in the table");
  agreement_cmd->add_option("--out-dir", agreement.out_dir, "Output directory")
      ->capture_default_str();

  AggregateOptions aggregate;
  CLI::App* aggregate_cmd =
      app.add_subcommand("aggregate", "Fit Dawid-Skene to the annotations");
  AddCorpusOptions(aggregate_cmd, aggregate.corpus, "train");
  AddDSOptions(aggregate_cmd, aggregate.ds);
  aggregate_cmd->add_option("--level", aggregate.level, "main, high or techniques")
      ->capture_default_str();
  aggregate_cmd->add_option("--out-dir", aggregate.out_dir, "Output directory")
      ->capture_default_str();

  ClusterOptions cluster;
  CLI::App* cluster_cmd =
      app.add_subcommand("cluster", "Group labels at one lambda");
  AddClusterOptions(cluster_cmd, cluster);
  cluster_cmd->add_option("--lambda", cluster.lambda, "Jaccard weight")
      ->capture_default_str();

  ClusterOptions sweep;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Cluster and score agreement over lambdas");
  AddClusterOptions(sweep_cmd, sweep);
  sweep_cmd->add_option("--grid", sweep.grid, "Lambdas (default 0.0..1.0)")
      ->delimiter(',');
  sweep_cmd->add_option("--table-level", sweep.table_level,
                        "Annotation level relabelled through the groups")
      ->capture_default_str();

  ClassifyCliOptions classify;
  CLI::App* classify_cmd =
      app.add_subcommand("classify", "Classify a split through an endpoint");
  classify_cmd->add_option("--schema", classify.schema, "Schema JSON file")
      ->required();
  classify_cmd->add_option("--annotations", classify.annotations,
                           "Annotation JSONL (source of item texts)");
  classify_cmd->add_option("--items", classify.items,
                           "JSONL of {item_id, text, split}");
  classify_cmd->add_option("--split-manifest", classify.split_manifest,
                           "TSV of item_id<TAB>split");
  classify_cmd->add_option("--split", classify.split, "train, val, test or all")
      ->capture_default_str();
  classify_cmd->add_option("--strategy", classify.strategy,
                           "direct-high or main-high")
      ->capture_default_str();
  classify_cmd->add_flag("--two-call", classify.two_call,
                         "Main-high as two chained requests");
  classify_cmd->add_flag("--dry-run", classify.dry_run,
                         "Render and hash prompts without requests");
  classify_cmd->add_option("--prompts-out", classify.prompts_out,
                           "Dry-run output file (default stdout)");
  classify_cmd->add_option("--endpoint", classify.endpoint.base_url,
                           "Chat-completion base URL");
  classify_cmd->add_option("--model", classify.endpoint.model, "Model id");
  classify_cmd->add_option("--parallel", classify.endpoint.parallelism,
                           "Requests in flight")
      ->capture_default_str();
  classify_cmd->add_option("--temperature", classify.endpoint.temperature)
      ->capture_default_str();
  classify_cmd->add_option("--max-tokens", classify.endpoint.max_tokens)
      ->capture_default_str();
  classify_cmd->add_option("--timeout", classify.endpoint.timeout_seconds,
                           "Seconds per request")
      ->capture_default_str();
  classify_cmd->add_option("--max-retries", classify.endpoint.max_retries)
      ->capture_default_str();
  classify_cmd->add_option("--retry-backoff-ms",
                           classify.endpoint.retry_backoff_ms)
      ->capture_default_str();
  classify_cmd->add_option("--api-key-env", classify.endpoint.api_key_env,
                           "Environment variable holding the API key")
      ->capture_default_str();
  classify_cmd->add_option("--cache", classify.cache, "Response cache directory");
  classify_cmd->add_option("--out", classify.out, "Predictions JSONL");

  EvaluateOptions evaluate;
  CLI::App* evaluate_cmd =
      app.add_subcommand("evaluate", "Score predictions against plurality gold");
  AddCorpusOptions(evaluate_cmd, evaluate.corpus, "test");
  evaluate_cmd->add_option("--predictions", evaluate.predictions)->required();
  evaluate_cmd->add_option("--level", evaluate.level, "high or main")
      ->capture_default_str();
  evaluate_cmd->add_option("--tie-rule", evaluate.tie_rule, "report or lowest")
      ->capture_default_str();
  evaluate_cmd->add_option("--schema-name", evaluate.schema_name);
  evaluate_cmd->add_option("--regime", evaluate.regime, "e.g. Base or FT")
      ->capture_default_str();
  evaluate_cmd->add_option("--out-dir", evaluate.out_dir)->capture_default_str();

  AnalyzeOptions analyze;
  CLI::App* analyze_cmd =
      app.add_subcommand("analyze", "Confusion-cell error analysis");
  analyze_cmd->require_subcommand(1);
  AddCorpusOptions(analyze_cmd, analyze.corpus, "test");
  analyze_cmd->add_option("--predictions", analyze.predictions)->required();
  analyze_cmd->add_option("--tie-rule", analyze.tie_rule)->capture_default_str();
  analyze_cmd->add_option("--mode", analyze.mode,
                          "surface, suffix_strip or lemma_map")
      ->capture_default_str();
  analyze_cmd->add_option("--lemma-map", analyze.lemma_map, "token<TAB>lemma file");
  analyze_cmd->add_option("--stopwords", analyze.stopwords, "One word per line");
  analyze_cmd->add_flag("--no-lowercase", analyze.no_lowercase);
  analyze_cmd->add_option("--top-k", analyze.top_k, "Tokens per cell (0 = all)")
      ->capture_default_str();
  analyze_cmd->add_option("--out-dir", analyze.out_dir)->capture_default_str();
  analyze_cmd->fallthrough();
  CLI::App* tokens_cmd =
      analyze_cmd->add_subcommand("tokens", "Top tokens per confusion cell");
  CLI::App* pca_cmd =
      analyze_cmd->add_subcommand("pca", "TF-IDF + PCA projection of cells");

  ReportOptions report;
  CLI::App* report_cmd =
      app.add_subcommand("report", "Render a results table");
  report_cmd->add_option("--results", report.inputs,
                         "results CSV or scores.json files")
      ->required();
  report_cmd->add_option("--out", report.out, "Markdown output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (agreement_cmd->parsed()) return CmdAgreement(agreement);
    if (aggregate_cmd->parsed()) return CmdAggregate(aggregate);
    if (cluster_cmd->parsed()) return CmdCluster(cluster);
    if (sweep_cmd->parsed()) return CmdSweep(sweep);
    if (classify_cmd->parsed()) return CmdClassify(classify);
    if (evaluate_cmd->parsed()) return CmdEvaluate(evaluate);
    if (tokens_cmd->parsed()) return CmdAnalyzeTokens(analyze);
    if (pca_cmd->parsed()) return CmdAnalyzePca(analyze);
    if (report_cmd->parsed()) return CmdReport(report);
  } catch (const EndpointError& e) {
    std::cerr << "proptk: endpoint error: " << e.what() << "\n";
    return kExitEndpoint;
  } catch (const std::exception& e) {
    std::cerr << "proptk: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

int RunCli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const std::string& a : args) argv.push_back(a.c_str());
  return RunCli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace proptk
