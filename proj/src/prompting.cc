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

#include "proptk/prompting.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

#include "proptk/diagnostics.h"
#include "proptk/error.h"
#include "proptk/hashing.h"

namespace proptk {
namespace {

constexpr std::string_view kDirectPreamble =
    "You are an expert analyst of propaganda in social media posts. Read the "
    "tweet and decide which high-level propaganda category it belongs to.";

constexpr std::string_view kMainHighPreamble =
    "You are an expert analyst of propaganda in social media posts. Read the "
    "tweet, first identify its most prominent propaganda technique, then "
    "choose the high-level category in light of that technique.";

constexpr std::string_view kMainOnlyPreamble =
    "You are an expert analyst of propaganda in social media posts. Read the "
    "tweet and identify its most prominent propaganda technique.";

constexpr std::string_view kDirectContract =
    "Answer with exactly one line: HIGH: <category id>";

constexpr std::string_view kMainHighContract =
    "Answer with exactly two lines, in this order:\n"
    "MAIN: <technique id>\n"
    "HIGH: <category id>\n"
    "Choose HIGH in light of your MAIN answer. A technique may belong to "
    "several categories; pick the one that best fits the tweet.";

constexpr std::string_view kMainOnlyContract =
    "Answer with exactly one line: MAIN: <technique id>";

constexpr std::string_view kFollowUpRequest =
    "Given the technique you identified, choose the high-level category.\n"
    "Answer with exactly one line: HIGH: <category id>";

constexpr std::string_view kReminder =
    "Your answer could not be read. Reply using only the required format.";

std::string Catalog(const Schema& schema, bool techniques,
                    bool with_memberships) {
  std::ostringstream out;
  if (techniques) {
    out << "Propaganda techniques:\n";
    for (const TechniqueLabel& t : schema.techniques) {
      out << '[' << t.id << "] " << t.name << ": " << t.description;
      if (with_memberships) {
        std::vector<int> cats = schema.CategoriesOf(t.id);
        out << " (categories: ";
        for (std::size_t i = 0; i < cats.size(); ++i) {
          out << (i ? ", " : "") << cats[i];
        }
        out << ')';
      }
      out << '\n';
    }
  } else {
    out << "High-level categories:\n";
    for (const HighLevelCategory& c : schema.high_levels) {
      out << '[' << c.id << "] " << c.name << ": " << c.description;
      if (with_memberships) {
        out << " (techniques: ";
        for (std::size_t i = 0; i < c.member_technique_ids.size(); ++i) {
          out << (i ? ", " : "") << c.member_technique_ids[i];
        }
        out << ')';
      }
      out << '\n';
    }
  }
  return out.str();
}

Message UserTweet(std::string_view text) {
  return {"user", "Tweet:\n" + std::string(text)};
}

void RequireHighLevels(const Schema& schema) {
  if (schema.high_levels.size() < 2) {
    throw PreconditionError("prompt needs at least 2 high-level categories");
  }
}

void RequireBothLevels(const Schema& schema) {
  RequireHighLevels(schema);
  if (schema.techniques.empty()) {
    throw PreconditionError("prompt needs the fine-grained technique level");
  }
}

bool IsWordByte(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// Position just past a case-insensitive whole-word occurrence of `marker` at
// or after `from`, or npos.
std::size_t FindMarker(std::string_view text, std::string_view marker,
                       std::size_t from, std::size_t* start = nullptr) {
  for (std::size_t i = from; i + marker.size() <= text.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < marker.size(); ++k) {
      if (std::toupper(static_cast<unsigned char>(text[i + k])) != marker[k]) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    if (i > 0 && IsWordByte(text[i - 1])) continue;
    std::size_t end = i + marker.size();
    if (end < text.size() && IsWordByte(text[end])) continue;
    if (start) *start = i;
    return end;
  }
  return std::string_view::npos;
}

// First digit run in text[from, to) not glued to letters or digits.
std::optional<int> FirstInteger(std::string_view text, std::size_t from,
                                std::size_t to) {
  to = std::min(to, text.size());
  std::size_t i = from;
  while (i < to) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < to && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    bool glued = (i > 0 && IsWordByte(text[i - 1])) ||
                 (j < text.size() && IsWordByte(text[j]));
    if (!glued && j - i <= 9) return std::stoi(std::string(text.substr(i, j - i)));
    i = j;
  }
  return std::nullopt;
}

ParsedPrediction Failure(ParseStatus status, std::string detail) {
  ParsedPrediction p;
  p.status = status;
  p.detail = std::move(detail);
  return p;
}

}  // namespace

std::string PromptTemplateHash() {
  std::string all;
  for (std::string_view part :
       {kDirectPreamble, kMainHighPreamble, kMainOnlyPreamble, kDirectContract,
        kMainHighContract, kMainOnlyContract, kFollowUpRequest, kReminder}) {
    all.append(part);
    all.push_back('\0');
  }
  return Sha256Hex(all);
}

std::vector<Message> BuildDirectHighPrompt(std::string_view text,
                                           const Schema& schema) {
  RequireHighLevels(schema);
  std::string system(kDirectPreamble);
  system += "\n\n" + Catalog(schema, false, false) + "\n";
  system += kDirectContract;
  return {{"system", std::move(system)}, UserTweet(text)};
}

std::vector<Message> BuildMainHighPrompt(std::string_view text,
                                         const Schema& schema) {
  RequireBothLevels(schema);
  std::string system(kMainHighPreamble);
  system += "\n\n" + Catalog(schema, true, true) + "\n";
  system += Catalog(schema, false, true) + "\n";
  system += kMainHighContract;
  return {{"system", std::move(system)}, UserTweet(text)};
}

std::vector<Message> BuildMainOnlyPrompt(std::string_view text,
                                         const Schema& schema) {
  RequireBothLevels(schema);
  std::string system(kMainOnlyPreamble);
  system += "\n\n" + Catalog(schema, true, true) + "\n";
  system += kMainOnlyContract;
  return {{"system", std::move(system)}, UserTweet(text)};
}

std::vector<Message> BuildHighFollowUp(std::vector<Message> main_prompt,
                                       std::string_view main_answer,
                                       const Schema& schema) {
  RequireBothLevels(schema);
  main_prompt.push_back({"assistant", std::string(main_answer)});
  std::string request = Catalog(schema, false, true) + "\n";
  request += kFollowUpRequest;
  main_prompt.push_back({"user", std::move(request)});
  return main_prompt;
}

std::vector<Message> BuildFormatReminder(std::vector<Message> prompt,
                                         std::string_view bad_answer,
                                         Strategy strategy, bool main_only) {
  prompt.push_back({"assistant", std::string(bad_answer)});
  std::string reminder(kReminder);
  reminder += "\n";
  if (main_only) {
    reminder += kMainOnlyContract;
  } else if (strategy == Strategy::kMainHigh) {
    reminder += kMainHighContract;
  } else {
    reminder += kDirectContract;
  }
  prompt.push_back({"user", std::move(reminder)});
  return prompt;
}

nlohmann::ordered_json MessagesToJson(std::span<const Message> messages) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const Message& m : messages) {
    out.push_back({{"role", m.role}, {"content", m.content}});
  }
  return out;
}

std::string PromptHash(std::string_view model_id,
                       std::span<const Message> messages) {
  nlohmann::ordered_json j;
  j["model"] = model_id;
  j["messages"] = MessagesToJson(messages);
  return Sha256Hex(j.dump());
}

std::string_view ParseStatusName(ParseStatus status) {
  switch (status) {
    case ParseStatus::kOk:
      return "ok";
    case ParseStatus::kParseFailure:
      return "parse_failure";
    case ParseStatus::kOutOfSchema:
      return "out_of_schema";
    case ParseStatus::kMissingField:
      return "missing_field";
  }
  return "unknown";
}

ParsedPrediction ParsePrediction(std::string_view raw, Strategy strategy,
                                 const Schema& schema) {
  if (strategy == Strategy::kDirectHigh) {
    std::size_t after = FindMarker(raw, "HIGH", 0);
    std::optional<int> id = after == std::string_view::npos
                                ? FirstInteger(raw, 0, raw.size())
                                : FirstInteger(raw, after, raw.size());
    if (!id) return Failure(ParseStatus::kParseFailure, "no category id");
    if (!schema.HasHighLevel(*id)) {
      return Failure(ParseStatus::kOutOfSchema,
                     "unknown category " + std::to_string(*id));
    }
    ParsedPrediction p;
    p.status = ParseStatus::kOk;
    p.high_pred = id;
    return p;
  }

  std::size_t main_start = 0;
  std::size_t after_main = FindMarker(raw, "MAIN", 0, &main_start);
  if (after_main == std::string_view::npos) {
    return Failure(ParseStatus::kMissingField, "MAIN field missing");
  }
  std::size_t high_start = 0;
  std::size_t after_high = FindMarker(raw, "HIGH", after_main, &high_start);
  if (after_high == std::string_view::npos) {
    return Failure(ParseStatus::kMissingField, "HIGH field missing");
  }
  std::optional<int> main = FirstInteger(raw, after_main, high_start);
  std::optional<int> high = FirstInteger(raw, after_high, raw.size());
  if (!main) return Failure(ParseStatus::kParseFailure, "no technique id");
  if (!high) return Failure(ParseStatus::kParseFailure, "no category id");
  if (!schema.HasTechnique(*main)) {
    return Failure(ParseStatus::kOutOfSchema,
                   "unknown technique " + std::to_string(*main));
  }
  if (!schema.HasHighLevel(*high)) {
    return Failure(ParseStatus::kOutOfSchema,
                   "unknown category " + std::to_string(*high));
  }
  ParsedPrediction p;
  p.status = ParseStatus::kOk;
  p.main_pred = main;
  p.high_pred = high;
  return p;
}

ParsedPrediction ParseMainOnly(std::string_view raw, const Schema& schema) {
  std::size_t after = FindMarker(raw, "MAIN", 0);
  if (after == std::string_view::npos) {
    return Failure(ParseStatus::kMissingField, "MAIN field missing");
  }
  std::optional<int> id = FirstInteger(raw, after, raw.size());
  if (!id) return Failure(ParseStatus::kParseFailure, "no technique id");
  if (!schema.HasTechnique(*id)) {
    return Failure(ParseStatus::kOutOfSchema,
                   "unknown technique " + std::to_string(*id));
  }
  ParsedPrediction p;
  p.status = ParseStatus::kOk;
  p.main_pred = id;
  return p;
}

void EndpointConfig::Validate() const {
  if (parallelism < 1) throw ValidationError("parallelism must be >= 1");
  if (!(temperature >= 0.0)) throw ValidationError("temperature must be >= 0");
  if (max_tokens < 1) throw ValidationError("max_tokens must be >= 1");
  if (max_retries < 0) throw ValidationError("max_retries must be >= 0");
  if (!(timeout_seconds > 0.0)) throw ValidationError("timeout must be > 0");
  if (retry_backoff_ms < 0) throw ValidationError("backoff must be >= 0");
  if (model.empty()) throw ValidationError("model id is empty");
}

nlohmann::ordered_json ChatRequestToJson(const ChatRequest& request) {
  nlohmann::ordered_json j;
  j["model"] = request.model;
  j["messages"] = MessagesToJson(request.messages);
  j["temperature"] = request.temperature;
  j["max_tokens"] = request.max_tokens;
  return j;
}

std::string ChatResponseContent(std::string_view body) {
  nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) throw EndpointError("response is not JSON");
  try {
    const nlohmann::json& content =
        j.at("choices").at(0).at("message").at("content");
    if (content.is_null()) return "";
    return content.get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw EndpointError("response lacks choices[0].message.content");
  }
}

// --- cache -------------------------------------------------------------

PredictionCache::PredictionCache(std::filesystem::path dir)
    : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path PredictionCache::PathFor(
    std::string_view model_id, std::string_view tag,
    std::string_view prompt_hash) const {
  std::string key(model_id);
  key.push_back('\0');
  key.append(tag);
  key.push_back('\0');
  key.append(prompt_hash);
  std::string name = Sha256Hex(key);
  return dir_ / name.substr(0, 2) / (name + ".json");
}

std::optional<std::string> PredictionCache::Lookup(
    std::string_view model_id, std::string_view tag,
    std::span<const Message> messages) const {
  std::filesystem::path path =
      PathFor(model_id, tag, PromptHash(model_id, messages));
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("messages") || !j.contains("response")) {
    Warn("ignoring corrupt cache entry " + path.string());
    return std::nullopt;
  }
  if (j["messages"] != nlohmann::json(MessagesToJson(messages)) ||
      j.value("model", "") != model_id) {
    return std::nullopt;
  }
  return j["response"].get<std::string>();
}

void PredictionCache::Store(std::string_view model_id, std::string_view tag,
                            std::span<const Message> messages,
                            std::string_view response,
                            const ParsedPrediction* parsed) {
  std::string hash = PromptHash(model_id, messages);
  std::filesystem::path path = PathFor(model_id, tag, hash);
  std::filesystem::create_directories(path.parent_path());

  nlohmann::ordered_json j;
  j["model"] = model_id;
  j["tag"] = tag;
  j["prompt_hash"] = hash;
  j["messages"] = MessagesToJson(messages);
  j["response"] = response;
  if (parsed) {
    j["parse_status"] = ParseStatusName(parsed->status);
    j["main_pred"] = parsed->main_pred ? nlohmann::ordered_json(*parsed->main_pred)
                                       : nlohmann::ordered_json();
    j["high_pred"] = parsed->high_pred ? nlohmann::ordered_json(*parsed->high_pred)
                                       : nlohmann::ordered_json();
  }

  std::ostringstream suffix;
  suffix << ".tmp." << std::this_thread::get_id();
  std::filesystem::path tmp = path;
  tmp += suffix.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write cache entry " + tmp.string());
    out << j.dump(1) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

// --- classification ----------------------------------------------------

namespace {

struct Counters {
  std::atomic<std::size_t> network_calls{0};
  std::atomic<std::size_t> cache_hits{0};
  std::atomic<std::size_t> unparseable{0};
  std::atomic<std::size_t> endpoint_failures{0};
};

// Gave up on an item after transient or non-retryable endpoint errors.
struct ItemFailed {
  std::string reason;
};

class ItemRunner {
 public:
  ItemRunner(const Schema& schema, const ClassifyOptions& options,
             const EndpointConfig& config, ChatClient& client,
             PredictionCache* cache, Counters& counters,
             const std::atomic<bool>& abort)
      : schema_(schema),
        options_(options),
        config_(config),
        client_(client),
        cache_(cache),
        counters_(counters),
        abort_(abort) {}

  PredictionRecord Run(const Item& item) {
    PredictionRecord record;
    record.item_id = item.item_id;
    record.strategy = options_.strategy;
    record.model_id = config_.model;

    std::vector<Message> first = FirstPrompt(item);
    record.prompt_hash = PromptHash(config_.model, first);

    std::vector<std::string> raws;
    try {
      if (options_.strategy == Strategy::kMainHigh && options_.two_call) {
        RunTwoCall(first, raws, record);
      } else {
        std::string tag(StrategyName(options_.strategy));
        ParsedPrediction parsed = Converse(
            first, tag, raws,
            [&](std::string_view raw) {
              return ParsePrediction(raw, options_.strategy, schema_);
            },
            false);
        if (parsed.ok()) {
          record.main_pred = parsed.main_pred;
          record.high_pred = parsed.high_pred;
        }
      }
    } catch (const ItemFailed& failed) {
      Warn("item " + item.item_id + ": " + failed.reason +
           "; recorded as unparseable");
      counters_.endpoint_failures++;
      record.main_pred.reset();
      record.high_pred.reset();
    }
    if (!record.parsed()) {
      record.main_pred.reset();
      counters_.unparseable++;
    }
    for (std::size_t i = 0; i < raws.size(); ++i) {
      if (i) record.raw_response += "\n---\n";
      record.raw_response += raws[i];
    }
    return record;
  }

  std::vector<Message> FirstPrompt(const Item& item) const {
    if (options_.strategy == Strategy::kDirectHigh) {
      return BuildDirectHighPrompt(item.text, schema_);
    }
    if (options_.two_call) return BuildMainOnlyPrompt(item.text, schema_);
    return BuildMainHighPrompt(item.text, schema_);
  }

 private:
  template <typename ParseFn>
  ParsedPrediction Converse(std::vector<Message> messages,
                            const std::string& tag,
                            std::vector<std::string>& raws, ParseFn parse,
                            bool main_only, std::string* accepted = nullptr) {
    ParsedPrediction parsed;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      std::string raw = Call(messages, tag, &parsed, parse);
      raws.push_back(raw);
      if (parsed.ok()) {
        if (accepted) *accepted = raw;
        return parsed;
      }
      messages = BuildFormatReminder(std::move(messages), raw,
                                     options_.strategy, main_only);
    }
    return parsed;
  }

  void RunTwoCall(const std::vector<Message>& first,
                  std::vector<std::string>& raws, PredictionRecord& record) {
    std::string tag(StrategyName(options_.strategy));
    std::string main_answer;
    ParsedPrediction main = Converse(
        first, tag + "/main", raws,
        [&](std::string_view raw) { return ParseMainOnly(raw, schema_); },
        true, &main_answer);
    if (!main.ok()) return;
    std::vector<Message> follow = BuildHighFollowUp(first, main_answer, schema_);
    ParsedPrediction high = Converse(
        follow, tag + "/high", raws,
        [&](std::string_view raw) {
          return ParsePrediction(raw, Strategy::kDirectHigh, schema_);
        },
        false);
    if (!high.ok()) return;
    record.main_pred = main.main_pred;
    record.high_pred = high.high_pred;
  }

  // One logical request: cache first, then the endpoint with retries on
  // transient failures. Parses into `parsed` so the cache entry carries it.
  template <typename ParseFn>
  std::string Call(const std::vector<Message>& messages, const std::string& tag,
                   ParsedPrediction* parsed, ParseFn& parse) {
    if (cache_) {
      if (std::optional<std::string> hit =
              cache_->Lookup(config_.model, tag, messages)) {
        counters_.cache_hits++;
        *parsed = parse(*hit);
        return *hit;
      }
    }
    ChatRequest request{config_.model, messages, config_.temperature,
                        config_.max_tokens};
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (abort_.load()) throw ItemFailed{"run aborted"};
      if (attempt > 0 && config_.retry_backoff_ms > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(
            static_cast<long long>(config_.retry_backoff_ms) << (attempt - 1)));
      }
      try {
        counters_.network_calls++;
        std::string raw = client_.Complete(request);
        *parsed = parse(raw);
        if (cache_) cache_->Store(config_.model, tag, messages, raw, parsed);
        return raw;
      } catch (const AuthError&) {
        throw;
      } catch (const TransientEndpointError& e) {
        last_error = e.what();
      } catch (const EndpointError& e) {
        throw ItemFailed{e.what()};
      }
    }
    throw ItemFailed{"endpoint kept failing: " + last_error};
  }

  const Schema& schema_;
  const ClassifyOptions& options_;
  const EndpointConfig& config_;
  ChatClient& client_;
  PredictionCache* cache_;
  Counters& counters_;
  const std::atomic<bool>& abort_;
};

}  // namespace

ClassifyResult ClassifySplit(std::span<const Item> items, const Schema& schema,
                             const ClassifyOptions& options,
                             const EndpointConfig& config, ChatClient& client,
                             PredictionCache* cache) {
  config.Validate();
  // Fail on schema preconditions before any request goes out.
  if (options.strategy == Strategy::kDirectHigh) {
    RequireHighLevels(schema);
  } else {
    RequireBothLevels(schema);
  }

  Counters counters;
  std::atomic<bool> abort{false};
  std::atomic<std::size_t> next{0};
  std::vector<PredictionRecord> records(items.size());
  std::exception_ptr fatal;
  std::mutex fatal_mu;

  auto worker = [&] {
    ItemRunner runner(schema, options, config, client, cache, counters, abort);
    while (!abort.load()) {
      std::size_t i = next.fetch_add(1);
      if (i >= items.size()) break;
      try {
        records[i] = runner.Run(items[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(fatal_mu);
        if (!fatal) fatal = std::current_exception();
        abort.store(true);
      }
    }
  };

  std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(config.parallelism),
                            std::max<std::size_t>(items.size(), 1));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (std::thread& t : threads) t.join();
  if (fatal) std::rethrow_exception(fatal);

  std::sort(records.begin(), records.end(),
            [](const PredictionRecord& a, const PredictionRecord& b) {
              return a.item_id < b.item_id;
            });
  ClassifyResult result;
  result.records = std::move(records);
  result.stats.network_calls = counters.network_calls.load();
  result.stats.cache_hits = counters.cache_hits.load();
  result.stats.unparseable = counters.unparseable.load();
  result.stats.endpoint_failures = counters.endpoint_failures.load();
  return result;
}

std::vector<RenderedPrompt> RenderPrompts(std::span<const Item> items,
                                          const Schema& schema,
                                          const ClassifyOptions& options,
                                          std::string_view model_id) {
  std::vector<RenderedPrompt> out;
  out.reserve(items.size());
  for (const Item& item : items) {
    RenderedPrompt p;
    p.item_id = item.item_id;
    if (options.strategy == Strategy::kDirectHigh) {
      p.messages = BuildDirectHighPrompt(item.text, schema);
    } else if (options.two_call) {
      p.messages = BuildMainOnlyPrompt(item.text, schema);
    } else {
      p.messages = BuildMainHighPrompt(item.text, schema);
    }
    p.prompt_hash = PromptHash(model_id, p.messages);
    out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(),
            [](const RenderedPrompt& a, const RenderedPrompt& b) {
              return a.item_id < b.item_id;
            });
  return out;
}

}  // namespace proptk
