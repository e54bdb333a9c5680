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

// Prompt construction, answer parsing and split-level classification for
// the two high-level strategies:
//
//   direct_high  text + high-level catalog -> "HIGH: <id>"
//   main_high    text + both catalogs -> "MAIN: <technique id>" then
//                "HIGH: <id>" in the same answer, HIGH chosen in light of
//                MAIN. The two-call variant asks for MAIN first and sends
//                the HIGH request with the MAIN answer in its context.

#ifndef PROPTK_PROMPTING_H_
#define PROPTK_PROMPTING_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "proptk/corpus.h"

namespace proptk {

struct Message {
  std::string role;  // "system", "user" or "assistant"
  std::string content;

  bool operator==(const Message&) const = default;
};

// Version tag written next to every predictions file.
inline constexpr std::string_view kPromptTemplateVersion = "proptk-prompts/1";
// SHA-256 over the fixed template text; changes whenever wording changes.
std::string PromptTemplateHash();

// Throws PreconditionError if the schema has fewer than 2 categories.
std::vector<Message> BuildDirectHighPrompt(std::string_view text,
                                           const Schema& schema);
// Throws PreconditionError unless both levels are populated.
std::vector<Message> BuildMainHighPrompt(std::string_view text,
                                         const Schema& schema);
// Two-call variant: the first request asks for MAIN only.
std::vector<Message> BuildMainOnlyPrompt(std::string_view text,
                                         const Schema& schema);
// Second request of the two-call variant: the first conversation, the MAIN
// answer as an assistant turn, and a request for HIGH.
std::vector<Message> BuildHighFollowUp(std::vector<Message> main_prompt,
                                       std::string_view main_answer,
                                       const Schema& schema);
// Appended after an unparseable answer.
std::vector<Message> BuildFormatReminder(std::vector<Message> prompt,
                                         std::string_view bad_answer,
                                         Strategy strategy, bool main_only);

// SHA-256 of the model id plus the full message sequence.
std::string PromptHash(std::string_view model_id,
                       std::span<const Message> messages);

enum class ParseStatus { kOk, kParseFailure, kOutOfSchema, kMissingField };

std::string_view ParseStatusName(ParseStatus status);

struct ParsedPrediction {
  ParseStatus status = ParseStatus::kParseFailure;
  std::optional<int> main_pred;
  std::optional<int> high_pred;
  std::string detail;

  bool ok() const { return status == ParseStatus::kOk; }
};

// direct_high: the integer after a HIGH marker, else the first integer in the
// text. main_high: the integers after MAIN and after a later HIGH marker.
ParsedPrediction ParsePrediction(std::string_view raw, Strategy strategy,
                                 const Schema& schema);
// Just the MAIN field (first call of the two-call variant).
ParsedPrediction ParseMainOnly(std::string_view raw, const Schema& schema);

struct EndpointConfig {
  std::string base_url;  // ".../v1" or a full ".../chat/completions" URL
  std::string model;
  double temperature = 0.0;
  int max_tokens = 64;
  double timeout_seconds = 60.0;
  int max_retries = 3;
  int parallelism = 4;
  int retry_backoff_ms = 500;
  std::string api_key_env = "PROP_API_KEY";

  void Validate() const;
};

struct ChatRequest {
  std::string model;
  std::vector<Message> messages;
  double temperature = 0.0;
  int max_tokens = 64;
};

// {model, messages:[{role, content}], temperature, max_tokens}
nlohmann::ordered_json ChatRequestToJson(const ChatRequest& request);
// Content of the first choice's message. Throws EndpointError if absent.
std::string ChatResponseContent(std::string_view body);

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  // Throws AuthError (abort), TransientEndpointError (retry) or
  // EndpointError.
  virtual std::string Complete(const ChatRequest& request) = 0;
};

// Posts to an OpenAI-compatible chat-completion endpoint. The bearer token is
// read from the environment variable named in the config, when set.
class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(EndpointConfig config);
  std::string Complete(const ChatRequest& request) override;

 private:
  EndpointConfig config_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;    // path ending in /chat/completions
  std::string api_key_;
};

// Responses on disk, keyed by (model id, strategy/call tag, prompt hash). A
// hit additionally requires the stored messages to equal the request's.
// Writers go through a temp file and rename, so concurrent writers of one
// key leave one complete entry.
class PredictionCache {
 public:
  explicit PredictionCache(std::filesystem::path dir);

  std::optional<std::string> Lookup(std::string_view model_id,
                                    std::string_view tag,
                                    std::span<const Message> messages) const;
  // `parsed` is stored alongside the raw response for inspection; lookups
  // return the raw text only and callers re-parse it.
  void Store(std::string_view model_id, std::string_view tag,
             std::span<const Message> messages, std::string_view response,
             const ParsedPrediction* parsed = nullptr);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path PathFor(std::string_view model_id,
                                std::string_view tag,
                                std::string_view prompt_hash) const;

  std::filesystem::path dir_;
};

struct ClassifyOptions {
  Strategy strategy = Strategy::kDirectHigh;
  bool two_call = false;
};

struct ClassifyStats {
  std::size_t network_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t unparseable = 0;
  std::size_t endpoint_failures = 0;  // items given up after transient errors
};

struct ClassifyResult {
  std::vector<PredictionRecord> records;  // sorted by item_id
  ClassifyStats stats;
};

// One record per item, sorted by item_id, whatever the completion order.
// Unparseable answers (after max_retries format reminders) and items whose
// requests kept failing are recorded with high_pred = nullopt. An AuthError
// aborts the run and is rethrown. `cache` may be null.
ClassifyResult ClassifySplit(std::span<const Item> items, const Schema& schema,
                             const ClassifyOptions& options,
                             const EndpointConfig& config, ChatClient& client,
                             PredictionCache* cache);

struct RenderedPrompt {
  std::string item_id;
  std::string prompt_hash;
  std::vector<Message> messages;
};

// The first request of every item, without contacting anything.
std::vector<RenderedPrompt> RenderPrompts(std::span<const Item> items,
                                          const Schema& schema,
                                          const ClassifyOptions& options,
                                          std::string_view model_id);

nlohmann::ordered_json MessagesToJson(std::span<const Message> messages);

}  // namespace proptk

#endif  // PROPTK_PROMPTING_H_
