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

#include <chrono>
#include <cstdlib>
#include <string>
#include <utility>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "proptk/error.h"
#include "proptk/prompting.h"

namespace proptk {
namespace {

constexpr std::string_view kCompletionsPath = "/chat/completions";

bool EndsWith(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

HttpChatClient::HttpChatClient(EndpointConfig config)
    : config_(std::move(config)) {
  config_.Validate();
  std::string_view url = config_.base_url;
  std::size_t scheme = url.find("://");
  if (scheme == std::string_view::npos) {
    throw ValidationError("endpoint URL needs a scheme: " + config_.base_url);
  }
  std::size_t slash = url.find('/', scheme + 3);
  origin_ = std::string(url.substr(0, slash));
  std::string path =
      slash == std::string_view::npos ? "" : std::string(url.substr(slash));
  while (!path.empty() && path.back() == '/') path.pop_back();
  if (!EndsWith(path, kCompletionsPath)) path += kCompletionsPath;
  path_ = std::move(path);

  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) {
      api_key_ = key;
    }
  }
}

std::string HttpChatClient::Complete(const ChatRequest& request) {
  httplib::Client client(origin_);
  if (!client.is_valid()) {
    throw EndpointError("unsupported endpoint URL: " + config_.base_url);
  }
  auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config_.timeout_seconds));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!api_key_.empty()) {
    headers.emplace("Authorization", "Bearer " + api_key_);
  }

  httplib::Result res = client.Post(path_, headers,
                                    ChatRequestToJson(request).dump(),
                                    "application/json");
  if (!res) {
    throw TransientEndpointError("request to " + origin_ + path_ +
                                 " failed: " + httplib::to_string(res.error()));
  }
  int status = res->status;
  if (status == 401 || status == 403) {
    throw AuthError("endpoint rejected credentials (HTTP " +
                    std::to_string(status) + ")");
  }
  if (status == 408 || status == 429 || status >= 500) {
    throw TransientEndpointError("endpoint returned HTTP " +
                                 std::to_string(status));
  }
  if (status < 200 || status >= 300) {
    throw EndpointError("endpoint returned HTTP " + std::to_string(status) +
                        ": " + res->body.substr(0, 200));
  }
  try {
    return ChatResponseContent(res->body);
  } catch (const EndpointError& e) {
    // A truncated or malformed body is usually a proxy hiccup.
    throw TransientEndpointError(e.what());
  }
}

}  // namespace proptk
