// Copyright 2026 The Attentive Authors.
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

// HTTP chat-completion client (POST {base_url}/chat/completions).

#ifndef ATTENTIVE_HTTP_COMPLETION_HPP
#define ATTENTIVE_HTTP_COMPLETION_HPP

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "attentive/completion.hpp"
#include "attentive/error.hpp"

namespace attentive {

struct EndpointConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4o";
  /// Name of the environment variable holding the bearer token.
  std::string api_key_env = "OPENAI_API_KEY";
  int timeout_ms = 10000;
  /// Extra attempts after a failed connection, within the same timeout budget.
  int max_retries = 1;
  bool debug = false;
};

class HttpCompletionClient : public CompletionClient {
 public:
  explicit HttpCompletionClient(EndpointConfig cfg) : cfg_(std::move(cfg)) {
    // "scheme://host:port/prefix" -> ("scheme://host:port", "/prefix")
    const auto scheme_end = cfg_.base_url.find("://");
    const auto path_at =
        cfg_.base_url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    origin_ = cfg_.base_url.substr(0, path_at);
    prefix_ = path_at == std::string::npos ? "" : cfg_.base_url.substr(path_at);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }

  const EndpointConfig& config() const { return cfg_; }

  std::string complete(const CompletionRequest& request) override {
    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + std::chrono::milliseconds(cfg_.timeout_ms);
    nlohmann::json body = to_json(request);
    if (body["model"].get<std::string>().empty()) body["model"] = cfg_.model;
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (const char* token = std::getenv(cfg_.api_key_env.c_str()); token && *token)
      headers.emplace("Authorization", std::string("Bearer ") + token);
    if (cfg_.debug) std::clog << "[completion] POST " << url() << " " << payload << "\n";

    for (int attempt = 0;; ++attempt) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now());
      if (left.count() <= 0) throw Error(ErrorCode::BackendUnavailable, "timed out");

      httplib::Client client(origin_);
      const auto secs = std::chrono::duration_cast<std::chrono::seconds>(left);
      const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(left - secs);
      client.set_connection_timeout(secs.count(), usecs.count());
      client.set_read_timeout(secs.count(), usecs.count());
      client.set_write_timeout(secs.count(), usecs.count());

      auto res = client.Post(prefix_ + "/chat/completions", headers, payload, "application/json");
      if (!res) {
        const auto err = res.error();
        if (err == httplib::Error::Connection && attempt < cfg_.max_retries) continue;
        throw Error(ErrorCode::BackendUnavailable, httplib::to_string(err));
      }
      if (cfg_.debug) std::clog << "[completion] " << res->status << " " << res->body << "\n";
      return interpret(res->status, res->body);
    }
  }

  /// Maps an HTTP status + body to reply text or a typed error.
  static std::string interpret(int status, const std::string& body) {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
    if (status != 200) {
      if (is_content_filter_error(j))
        throw Error(ErrorCode::ContentFiltered, "rejected by content filter");
      throw Error(ErrorCode::BackendUnavailable, "HTTP " + std::to_string(status));
    }
    if (j.is_discarded()) throw Error(ErrorCode::MalformedBackendReply, "reply is not JSON");
    try {
      const auto& choice = j.at("choices").at(0);
      if (choice.value("finish_reason", "") == "content_filter")
        throw Error(ErrorCode::ContentFiltered, "completion stopped by content filter");
      return choice.at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedBackendReply, e.what());
    }
  }

 private:
  static bool is_content_filter_error(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("error") || !j["error"].is_object()) return false;
    const auto& e = j["error"];
    if (e.value("code", "") == "content_filter") return true;
    if (e.contains("innererror") && e["innererror"].is_object() &&
        e["innererror"].value("code", "") == "ResponsibleAIPolicyViolation")
      return true;
    return false;
  }

  std::string url() const { return origin_ + prefix_ + "/chat/completions"; }

  EndpointConfig cfg_;
  std::string origin_;
  std::string prefix_;
};

}  // namespace attentive

#endif  // ATTENTIVE_HTTP_COMPLETION_HPP
