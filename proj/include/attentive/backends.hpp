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

// Builds completion, sentiment and scoring backends from an AppConfig, and
// mints session identities.

#ifndef ATTENTIVE_BACKENDS_HPP
#define ATTENTIVE_BACKENDS_HPP

#include <chrono>
#include <ctime>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>

#include <boost/uuid/random_generator.hpp>
#include <boost/uuid/uuid_io.hpp>

#include "attentive/completion.hpp"
#include "attentive/config.hpp"
#include "attentive/disclosure.hpp"
#include "attentive/http_completion.hpp"
#include "attentive/sentiment.hpp"
#include "attentive/transcript.hpp"

namespace attentive {

/// The client behind the active listener: HTTP for llm, the paraphrasing
/// mock otherwise.
inline std::shared_ptr<CompletionClient> make_listener_client(const AppConfig& cfg) {
  if (cfg.listener_backend == ListenerBackend::Llm) return std::make_shared<HttpCompletionClient>(cfg.endpoint);
  return std::make_shared<MockCompletionClient>();
}

inline std::unique_ptr<SentimentBackend> make_sentiment_backend(const AppConfig& cfg) {
  if (cfg.sentiment_backend == SentimentBackendChoice::Llm)
    return std::make_unique<LlmSentiment>(std::make_shared<HttpCompletionClient>(cfg.endpoint), cfg.listener.model,
                                          std::string(kDefaultSentimentPrompt),
                                          std::chrono::milliseconds(cfg.listener.timeout_ms));
  return std::make_unique<LexiconSentiment>();
}

/// "heuristic" or "llm"; throws InvalidArgument otherwise.
inline std::unique_ptr<DisclosureScorer> make_scorer(std::string_view name, const AppConfig& cfg,
                                                     std::shared_ptr<CompletionClient> client = nullptr) {
  if (name == "heuristic") return std::make_unique<HeuristicScorer>();
  if (name == "llm") {
    if (!client) client = std::make_shared<HttpCompletionClient>(cfg.endpoint);
    return std::make_unique<LlmScorer>(std::move(client), cfg.listener.model, std::string(kDisclosureRubricPrompt),
                                       std::chrono::milliseconds(cfg.listener.timeout_ms));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown scoring backend \"" + std::string(name) + "\"");
}

/// Random v4 UUIDs; seeded instances repeat their sequence.
class SessionIdSource {
 public:
  SessionIdSource() : engine_(std::random_device{}()) {}
  explicit SessionIdSource(std::uint64_t seed) : engine_(static_cast<std::mt19937::result_type>(seed)) {}

  std::string next() {
    boost::uuids::basic_random_generator<std::mt19937> gen(engine_);
    return boost::uuids::to_string(gen());
  }

 private:
  std::mt19937 engine_;
};

/// RFC 3339 UTC with second precision.
inline std::string utc_timestamp(std::chrono::system_clock::time_point tp = std::chrono::system_clock::now()) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline TranscriptHeader make_header(std::string session_id, Condition condition, std::string created_at,
                                    const AppConfig& cfg) {
  TranscriptHeader h;
  h.session_id = std::move(session_id);
  h.condition = condition;
  h.created_at = std::move(created_at);
  if (condition == Condition::BcAl) h.listener = ListenerSettings{cfg.listener.model, cfg.listener.temperature};
  return h;
}

}  // namespace attentive

#endif  // ATTENTIVE_BACKENDS_HPP
