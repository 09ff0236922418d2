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

/** @file completion.hpp Chat-completion backends.
 *
 * CompletionClient is the one seam between the engine and a language model.
 * HttpCompletionClient speaks the common `/chat/completions` JSON shape;
 * MockCompletionClient is deterministic and scriptable for tests and
 * offline runs.
 **/

#ifndef ATTENTIVE_COMPLETION_HPP
#define ATTENTIVE_COMPLETION_HPP

#include <cctype>
#include <chrono>
#include <deque>
#include <future>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "attentive/error.hpp"

namespace attentive {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct CompletionRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.7;
};

/// Implementations report failures as Error with BackendUnavailable,
/// ContentFiltered or MalformedBackendReply. They must be callable from
/// several threads at once.
class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
};

/// Runs client->complete() on a helper thread and gives up after `timeout`.
/// A call that overruns keeps running detached; its result is discarded.
inline std::string complete_with_deadline(std::shared_ptr<CompletionClient> client,
                                          CompletionRequest request,
                                          std::chrono::milliseconds timeout) {
  auto promise = std::make_shared<std::promise<std::string>>();
  auto result = promise->get_future();
  std::thread([client = std::move(client), request = std::move(request), promise] {
    try {
      promise->set_value(client->complete(request));
    } catch (...) {
      promise->set_exception(std::current_exception());
    }
  }).detach();
  if (result.wait_for(timeout) != std::future_status::ready)
    throw Error(ErrorCode::BackendUnavailable,
                "no reply within " + std::to_string(timeout.count()) + " ms");
  return result.get();
}

inline nlohmann::json to_json(const CompletionRequest& r) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : r.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  return {{"model", r.model}, {"messages", messages}, {"temperature", r.temperature}};
}

// ---------------------------------------------------------------------------
// Mock
// ---------------------------------------------------------------------------

/// "I love hiking" -> "love hiking": drops a leading first-person subject,
/// swaps first- and second-person words, and strips final punctuation.
inline std::string utterance_as_clause(std::string_view utterance) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : utterance) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  if (words.empty()) return {};

  while (!words.back().empty() && std::string_view(".!?,;:").find(words.back().back()) != std::string_view::npos)
    words.back().pop_back();
  if (words.back().empty()) words.pop_back();
  if (words.empty()) return {};

  auto lower = [](std::string w) {
    for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return w;
  };
  std::vector<std::string> out;
  bool lead_subject = lower(words.front()) == "i" || lower(words.front()) == "i'm";
  if (!lead_subject) out.push_back("feel that");
  for (std::size_t i = 0; i < words.size(); ++i) {
    const std::string w = lower(words[i]);
    if (i == 0 && w == "i") continue;
    if (i == 0 && w == "i'm") {
      out.push_back("are");
      continue;
    }
    if (w == "i" || w == "me") out.push_back("you");
    else if (w == "my") out.push_back("your");
    else if (w == "mine") out.push_back("yours");
    else if (w == "myself") out.push_back("yourself");
    else if (w == "i'm") out.push_back("you're");
    else if (w == "am") out.push_back("are");
    else if (i == 0) out.push_back(w);
    else out.push_back(words[i]);
  }
  std::string joined;
  for (const auto& w : out) {
    if (!joined.empty()) joined += ' ';
    joined += w;
  }
  return joined;
}

/// The mock's default reply for an utterance.
inline std::string echo_paraphrase(std::string_view utterance) {
  return "It sounds like you " + utterance_as_clause(utterance) + ", and that is meaningful to you.";
}

/// Marker that precedes the utterance on the last line of listener prompts;
/// the mock paraphrases whatever follows its last occurrence.
inline constexpr std::string_view kUtteranceMarker = "Human: ";

class MockCompletionClient : public CompletionClient {
 public:
  struct Paraphrase {};
  struct Reply {
    std::string text;
  };
  struct Fail {
    ErrorCode code = ErrorCode::BackendUnavailable;
  };
  struct Stall {
    std::chrono::milliseconds duration{0};
  };
  using Step = std::variant<Paraphrase, Reply, Fail, Stall>;

  MockCompletionClient() = default;
  explicit MockCompletionClient(std::vector<Step> script) : script_(script.begin(), script.end()) {}

  /// Queues behaviors consumed one per call; afterwards every call paraphrases.
  void push(Step step) {
    std::lock_guard lock(mu_);
    script_.push_back(std::move(step));
  }

  std::string complete(const CompletionRequest& request) override {
    Step step = Paraphrase{};
    {
      std::lock_guard lock(mu_);
      requests_.push_back(request);
      if (!script_.empty()) {
        step = std::move(script_.front());
        script_.pop_front();
      }
    }
    if (auto* s = std::get_if<Stall>(&step)) {
      std::this_thread::sleep_for(s->duration);
      return paraphrase(request);
    }
    if (auto* r = std::get_if<Reply>(&step)) return r->text;
    if (auto* f = std::get_if<Fail>(&step)) throw Error(f->code, "injected by mock");
    return paraphrase(request);
  }

  std::vector<CompletionRequest> requests() const {
    std::lock_guard lock(mu_);
    return requests_;
  }

 private:
  static std::string paraphrase(const CompletionRequest& request) {
    if (request.messages.empty()) return echo_paraphrase("");
    const std::string& prompt = request.messages.back().content;
    const auto at = prompt.rfind(kUtteranceMarker);
    const std::string utterance =
        at == std::string::npos ? prompt : prompt.substr(at + kUtteranceMarker.size());
    return echo_paraphrase(utterance);
  }

  mutable std::mutex mu_;
  std::deque<Step> script_;
  std::vector<CompletionRequest> requests_;
};

}  // namespace attentive

#endif  // ATTENTIVE_COMPLETION_HPP
