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

/** @file listener.hpp Active-listening replies under hard text constraints.
 *
 * A reply is accepted only if it has at most 97 words and asks nothing.
 * generate_response() tries the model twice at most and otherwise falls
 * back to a scripted acknowledgment for the current question, so it always
 * returns a valid ListenerResponse.
 **/

#ifndef ATTENTIVE_LISTENER_HPP
#define ATTENTIVE_LISTENER_HPP

#include <algorithm>
#include <array>
#include <chrono>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "attentive/completion.hpp"
#include "attentive/error.hpp"
#include "attentive/sentiment.hpp"

namespace attentive {

inline constexpr std::size_t kMaxResponseWords = 97;

/// Instruction block sent ahead of every utterance.
inline constexpr std::string_view kActiveListeningPrompt =
    "Active Listening is a complex skill that involves multiple components:\n"
    "• Refraining from judgment and paraphrasing the speaker’s message.\n"
    "• Reflecting back feelings and contents.\n"
    "• Demonstrating a sense of validation.\n"
    "• Unconditional acceptance and unbiased reflection of a client’s experience\n"
    "You are engaging in a conversation with a human. Respond in an active listening "
    "manner to the following using on average 28 words and a maximum of 97 words. "
    "Do not ask any question.";

struct Exchange {
  std::string utterance;
  std::string response;
};

struct ListenerConfig {
  std::string model = "gpt-4o";
  double temperature = 0.7;
  int timeout_ms = 10000;
  /// Most recent exchanges included in the prompt.
  std::size_t history_turns = 3;
};

inline std::string build_prompt(std::string_view utterance, const std::vector<Exchange>& history,
                                std::size_t history_turns = ListenerConfig{}.history_turns) {
  if (is_blank(utterance)) throw Error(ErrorCode::InvalidArgument, "empty utterance");
  std::string out(kActiveListeningPrompt);
  const std::size_t keep = std::min(history_turns, history.size());
  if (keep > 0) {
    out += "\n\nConversation so far:";
    for (std::size_t i = history.size() - keep; i < history.size(); ++i) {
      out += "\nSpeaker: " + history[i].utterance;
      if (!history[i].response.empty()) out += "\nListener: " + history[i].response;
    }
  }
  out += "\n\n";
  out += kUtteranceMarker;
  out += utterance;
  return out;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class ViolationKind {
  OverLength,
  /// A '?' anywhere, or a sentence shaped like a question.
  ContainsQuestion
};

constexpr std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::OverLength: return "OverLength";
    case ViolationKind::ContainsQuestion: return "ContainsQuestion";
  }
  return "";
}

struct Violation {
  ViolationKind kind;
  std::string detail;
};

inline std::size_t count_words(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::size_t n = 0;
  for (std::string w; in >> w;) ++n;
  return n;
}

namespace detail {

inline std::vector<std::string> sentence_heads(std::string_view text) {
  // First two words of every sentence, lowercased and stripped of punctuation.
  std::vector<std::string> heads;
  std::string sentence;
  auto flush = [&] {
    const auto words = tokenize_words(sentence);
    if (!words.empty()) heads.push_back(words[0] + (words.size() > 1 ? " " + words[1] : ""));
    sentence.clear();
  };
  for (char c : text) {
    if (c == '.' || c == '!' || c == '?' || c == ';' || c == '\n')
      flush();
    else
      sentence += c;
  }
  flush();
  return heads;
}

inline bool looks_interrogative(const std::string& head) {
  static const std::unordered_set<std::string> wh{"who", "what", "when", "where", "why", "how", "which"};
  static const std::unordered_set<std::string> aux{
      "do", "does", "did", "are", "is", "was", "were", "can", "could", "would",
      "will", "should", "have", "has", "shall", "may", "might"};
  static const std::unordered_set<std::string> subjects{
      "you", "i", "we", "they", "he", "she", "it", "that", "this", "there", "your", "anyone", "someone"};
  const auto space = head.find(' ');
  if (space == std::string::npos) return false;
  const std::string first = head.substr(0, space);
  const std::string second = head.substr(space + 1);
  if (wh.count(first)) return aux.count(second) > 0;
  if (aux.count(first)) return subjects.count(second) > 0;
  return false;
}

}  // namespace detail

/// Empty result means the text is acceptable as a listener response.
inline std::vector<Violation> validate_response(std::string_view text) {
  std::vector<Violation> out;
  const std::size_t words = count_words(text);
  if (words > kMaxResponseWords)
    out.push_back({ViolationKind::OverLength, std::to_string(words) + " words"});
  if (text.find('?') != std::string_view::npos) {
    out.push_back({ViolationKind::ContainsQuestion, "contains '?'"});
    return out;
  }
  for (const auto& head : detail::sentence_heads(text)) {
    if (detail::looks_interrogative(head)) {
      out.push_back({ViolationKind::ContainsQuestion, "sentence opens with \"" + head + "\""});
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

enum class ResponseSource { Llm, ScriptedFallback };

constexpr std::string_view to_string(ResponseSource s) {
  return s == ResponseSource::Llm ? "llm" : "scripted_fallback";
}

inline ResponseSource parse_response_source(std::string_view s) {
  if (s == "llm") return ResponseSource::Llm;
  if (s == "scripted_fallback") return ResponseSource::ScriptedFallback;
  throw Error(ErrorCode::InvalidArgument, "unknown response source " + std::string(s));
}

struct ListenerResponse {
  std::string text;
  std::size_t word_count = 0;
  ResponseSource source = ResponseSource::Llm;
  int question_index = 1;

  bool operator==(const ListenerResponse&) const = default;
};

/// One neutral acknowledgment per question, 1-based.
class ScriptedFallbacks {
 public:
  ScriptedFallbacks()
      : ScriptedFallbacks(std::array<std::string, 9>{
            "Thank you for sharing your thoughts on what fame would mean for you.",
            "Thank you for describing what a perfect day looks like for you.",
            "Thank you for telling me who you would invite to dinner and why.",
            "Thank you for sharing what you would most want to know.",
            "Thank you for trusting me with that memory. It sounds like it has stayed with you.",
            "Thank you for sharing that accomplishment. It clearly means a lot to you.",
            "Thank you for sharing what would matter in a close friendship with you.",
            "Thank you for telling me what you would save and what it means to you.",
            "Thank you for sharing something so personal with me.",
        }) {}

  explicit ScriptedFallbacks(std::array<std::string, 9> texts) : texts_(std::move(texts)) {
    for (std::size_t i = 0; i < texts_.size(); ++i) {
      const auto v = validate_response(texts_[i]);
      if (!v.empty() || is_blank(texts_[i]))
        throw Error(ErrorCode::InvalidArgument,
                    "fallback " + std::to_string(i + 1) + " is not a valid response");
    }
  }

  const std::string& at(int question_index) const {
    if (question_index < 1 || question_index > 9)
      throw Error(ErrorCode::OutOfRange, "question index " + std::to_string(question_index));
    return texts_[static_cast<std::size_t>(question_index - 1)];
  }

 private:
  std::array<std::string, 9> texts_;
};

inline ListenerResponse generate_response(std::string_view utterance,
                                          const std::vector<Exchange>& history,
                                          std::shared_ptr<CompletionClient> client,
                                          const ScriptedFallbacks& fallbacks, int question_index,
                                          const ListenerConfig& cfg = {}) {
  auto fallback = [&] {
    const std::string& text = fallbacks.at(question_index);
    return ListenerResponse{text, count_words(text), ResponseSource::ScriptedFallback,
                            question_index};
  };
  if (is_blank(utterance) || !client) return fallback();

  CompletionRequest request{cfg.model, {{"user", build_prompt(utterance, history, cfg.history_turns)}},
                            cfg.temperature};
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string reply;
    try {
      reply = complete_with_deadline(client, request, std::chrono::milliseconds(cfg.timeout_ms));
    } catch (const std::exception&) {
      // Timeouts, network failures and content-filter rejections all go
      // straight to the scripted text.
      return fallback();
    }
    if (validate_response(reply).empty() && !is_blank(reply))
      return ListenerResponse{reply, count_words(reply), ResponseSource::Llm, question_index};
  }
  return fallback();
}

/// Bundles a client, fallbacks and config for a session.
class ActiveListener {
 public:
  ActiveListener(std::shared_ptr<CompletionClient> client, ListenerConfig cfg = {},
                 ScriptedFallbacks fallbacks = {})
      : client_(std::move(client)), cfg_(std::move(cfg)), fallbacks_(std::move(fallbacks)) {}

  ListenerResponse respond(std::string_view utterance, const std::vector<Exchange>& history,
                           int question_index) const {
    return generate_response(utterance, history, client_, fallbacks_, question_index, cfg_);
  }

  const ListenerConfig& config() const { return cfg_; }
  const ScriptedFallbacks& fallbacks() const { return fallbacks_; }

 private:
  std::shared_ptr<CompletionClient> client_;
  ListenerConfig cfg_;
  ScriptedFallbacks fallbacks_;
};

}  // namespace attentive

#endif  // ATTENTIVE_LISTENER_HPP
