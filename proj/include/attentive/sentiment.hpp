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

/** @file sentiment.hpp Three-way utterance sentiment.
 *
 * A backend produces a score in [-1, 1]; map_score_to_class() splits that
 * range evenly into Negative / Neutral / Positive. Two backends ship:
 * a prompted completion model and a bundled valence lexicon.
 **/

#ifndef ATTENTIVE_SENTIMENT_HPP
#define ATTENTIVE_SENTIMENT_HPP

#include <algorithm>
#include <cctype>
#include <chrono>
#include <istream>
#include <memory>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "attentive/completion.hpp"
#include "attentive/error.hpp"

namespace attentive {

enum class SentimentClass { Negative, Neutral, Positive };

constexpr std::string_view to_string(SentimentClass c) {
  switch (c) {
    case SentimentClass::Negative: return "negative";
    case SentimentClass::Neutral: return "neutral";
    case SentimentClass::Positive: return "positive";
  }
  return "neutral";
}

inline SentimentClass parse_sentiment_class(std::string_view s) {
  if (s == "negative") return SentimentClass::Negative;
  if (s == "neutral") return SentimentClass::Neutral;
  if (s == "positive") return SentimentClass::Positive;
  throw Error(ErrorCode::InvalidArgument, "unknown sentiment class " + std::string(s));
}

enum class SentimentBackendKind { Llm, Lexicon };

constexpr std::string_view to_string(SentimentBackendKind k) {
  return k == SentimentBackendKind::Llm ? "llm" : "lexicon";
}

struct SentimentThresholds {
  double negative_below = -1.0 / 3.0;
  double positive_above = 1.0 / 3.0;
};

inline SentimentClass map_score_to_class(double score, const SentimentThresholds& t = {}) {
  if (!(score >= -1.0 && score <= 1.0))
    throw Error(ErrorCode::OutOfRange, "sentiment score " + std::to_string(score));
  if (score < t.negative_below) return SentimentClass::Negative;
  if (score > t.positive_above) return SentimentClass::Positive;
  return SentimentClass::Neutral;
}

struct SentimentResult {
  double score = 0.0;
  SentimentClass cls = SentimentClass::Neutral;
  SentimentBackendKind backend = SentimentBackendKind::Lexicon;
};

class SentimentBackend {
 public:
  virtual ~SentimentBackend() = default;
  virtual SentimentBackendKind kind() const = 0;
  /// Score in [-1, 1]. Only called with non-blank text.
  virtual double score(std::string_view text) = 0;
  /// True when score() never touches the network.
  virtual bool is_local() const = 0;
};

inline bool is_blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

inline SentimentResult classify_sentiment(std::string_view text, SentimentBackend& backend,
                                          const SentimentThresholds& thresholds = {}) {
  SentimentResult r;
  r.backend = backend.kind();
  if (is_blank(text)) return r;
  r.score = backend.score(text);
  r.cls = map_score_to_class(r.score, thresholds);
  return r;
}

// ---------------------------------------------------------------------------
// Lexicon backend
// ---------------------------------------------------------------------------

/// Lowercased word tokens; apostrophes inside words are kept.
inline std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    while (!cur.empty() && cur.back() == '\'') cur.pop_back();
    std::size_t lead = 0;
    while (lead < cur.size() && cur[lead] == '\'') ++lead;
    if (lead < cur.size()) out.push_back(cur.substr(lead));
    cur.clear();
  };
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalpha(u) || c == '\'') {
      cur += static_cast<char>(std::tolower(u));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::unordered_map<std::string, double> valences)
      : valences_(std::move(valences)) {}

  /// Parses "word<TAB>valence" lines; '#' starts a comment line.
  static Lexicon parse(std::istream& in) {
    std::unordered_map<std::string, double> v;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos || tab == 0)
        throw Error(ErrorCode::ParseError, "expected word<TAB>valence", line_no);
      double valence = 0.0;
      try {
        std::size_t used = 0;
        valence = std::stod(line.substr(tab + 1), &used);
        if (tab + 1 + used != line.size()) throw std::invalid_argument("trailing text");
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "bad valence", line_no);
      }
      if (valence < -1.0 || valence > 1.0)
        throw Error(ErrorCode::ParseError, "valence outside [-1, 1]", line_no);
      std::string word = line.substr(0, tab);
      for (auto& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      v[word] = valence;
    }
    return Lexicon(std::move(v));
  }

  static const Lexicon& bundled();

  std::optional<double> valence(const std::string& word) const {
    const auto it = valences_.find(word);
    if (it == valences_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t size() const { return valences_.size(); }

 private:
  std::unordered_map<std::string, double> valences_;
};

namespace detail {

// Hand-assigned valences for common conversational words.
inline constexpr std::string_view kBundledLexicon = R"(# word	valence
wonderful	0.9
amazing	0.85
great	0.8
excellent	0.9
fantastic	0.9
awesome	0.85
incredible	0.8
perfect	0.85
beautiful	0.8
lovely	0.75
love	0.8
loved	0.8
loving	0.75
happy	0.8
happiest	0.9
happiness	0.8
joy	0.85
joyful	0.85
glad	0.65
excited	0.75
exciting	0.7
fun	0.65
enjoy	0.6
enjoyed	0.6
good	0.55
nice	0.5
best	0.75
better	0.4
proud	0.7
grateful	0.75
thankful	0.7
blessed	0.7
calm	0.35
peaceful	0.55
relaxing	0.5
relaxed	0.5
success	0.7
successful	0.7
accomplished	0.6
accomplishment	0.55
achievement	0.55
win	0.6
won	0.6
favorite	0.5
hope	0.4
hopeful	0.5
inspired	0.6
inspiring	0.6
kind	0.45
friendly	0.45
delicious	0.6
laugh	0.55
laughing	0.55
smile	0.55
cherish	0.7
treasure	0.6
comfortable	0.4
safe	0.35
free	0.3
famous	0.3
adventure	0.45
beloved	0.75
cool	0.4
brilliant	0.8
delighted	0.85
thrilled	0.85
sad	-0.7
saddest	-0.85
sadness	-0.7
unhappy	-0.7
terrible	-0.85
horrible	-0.9
awful	-0.85
bad	-0.6
worst	-0.85
worse	-0.55
hate	-0.8
hated	-0.8
angry	-0.7
anger	-0.65
mad	-0.5
upset	-0.6
afraid	-0.6
scared	-0.65
fear	-0.6
frightened	-0.7
terrified	-0.85
anxious	-0.55
anxiety	-0.55
worried	-0.5
worry	-0.45
stress	-0.5
stressed	-0.55
stressful	-0.55
lonely	-0.6
alone	-0.35
hurt	-0.65
pain	-0.65
painful	-0.7
cry	-0.55
cried	-0.6
crying	-0.6
tears	-0.5
died	-0.75
death	-0.75
dead	-0.7
die	-0.7
dying	-0.75
loss	-0.65
lost	-0.5
miss	-0.35
missed	-0.35
failed	-0.6
fail	-0.55
failure	-0.7
disappointed	-0.65
disappointing	-0.6
devastated	-0.9
devastating	-0.9
heartbroken	-0.9
grief	-0.8
tragic	-0.85
tragedy	-0.85
accident	-0.55
sick	-0.55
illness	-0.6
disease	-0.6
injured	-0.6
broke	-0.4
broken	-0.55
embarrassed	-0.5
embarrassing	-0.5
ashamed	-0.65
guilty	-0.55
regret	-0.55
difficult	-0.4
hard	-0.3
tough	-0.35
struggle	-0.5
struggled	-0.5
problem	-0.4
trouble	-0.45
wrong	-0.45
unfair	-0.5
boring	-0.45
bored	-0.4
tired	-0.35
exhausted	-0.5
miserable	-0.85
depressed	-0.8
depression	-0.75
disturbing	-0.7
disgusting	-0.8
nightmare	-0.75
scary	-0.6
abuse	-0.85
fight	-0.45
divorce	-0.6
funeral	-0.7
)";

}  // namespace detail

inline const Lexicon& Lexicon::bundled() {
  static const Lexicon lexicon = [] {
    std::istringstream in{std::string(detail::kBundledLexicon)};
    return parse(in);
  }();
  return lexicon;
}

/// Mean valence of lexicon words in the text. A negator within the three
/// preceding tokens scales a word's valence by -0.74. No matches scores 0.
class LexiconSentiment : public SentimentBackend {
 public:
  LexiconSentiment() : lexicon_(Lexicon::bundled()) {}
  explicit LexiconSentiment(Lexicon lexicon) : lexicon_(std::move(lexicon)) {}

  SentimentBackendKind kind() const override { return SentimentBackendKind::Lexicon; }
  bool is_local() const override { return true; }

  double score(std::string_view text) override {
    static const std::unordered_set<std::string> negators{
        "not", "no", "never", "don't", "didn't", "doesn't", "isn't", "wasn't", "aren't",
        "weren't", "can't", "cannot", "couldn't", "won't", "wouldn't", "nothing", "hardly"};
    const auto words = tokenize_words(text);
    double sum = 0.0;
    int hits = 0;
    for (std::size_t i = 0; i < words.size(); ++i) {
      auto v = lexicon_.valence(words[i]);
      if (!v) continue;
      double value = *v;
      for (std::size_t back = 1; back <= 3 && back <= i; ++back) {
        if (negators.count(words[i - back])) {
          value *= -0.74;
          break;
        }
      }
      sum += value;
      ++hits;
    }
    if (hits == 0) return 0.0;
    return std::clamp(sum / hits, -1.0, 1.0);
  }

 private:
  Lexicon lexicon_;
};

// ---------------------------------------------------------------------------
// Completion-model backend
// ---------------------------------------------------------------------------

inline constexpr std::string_view kDefaultSentimentPrompt =
    "Classify the sentiment of the following utterance on a continuous scale from -1 "
    "(very negative) through 0 (neutral) to 1 (very positive). Reply with the number "
    "only.\n\nUtterance: {text}";

/// Pulls the first decimal number out of a reply.
inline double parse_score_reply(const std::string& reply) {
  static const std::regex number(R"([-+]?(?:\d+\.?\d*|\.\d+))");
  std::smatch m;
  if (!std::regex_search(reply, m, number))
    throw Error(ErrorCode::MalformedBackendReply, "no number in \"" + reply + "\"");
  const double v = std::stod(m.str());
  if (v < -1.0 || v > 1.0)
    throw Error(ErrorCode::MalformedBackendReply, "score " + m.str() + " outside [-1, 1]");
  return v;
}

class LlmSentiment : public SentimentBackend {
 public:
  LlmSentiment(std::shared_ptr<CompletionClient> client, std::string model,
               std::string prompt_template = std::string(kDefaultSentimentPrompt),
               std::chrono::milliseconds timeout = std::chrono::milliseconds(10000))
      : client_(std::move(client)),
        model_(std::move(model)),
        template_(std::move(prompt_template)),
        timeout_(timeout) {}

  SentimentBackendKind kind() const override { return SentimentBackendKind::Llm; }
  bool is_local() const override { return false; }

  double score(std::string_view text) override {
    std::string prompt = template_;
    const auto at = prompt.find("{text}");
    if (at != std::string::npos)
      prompt.replace(at, 6, text);
    else
      prompt += "\n\n" + std::string(text);
    CompletionRequest req{model_, {{"user", prompt}}, 0.0};
    return parse_score_reply(complete_with_deadline(client_, std::move(req), timeout_));
  }

 private:
  std::shared_ptr<CompletionClient> client_;
  std::string model_;
  std::string template_;
  std::chrono::milliseconds timeout_;
};

}  // namespace attentive

#endif  // ATTENTIVE_SENTIMENT_HPP
