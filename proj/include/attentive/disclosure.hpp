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

/** @file disclosure.hpp Self-disclosure scoring and rater agreement.
 *
 * Every answer gets an (information, thoughts, feelings) triple on a 1..3
 * scale. HeuristicScorer is deterministic and documented below; LlmScorer
 * asks a completion model with a rubric prompt.
 *
 * Heuristic rules (whitespace tokens for length, lowercase word tokens
 * otherwise):
 *
 *   information  < 15 words -> 1, 15..49 -> 2, >= 50 -> 3
 *   thoughts     opinion markers found: 0 -> 1, 1..2 -> 2, >= 3 -> 3
 *   feelings     emotion words with a first-person token among the three
 *                tokens before them: 0 -> 1, 1 -> 2, >= 2 -> 3
 **/

#ifndef ATTENTIVE_DISCLOSURE_HPP
#define ATTENTIVE_DISCLOSURE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <chrono>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "attentive/completion.hpp"
#include "attentive/error.hpp"
#include "attentive/listener.hpp"
#include "attentive/sentiment.hpp"
#include "attentive/transcript.hpp"

namespace attentive {

struct DisclosureScore {
  int information = 1;
  int thoughts = 1;
  int feelings = 1;

  bool operator==(const DisclosureScore&) const = default;
};

class DisclosureScorer {
 public:
  virtual ~DisclosureScorer() = default;
  virtual std::string_view name() const = 0;
  /// Called only for non-blank answers.
  virtual DisclosureScore score(std::string_view question, std::string_view answer) = 0;
};

/// Blank answers floor at (1,1,1) without consulting the scorer.
inline DisclosureScore score_disclosure(std::string_view question, std::string_view answer,
                                        DisclosureScorer& scorer) {
  if (is_blank(answer)) return {};
  return scorer.score(question, answer);
}

// ---------------------------------------------------------------------------
// Heuristic scorer
// ---------------------------------------------------------------------------

namespace detail {

inline const std::vector<std::vector<std::string>>& opinion_markers() {
  static const std::vector<std::vector<std::string>> markers{
      {"i", "think"},      {"i", "believe"},  {"in", "my", "opinion"}, {"i", "feel", "that"},
      {"i", "guess"},      {"i", "suppose"},  {"i", "would", "say"},   {"to", "me"},
      {"i", "value"},      {"i", "consider"}, {"it", "seems"},         {"i", "wish"},
      {"i", "hope"},       {"i", "prefer"},   {"i", "realized"},       {"i", "learned"},
      {"i", "wonder"},     {"i", "doubt"},    {"i", "agree"},          {"i", "disagree"},
      {"personally"},      {"honestly"},      {"probably"},            {"maybe"},
      {"should"},          {"important"},     {"meaningful"},          {"because"},
  };
  return markers;
}

inline const std::unordered_set<std::string>& emotion_words() {
  static const std::unordered_set<std::string> words{
      "happy",     "happiness",   "sad",        "sadness",    "angry",     "anger",
      "afraid",    "scared",      "fear",       "proud",      "pride",     "devastated",
      "lonely",    "anxious",     "anxiety",    "nervous",    "excited",   "grateful",
      "ashamed",   "guilty",      "hurt",       "love",       "loved",     "upset",
      "terrified", "heartbroken", "hopeful",    "joy",        "glad",      "worried",
      "frustrated", "depressed",  "overwhelmed", "jealous",   "embarrassed", "miserable",
      "thrilled",  "relieved",    "sorry",      "horrible",   "awful",     "lost",
      "broken",    "stressed",    "furious",    "grief",      "grieving",  "miss",
      "missed",    "hate",        "hated",      "regret",     "shocked",   "disappointed",
      "confused",  "helpless",    "hopeless",   "comforted",  "safe",      "insecure",
      "vulnerable", "cried",      "crying",     "blessed",    "content",   "peaceful"};
  return words;
}

inline bool is_first_person(const std::string& w) {
  static const std::unordered_set<std::string> fp{"i", "i'm", "im", "me", "my", "myself", "i've", "i'd", "i'll", "mine"};
  return fp.count(w) > 0;
}

inline int tier(std::size_t value, std::size_t two_at, std::size_t three_at) {
  return value >= three_at ? 3 : value >= two_at ? 2 : 1;
}

}  // namespace detail

class HeuristicScorer : public DisclosureScorer {
 public:
  std::string_view name() const override { return "heuristic"; }

  DisclosureScore score(std::string_view, std::string_view answer) override {
    const auto tokens = tokenize_words(answer);
    DisclosureScore s;
    s.information = detail::tier(count_words(answer), 15, 50);
    s.thoughts = detail::tier(count_opinion_markers(tokens), 1, 3);
    s.feelings = detail::tier(count_owned_emotions(tokens), 1, 2);
    return s;
  }

  static std::size_t count_opinion_markers(const std::vector<std::string>& tokens) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      for (const auto& m : detail::opinion_markers()) {
        if (i + m.size() <= tokens.size() && std::equal(m.begin(), m.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
          ++n;
          break;
        }
      }
    }
    return n;
  }

  static std::size_t count_owned_emotions(const std::vector<std::string>& tokens) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (!detail::emotion_words().count(tokens[i])) continue;
      for (std::size_t back = 1; back <= 3 && back <= i; ++back) {
        if (detail::is_first_person(tokens[i - back])) {
          ++n;
          break;
        }
      }
    }
    return n;
  }
};

// ---------------------------------------------------------------------------
// Completion-model scorer
// ---------------------------------------------------------------------------

inline constexpr std::string_view kDisclosureRubricPrompt =
    "Rate how much the speaker discloses about themselves in the answer below, on three "
    "dimensions, each from 1 (lowest) to 3 (highest).\n"
    "Information: how much personal, factual information is revealed. 1 = none or generic "
    "facts; 2 = some specific personal details; 3 = rich, specific, private details.\n"
    "Thoughts: how much the speaker shares personal thoughts, opinions or reflections. "
    "1 = none; 2 = some opinions or reasons; 3 = deep reflection on beliefs or values.\n"
    "Feelings: how much the speaker expresses their own emotions. 1 = none; 2 = mentions a "
    "feeling; 3 = openly describes intense or vulnerable feelings.\n"
    "Reply with exactly three integers separated by commas, in the order "
    "information,thoughts,feelings, and nothing else.\n\n"
    "Question: {question}\nAnswer: {answer}";

/// "2, 3,1" -> (2,3,1). Exactly three integers in 1..3.
inline DisclosureScore parse_disclosure_reply(const std::string& reply) {
  static const std::regex integer(R"([-+]?\d+(\.\d+)?)");
  std::vector<std::string> found;
  for (auto it = std::sregex_iterator(reply.begin(), reply.end(), integer); it != std::sregex_iterator(); ++it)
    found.push_back(it->str());
  if (found.size() != 3)
    throw Error(ErrorCode::MalformedBackendReply, "expected three integers in \"" + reply + "\"");
  std::array<int, 3> v{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (found[i].find('.') != std::string::npos || found[i] != std::to_string(std::stoi(found[i])) ||
        std::stoi(found[i]) < 1 || std::stoi(found[i]) > 3)
      throw Error(ErrorCode::MalformedBackendReply, "value " + found[i] + " outside 1..3");
    v[i] = std::stoi(found[i]);
  }
  return {v[0], v[1], v[2]};
}

class LlmScorer : public DisclosureScorer {
 public:
  LlmScorer(std::shared_ptr<CompletionClient> client, std::string model,
            std::string prompt_template = std::string(kDisclosureRubricPrompt),
            std::chrono::milliseconds timeout = std::chrono::milliseconds(10000))
      : client_(std::move(client)), model_(std::move(model)), template_(std::move(prompt_template)), timeout_(timeout) {}

  std::string_view name() const override { return "llm"; }

  /// One retry on a malformed reply; BackendUnavailable propagates at once.
  DisclosureScore score(std::string_view question, std::string_view answer) override {
    CompletionRequest req{model_, {{"user", render(question, answer)}}, 0.0};
    for (int attempt = 0;; ++attempt) {
      try {
        return parse_disclosure_reply(complete_with_deadline(client_, req, timeout_));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::MalformedBackendReply || attempt >= 1) throw;
      }
    }
  }

 private:
  std::string render(std::string_view question, std::string_view answer) const {
    std::string out = template_;
    auto sub = [&](std::string_view key, std::string_view value) {
      const auto at = out.find(key);
      if (at != std::string::npos) out.replace(at, key.size(), value);
    };
    sub("{question}", question);
    sub("{answer}", answer);
    return out;
  }

  std::shared_ptr<CompletionClient> client_;
  std::string model_;
  std::string template_;
  std::chrono::milliseconds timeout_;
};

// ---------------------------------------------------------------------------
// Batch scoring
// ---------------------------------------------------------------------------

struct DisclosureRow {
  std::string session_id;
  int question_index = 1;
  DisclosureScore score;
  std::string backend;
};

/// Scores each utterance against the question it answered.
inline std::vector<DisclosureRow> score_transcript(const Transcript& t, DisclosureScorer& scorer) {
  std::vector<DisclosureRow> rows;
  const QuestionAsked* current = nullptr;
  for (const auto& e : t.events) {
    if (e.is<QuestionAsked>()) current = &e.as<QuestionAsked>();
    if (!e.is<UserUtterance>() || !current) continue;
    rows.push_back({t.header.session_id, current->index,
                    score_disclosure(current->text, e.as<UserUtterance>().text, scorer),
                    std::string(scorer.name())});
  }
  return rows;
}

struct DisclosureMeans {
  std::string session_id;
  std::size_t answers = 0;
  double information = 0, thoughts = 0, feelings = 0;
  std::string backend;
};

/// Per-session means of the per-question rows, in first-seen session order.
inline std::vector<DisclosureMeans> session_means(const std::vector<DisclosureRow>& rows) {
  std::vector<DisclosureMeans> out;
  for (const auto& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& m) { return m.session_id == r.session_id; });
    if (it == out.end()) {
      out.push_back({r.session_id, 0, 0, 0, 0, r.backend});
      it = out.end() - 1;
    }
    ++it->answers;
    it->information += r.score.information;
    it->thoughts += r.score.thoughts;
    it->feelings += r.score.feelings;
  }
  for (auto& m : out) {
    const auto n = static_cast<double>(m.answers);
    m.information /= n;
    m.thoughts /= n;
    m.feelings /= n;
  }
  return out;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_disclosure_csv(std::ostream& out, const std::vector<DisclosureRow>& rows) {
  out << "session_id,question_index,information,thoughts,feelings,backend\n";
  for (const auto& r : rows)
    out << csv_field(r.session_id) << ',' << r.question_index << ',' << r.score.information << ','
        << r.score.thoughts << ',' << r.score.feelings << ',' << r.backend << '\n';
}

inline void write_session_means_csv(std::ostream& out, const std::vector<DisclosureMeans>& means) {
  out << "session_id,answers,information,thoughts,feelings,backend\n";
  auto num = [](double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
  };
  for (const auto& m : means)
    out << csv_field(m.session_id) << ',' << m.answers << ',' << num(m.information) << ','
        << num(m.thoughts) << ',' << num(m.feelings) << ',' << m.backend << '\n';
}

// ---------------------------------------------------------------------------
// Agreement
// ---------------------------------------------------------------------------

/// Cohen's kappa for two raters' labels over the same items.
inline double cohen_kappa(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::LengthMismatch, std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " labels");
  if (a.empty()) throw Error(ErrorCode::InsufficientData, "no items");
  const auto n = static_cast<double>(a.size());
  std::map<int, double> ma, mb;
  double agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    agree += a[i] == b[i];
    ma[a[i]] += 1;
    mb[b[i]] += 1;
  }
  const double po = agree / n;
  double pe = 0;
  for (const auto& [label, count] : ma)
    if (auto it = mb.find(label); it != mb.end()) pe += (count / n) * (it->second / n);
  if (po == 1.0 || pe == 1.0) return 1.0;
  return (po - pe) / (1.0 - pe);
}

/// Cohen's kappa from a square confusion matrix (rows rater A, columns rater B).
inline double cohen_kappa(const std::vector<std::vector<double>>& confusion) {
  const std::size_t k = confusion.size();
  if (k == 0) throw Error(ErrorCode::InsufficientData, "empty confusion matrix");
  double total = 0, diag = 0;
  std::vector<double> rows(k, 0), cols(k, 0);
  for (std::size_t i = 0; i < k; ++i) {
    if (confusion[i].size() != k) throw Error(ErrorCode::RaggedMatrix, "confusion matrix is not square");
    for (std::size_t j = 0; j < k; ++j) {
      total += confusion[i][j];
      rows[i] += confusion[i][j];
      cols[j] += confusion[i][j];
    }
    diag += confusion[i][i];
  }
  if (total <= 0) throw Error(ErrorCode::InsufficientData, "no items");
  double pe = 0;
  for (std::size_t i = 0; i < k; ++i) pe += (rows[i] / total) * (cols[i] / total);
  const double po = diag / total;
  if (po == 1.0 || pe == 1.0) return 1.0;
  return (po - pe) / (1.0 - pe);
}

/// Fleiss' kappa. counts[i][j] = raters who put item i in category j; every
/// row must sum to the same rater count (at least 2).
inline double fleiss_kappa(const std::vector<std::vector<int>>& counts) {
  if (counts.empty()) throw Error(ErrorCode::InsufficientData, "no items");
  const std::size_t k = counts.front().size();
  long raters = -1;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i].size() != k)
      throw Error(ErrorCode::RaggedMatrix, "row " + std::to_string(i) + " has " + std::to_string(counts[i].size()) + " categories");
    long sum = 0;
    for (int c : counts[i]) {
      if (c < 0) throw Error(ErrorCode::InvalidArgument, "negative count");
      sum += c;
    }
    if (raters < 0) raters = sum;
    if (sum != raters)
      throw Error(ErrorCode::RaggedMatrix, "row " + std::to_string(i) + " sums to " + std::to_string(sum) +
                                               ", expected " + std::to_string(raters));
  }
  if (raters < 2) throw Error(ErrorCode::InsufficientData, "need at least two raters");

  const auto N = static_cast<double>(counts.size());
  const auto n = static_cast<double>(raters);
  std::vector<double> p(k, 0.0);
  double p_bar = 0;
  for (const auto& row : counts) {
    double sq = 0;
    for (std::size_t j = 0; j < k; ++j) {
      sq += static_cast<double>(row[j]) * row[j];
      p[j] += row[j];
    }
    p_bar += (sq - n) / (n * (n - 1));
  }
  p_bar /= N;
  double pe = 0;
  for (double pj : p) pe += (pj / (N * n)) * (pj / (N * n));
  if (pe == 1.0) return 1.0;
  return (p_bar - pe) / (1.0 - pe);
}

/// Builds the items x categories count matrix from per-rater label vectors.
inline std::vector<std::vector<int>> rating_matrix(const std::vector<std::vector<int>>& raters,
                                                   const std::vector<int>& categories = {1, 2, 3}) {
  if (raters.empty()) throw Error(ErrorCode::InsufficientData, "no raters");
  const std::size_t items = raters.front().size();
  std::vector<std::vector<int>> m(items, std::vector<int>(categories.size(), 0));
  for (const auto& labels : raters) {
    if (labels.size() != items) throw Error(ErrorCode::LengthMismatch, "raters labeled different item counts");
    for (std::size_t i = 0; i < items; ++i) {
      const auto it = std::find(categories.begin(), categories.end(), labels[i]);
      if (it == categories.end()) throw Error(ErrorCode::OutOfRange, "label " + std::to_string(labels[i]));
      ++m[i][static_cast<std::size_t>(it - categories.begin())];
    }
  }
  return m;
}

}  // namespace attentive

#endif  // ATTENTIVE_DISCLOSURE_HPP
