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

/** @file transcript.hpp Session transcripts and their JSON Lines form.
 *
 * The file starts with a header line
 *
 *     {"schema":1,"session_id":"...","condition":"bc_al","created_at":"..."}
 *
 * followed by one event object per line, each with "t" (ms) and "type".
 * TranscriptWriter appends and flushes one line per event, so a file read
 * during a live session is always a prefix of the final file.
 **/

#ifndef ATTENTIVE_TRANSCRIPT_HPP
#define ATTENTIVE_TRANSCRIPT_HPP

#include <array>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "attentive/backchannel.hpp"
#include "attentive/error.hpp"
#include "attentive/listener.hpp"
#include "attentive/prosody.hpp"

namespace attentive {

inline constexpr int kTranscriptSchema = 1;

enum class Condition { Control, BC, BcAl };

constexpr std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::Control: return "control";
    case Condition::BC: return "bc";
    case Condition::BcAl: return "bc_al";
  }
  return "";
}

inline std::optional<Condition> try_parse_condition(std::string_view s) {
  if (s == "control") return Condition::Control;
  if (s == "bc") return Condition::BC;
  if (s == "bc_al") return Condition::BcAl;
  return std::nullopt;
}

inline Condition parse_condition(std::string_view s) {
  if (auto c = try_parse_condition(s)) return *c;
  throw Error(ErrorCode::InvalidArgument, "unknown condition \"" + std::string(s) + "\"");
}

/// The nine self-disclosure questions, asked in this order.
inline constexpr std::array<std::string_view, 9> kQuestions{
    "Would you like to be famous? In what way?",
    "What would constitute a \"perfect\" day for you?",
    "Given the choice of anyone in the world, whom would you want as a dinner guest?",
    "If a crystal ball could tell you the truth about yourself, your life, the future, or "
    "anything else, what would you want to know?",
    "What is your most terrible memory?",
    "What is the greatest accomplishment of your life?",
    "If you were going to become a close friend with your partner, please share what would be "
    "important for them to know.",
    "Imagine your house, containing everything you own, catches fire. After saving your loved "
    "ones and pets, you have time to safely make a final dash to save any one item. What would "
    "it be? Why?",
    "Of all the people in your family, whose death would you find most disturbing? Why?",
};

inline std::string_view question_text(int index) {
  if (index < 1 || index > static_cast<int>(kQuestions.size()))
    throw Error(ErrorCode::OutOfRange, "question index " + std::to_string(index));
  return kQuestions[static_cast<std::size_t>(index - 1)];
}

// ---------------------------------------------------------------------------
// Events
// ---------------------------------------------------------------------------

struct QuestionAsked {
  int index = 1;
  std::string text;
  bool operator==(const QuestionAsked&) const = default;
};

struct UserUtterance {
  std::string text;
  Millis start = 0;
  Millis end = 0;
  bool operator==(const UserUtterance&) const = default;
};

struct SessionEnded {
  bool operator==(const SessionEnded&) const = default;
};

using EventBody = std::variant<QuestionAsked, UserUtterance, BackchannelAct, ListenerResponse, SessionEnded>;

struct TranscriptEvent {
  Millis t = 0;
  EventBody body;

  bool operator==(const TranscriptEvent&) const = default;

  template <class T>
  bool is() const {
    return std::holds_alternative<T>(body);
  }
  template <class T>
  const T& as() const {
    return std::get<T>(body);
  }
};

inline std::string_view event_type(const TranscriptEvent& e) {
  switch (e.body.index()) {
    case 0: return "question";
    case 1: return "utterance";
    case 2: return "backchannel";
    case 3: return "response";
    default: return "session_ended";
  }
}

struct ListenerSettings {
  std::string model;
  double temperature = 0.7;
  bool operator==(const ListenerSettings&) const = default;
};

struct TranscriptHeader {
  int schema = kTranscriptSchema;
  std::string session_id;
  Condition condition = Condition::Control;
  std::string created_at;
  std::optional<ListenerSettings> listener;

  bool operator==(const TranscriptHeader&) const = default;
};

struct Transcript {
  TranscriptHeader header;
  std::vector<TranscriptEvent> events;

  bool operator==(const Transcript&) const = default;

  template <class T>
  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& e : events) n += e.is<T>();
    return n;
  }
};

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const TranscriptHeader& h) {
  nlohmann::ordered_json j;
  j["schema"] = h.schema;
  j["session_id"] = h.session_id;
  j["condition"] = std::string(to_string(h.condition));
  j["created_at"] = h.created_at;
  if (h.listener) {
    j["listener"]["model"] = h.listener->model;
    j["listener"]["temperature"] = h.listener->temperature;
  }
  return j;
}

inline nlohmann::ordered_json to_json(const TranscriptEvent& e) {
  nlohmann::ordered_json j;
  j["t"] = e.t;
  j["type"] = std::string(event_type(e));
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, QuestionAsked>) {
          j["index"] = b.index;
          j["text"] = b.text;
        } else if constexpr (std::is_same_v<T, UserUtterance>) {
          j["text"] = b.text;
          j["start"] = b.start;
          j["end"] = b.end;
        } else if constexpr (std::is_same_v<T, BackchannelAct>) {
          j["verbal"] = b.verbal;
          j["gesture"] = std::string(to_string(b.gesture));
          j["sentiment"] = std::string(to_string(b.sentiment));
        } else if constexpr (std::is_same_v<T, ListenerResponse>) {
          j["text"] = b.text;
          j["word_count"] = b.word_count;
          j["source"] = std::string(to_string(b.source));
          j["question_index"] = b.question_index;
        }
      },
      e.body);
  return j;
}

namespace detail {

template <class F>
auto with_line(std::optional<std::size_t> line, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what(), line);
  } catch (const Error& e) {
    if (e.line() || !line) throw;
    throw Error(e.code() == ErrorCode::InvalidArgument ? ErrorCode::ParseError : e.code(), e.what(),
                line);
  }
}

}  // namespace detail

inline TranscriptHeader header_from_json(const nlohmann::json& j,
                                         std::optional<std::size_t> line = std::nullopt) {
  return detail::with_line(line, [&] {
    TranscriptHeader h;
    h.schema = j.at("schema").get<int>();
    if (h.schema != kTranscriptSchema)
      throw Error(ErrorCode::SchemaVersionMismatch,
                  "schema " + std::to_string(h.schema) + ", expected " +
                      std::to_string(kTranscriptSchema),
                  line);
    h.session_id = j.at("session_id").get<std::string>();
    h.condition = parse_condition(j.at("condition").get<std::string>());
    h.created_at = j.at("created_at").get<std::string>();
    if (j.contains("listener")) {
      const auto& l = j.at("listener");
      h.listener = ListenerSettings{l.at("model").get<std::string>(), l.at("temperature").get<double>()};
    }
    return h;
  });
}

inline TranscriptEvent event_from_json(const nlohmann::json& j,
                                       std::optional<std::size_t> line = std::nullopt) {
  return detail::with_line(line, [&] {
    TranscriptEvent e;
    e.t = j.at("t").get<Millis>();
    const auto type = j.at("type").get<std::string>();
    if (type == "question") {
      e.body = QuestionAsked{j.at("index").get<int>(), j.at("text").get<std::string>()};
    } else if (type == "utterance") {
      e.body = UserUtterance{j.at("text").get<std::string>(), j.at("start").get<Millis>(),
                             j.at("end").get<Millis>()};
    } else if (type == "backchannel") {
      const auto cls = parse_sentiment_class(j.at("sentiment").get<std::string>());
      e.body = BackchannelAct{j.at("verbal").get<std::string>(),
                              parse_gesture(j.at("gesture").get<std::string>()), cls, e.t};
    } else if (type == "response") {
      e.body = ListenerResponse{j.at("text").get<std::string>(), j.at("word_count").get<std::size_t>(),
                                parse_response_source(j.at("source").get<std::string>()),
                                j.at("question_index").get<int>()};
    } else if (type == "session_ended") {
      e.body = SessionEnded{};
    } else {
      throw Error(ErrorCode::ParseError, "unknown event type \"" + type + "\"", line);
    }
    return e;
  });
}

inline std::string to_line(const TranscriptHeader& h) { return to_json(h).dump(); }
inline std::string to_line(const TranscriptEvent& e) { return to_json(e).dump(); }

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline void write_transcript(std::ostream& out, const Transcript& t) {
  out << to_line(t.header) << '\n';
  for (const auto& e : t.events) out << to_line(e) << '\n';
}

inline std::string transcript_to_string(const Transcript& t) {
  std::ostringstream out;
  write_transcript(out, t);
  return out.str();
}

inline Transcript read_transcript(std::istream& in) {
  Transcript t;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, e.what(), line_no);
    }
    if (!have_header) {
      t.header = header_from_json(j, line_no);
      have_header = true;
    } else {
      t.events.push_back(event_from_json(j, line_no));
    }
  }
  if (!have_header) throw Error(ErrorCode::ParseError, "missing header line");
  return t;
}

inline void persist(const Transcript& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  write_transcript(out, t);
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write to " + path.string() + " failed");
}

inline Transcript load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_transcript(in);
}

/// Appends events to a transcript file as they happen.
class TranscriptWriter {
 public:
  TranscriptWriter(const std::filesystem::path& path, const TranscriptHeader& header)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    write(to_line(header));
  }

  void append(const TranscriptEvent& e) { write(to_line(e)); }

  const std::filesystem::path& path() const { return path_; }

 private:
  void write(const std::string& line) {
    out_ << line << '\n';
    out_.flush();
    if (!out_) throw Error(ErrorCode::IoError, "write to " + path_.string() + " failed");
  }

  std::filesystem::path path_;
  std::ofstream out_;
};

// ---------------------------------------------------------------------------
// Summary
// ---------------------------------------------------------------------------

struct TranscriptStats {
  std::size_t questions = 0;
  std::size_t utterances = 0;
  std::size_t backchannels = 0;
  std::size_t responses = 0;
  std::size_t fallback_responses = 0;
  /// Mean word count of listener responses; 0 when there are none.
  double mean_response_words = 0.0;
  /// Smallest gap between consecutive backchannels, if there are two or more.
  std::optional<Millis> min_backchannel_gap_ms;
};

inline TranscriptStats stats(const Transcript& t) {
  TranscriptStats s;
  std::size_t words = 0;
  std::optional<Millis> last_bc;
  for (const auto& e : t.events) {
    if (e.is<QuestionAsked>()) ++s.questions;
    if (e.is<UserUtterance>()) ++s.utterances;
    if (e.is<BackchannelAct>()) {
      ++s.backchannels;
      if (last_bc) {
        const Millis gap = e.t - *last_bc;
        s.min_backchannel_gap_ms = s.min_backchannel_gap_ms ? std::min(*s.min_backchannel_gap_ms, gap) : gap;
      }
      last_bc = e.t;
    }
    if (e.is<ListenerResponse>()) {
      const auto& r = e.as<ListenerResponse>();
      ++s.responses;
      words += r.word_count;
      if (r.source == ResponseSource::ScriptedFallback) ++s.fallback_responses;
    }
  }
  if (s.responses) s.mean_response_words = static_cast<double>(words) / static_cast<double>(s.responses);
  return s;
}

}  // namespace attentive

#endif  // ATTENTIVE_TRANSCRIPT_HPP
