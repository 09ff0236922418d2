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

/** @file session.hpp The nine-question protocol as a state machine.
 *
 * Session never performs I/O. Inputs go in through ingest(); work that needs
 * a backend comes back out as Actions, and its results are fed back through
 * on_sentiment() and on_response(). Conversation wires a Session to concrete
 * backends and runs every action synchronously, which is what the CLI and
 * the tests use. The gateway runs the same actions on a worker pool.
 *
 *     Asking --next_prompt--> Listening --end of turn--> Asking         (control, bc)
 *                                       \--> Responding --on_response--> Asking  (bc_al)
 *     Asking --next_prompt after Q9--> Done
 **/

#ifndef ATTENTIVE_SESSION_HPP
#define ATTENTIVE_SESSION_HPP

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "attentive/backchannel.hpp"
#include "attentive/bop.hpp"
#include "attentive/error.hpp"
#include "attentive/listener.hpp"
#include "attentive/pcm.hpp"
#include "attentive/prosody.hpp"
#include "attentive/sentiment.hpp"
#include "attentive/transcript.hpp"

namespace attentive {

struct SessionConfig {
  ProsodyConfig prosody;
  BopConfig bop;
  /// Auto end of turn: a confirmed pause this long...
  Millis turn_silence_ms = 2000;
  /// ...after at least this much speech in the turn.
  Millis min_answer_ms = 1000;
  /// Emit one backchannel when an utterance is finalized (text-only sessions
  /// have no prosody to time backchannels against).
  bool finalization_backchannel = false;
  BackchannelInventory inventory;
};

enum class Phase { Asking, Listening, Responding, Done };

constexpr std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Asking: return "asking";
    case Phase::Listening: return "listening";
    case Phase::Responding: return "responding";
    case Phase::Done: return "done";
  }
  return "";
}

struct TextChunk {
  std::string text;
  Millis time = 0;
};

struct EndOfTurn {
  Millis time = 0;
};

using SessionInput = std::variant<AudioFrame, ProsodyFrame, TextChunk, EndOfTurn>;

inline Millis input_time(const SessionInput& in) {
  return std::visit(
      [](const auto& v) -> Millis {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, AudioFrame>) return v.start_time;
        else if constexpr (std::is_same_v<T, ProsodyFrame>) return v.time;
        else return v.time;
      },
      in);
}

/// Classify `text`; report the result with on_sentiment(seq, ...).
struct ClassifySentiment {
  std::uint64_t seq = 0;
  std::string text;
};

/// Produce the listener reply; report it with on_response(...).
struct GenerateResponse {
  std::string utterance;
  std::vector<Exchange> history;
  int question_index = 1;
  Millis time = 0;
};

using Action = std::variant<ClassifySentiment, GenerateResponse>;

class Session {
 public:
  Session(TranscriptHeader header, SessionConfig cfg = {})
      : cfg_(std::move(cfg)), analyzer_(cfg_.prosody), bop_(cfg_.bop) {
    cfg_.bop.validate();
    cfg_.inventory.validate();
    transcript_.header = std::move(header);
  }

  const std::string& id() const { return transcript_.header.session_id; }
  Condition condition() const { return transcript_.header.condition; }
  Phase phase() const { return phase_; }
  int question_index() const { return index_; }
  const Transcript& transcript() const { return transcript_; }
  const SessionConfig& config() const { return cfg_; }
  /// Latest timestamp written to the transcript.
  Millis now() const { return clock_; }
  SentimentClass current_sentiment() const { return sentiment_; }
  /// Opportunities found by BOP, including those not acted on (control).
  std::size_t bop_events_detected() const { return bop_detected_; }
  std::size_t held_audio_frames() const { return held_.size(); }

  /// Asks the current question, or ends the session after the last one
  /// (returns nullopt).
  std::optional<std::string> next_prompt(Millis now) {
    require(Phase::Asking, "next_prompt");
    held_.clear();
    if (index_ > static_cast<int>(kQuestions.size())) {
      append(now, SessionEnded{});
      phase_ = Phase::Done;
      return std::nullopt;
    }
    const std::string text(question_text(index_));
    append(now, QuestionAsked{index_, text});
    phase_ = Phase::Listening;
    bop_.reset_turn();
    partial_.clear();
    utterance_start_.reset();
    turn_start_ = clock_;
    sentiment_ = SentimentClass::Neutral;
    turn_first_seq_ = next_seq_;
    return text;
  }

  std::vector<Action> ingest(const SessionInput& input) {
    std::vector<Action> actions;
    if (const auto* audio = std::get_if<AudioFrame>(&input);
        audio && (phase_ == Phase::Responding || phase_ == Phase::Asking)) {
      held_.push_back(*audio);
      return actions;
    }
    require(Phase::Listening, "ingest");
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, AudioFrame>) {
            for (const auto& f : analyzer_.push(v)) {
              if (phase_ != Phase::Listening) break;
              on_prosody(f, actions);
            }
          } else if constexpr (std::is_same_v<T, ProsodyFrame>) {
            on_prosody(v, actions);
          } else if constexpr (std::is_same_v<T, TextChunk>) {
            if (is_blank(v.text)) return;
            if (!utterance_start_) utterance_start_ = v.time;
            if (!partial_.empty()) partial_ += ' ';
            partial_ += trim(v.text);
            actions.push_back(ClassifySentiment{next_seq_++, partial_});
          } else {
            finalize(v.time, actions);
          }
        },
        input);
    return actions;
  }

  /// True when the silence/answer-length rule says the speaker is done.
  bool end_of_turn(Millis now) const {
    if (phase_ != Phase::Listening) return false;
    const auto& activity = bop_.activity;
    const auto pause = activity.pause_start();
    return pause && now - *pause >= cfg_.turn_silence_ms && activity.speech_ms() >= cfg_.min_answer_ms;
  }

  void on_sentiment(std::uint64_t seq, const SentimentResult& result) {
    if (seq < turn_first_seq_ || (applied_seq_ && seq <= *applied_seq_)) return;
    applied_seq_ = seq;
    sentiment_ = result.cls;
  }

  void on_response(const ListenerResponse& response, Millis now) {
    require(Phase::Responding, "on_response");
    append(now, response);
    history_.push_back({last_utterance_, response.text});
    ++index_;
    phase_ = Phase::Asking;
  }

  /// Ends the session early (client went away). No-op when already done.
  void abort(Millis now) {
    if (phase_ == Phase::Done) return;
    append(now, SessionEnded{});
    phase_ = Phase::Done;
  }

 private:
  static std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
  }

  void require(Phase p, const char* op) const {
    if (phase_ != p)
      throw Error(ErrorCode::WrongPhase, std::string(op) + " in phase " + std::string(to_string(phase_)));
  }

  void append(Millis t, EventBody body) {
    clock_ = std::max(clock_, t);
    if (auto* act = std::get_if<BackchannelAct>(&body)) act->time = clock_;
    transcript_.events.push_back({clock_, std::move(body)});
  }

  void on_prosody(const ProsodyFrame& f, std::vector<Action>& actions) {
    const auto event = bop_step(bop_, f, cfg_.bop);
    if (bop_.activity.in_speech() && !speech_start_) speech_start_ = f.time;
    if (event) {
      ++bop_detected_;
      if (condition() != Condition::Control)
        append(event->time, select_backchannel(sentiment_, selector_, event->time, cfg_.inventory));
    }
    const Millis now = f.time + cfg_.bop.vad.hop_ms;
    if (end_of_turn(now)) finalize(now, actions);
  }

  void finalize(Millis now, std::vector<Action>& actions) {
    const std::string text = trim(partial_);
    const Millis start = std::min(utterance_start_.value_or(now), speech_start_.value_or(now));
    speech_start_.reset();

    if (cfg_.finalization_backchannel && condition() != Condition::Control && !text.empty()) {
      const Millis at = std::max(now, clock_);
      if (!bop_.last_event_time || at - *bop_.last_event_time >= cfg_.bop.min_interval_ms) {
        bop_.last_event_time = at;
        append(at, select_backchannel(sentiment_, selector_, at, cfg_.inventory));
      }
    }
    append(now, UserUtterance{text, std::max(start, turn_start_), std::max(now, clock_)});
    last_utterance_ = text;

    if (condition() == Condition::BcAl) {
      phase_ = Phase::Responding;
      actions.push_back(GenerateResponse{text, history_, index_, clock_});
    } else {
      ++index_;
      phase_ = Phase::Asking;
    }
  }

  SessionConfig cfg_;
  Transcript transcript_;
  Phase phase_ = Phase::Asking;
  int index_ = 1;
  Millis clock_ = 0;
  Millis turn_start_ = 0;

  ProsodyAnalyzer analyzer_;
  BopState bop_;
  SelectorState selector_;
  std::size_t bop_detected_ = 0;
  std::vector<AudioFrame> held_;

  std::string partial_;
  std::optional<Millis> utterance_start_;
  std::optional<Millis> speech_start_;
  std::string last_utterance_;
  std::vector<Exchange> history_;

  SentimentClass sentiment_ = SentimentClass::Neutral;
  std::uint64_t next_seq_ = 0;
  std::uint64_t turn_first_seq_ = 0;
  std::optional<std::uint64_t> applied_seq_;
};

// ---------------------------------------------------------------------------
// Synchronous runner
// ---------------------------------------------------------------------------

/// Drives a Session with blocking backends. Every call returns the events it
/// appended to the transcript, in transcript order.
class Conversation {
 public:
  using Sink = std::function<void(const TranscriptEvent&)>;

  /// `listener` may be null for conditions without responses.
  Conversation(Session& session, SentimentBackend& sentiment, const ActiveListener* listener,
               Sink sink = {}, SentimentThresholds thresholds = {})
      : session_(session),
        sentiment_(sentiment),
        listener_(listener),
        sink_(std::move(sink)),
        thresholds_(thresholds) {}

  std::vector<TranscriptEvent> start(Millis now = 0) {
    const auto mark = session_.transcript().events.size();
    if (session_.phase() == Phase::Asking) session_.next_prompt(now);
    return flush(mark);
  }

  std::vector<TranscriptEvent> feed(const SessionInput& input) {
    const auto mark = session_.transcript().events.size();
    if (session_.phase() == Phase::Done) return {};
    run(session_.ingest(input));
    if (session_.phase() == Phase::Asking) session_.next_prompt(std::max(input_time(input), session_.now()));
    return flush(mark);
  }

  std::vector<TranscriptEvent> finish(Millis now) {
    const auto mark = session_.transcript().events.size();
    session_.abort(std::max(now, session_.now()));
    return flush(mark);
  }

  Session& session() { return session_; }

 private:
  void run(std::vector<Action> actions) {
    for (auto& action : actions) {
      if (auto* c = std::get_if<ClassifySentiment>(&action)) {
        SentimentResult r;
        try {
          r = classify_sentiment(c->text, sentiment_, thresholds_);
        } catch (const Error&) {
          r = SentimentResult{};  // unavailable or malformed: stay neutral
        }
        session_.on_sentiment(c->seq, r);
      } else if (auto* g = std::get_if<GenerateResponse>(&action)) {
        ListenerResponse resp;
        if (listener_) {
          resp = listener_->respond(g->utterance, g->history, g->question_index);
        } else {
          const ScriptedFallbacks fallbacks;
          const auto& text = fallbacks.at(g->question_index);
          resp = {text, count_words(text), ResponseSource::ScriptedFallback, g->question_index};
        }
        session_.on_response(resp, g->time);
      }
    }
  }

  std::vector<TranscriptEvent> flush(std::size_t mark) {
    const auto& events = session_.transcript().events;
    std::vector<TranscriptEvent> out(events.begin() + static_cast<std::ptrdiff_t>(mark), events.end());
    if (sink_)
      for (const auto& e : out) sink_(e);
    return out;
  }

  Session& session_;
  SentimentBackend& sentiment_;
  const ActiveListener* listener_;
  Sink sink_;
  SentimentThresholds thresholds_;
};

// ---------------------------------------------------------------------------
// Recorded input streams (JSON Lines)
// ---------------------------------------------------------------------------
//
//   {"type":"text","t":1200,"chunk":"I love hiking"}
//   {"type":"prosody","t":1210,"f0":182.5,"energy":0.31,"voiced":true}
//   {"type":"audio","t":1300,"sample_rate":16000,"pcm16_b64":"..."}
//   {"type":"end_of_turn","t":5000}

inline nlohmann::ordered_json to_json(const SessionInput& in) {
  nlohmann::ordered_json j;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, AudioFrame>) {
          j["type"] = "audio";
          j["t"] = v.start_time;
          j["sample_rate"] = v.sample_rate;
          j["pcm16_b64"] = encode_pcm16_b64(v.samples);
        } else if constexpr (std::is_same_v<T, ProsodyFrame>) {
          const auto frame = to_json(v);
          j["type"] = "prosody";
          for (const auto& [k, val] : frame.items()) j[k] = val;
        } else if constexpr (std::is_same_v<T, TextChunk>) {
          j["type"] = "text";
          j["t"] = v.time;
          j["chunk"] = v.text;
        } else {
          j["type"] = "end_of_turn";
          j["t"] = v.time;
        }
      },
      in);
  return j;
}

inline SessionInput input_from_json(const nlohmann::json& j, std::optional<std::size_t> line = std::nullopt) {
  return detail::with_line(line, [&]() -> SessionInput {
    const auto type = j.at("type").get<std::string>();
    const Millis t = j.at("t").get<Millis>();
    if (type == "text") return TextChunk{j.at("chunk").get<std::string>(), t};
    if (type == "end_of_turn") return EndOfTurn{t};
    if (type == "audio")
      return AudioFrame{decode_pcm16_b64(j.at("pcm16_b64").get<std::string>()),
                        j.value("sample_rate", 16000), t};
    if (type == "prosody") {
      ProsodyFrame f;
      f.time = t;
      if (!j.at("f0").is_null()) f.f0_hz = j.at("f0").get<double>();
      f.energy = j.at("energy").get<double>();
      f.voiced = j.at("voiced").get<bool>();
      return f;
    }
    throw Error(ErrorCode::ParseError, "unknown input type \"" + type + "\"", line);
  });
}

inline std::vector<SessionInput> read_inputs(std::istream& in) {
  std::vector<SessionInput> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, e.what(), line_no);
    }
    out.push_back(input_from_json(j, line_no));
  }
  return out;
}

/// Runs a whole recorded input stream through a fresh conversation and
/// closes the session at the end of the stream.
inline void replay_inputs(Conversation& conv, const std::vector<SessionInput>& inputs) {
  conv.start(inputs.empty() ? 0 : input_time(inputs.front()));
  Millis last = 0;
  for (const auto& in : inputs) {
    if (conv.session().phase() == Phase::Done) break;
    conv.feed(in);
    last = std::max(last, input_time(in));
  }
  conv.finish(last);
}

}  // namespace attentive

#endif  // ATTENTIVE_SESSION_HPP
