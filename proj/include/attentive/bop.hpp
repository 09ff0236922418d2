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

/** @file bop.hpp Rule-based backchannel opportunity prediction.
 *
 * Decides *when* a listener may backchannel from a ProsodyFrame stream.
 * The default rule, PP_PAUSE, fires on a long pause that follows enough
 * speech whose pitch moved enough:
 *
 *   - the pause has lasted pause_threshold_ms (800 ms),
 *   - the Speech segment right before it lasted min_preceding_speech_ms (1.5 s),
 *   - max/min F0 over the last fluctuation_window_ms of voiced frames in that
 *     segment spans pitch_fluctuation_semitones (4 st),
 *   - and min_interval_ms (3.0 s) has passed since the previous event.
 *
 * Each pause yields at most one event. If the interval condition blocks the
 * 800 ms instant, the event fires on the first later frame of the same pause
 * where it clears.
 *
 * PITCH_DROP (off by default) fires when a pause is confirmed right after a
 * final F0 fall of pitch_drop_semitones.
 **/

#ifndef ATTENTIVE_BOP_HPP
#define ATTENTIVE_BOP_HPP

#include <algorithm>
#include <deque>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "attentive/error.hpp"
#include "attentive/prosody.hpp"
#include "attentive/trace.hpp"

namespace attentive {

enum class BopRule { PpPause, PitchDrop };

constexpr std::string_view to_string(BopRule r) {
  return r == BopRule::PpPause ? "PP_PAUSE" : "PITCH_DROP";
}

inline BopRule parse_bop_rule(std::string_view s) {
  if (s == "PP_PAUSE") return BopRule::PpPause;
  if (s == "PITCH_DROP") return BopRule::PitchDrop;
  throw Error(ErrorCode::InvalidArgument, "unknown rule " + std::string(s));
}

struct BopConfig {
  Millis min_interval_ms = 3000;
  Millis pause_threshold_ms = 800;
  Millis min_preceding_speech_ms = 1500;
  double pitch_fluctuation_semitones = 4.0;
  Millis fluctuation_window_ms = 1500;
  std::set<BopRule> enabled_rules{BopRule::PpPause};
  double pitch_drop_semitones = 3.0;
  Millis pitch_drop_window_ms = 400;
  VadConfig vad;

  void validate() const {
    if (min_interval_ms <= 0 || pause_threshold_ms <= 0 || min_preceding_speech_ms <= 0 ||
        fluctuation_window_ms <= 0 || pitch_drop_window_ms <= 0)
      throw Error(ErrorCode::InvalidArgument, "BOP durations must be positive");
    if (pause_threshold_ms >= min_interval_ms)
      throw Error(ErrorCode::InvalidArgument, "pause_threshold_ms must be below min_interval_ms");
  }
};

struct BopEvent {
  Millis time = 0;
  BopRule rule = BopRule::PpPause;
  Millis preceding_speech_ms = 0;
  Millis pause_ms = 0;

  bool operator==(const BopEvent&) const = default;
};

/// Per-session BOP state. last_event_time survives reset_turn().
struct BopState {
  ActivityTracker activity;
  std::optional<Millis> last_event_time;
  std::deque<std::pair<Millis, double>> voiced;  // (time, f0) within current speech

  struct Pause {
    Millis start = 0;
    Millis preceding_speech_ms = 0;
    double fluctuation_st = 0.0;
    double final_fall_st = 0.0;
    bool fired = false;
    bool drop_checked = false;
  };
  std::optional<Pause> pause;  // set only for pauses that follow speech

  BopState() = default;
  explicit BopState(const BopConfig& cfg) : activity(cfg.vad) {}

  void reset_turn() {
    activity.reset_segments();
    voiced.clear();
    pause.reset();
  }
};

namespace detail {

inline double f0_range_st(const std::deque<std::pair<Millis, double>>& voiced, Millis from,
                          Millis to) {
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const auto& [t, f0] : voiced) {
    if (t < from || t >= to) continue;
    if (!any) {
      lo = hi = f0;
      any = true;
    }
    lo = std::min(lo, f0);
    hi = std::max(hi, f0);
  }
  return any ? semitones(lo, hi) : 0.0;
}

inline double final_fall_st(const std::deque<std::pair<Millis, double>>& voiced, Millis from,
                            Millis to) {
  double peak = 0.0, last = 0.0;
  bool any = false;
  for (const auto& [t, f0] : voiced) {
    if (t < from || t >= to) continue;
    peak = any ? std::max(peak, f0) : f0;
    last = f0;
    any = true;
  }
  return any ? semitones(last, peak) : 0.0;
}

}  // namespace detail

/// Advances the state by one frame; returns the event that fires on it, if any.
inline std::optional<BopEvent> bop_step(BopState& state, const ProsodyFrame& frame,
                                        const BopConfig& cfg) {
  const auto closed = state.activity.push(frame);
  for (const auto& seg : closed) {
    if (seg.kind == ActivityKind::Speech) {
      BopState::Pause p;
      p.start = seg.end;
      p.preceding_speech_ms = seg.duration();
      p.fluctuation_st =
          detail::f0_range_st(state.voiced, seg.end - cfg.fluctuation_window_ms, seg.end);
      p.final_fall_st =
          detail::final_fall_st(state.voiced, seg.end - cfg.pitch_drop_window_ms, seg.end);
      state.pause = p;
      state.voiced.clear();
    } else {
      state.pause.reset();
    }
  }

  if (state.activity.in_speech()) {
    if (frame.voiced && frame.f0_hz) state.voiced.emplace_back(frame.time, *frame.f0_hz);
    const Millis keep = std::max(cfg.fluctuation_window_ms, cfg.pitch_drop_window_ms) +
                        cfg.vad.hangover_ms + cfg.vad.hop_ms;
    while (!state.voiced.empty() && state.voiced.front().first < frame.time - keep)
      state.voiced.pop_front();
  }

  if (!state.activity.in_confirmed_pause() || !state.pause || state.pause->fired)
    return std::nullopt;

  auto& p = *state.pause;
  const Millis pause_ms = frame.time - p.start;
  const bool spaced =
      !state.last_event_time || frame.time - *state.last_event_time >= cfg.min_interval_ms;
  const bool enough_speech = p.preceding_speech_ms >= cfg.min_preceding_speech_ms;

  std::optional<BopRule> rule;
  if (cfg.enabled_rules.count(BopRule::PpPause) && spaced && enough_speech &&
      pause_ms >= cfg.pause_threshold_ms &&
      p.fluctuation_st >= cfg.pitch_fluctuation_semitones) {
    rule = BopRule::PpPause;
  } else if (cfg.enabled_rules.count(BopRule::PitchDrop) && !p.drop_checked && spaced &&
             enough_speech && p.final_fall_st >= cfg.pitch_drop_semitones) {
    rule = BopRule::PitchDrop;
  }
  p.drop_checked = true;
  if (!rule) return std::nullopt;

  p.fired = true;
  state.last_event_time = frame.time;
  return BopEvent{frame.time, *rule, p.preceding_speech_ms, pause_ms};
}

inline std::vector<BopEvent> run_bop(const std::vector<ProsodyFrame>& frames,
                                     const BopConfig& cfg = {}) {
  cfg.validate();
  BopState state(cfg);
  std::vector<BopEvent> events;
  for (const auto& f : frames)
    if (auto e = bop_step(state, f, cfg)) events.push_back(*e);
  return events;
}

/// Folds bop_step over a prosody trace file. Errors carry the line number.
inline std::vector<BopEvent> replay_trace(std::istream& trace, const BopConfig& cfg = {}) {
  cfg.validate();
  BopState state(cfg);
  std::vector<BopEvent> events;
  for_each_trace_frame(trace, [&](const ProsodyFrame& f, std::size_t line) {
    try {
      if (auto e = bop_step(state, f, cfg)) events.push_back(*e);
    } catch (const Error& err) {
      if (err.line()) throw;
      throw Error(err.code(), err.what(), line);
    }
  });
  return events;
}

inline nlohmann::ordered_json to_json(const BopEvent& e) {
  nlohmann::ordered_json j;
  j["t"] = e.time;
  j["rule"] = std::string(to_string(e.rule));
  j["speech_ms"] = e.preceding_speech_ms;
  j["pause_ms"] = e.pause_ms;
  return j;
}

}  // namespace attentive

#endif  // ATTENTIVE_BOP_HPP
