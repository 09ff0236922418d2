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

// Runtime configuration shared by the CLI and the gateway. A JSON file is
// overlaid on the defaults; command-line flags are applied on top by callers.
//
//   {
//     "listen": {"address": "127.0.0.1", "port": 8080},
//     "data_dir": "data",
//     "listener": {"backend": "mock", "model": "gpt-4o", "temperature": 0.7,
//                  "timeout_ms": 10000, "history_turns": 3},
//     "sentiment": {"backend": "lexicon", "negative_below": -0.333, ...},
//     "endpoint": {"base_url": "...", "api_key_env": "OPENAI_API_KEY", "max_retries": 1},
//     "gateway": {"max_sessions": 64, "idle_timeout_ms": 300000, "workers": 4},
//     "prosody": {...}, "vad": {...}, "bop": {...}, "session": {...}
//   }
//
// Unknown keys are rejected so that typos do not silently fall back to defaults.

#ifndef ATTENTIVE_CONFIG_HPP
#define ATTENTIVE_CONFIG_HPP

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>

#include <nlohmann/json.hpp>

#include "attentive/error.hpp"
#include "attentive/http_completion.hpp"
#include "attentive/listener.hpp"
#include "attentive/session.hpp"

namespace attentive {

enum class ListenerBackend { Llm, Mock };
enum class SentimentBackendChoice { Llm, Lexicon };

inline ListenerBackend parse_listener_backend(std::string_view s) {
  if (s == "llm") return ListenerBackend::Llm;
  if (s == "mock") return ListenerBackend::Mock;
  throw Error(ErrorCode::InvalidArgument, "unknown listener backend \"" + std::string(s) + "\"");
}

inline SentimentBackendChoice parse_sentiment_backend(std::string_view s) {
  if (s == "llm") return SentimentBackendChoice::Llm;
  if (s == "lexicon") return SentimentBackendChoice::Lexicon;
  throw Error(ErrorCode::InvalidArgument, "unknown sentiment backend \"" + std::string(s) + "\"");
}

struct GatewayLimits {
  std::size_t max_sessions = 64;
  Millis idle_timeout_ms = 300000;
  std::size_t workers = 4;
};

struct AppConfig {
  std::string listen_address = "127.0.0.1";
  unsigned short port = 8080;
  std::filesystem::path data_dir = "data";
  ListenerBackend listener_backend = ListenerBackend::Mock;
  ListenerConfig listener;
  SentimentBackendChoice sentiment_backend = SentimentBackendChoice::Lexicon;
  SentimentThresholds sentiment_thresholds;
  EndpointConfig endpoint;
  GatewayLimits gateway;
  SessionConfig session;

  void validate() const {
    session.bop.validate();
    session.inventory.validate();
    if (listener.timeout_ms <= 0) throw Error(ErrorCode::InvalidArgument, "listener.timeout_ms must be > 0");
    if (gateway.max_sessions == 0) throw Error(ErrorCode::InvalidArgument, "gateway.max_sessions must be > 0");
    if (gateway.workers == 0) throw Error(ErrorCode::InvalidArgument, "gateway.workers must be > 0");
    if (gateway.idle_timeout_ms <= 0) throw Error(ErrorCode::InvalidArgument, "gateway.idle_timeout_ms must be > 0");
    if (!(sentiment_thresholds.negative_below <= sentiment_thresholds.positive_above))
      throw Error(ErrorCode::InvalidArgument, "sentiment thresholds out of order");
  }
};

namespace detail {

class Section {
 public:
  Section(const nlohmann::json& j, std::string name, std::initializer_list<const char*> keys)
      : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw Error(ErrorCode::ParseError, name_ + " must be an object");
    for (const auto& [k, v] : j_.items()) {
      bool known = false;
      for (const char* allowed : keys) known = known || k == allowed;
      if (!known) throw Error(ErrorCode::ParseError, "unknown key " + name_ + "." + k);
    }
  }

  template <class T>
  void get(const char* key, T& field) const {
    if (!j_.contains(key)) return;
    try {
      j_.at(key).get_to(field);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, name_ + "." + key + ": " + e.what());
    }
  }

  template <class T, class Parse>
  void get(const char* key, T& field, Parse parse) const {
    std::string s;
    get(key, s);
    if (j_.contains(key)) field = parse(s);
  }

  bool has(const char* key) const { return j_.contains(key); }
  const nlohmann::json& at(const char* key) const { return j_.at(key); }

 private:
  const nlohmann::json& j_;
  std::string name_;
};

}  // namespace detail

/// Overlays `j` onto `cfg`. Absent keys keep their current value.
inline void apply_config_json(AppConfig& cfg, const nlohmann::json& j) {
  using detail::Section;
  const Section root(j, "config",
                     {"listen", "data_dir", "listener", "sentiment", "endpoint", "gateway", "prosody", "vad",
                      "bop", "session", "inventory"});
  if (root.has("listen")) {
    const Section s(root.at("listen"), "listen", {"address", "port"});
    s.get("address", cfg.listen_address);
    s.get("port", cfg.port);
  }
  if (root.has("data_dir")) {
    std::string dir;
    root.get("data_dir", dir);
    cfg.data_dir = dir;
  }
  if (root.has("listener")) {
    const Section s(root.at("listener"), "listener",
                    {"backend", "model", "temperature", "timeout_ms", "history_turns"});
    s.get("backend", cfg.listener_backend, parse_listener_backend);
    s.get("model", cfg.listener.model);
    s.get("temperature", cfg.listener.temperature);
    s.get("timeout_ms", cfg.listener.timeout_ms);
    s.get("history_turns", cfg.listener.history_turns);
  }
  if (root.has("sentiment")) {
    const Section s(root.at("sentiment"), "sentiment", {"backend", "negative_below", "positive_above"});
    s.get("backend", cfg.sentiment_backend, parse_sentiment_backend);
    s.get("negative_below", cfg.sentiment_thresholds.negative_below);
    s.get("positive_above", cfg.sentiment_thresholds.positive_above);
  }
  if (root.has("endpoint")) {
    const Section s(root.at("endpoint"), "endpoint", {"base_url", "api_key_env", "max_retries", "debug"});
    s.get("base_url", cfg.endpoint.base_url);
    s.get("api_key_env", cfg.endpoint.api_key_env);
    s.get("max_retries", cfg.endpoint.max_retries);
    s.get("debug", cfg.endpoint.debug);
  }
  if (root.has("gateway")) {
    const Section s(root.at("gateway"), "gateway", {"max_sessions", "idle_timeout_ms", "workers"});
    s.get("max_sessions", cfg.gateway.max_sessions);
    s.get("idle_timeout_ms", cfg.gateway.idle_timeout_ms);
    s.get("workers", cfg.gateway.workers);
  }
  if (root.has("prosody")) {
    auto& p = cfg.session.prosody;
    const Section s(root.at("prosody"), "prosody",
                    {"f0_min", "f0_max", "window_ms", "hop_ms", "voicing_threshold", "silence_rms"});
    s.get("f0_min", p.f0_min);
    s.get("f0_max", p.f0_max);
    s.get("window_ms", p.window_ms);
    s.get("hop_ms", p.hop_ms);
    s.get("voicing_threshold", p.voicing_threshold);
    s.get("silence_rms", p.silence_rms);
  }
  if (root.has("vad")) {
    auto& v = cfg.session.bop.vad;
    const Section s(root.at("vad"), "vad",
                    {"energy_threshold", "noise_multiplier", "calibration_ms", "min_threshold", "hangover_ms"});
    if (s.has("energy_threshold")) {
      if (s.at("energy_threshold").is_null()) {
        v.energy_threshold.reset();
      } else {
        double t = 0.0;
        s.get("energy_threshold", t);
        v.energy_threshold = t;
      }
    }
    s.get("noise_multiplier", v.noise_multiplier);
    s.get("calibration_ms", v.calibration_ms);
    s.get("min_threshold", v.min_threshold);
    s.get("hangover_ms", v.hangover_ms);
  }
  if (root.has("bop")) {
    auto& b = cfg.session.bop;
    const Section s(root.at("bop"), "bop",
                    {"min_interval_ms", "pause_threshold_ms", "min_preceding_speech_ms",
                     "pitch_fluctuation_semitones", "fluctuation_window_ms", "pitch_drop_semitones",
                     "pitch_drop_window_ms", "enabled_rules"});
    s.get("min_interval_ms", b.min_interval_ms);
    s.get("pause_threshold_ms", b.pause_threshold_ms);
    s.get("min_preceding_speech_ms", b.min_preceding_speech_ms);
    s.get("pitch_fluctuation_semitones", b.pitch_fluctuation_semitones);
    s.get("fluctuation_window_ms", b.fluctuation_window_ms);
    s.get("pitch_drop_semitones", b.pitch_drop_semitones);
    s.get("pitch_drop_window_ms", b.pitch_drop_window_ms);
    if (s.has("enabled_rules")) {
      std::vector<std::string> names;
      s.get("enabled_rules", names);
      b.enabled_rules.clear();
      for (const auto& n : names) b.enabled_rules.insert(parse_bop_rule(n));
    }
  }
  if (root.has("session")) {
    auto& s_cfg = cfg.session;
    const Section s(root.at("session"), "session",
                    {"turn_silence_ms", "min_answer_ms", "finalization_backchannel"});
    s.get("turn_silence_ms", s_cfg.turn_silence_ms);
    s.get("min_answer_ms", s_cfg.min_answer_ms);
    s.get("finalization_backchannel", s_cfg.finalization_backchannel);
  }
  if (root.has("inventory")) {
    const Section s(root.at("inventory"), "inventory", {"negative", "neutral", "positive"});
    s.get("negative", cfg.session.inventory.of(SentimentClass::Negative));
    s.get("neutral", cfg.session.inventory.of(SentimentClass::Neutral));
    s.get("positive", cfg.session.inventory.of(SentimentClass::Positive));
  }
  // The VAD counts frames at the analyzer hop.
  cfg.session.bop.vad.hop_ms = cfg.session.prosody.hop_ms;
  cfg.endpoint.model = cfg.listener.model;
  cfg.endpoint.timeout_ms = cfg.listener.timeout_ms;
}

inline AppConfig load_config(const std::filesystem::path& path, AppConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  apply_config_json(base, j);
  base.validate();
  return base;
}

}  // namespace attentive

#endif  // ATTENTIVE_CONFIG_HPP
