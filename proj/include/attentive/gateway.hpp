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

// HTTP + WebSocket front end.
//
//   POST /sessions                  {"condition":"bc_al"} -> 201 {"session_id","ws_url"}
//   GET  /sessions/{id}/stream      WebSocket upgrade
//   GET  /sessions/{id}/transcript  transcript JSON Lines
//   POST /score                     {"session_id"|"transcript", "backend"} -> scores
//   GET  /health
//
// Client frames: {"type":"audio","pcm16_b64":...} (16 kHz mono, <= 100 ms),
// {"type":"text","chunk":...}, {"type":"end_of_turn"}. Server frames are
// transcript events with "session_id" added, plus "state" and "error"
// notices that are not written to the transcript.
//
// Each session runs on its own strand. Backend calls that may block run on a
// worker pool and post their results back to the strand. Session time is
// milliseconds since creation on the wall clock until the first audio frame,
// then the audio sample clock anchored at that frame's arrival.

#ifndef ATTENTIVE_GATEWAY_HPP
#define ATTENTIVE_GATEWAY_HPP

#include <atomic>
#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

#include "attentive/backends.hpp"
#include "attentive/config.hpp"
#include "attentive/disclosure.hpp"
#include "attentive/pcm.hpp"
#include "attentive/session.hpp"
#include "attentive/transcript.hpp"

namespace attentive {

inline constexpr int kWireSampleRate = 16000;
inline constexpr std::size_t kMaxWireFrameSamples = kWireSampleRate / 10;

// ---------------------------------------------------------------------------
// Wire messages
// ---------------------------------------------------------------------------

struct ClientAudio {
  std::vector<float> samples;
};
struct ClientText {
  std::string chunk;
};
struct ClientEndOfTurn {};
using ClientMessage = std::variant<ClientAudio, ClientText, ClientEndOfTurn>;

/// Throws ParseError on anything that is not one of the three client frames.
inline ClientMessage parse_client_message(std::string_view text) {
  const auto j = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::ParseError, "not a JSON object");
  if (!j.contains("type") || !j["type"].is_string()) throw Error(ErrorCode::ParseError, "missing type");
  const auto type = j["type"].get<std::string>();
  if (type == "audio") {
    if (!j.contains("pcm16_b64") || !j["pcm16_b64"].is_string())
      throw Error(ErrorCode::ParseError, "audio without pcm16_b64");
    auto samples = decode_pcm16_b64(j["pcm16_b64"].get<std::string>());
    if (samples.size() > kMaxWireFrameSamples) throw Error(ErrorCode::ParseError, "audio frame longer than 100 ms");
    return ClientAudio{std::move(samples)};
  }
  if (type == "text") {
    if (!j.contains("chunk") || !j["chunk"].is_string()) throw Error(ErrorCode::ParseError, "text without chunk");
    return ClientText{j["chunk"].get<std::string>()};
  }
  if (type == "end_of_turn") return ClientEndOfTurn{};
  throw Error(ErrorCode::ParseError, "unknown message type \"" + type + "\"");
}

inline nlohmann::ordered_json wire_event(const std::string& session_id, const TranscriptEvent& e) {
  const auto body = to_json(e);
  nlohmann::ordered_json j;
  j["type"] = body["type"];
  j["session_id"] = session_id;
  for (const auto& [k, v] : body.items())
    if (k != "type") j[k] = v;
  return j;
}

inline nlohmann::ordered_json state_notice(const std::string& session_id, Millis t, Phase phase, int question_index) {
  nlohmann::ordered_json j;
  j["type"] = "state";
  j["session_id"] = session_id;
  j["t"] = t;
  j["phase"] = std::string(to_string(phase));
  j["question_index"] = question_index;
  return j;
}

inline nlohmann::ordered_json error_notice(const std::string& session_id, Millis t, ErrorCode code,
                                           const std::string& message) {
  nlohmann::ordered_json j;
  j["type"] = "error";
  j["session_id"] = session_id;
  j["t"] = t;
  j["code"] = std::string(to_string(code));
  j["message"] = message;
  return j;
}

// ---------------------------------------------------------------------------
// Gateway
// ---------------------------------------------------------------------------

struct GatewayBackends {
  std::shared_ptr<CompletionClient> listener;
  std::function<std::unique_ptr<SentimentBackend>()> sentiment;
  /// Used by POST /score with backend llm; null builds an HTTP client.
  std::shared_ptr<CompletionClient> scorer;
};

inline GatewayBackends make_gateway_backends(const AppConfig& cfg) {
  GatewayBackends b;
  b.listener = make_listener_client(cfg);
  b.sentiment = [cfg] { return make_sentiment_backend(cfg); };
  return b;
}

class Gateway;

namespace gateway_detail {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

class WsConnection;

/// One live session: the state machine, its transcript file and at most one
/// attached stream. All members are touched only on `strand_` except the
/// atomics.
class LiveSession : public std::enable_shared_from_this<LiveSession> {
 public:
  LiveSession(net::io_context& ioc, net::thread_pool& pool, const AppConfig& cfg, TranscriptHeader header,
              std::filesystem::path path, std::shared_ptr<CompletionClient> listener_client,
              std::unique_ptr<SentimentBackend> sentiment, std::function<void(const std::string&)> on_done)
      : strand_(net::make_strand(ioc)),
        pool_(pool),
        idle_timer_(strand_),
        idle_timeout_(cfg.gateway.idle_timeout_ms),
        thresholds_(cfg.sentiment_thresholds),
        session_(header, cfg.session),
        writer_(path, header),
        path_(std::move(path)),
        sentiment_(std::move(sentiment)),
        on_done_(std::move(on_done)),
        created_(std::chrono::steady_clock::now()) {
    if (header.condition == Condition::BcAl) listener_.emplace(std::move(listener_client), cfg.listener);
  }

  const std::string& id() const { return session_.id(); }
  bool done() const { return done_; }
  bool attached() const { return attached_; }
  const std::filesystem::path& path() const { return path_; }

  /// Claims the single stream slot.
  bool try_attach() {
    bool expected = false;
    return attached_.compare_exchange_strong(expected, true);
  }

  void start_idle_timer() {
    net::dispatch(strand_, [self = shared_from_this()] { self->arm_idle(); });
  }

  void attach(std::shared_ptr<WsConnection> ws);
  void detach(const WsConnection* ws);
  void deliver(ClientMessage msg);
  void shutdown();

  /// Reads the transcript file between appends and hands the bytes to `done`.
  void read_transcript(std::function<void(std::optional<std::string>)> done) {
    net::dispatch(strand_, [self = shared_from_this(), done = std::move(done)] {
      std::ifstream in(self->path_, std::ios::binary);
      if (!in) return done(std::nullopt);
      std::ostringstream s;
      s << in.rdbuf();
      done(s.str());
    });
  }

 private:
  Millis wall_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - created_).count();
  }

  Millis now_ms() const {
    Millis t = audio_base_ ? *audio_base_ + static_cast<Millis>(audio_samples_ * 1000 / kWireSampleRate) : wall_ms();
    return std::max(t, session_.now());
  }

  void arm_idle() {
    if (done_) return;
    idle_timer_.expires_after(std::chrono::milliseconds(idle_timeout_));
    idle_timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->done_) return;
      self->on_idle();
    });
  }

  void on_idle();

  template <class F>
  void step(F&& f) {
    const auto mark = session_.transcript().events.size();
    const Phase before = session_.phase();
    const int before_q = session_.question_index();
    try {
      f();
    } catch (...) {
      publish(mark, before, before_q);
      throw;
    }
    publish(mark, before, before_q);
  }

  void publish(std::size_t mark, Phase before, int before_q);
  void send(const nlohmann::ordered_json& j);
  void run_actions(std::vector<Action> actions);
  void advance();

  net::strand<net::io_context::executor_type> strand_;
  net::thread_pool& pool_;
  net::steady_timer idle_timer_;
  Millis idle_timeout_;
  SentimentThresholds thresholds_;
  Session session_;
  TranscriptWriter writer_;
  std::filesystem::path path_;
  std::unique_ptr<SentimentBackend> sentiment_;
  std::optional<ActiveListener> listener_;
  std::function<void(const std::string&)> on_done_;
  std::chrono::steady_clock::time_point created_;

  std::shared_ptr<WsConnection> ws_;
  std::atomic<bool> attached_{false};
  std::atomic<bool> done_{false};
  bool started_ = false;
  websocket::close_reason end_reason_{websocket::close_code::normal, "session ended"};
  std::optional<Millis> audio_base_;
  std::uint64_t audio_samples_ = 0;
};

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket&& socket, std::shared_ptr<LiveSession> session)
      : ws_(std::move(socket)), session_(std::move(session)) {}

  void run(http::request<http::string_body> req) {
    beast::get_lowest_layer(ws_).expires_never();
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(1 << 20);
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return self->session_->detach(self.get());
      self->session_->attach(self);
      self->read();
    });
  }

  /// Thread-safe; frames go out in call order.
  void send(std::string text) {
    net::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text)]() mutable {
      if (self->closing_) return;
      self->queue_.push_back(std::move(text));
      if (self->queue_.size() == 1) self->write();
    });
  }

  /// Closes after the frames already queued.
  void close(websocket::close_reason reason) {
    net::post(ws_.get_executor(), [self = shared_from_this(), reason] {
      if (self->closing_) return;
      self->closing_ = true;
      self->close_reason_ = reason;
      if (self->queue_.empty()) self->do_close();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->session_->detach(self.get());
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      if (self->closing_) return self->read();
      try {
        if (!self->ws_.got_text()) throw Error(ErrorCode::ParseError, "binary frames are not accepted");
        self->session_->deliver(parse_client_message(text));
      } catch (const Error& e) {
        self->closing_ = true;
        self->close_reason_ = websocket::close_reason(websocket::close_code::protocol_error, e.what());
        if (self->queue_.empty()) self->do_close();
      }
      self->read();
    });
  }

  void write() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->queue_.clear();
        return;
      }
      self->queue_.pop_front();
      if (!self->queue_.empty()) return self->write();
      if (self->closing_) self->do_close();
    });
  }

  void do_close() {
    if (close_started_) return;
    close_started_ = true;
    // Reason phrases are capped at 123 bytes by the protocol.
    if (close_reason_.reason.size() > 123) close_reason_.reason.resize(123);
    ws_.async_close(close_reason_, [self = shared_from_this()](beast::error_code) {});
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::shared_ptr<LiveSession> session_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool closing_ = false;
  bool close_started_ = false;
  websocket::close_reason close_reason_;
};

inline void LiveSession::attach(std::shared_ptr<WsConnection> ws) {
  net::dispatch(strand_, [self = shared_from_this(), ws = std::move(ws)] {
    self->ws_ = ws;
    if (self->done_) {
      ws->close({websocket::close_code::normal, "session ended"});
      return;
    }
    self->arm_idle();
    if (!self->started_) {
      self->started_ = true;
      self->step([&] { self->session_.next_prompt(self->now_ms()); });
      return;
    }
    // Reconnect: repeat the question being answered, then where we are.
    const auto& events = self->session_.transcript().events;
    for (auto it = events.rbegin(); it != events.rend(); ++it)
      if (it->is<QuestionAsked>()) {
        self->send(wire_event(self->id(), *it));
        break;
      }
    self->send(state_notice(self->id(), self->session_.now(), self->session_.phase(), self->session_.question_index()));
  });
}

inline void LiveSession::detach(const WsConnection* ws) {
  net::dispatch(strand_, [self = shared_from_this(), ws] {
    if (self->ws_.get() == ws) self->ws_.reset();
    self->attached_ = false;
  });
}

inline void LiveSession::deliver(ClientMessage msg) {
  net::dispatch(strand_, [self = shared_from_this(), msg = std::move(msg)]() mutable {
    if (self->done_) return;
    self->arm_idle();
    SessionInput input;
    if (auto* a = std::get_if<ClientAudio>(&msg)) {
      if (a->samples.empty()) return;
      if (!self->audio_base_) self->audio_base_ = std::max(self->wall_ms(), self->session_.now());
      const Millis t = *self->audio_base_ + static_cast<Millis>(self->audio_samples_ * 1000 / kWireSampleRate);
      self->audio_samples_ += a->samples.size();
      input = AudioFrame{std::move(a->samples), kWireSampleRate, t};
    } else if (auto* c = std::get_if<ClientText>(&msg)) {
      input = TextChunk{std::move(c->chunk), self->now_ms()};
    } else {
      input = EndOfTurn{self->now_ms()};
    }
    try {
      self->step([&] {
        self->run_actions(self->session_.ingest(input));
        self->advance();
      });
    } catch (const Error& e) {
      self->send(error_notice(self->id(), self->now_ms(), e.code(), e.what()));
    }
  });
}

inline void LiveSession::shutdown() {
  net::dispatch(strand_, [self = shared_from_this()] {
    self->idle_timer_.cancel();
    if (self->ws_) self->ws_->close({websocket::close_code::going_away, "server shutting down"});
  });
}

inline void LiveSession::on_idle() {
  end_reason_ = websocket::close_reason(websocket::close_code::going_away, "idle timeout");
  step([&] { session_.abort(now_ms()); });
}

inline void LiveSession::advance() {
  if (session_.phase() == Phase::Asking) session_.next_prompt(now_ms());
}

inline void LiveSession::run_actions(std::vector<Action> actions) {
  for (auto& action : actions) {
    if (auto* c = std::get_if<ClassifySentiment>(&action)) {
      auto classify = [backend = sentiment_.get(), thresholds = thresholds_](const std::string& text) {
        try {
          return classify_sentiment(text, *backend, thresholds);
        } catch (const Error&) {
          return SentimentResult{};
        }
      };
      if (sentiment_->is_local()) {
        session_.on_sentiment(c->seq, classify(c->text));
      } else {
        net::post(pool_, [self = shared_from_this(), classify, seq = c->seq, text = std::move(c->text)] {
          const auto r = classify(text);
          net::post(self->strand_, [self, seq, r] { self->session_.on_sentiment(seq, r); });
        });
      }
    } else if (auto* g = std::get_if<GenerateResponse>(&action)) {
      net::post(pool_, [self = shared_from_this(), g = std::move(*g)] {
        ListenerResponse resp;
        if (self->listener_) {
          resp = self->listener_->respond(g.utterance, g.history, g.question_index);
        } else {
          const ScriptedFallbacks fallbacks;
          const auto& text = fallbacks.at(g.question_index);
          resp = {text, count_words(text), ResponseSource::ScriptedFallback, g.question_index};
        }
        net::post(self->strand_, [self, resp = std::move(resp), t = g.time] {
          if (self->done_ || self->session_.phase() != Phase::Responding) return;
          self->step([&] {
            self->session_.on_response(resp, std::max(t, self->now_ms()));
            self->advance();
          });
        });
      });
    }
  }
}

inline void LiveSession::send(const nlohmann::ordered_json& j) {
  if (ws_) ws_->send(j.dump());
}

inline void LiveSession::publish(std::size_t mark, Phase before, int before_q) {
  const auto& events = session_.transcript().events;
  for (std::size_t i = mark; i < events.size(); ++i) {
    writer_.append(events[i]);
    send(wire_event(id(), events[i]));
  }
  if (session_.phase() != before || session_.question_index() != before_q)
    send(state_notice(id(), session_.now(), session_.phase(), session_.question_index()));
  if (session_.phase() == Phase::Done && !done_) {
    done_ = true;
    idle_timer_.cancel();
    if (ws_) ws_->close(end_reason_);
    if (on_done_) on_done_(id());
  }
}

}  // namespace gateway_detail

class Gateway : public std::enable_shared_from_this<Gateway> {
 public:
  static std::shared_ptr<Gateway> create(boost::asio::io_context& ioc, AppConfig cfg, GatewayBackends backends) {
    return std::shared_ptr<Gateway>(new Gateway(ioc, std::move(cfg), std::move(backends)));
  }

  ~Gateway() { pool_.join(); }

  /// Binds and starts accepting. Port 0 picks a free port; see port().
  void start() {
    namespace net = boost::asio;
    using tcp = net::ip::tcp;
    std::filesystem::create_directories(cfg_.data_dir);
    const tcp::endpoint ep(net::ip::make_address(cfg_.listen_address), cfg_.port);
    acceptor_.open(ep.protocol());
    acceptor_.set_option(net::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen(net::socket_base::max_listen_connections);
    port_ = acceptor_.local_endpoint().port();
    accept();
  }

  /// Stops accepting and closes every attached stream. Sessions stay on disk.
  void stop() {
    boost::asio::post(acceptor_.get_executor(), [self = shared_from_this()] {
      boost::system::error_code ec;
      self->acceptor_.close(ec);
    });
    std::lock_guard lock(mu_);
    for (auto& [id, s] : sessions_) s->shutdown();
  }

  unsigned short port() const { return port_; }
  const AppConfig& config() const { return cfg_; }

  std::size_t live_sessions() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
  }

  // --- request handling (used by connections) ---

  struct Reply {
    unsigned status = 200;
    std::string body;
    std::string content_type = "application/json";
  };
  using Respond = std::function<void(Reply)>;

  void handle(const std::string& method, const std::string& target, const std::string& host, const std::string& body,
              Respond respond) {
    static const std::regex transcript_path(R"(^/sessions/([0-9a-f-]+)/transcript$)");
    const std::string path = target.substr(0, target.find('?'));
    std::smatch m;
    if (path == "/sessions") {
      if (method != "POST") return respond(error(405, "method not allowed"));
      return respond(create_session(body, host));
    }
    if (std::regex_match(path, m, transcript_path)) {
      if (method != "GET") return respond(error(405, "method not allowed"));
      return transcript(m[1].str(), std::move(respond));
    }
    if (path == "/score") {
      if (method != "POST") return respond(error(405, "method not allowed"));
      return score(body, std::move(respond));
    }
    if (path == "/health") {
      nlohmann::ordered_json j;
      j["status"] = "ok";
      j["sessions"] = live_sessions();
      return respond({200, j.dump()});
    }
    respond(error(404, "not found"));
  }

  /// For a stream upgrade on `target`: the session on success, else an error
  /// reply (404 unknown, 409 already attached, 410 finished).
  std::variant<std::shared_ptr<gateway_detail::LiveSession>, Reply> claim_stream(const std::string& target) {
    static const std::regex stream_path(R"(^/sessions/([0-9a-f-]+)/stream$)");
    std::smatch m;
    const std::string path = target.substr(0, target.find('?'));
    if (!std::regex_match(path, m, stream_path)) return error(404, "not found");
    std::shared_ptr<gateway_detail::LiveSession> s;
    {
      std::lock_guard lock(mu_);
      if (auto it = sessions_.find(m[1].str()); it != sessions_.end()) s = it->second;
    }
    if (!s) {
      if (std::filesystem::exists(transcript_file(m[1].str()))) return error(410, "session ended");
      return error(404, "unknown session");
    }
    if (s->done()) return error(410, "session ended");
    if (!s->try_attach()) return error(409, "session already has a stream");
    return s;
  }

  static Reply error(unsigned status, const std::string& message) {
    nlohmann::ordered_json j;
    j["error"] = message;
    return {status, j.dump()};
  }

 private:
  Gateway(boost::asio::io_context& ioc, AppConfig cfg, GatewayBackends backends)
      : ioc_(ioc),
        cfg_(std::move(cfg)),
        backends_(std::move(backends)),
        acceptor_(boost::asio::make_strand(ioc)),
        pool_(cfg_.gateway.workers) {
    cfg_.validate();
    if (!backends_.sentiment) backends_.sentiment = [] { return std::make_unique<LexiconSentiment>(); };
    if (!backends_.listener) backends_.listener = std::make_shared<MockCompletionClient>();
  }

  std::filesystem::path transcript_file(const std::string& id) const { return cfg_.data_dir / (id + ".jsonl"); }

  void accept();

  Reply create_session(const std::string& body, const std::string& host) {
    const auto j = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object() || !j.contains("condition") || !j["condition"].is_string())
      return error(400, "body must be {\"condition\": \"control\"|\"bc\"|\"bc_al\"}");
    const auto condition = try_parse_condition(j["condition"].get<std::string>());
    if (!condition) return error(400, "unknown condition \"" + j["condition"].get<std::string>() + "\"");

    std::shared_ptr<gateway_detail::LiveSession> s;
    {
      std::lock_guard lock(mu_);
      if (sessions_.size() >= cfg_.gateway.max_sessions) return error(503, "session limit reached");
      const std::string id = ids_.next();
      try {
        s = std::make_shared<gateway_detail::LiveSession>(
            ioc_, pool_, cfg_, make_header(id, *condition, utc_timestamp(), cfg_), transcript_file(id),
            backends_.listener, backends_.sentiment(),
            [weak = weak_from_this()](const std::string& done_id) {
              if (auto self = weak.lock()) {
                std::lock_guard lock(self->mu_);
                self->sessions_.erase(done_id);
              }
            });
      } catch (const Error& e) {
        return error(500, e.what());
      }
      sessions_.emplace(id, s);
    }
    s->start_idle_timer();
    nlohmann::ordered_json out;
    out["session_id"] = s->id();
    out["ws_url"] = "ws://" + (host.empty() ? cfg_.listen_address + ":" + std::to_string(port_) : host) +
                    "/sessions/" + s->id() + "/stream";
    return {201, out.dump()};
  }

  void transcript(const std::string& id, Respond respond) {
    std::shared_ptr<gateway_detail::LiveSession> s;
    {
      std::lock_guard lock(mu_);
      if (auto it = sessions_.find(id); it != sessions_.end()) s = it->second;
    }
    auto reply = [respond](std::optional<std::string> bytes) {
      if (!bytes) return respond(error(404, "unknown session"));
      respond({200, std::move(*bytes), "application/x-ndjson"});
    };
    if (s) return s->read_transcript(reply);
    std::ifstream in(transcript_file(id), std::ios::binary);
    if (!in) return reply(std::nullopt);
    std::ostringstream bytes;
    bytes << in.rdbuf();
    reply(bytes.str());
  }

  void score(const std::string& body, Respond respond) {
    const auto j = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) return respond(error(400, "body must be a JSON object"));
    const std::string backend = j.value("backend", "heuristic");
    if (backend != "heuristic" && backend != "llm") return respond(error(400, "unknown backend \"" + backend + "\""));

    Transcript t;
    try {
      if (j.contains("transcript") && j["transcript"].is_string()) {
        std::istringstream in(j["transcript"].get<std::string>());
        t = read_transcript(in);
      } else if (j.contains("session_id") && j["session_id"].is_string()) {
        const std::string id = j["session_id"].get<std::string>();
        if (!std::regex_match(id, std::regex("[0-9a-f-]+")) || !std::filesystem::exists(transcript_file(id)))
          return respond(error(404, "unknown session"));
        t = load(transcript_file(id));
      } else {
        return respond(error(400, "need \"transcript\" or \"session_id\""));
      }
    } catch (const Error& e) {
      return respond(error(400, e.what()));
    }

    auto work = [cfg = cfg_, client = backends_.scorer, backend, t = std::move(t), respond]() {
      try {
        auto scorer = make_scorer(backend, cfg, client);
        const auto rows = score_transcript(t, *scorer);
        nlohmann::ordered_json out;
        out["session_id"] = t.header.session_id;
        out["backend"] = backend;
        out["scores"] = nlohmann::ordered_json::array();
        for (const auto& r : rows) {
          nlohmann::ordered_json row;
          row["question_index"] = r.question_index;
          row["information"] = r.score.information;
          row["thoughts"] = r.score.thoughts;
          row["feelings"] = r.score.feelings;
          out["scores"].push_back(row);
        }
        const auto means = session_means(rows);
        if (!means.empty()) {
          out["means"]["information"] = means[0].information;
          out["means"]["thoughts"] = means[0].thoughts;
          out["means"]["feelings"] = means[0].feelings;
        }
        respond({200, out.dump()});
      } catch (const Error& e) {
        respond(error(502, e.what()));
      }
    };
    if (backend == "heuristic") return work();
    boost::asio::post(pool_, std::move(work));
  }

  boost::asio::io_context& ioc_;
  AppConfig cfg_;
  GatewayBackends backends_;
  boost::asio::ip::tcp::acceptor acceptor_;
  boost::asio::thread_pool pool_;
  unsigned short port_ = 0;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<gateway_detail::LiveSession>> sessions_;
  SessionIdSource ids_;
};

namespace gateway_detail {

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket&& socket, std::shared_ptr<Gateway> gateway)
      : stream_(std::move(socket)), gateway_(std::move(gateway)) {}

  void run() {
    net::dispatch(stream_.get_executor(), [self = shared_from_this()] { self->read(); });
  }

 private:
  void read() {
    parser_.emplace();
    parser_->body_limit(1 << 22);
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, *parser_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
        return;
      }
      self->on_request(self->parser_->release());
    });
  }

  void on_request(http::request<http::string_body> req) {
    const std::string target(req.target());
    if (websocket::is_upgrade(req)) {
      auto claim = gateway_->claim_stream(target);
      if (auto* s = std::get_if<std::shared_ptr<LiveSession>>(&claim)) {
        std::make_shared<WsConnection>(stream_.release_socket(), *s)->run(std::move(req));
        return;
      }
      return write(req, std::get<Gateway::Reply>(claim), /*keep_alive=*/false);
    }
    const std::string host(req[http::field::host]);
    auto self = shared_from_this();
    gateway_->handle(std::string(req.method_string()), target, host, req.body(),
                     [self, version = req.version(), keep = req.keep_alive()](Gateway::Reply reply) {
                       net::post(self->stream_.get_executor(), [self, version, keep, reply = std::move(reply)] {
                         http::request<http::string_body> shape;
                         shape.version(version);
                         shape.keep_alive(keep);
                         self->write(shape, reply, keep);
                       });
                     });
  }

  void write(const http::request<http::string_body>& req, const Gateway::Reply& reply, bool keep_alive) {
    auto res = std::make_shared<http::response<http::string_body>>(static_cast<http::status>(reply.status),
                                                                    req.version());
    res->set(http::field::server, "attentive");
    res->set(http::field::content_type, reply.content_type);
    res->set(http::field::access_control_allow_origin, "*");
    res->keep_alive(keep_alive);
    res->body() = reply.body;
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (!res->keep_alive()) {
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
        return;
      }
      self->read();
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  std::optional<http::request_parser<http::string_body>> parser_;
  std::shared_ptr<Gateway> gateway_;
};

}  // namespace gateway_detail

inline void Gateway::accept() {
  acceptor_.async_accept(boost::asio::make_strand(ioc_),
                         [self = shared_from_this()](boost::system::error_code ec, boost::asio::ip::tcp::socket socket) {
                           if (ec) {
                             if (ec == boost::asio::error::operation_aborted || !self->acceptor_.is_open()) return;
                           } else {
                             std::make_shared<gateway_detail::HttpConnection>(std::move(socket), self)->run();
                           }
                           self->accept();
                         });
}

}  // namespace attentive

#endif  // ATTENTIVE_GATEWAY_HPP
