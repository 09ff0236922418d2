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


// attentive: command-line front end.
//
//   attentive session   --condition bc_al [--backend mock] [--out t.jsonl] [--seed 1] [--input s.jsonl]
//   attentive bop-replay trace.jsonl
//   attentive score     t1.jsonl t2.jsonl [--backend heuristic|llm] [--per-session]
//   attentive stats     measures.csv [--json]
//   attentive serve     [--port 8080] [--data-dir data]
//
// Exit status: 0 success, 1 runtime failure, 2 usage or input error.

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/asio/signal_set.hpp>

#include "attentive/analysis.hpp"
#include "attentive/backends.hpp"
#include "attentive/bop.hpp"
#include "attentive/config.hpp"
#include "attentive/disclosure.hpp"
#include "attentive/gateway.hpp"
#include "attentive/session.hpp"
#include "attentive/trace.hpp"
#include "attentive/transcript.hpp"

namespace {

using namespace attentive;

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError:
    case ErrorCode::BackendUnavailable:
    case ErrorCode::ContentFiltered:
    case ErrorCode::MalformedBackendReply:
      return kRuntime;
    default:
      return kUsage;
  }
}

struct Common {
  std::string config_path;

  AppConfig load() const {
    if (config_path.empty()) return {};
    return load_config(config_path);
  }
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return in;
}

// ---------------------------------------------------------------------------
// session
// ---------------------------------------------------------------------------

struct SessionArgs {
  std::string condition;
  std::string backend;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string input;
};

void print_event(const TranscriptEvent& e) {
  if (e.is<QuestionAsked>()) {
    const auto& q = e.as<QuestionAsked>();
    std::cout << "[Q" << q.index << "] " << q.text << std::endl;
  } else if (e.is<BackchannelAct>()) {
    const auto& b = e.as<BackchannelAct>();
    std::cout << "  (" << b.verbal << ")";
    if (b.gesture != Gesture::None) std::cout << " [" << to_string(b.gesture) << "]";
    std::cout << std::endl;
  } else if (e.is<ListenerResponse>()) {
    std::cout << "Listener: " << e.as<ListenerResponse>().text << std::endl;
  }
}

int cmd_session(const Common& common, const SessionArgs& args) {
  AppConfig cfg = common.load();
  if (!args.backend.empty()) cfg.listener_backend = parse_listener_backend(args.backend);
  const bool interactive = args.input.empty();
  // Typed answers carry no prosody, so backchannels are timed at finalization.
  if (interactive) cfg.session.finalization_backchannel = true;
  cfg.validate();

  const Condition condition = parse_condition(args.condition);
  SessionIdSource ids = args.seed ? SessionIdSource(*args.seed) : SessionIdSource();
  const std::string created =
      args.seed ? utc_timestamp(std::chrono::system_clock::time_point{}) : utc_timestamp();
  const auto header = make_header(ids.next(), condition, created, cfg);

  std::optional<TranscriptWriter> writer;
  if (!args.out.empty()) writer.emplace(args.out, header);

  Session session(header, cfg.session);
  auto sentiment = make_sentiment_backend(cfg);
  std::optional<ActiveListener> listener;
  if (condition == Condition::BcAl) listener.emplace(make_listener_client(cfg), cfg.listener);
  Conversation conv(session, *sentiment, listener ? &*listener : nullptr,
                    [&](const TranscriptEvent& e) {
                      if (writer) writer->append(e);
                      print_event(e);
                    },
                    cfg.sentiment_thresholds);

  if (!interactive) {
    auto in = open_in(args.input);
    replay_inputs(conv, read_inputs(in));
  } else {
    // Seeded runs use a logical clock (one second per line) so transcripts repeat.
    const auto t0 = std::chrono::steady_clock::now();
    Millis logical = 0;
    auto now = [&]() -> Millis {
      if (args.seed) return logical += 1000;
      return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    };
    conv.start(0);
    std::string line;
    while (session.phase() != Phase::Done && std::getline(std::cin, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (is_blank(line)) conv.feed(EndOfTurn{now()});
      else conv.feed(TextChunk{line, now()});
    }
    conv.finish(session.now());
  }
  if (writer) std::cerr << "transcript: " << writer->path().string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// bop-replay
// ---------------------------------------------------------------------------

int cmd_bop_replay(const Common& common, const std::string& path) {
  const AppConfig cfg = common.load();
  auto in = open_in(path);
  for (const auto& e : replay_trace(in, cfg.session.bop)) std::cout << to_json(e).dump() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

struct ScoreArgs {
  std::vector<std::string> transcripts;
  std::string backend = "heuristic";
  bool per_session = false;
  std::string out;
};

int cmd_score(const Common& common, const ScoreArgs& args) {
  const AppConfig cfg = common.load();
  auto scorer = make_scorer(args.backend, cfg);
  std::vector<DisclosureRow> rows;
  for (const auto& path : args.transcripts) {
    const auto t = load(path);
    auto part = score_transcript(t, *scorer);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  std::ostringstream csv;
  if (args.per_session) write_session_means_csv(csv, session_means(rows));
  else write_disclosure_csv(csv, rows);
  if (args.out.empty()) {
    std::cout << csv.str();
  } else {
    auto out = open_out(args.out);
    out << csv.str();
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

int cmd_stats(const std::string& path, bool json, const std::string& out_path) {
  auto in = open_in(path);
  const auto reports = analyze_measures(read_measures_csv(in));
  std::ostringstream out;
  if (json) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& r : reports) j.push_back(to_json(r));
    out << j.dump(2) << "\n";
  } else {
    write_report_csv(out, reports);
  }
  if (out_path.empty()) {
    std::cout << out.str();
  } else {
    auto f = open_out(out_path);
    f << out.str();
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// serve
// ---------------------------------------------------------------------------

struct ServeArgs {
  std::string listen;
  std::optional<unsigned short> port;
  std::string data_dir;
  std::string backend;
};

int cmd_serve(const Common& common, const ServeArgs& args) {
  AppConfig cfg = common.load();
  if (!args.listen.empty()) cfg.listen_address = args.listen;
  if (args.port) cfg.port = *args.port;
  if (!args.data_dir.empty()) cfg.data_dir = args.data_dir;
  if (!args.backend.empty()) cfg.listener_backend = parse_listener_backend(args.backend);
  cfg.validate();

  boost::asio::io_context ioc;
  auto gateway = Gateway::create(ioc, cfg, make_gateway_backends(cfg));
  try {
    gateway->start();
  } catch (const boost::system::system_error& e) {
    throw Error(ErrorCode::IoError, std::string("cannot listen: ") + e.what());
  }
  boost::asio::signal_set signals(ioc, SIGINT, SIGTERM);
  signals.async_wait([&](const boost::system::error_code&, int) {
    gateway->stop();
    ioc.stop();
  });
  std::cerr << "listening on " << cfg.listen_address << ":" << gateway->port() << " (data in "
            << cfg.data_dir.string() << ")" << std::endl;
  ioc.run();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attentive listener: sessions, backchannel replay, disclosure scoring and statistics."};
  app.require_subcommand(1);
  Common common;

  SessionArgs session_args;
  auto* session = app.add_subcommand(
      "session",
      "Run the nine-question session as a text REPL. Type an answer over one or more lines; a blank line ends "
      "the turn.\nText mode has no prosody, so backchannel timing is not exercised here: backchannels are "
      "emitted when an answer is finalized. Use bop-replay or the gateway audio stream for timing, or --input "
      "to replay a recorded input stream.");
  session->add_option("--condition", session_args.condition, "control | bc | bc_al")
      ->required()
      ->check(CLI::IsMember({"control", "bc", "bc_al"}));
  session->add_option("--backend", session_args.backend, "Listener backend: llm | mock")
      ->check(CLI::IsMember({"llm", "mock"}));
  session->add_option("--out", session_args.out, "Write the transcript (JSON Lines) here");
  session->add_option("--seed", session_args.seed,
                      "Reproducible run: session id from the seed, created_at at the epoch, one second per line");
  session->add_option("--input", session_args.input, "Replay a recorded input stream instead of reading stdin")
      ->check(CLI::ExistingFile);
  session->add_option("--config", common.config_path, "JSON config file")->check(CLI::ExistingFile);

  std::string trace_path;
  auto* bop = app.add_subcommand("bop-replay", "Run a prosody trace (JSON Lines) through the opportunity rules.");
  bop->add_option("trace", trace_path, "Trace file")->required()->check(CLI::ExistingFile);
  bop->add_option("--config", common.config_path, "JSON config file")->check(CLI::ExistingFile);

  ScoreArgs score_args;
  auto* score = app.add_subcommand("score", "Score self-disclosure for each answer in one or more transcripts.");
  score->add_option("transcripts", score_args.transcripts, "Transcript files")->required()->check(CLI::ExistingFile);
  score->add_option("--backend", score_args.backend, "heuristic | llm")
      ->check(CLI::IsMember({"heuristic", "llm"}));
  score->add_flag("--per-session", score_args.per_session, "Emit per-session means instead of per-answer rows");
  score->add_option("--out", score_args.out, "Write CSV here instead of stdout");
  score->add_option("--config", common.config_path, "JSON config file")->check(CLI::ExistingFile);

  std::string measures_path, stats_out;
  bool stats_json = false;
  auto* stats = app.add_subcommand("stats", "Compare conditions: medians, Kruskal-Wallis, Dunn + BH, linear trend.");
  stats->add_option("measures", measures_path, "CSV with session_id,condition,measure_name,value")
      ->required()
      ->check(CLI::ExistingFile);
  stats->add_flag("--json", stats_json, "Emit JSON instead of CSV");
  stats->add_option("--out", stats_out, "Write the report here instead of stdout");

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "Run the HTTP/WebSocket gateway until interrupted.");
  serve->add_option("--listen", serve_args.listen, "Listen address");
  serve->add_option("--port", serve_args.port, "Listen port");
  serve->add_option("--data-dir", serve_args.data_dir, "Directory for transcripts");
  serve->add_option("--backend", serve_args.backend, "Listener backend: llm | mock")
      ->check(CLI::IsMember({"llm", "mock"}));
  serve->add_option("--config", common.config_path, "JSON config file")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*session) return cmd_session(common, session_args);
    if (*bop) return cmd_bop_replay(common, trace_path);
    if (*score) return cmd_score(common, score_args);
    if (*stats) return cmd_stats(measures_path, stats_json, stats_out);
    if (*serve) return cmd_serve(common, serve_args);
  } catch (const Error& e) {
    std::cerr << "attentive: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "attentive: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
