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


#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "gateway_support.hpp"

namespace attentive {
namespace {

using testing::LiveGateway;
using testing::WsClient;

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

TEST(WireMessages, ParsesClientFrames) {
  EXPECT_TRUE(std::holds_alternative<ClientEndOfTurn>(parse_client_message(R"({"type":"end_of_turn"})")));
  const auto text = parse_client_message(R"({"type":"text","chunk":"I love hiking"})");
  EXPECT_EQ(std::get<ClientText>(text).chunk, "I love hiking");
  const std::vector<float> x(1600, 0.25f);
  const auto audio = parse_client_message(R"({"type":"audio","pcm16_b64":")" + encode_pcm16_b64(x) + "\"}");
  EXPECT_EQ(std::get<ClientAudio>(audio).samples.size(), 1600u);
}

TEST(WireMessages, RejectsMalformedFrames) {
  const std::vector<float> too_long(1601, 0.0f);
  const std::vector<std::string> bad_frames{"{nope", "[]", R"({"chunk":"x"})", R"({"type":"shout"})", R"({"type":"text"})", R"({"type":"text","chunk":3})",
        R"({"type":"audio","pcm16_b64":"abc"})",
      std::string(R"({"type":"audio","pcm16_b64":")") + encode_pcm16_b64(too_long) + "\"}"};
  for (const auto& bad : bad_frames) {
    EXPECT_THROW(parse_client_message(bad), Error) << bad;
  }
}

TEST(WireMessages, EventCarriesSessionId) {
  const TranscriptEvent e{1200, QuestionAsked{1, "Q"}};
  EXPECT_EQ(wire_event("abc", e).dump(), R"({"type":"question","session_id":"abc","t":1200,"index":1,"text":"Q"})");
}

TEST(Gateway, CreateSession) {
  LiveGateway gw;
  auto [status, j] = gw.create(R"({"condition":"bc_al"})");
  EXPECT_EQ(status, 201);
  const auto id = j["session_id"].get<std::string>();
  EXPECT_FALSE(id.empty());
  EXPECT_NE(j["ws_url"].get<std::string>().find("/sessions/" + id + "/stream"), std::string::npos);
  EXPECT_EQ(j["ws_url"].get<std::string>().rfind("ws://", 0), 0u);
  EXPECT_EQ(gw.create(R"({"condition":"nice"})").first, 400);
  EXPECT_EQ(gw.create("not json").first, 400);
  EXPECT_EQ(gw.create("{}").first, 400);
  auto c = gw.http();
  EXPECT_EQ(c.Get("/sessions")->status, 405);
  EXPECT_EQ(c.Get("/nowhere")->status, 404);
}

TEST(Gateway, SessionLimit) {
  AppConfig cfg;
  cfg.gateway.max_sessions = 2;
  LiveGateway gw(cfg);
  EXPECT_EQ(gw.create(R"({"condition":"bc"})").first, 201);
  EXPECT_EQ(gw.create(R"({"condition":"bc"})").first, 201);
  EXPECT_EQ(gw.create(R"({"condition":"bc"})").first, 503);
}

TEST(Gateway, FirstMessageIsFirstQuestion) {
  LiveGateway gw;
  const auto id = gw.create_id("bc_al");
  WsClient ws(gw.port(), id);
  const auto first = ws.recv();
  ASSERT_TRUE(first);
  EXPECT_EQ((*first)["type"], "question");
  EXPECT_EQ((*first)["index"], 1);
  EXPECT_EQ((*first)["text"], std::string(kQuestions[0]));
  EXPECT_EQ((*first)["session_id"], id);
}

TEST(Gateway, ControlTextTurnHasNoListenerEvents) {
  LiveGateway gw;
  WsClient ws(gw.port(), gw.create_id("control"));
  ws.recv_until("question");
  ws.send({{"type", "text"}, {"chunk", "I would love to be famous"}});
  ws.send({{"type", "end_of_turn"}});
  const auto q2 = ws.recv_until("question");
  ASSERT_TRUE(q2);
  EXPECT_EQ((*q2)["index"], 2);
  EXPECT_EQ((*q2)["text"], std::string(kQuestions[1]));
  EXPECT_EQ(ws.count("backchannel"), 0u);
  EXPECT_EQ(ws.count("response"), 0u);
  EXPECT_EQ(ws.count("utterance"), 1u);
}

TEST(Gateway, BcAlTextTurnGetsResponse) {
  LiveGateway gw;
  WsClient ws(gw.port(), gw.create_id("bc_al"));
  ws.recv_until("question");
  ws.send({{"type", "text"}, {"chunk", "I love hiking"}});
  ws.send({{"type", "end_of_turn"}});
  const auto r = ws.recv_until("response");
  ASSERT_TRUE(r);
  EXPECT_EQ((*r)["source"], "llm");
  EXPECT_EQ((*r)["question_index"], 1);
  EXPECT_TRUE(validate_response((*r)["text"].get<std::string>()).empty());
  const auto q2 = ws.recv_until("question");
  ASSERT_TRUE(q2);
  EXPECT_EQ((*q2)["index"], 2);
}

TEST(Gateway, TextOutsideListeningIsReportedNotFatal) {
  auto mock = std::make_shared<MockCompletionClient>();
  mock->push(MockCompletionClient::Stall{std::chrono::milliseconds(300)});
  GatewayBackends backends;
  backends.listener = mock;
  LiveGateway gw({}, backends);
  WsClient ws(gw.port(), gw.create_id("bc_al"));
  ws.recv_until("question");
  ws.send({{"type", "text"}, {"chunk", "I love hiking"}});
  ws.send({{"type", "end_of_turn"}});
  ws.send({{"type", "text"}, {"chunk", "too early"}});
  const auto err = ws.recv_until("error");
  ASSERT_TRUE(err);
  EXPECT_EQ((*err)["code"], "WrongPhase");
  EXPECT_TRUE(ws.recv_until("question"));
}

TEST(Gateway, MalformedMessageClosesWithProtocolError) {
  LiveGateway gw;
  WsClient ws(gw.port(), gw.create_id("bc"));
  ws.recv_until("question");
  ws.send_raw("{not json");
  while (ws.recv()) {
  }
  EXPECT_TRUE(ws.closed());
  EXPECT_EQ(ws.close_reason().code, boost::beast::websocket::close_code::protocol_error);
}

TEST(Gateway, SecondStreamIsRefused) {
  LiveGateway gw;
  const auto id = gw.create_id("bc");
  WsClient ws(gw.port(), id);
  ws.recv_until("question");
  EXPECT_EQ(WsClient::handshake_status(gw.port(), "/sessions/" + id + "/stream"), 409);
  EXPECT_EQ(WsClient::handshake_status(gw.port(), "/sessions/0000/stream"), 404);
}

TEST(Gateway, ReconnectRepeatsCurrentQuestion) {
  LiveGateway gw;
  const auto id = gw.create_id("control");
  {
    WsClient ws(gw.port(), id);
    ws.recv_until("question");
    ws.send({{"type", "text"}, {"chunk", "an answer"}});
    ws.send({{"type", "end_of_turn"}});
    ws.recv_until("question");
  }
  std::optional<nlohmann::ordered_json> q;
  for (int attempt = 0; attempt < 50 && !q; ++attempt) {
    try {
      WsClient again(gw.port(), id);
      q = again.recv();
    } catch (const std::exception&) {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));  // old stream not yet released
    }
  }
  ASSERT_TRUE(q);
  EXPECT_EQ((*q)["type"], "question");
  EXPECT_EQ((*q)["index"], 2);
}

TEST(Gateway, TranscriptEndpoint) {
  LiveGateway gw;
  auto c = gw.http();
  EXPECT_EQ(c.Get("/sessions/0123-abcd/transcript")->status, 404);
  EXPECT_EQ(c.Get("/sessions/../etc/transcript")->status, 404);

  const auto id = gw.create_id("control");
  WsClient ws(gw.port(), id);
  ws.recv_until("question");
  const auto early = c.Get("/sessions/" + id + "/transcript");
  ASSERT_EQ(early->status, 200);

  for (int q = 0; q < 9; ++q) {
    ws.send({{"type", "text"}, {"chunk", testing::recorded_answers()[static_cast<std::size_t>(q)]}});
    ws.send({{"type", "end_of_turn"}});
    if (q < 8) ws.recv_until("question");
  }
  ws.recv_until("session_ended");
  while (ws.recv()) {
  }

  const auto res = c.Get("/sessions/" + id + "/transcript");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(res->body, read_file(gw.config().data_dir / (id + ".jsonl")));
  EXPECT_EQ(res->body.rfind(early->body, 0), 0u);  // in-flight view is a prefix

  std::istringstream in(res->body);
  const auto t = read_transcript(in);
  EXPECT_EQ(t.count<QuestionAsked>(), 9u);
  EXPECT_EQ(t.count<SessionEnded>(), 1u);

  // Wire and transcript agree event for event.
  const auto lines = lines_of(res->body);
  const std::vector<std::string> body(lines.begin() + 1, lines.end());
  EXPECT_EQ(testing::as_transcript_lines(ws.events()), body);
  EXPECT_EQ(WsClient::handshake_status(gw.port(), "/sessions/" + id + "/stream"), 410);
}

TEST(Gateway, AudioStreamBackchannelsAreSpaced) {
  LiveGateway gw;
  const auto id = gw.create_id("bc");
  const auto ws = testing::run_audio_session(gw, id);
  std::vector<long long> times;
  for (const auto& e : ws->events())
    if (e["type"] == "backchannel") times.push_back(e["t"].get<long long>());
  ASSERT_GE(times.size(), 1u);
  for (std::size_t i = 1; i < times.size(); ++i) EXPECT_GE(times[i] - times[i - 1], 3000);
  EXPECT_NEAR(static_cast<double>(times[0]), 2900.0, 30.0);  // audio clock starts with the first frame
}

TEST(Gateway, IdleTimeoutEndsSession) {
  AppConfig cfg;
  cfg.gateway.idle_timeout_ms = 200;
  LiveGateway gw(cfg);
  const auto id = gw.create_id("bc");
  WsClient ws(gw.port(), id);
  EXPECT_TRUE(ws.recv_until("session_ended"));
  while (ws.recv()) {
  }
  EXPECT_EQ(ws.close_reason().code, boost::beast::websocket::close_code::going_away);
  EXPECT_EQ(gw.gateway().live_sessions(), 0u);
}

TEST(Gateway, ScoreEndpoint) {
  LiveGateway gw;
  auto c = gw.http();
  Transcript t;
  t.header.session_id = "abc";
  t.events = {{0, QuestionAsked{1, std::string(kQuestions[0])}}, {10, UserUtterance{"", 0, 10}},
              {20, QuestionAsked{2, std::string(kQuestions[1])}}, {30, UserUtterance{"I think I was happy", 20, 30}}};
  nlohmann::json req{{"transcript", transcript_to_string(t)}};
  auto res = c.Post("/score", req.dump(), "application/json");
  ASSERT_EQ(res->status, 200);
  const auto j = nlohmann::json::parse(res->body);
  ASSERT_EQ(j["scores"].size(), 2u);
  EXPECT_EQ(j["scores"][0]["information"], 1);
  EXPECT_EQ(j["scores"][1]["thoughts"], 2);
  EXPECT_EQ(j["scores"][1]["feelings"], 2);
  req["backend"] = "astrology";
  EXPECT_EQ(c.Post("/score", req.dump(), "application/json")->status, 400);
  EXPECT_EQ(c.Post("/score", R"({"session_id":"ffff"})", "application/json")->status, 404);
}

}  // namespace
}  // namespace attentive
