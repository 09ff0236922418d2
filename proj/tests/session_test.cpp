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

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "attentive/session.hpp"
#include "attentive/transcript.hpp"
#include "support.hpp"

namespace attentive {
namespace {

TranscriptHeader header(Condition c) { return {kTranscriptSchema, "s-test", c, "2026-01-01T00:00:00Z", {}}; }

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("attentive_" + name);
}

struct Harness {
  explicit Harness(Condition c, SessionConfig cfg = {})
      : session(header(c), cfg),
        mock(std::make_shared<MockCompletionClient>()),
        listener(mock),
        conv(session, lexicon, &listener) {}

  Session session;
  LexiconSentiment lexicon;
  std::shared_ptr<MockCompletionClient> mock;
  ActiveListener listener;
  Conversation conv;
};

TEST(Questions, TableOrderAndText) {
  EXPECT_EQ(question_text(1), "Would you like to be famous? In what way?");
  EXPECT_EQ(question_text(2), "What would constitute a \"perfect\" day for you?");
  EXPECT_EQ(question_text(9),
            "Of all the people in your family, whose death would you find most disturbing? Why?");
  EXPECT_THROW(question_text(10), Error);
}

TEST(Session, CreateAndFirstPrompt) {
  Session s(header(Condition::BcAl));
  EXPECT_EQ(s.phase(), Phase::Asking);
  EXPECT_EQ(s.question_index(), 1);
  EXPECT_TRUE(s.transcript().events.empty());
  EXPECT_EQ(s.next_prompt(0), std::string(question_text(1)));
  EXPECT_EQ(s.phase(), Phase::Listening);
}

TEST(Session, PhaseGuards) {
  Session s(header(Condition::BC));
  try {
    s.ingest(TextChunk{"hi", 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WrongPhase);
  }
  s.next_prompt(0);
  EXPECT_THROW(s.next_prompt(0), Error);
  EXPECT_THROW(s.on_response({}, 0), Error);
}

TEST(Session, CompletesAfterNineQuestions) {
  Session s(header(Condition::Control));
  for (int i = 1; i <= 9; ++i) {
    ASSERT_EQ(s.next_prompt(i * 100), std::string(question_text(i)));
    s.ingest(EndOfTurn{i * 100 + 50});
  }
  EXPECT_EQ(s.next_prompt(1000), std::nullopt);
  EXPECT_EQ(s.phase(), Phase::Done);
  EXPECT_TRUE(s.transcript().events.back().is<SessionEnded>());
  EXPECT_EQ(s.transcript().count<QuestionAsked>(), 9u);
}

TEST(Session, ControlNeverBackchannels) {
  Harness h(Condition::Control);
  h.conv.start(0);
  testing::TraceBuilder b;
  b.silence(500).speech(1600, 180, 280).silence(1000);
  for (const auto& f : b.frames()) h.conv.feed(f);
  EXPECT_GE(h.session.bop_events_detected(), 1u);
  h.conv.feed(EndOfTurn{b.now()});
  EXPECT_EQ(h.session.transcript().count<BackchannelAct>(), 0u);
  EXPECT_EQ(h.session.transcript().count<ListenerResponse>(), 0u);
  EXPECT_EQ(h.session.question_index(), 2);
}

TEST(Session, BcBackchannelsAtOpportunityAndNeverResponds) {
  Harness h(Condition::BC);
  h.conv.start(0);
  testing::TraceBuilder b;
  b.silence(500).speech(1600, 180, 280).silence(1000);
  h.conv.feed(TextChunk{"That was a wonderful and amazing trip", 600});
  for (const auto& f : b.frames()) h.conv.feed(f);
  const auto out = h.conv.feed(EndOfTurn{b.now()});
  const auto& events = h.session.transcript().events;
  ASSERT_EQ(h.session.transcript().count<BackchannelAct>(), 1u);
  const auto bc = std::find_if(events.begin(), events.end(), [](auto& e) { return e.template is<BackchannelAct>(); });
  EXPECT_EQ(bc->t, 2900);
  EXPECT_EQ(bc->as<BackchannelAct>().verbal, "oh wow!");
  EXPECT_EQ(bc->as<BackchannelAct>().gesture, Gesture::BrowRaise);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_TRUE(out[0].is<UserUtterance>());
  EXPECT_EQ(out[1].as<QuestionAsked>().index, 2);
  EXPECT_EQ(h.session.transcript().count<ListenerResponse>(), 0u);
}

TEST(Session, BcAlRespondsThenAsksNext) {
  Harness h(Condition::BcAl);
  h.conv.start(0);
  h.conv.feed(TextChunk{"I love hiking", 100});
  const auto out = h.conv.feed(EndOfTurn{2000});
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].as<UserUtterance>().text, "I love hiking");
  const auto& r = out[1].as<ListenerResponse>();
  EXPECT_EQ(r.text, "It sounds like you love hiking, and that is meaningful to you.");
  EXPECT_EQ(r.source, ResponseSource::Llm);
  EXPECT_EQ(r.question_index, 1);
  EXPECT_EQ(out[2].as<QuestionAsked>().index, 2);
}

TEST(Session, HistoryReachesTheListener) {
  Harness h(Condition::BcAl);
  h.conv.start(0);
  h.conv.feed(TextChunk{"I love hiking", 100});
  h.conv.feed(EndOfTurn{200});
  h.conv.feed(TextChunk{"I like pasta", 300});
  h.conv.feed(EndOfTurn{400});
  const auto reqs = h.mock->requests();
  ASSERT_EQ(reqs.size(), 2u);
  EXPECT_NE(reqs[1].messages[0].content.find("I love hiking"), std::string::npos);
  EXPECT_TRUE(reqs[1].messages[0].content.ends_with("Human: I like pasta"));
}

TEST(EndOfTurn, LongSilenceAfterEnoughSpeech) {
  Harness h(Condition::BC);
  h.conv.start(0);
  testing::TraceBuilder b;
  b.silence(500).speech(3000, 150, 160).silence(2100);
  for (const auto& f : b.frames()) h.conv.feed(f);
  const auto& events = h.session.transcript().events;
  auto it = std::find_if(events.begin(), events.end(), [](auto& e) { return e.template is<UserUtterance>(); });
  ASSERT_NE(it, events.end());
  EXPECT_EQ(it->as<UserUtterance>().end, 5500);
  EXPECT_EQ(it->as<UserUtterance>().start, 500);
  EXPECT_EQ(h.session.question_index(), 2);
}

TEST(EndOfTurn, ShortAnswerKeepsListening) {
  Harness h(Condition::BC);
  h.conv.start(0);
  testing::TraceBuilder b;
  b.silence(500).speech(500, 150, 160).silence(2100);
  for (const auto& f : b.frames()) h.conv.feed(f);
  EXPECT_EQ(h.session.phase(), Phase::Listening);
  EXPECT_FALSE(h.session.end_of_turn(b.now()));
  h.conv.feed(EndOfTurn{b.now()});
  EXPECT_EQ(h.session.question_index(), 2);
}

TEST(Session, AudioPathBackchannels) {
  Harness h(Condition::BC);
  h.conv.start(0);
  constexpr int rate = 16000;
  std::vector<float> x(rate / 2, 0.0f);
  const auto speech = testing::chirp(180, 280, 0.4, rate, rate * 16 / 10);
  x.insert(x.end(), speech.begin(), speech.end());
  x.resize(x.size() + rate * 12 / 10, 0.0f);
  for (const auto& chunk : testing::audio_chunks(x, rate, 0)) h.conv.feed(chunk);
  ASSERT_EQ(h.session.transcript().count<BackchannelAct>(), 1u);
  const auto& events = h.session.transcript().events;
  auto it = std::find_if(events.begin(), events.end(), [](auto& e) { return e.template is<BackchannelAct>(); });
  EXPECT_NEAR(static_cast<double>(it->t), 2900.0, 30.0);
}

TEST(Session, AudioWhileRespondingIsHeldThenDropped) {
  Session s(header(Condition::BcAl));
  s.next_prompt(0);
  s.ingest(TextChunk{"I love hiking", 10});
  const auto actions = s.ingest(EndOfTurn{100});
  ASSERT_EQ(actions.size(), 1u);
  ASSERT_EQ(s.phase(), Phase::Responding);
  s.ingest(AudioFrame{std::vector<float>(1600, 0.1f), 16000, 100});
  EXPECT_EQ(s.held_audio_frames(), 1u);
  EXPECT_THROW(s.ingest(TextChunk{"more", 120}), Error);
  s.on_response({"Thank you.", 2, ResponseSource::Llm, 1}, 300);
  s.next_prompt(300);
  EXPECT_EQ(s.held_audio_frames(), 0u);
}

TEST(Session, StaleSentimentIgnored) {
  Session s(header(Condition::BC));
  s.next_prompt(0);
  const auto a1 = s.ingest(TextChunk{"great", 10});
  const auto a2 = s.ingest(TextChunk{"awful", 20});
  const auto seq1 = std::get<ClassifySentiment>(a1[0]).seq;
  const auto seq2 = std::get<ClassifySentiment>(a2[0]).seq;
  s.on_sentiment(seq2, {-0.8, SentimentClass::Negative, SentimentBackendKind::Lexicon});
  s.on_sentiment(seq1, {0.8, SentimentClass::Positive, SentimentBackendKind::Lexicon});
  EXPECT_EQ(s.current_sentiment(), SentimentClass::Negative);
  s.ingest(EndOfTurn{30});
  s.next_prompt(40);
  s.on_sentiment(seq2 + 0, {0.9, SentimentClass::Positive, SentimentBackendKind::Lexicon});
  EXPECT_EQ(s.current_sentiment(), SentimentClass::Neutral);
}

TEST(Session, FinalizationBackchannelRespectsInterval) {
  SessionConfig cfg;
  cfg.finalization_backchannel = true;
  Harness h(Condition::BC, cfg);
  h.conv.start(0);
  Millis t = 0;
  for (int i = 0; i < 9; ++i) {
    h.conv.feed(TextChunk{"I had a wonderful time", t + 100});
    h.conv.feed(EndOfTurn{t + (i % 2 ? 1000 : 2500)});
    t += i % 2 ? 1000 : 2500;
  }
  const auto st = stats(h.session.transcript());
  EXPECT_GE(st.backchannels, 1u);
  ASSERT_TRUE(st.min_backchannel_gap_ms);
  EXPECT_GE(*st.min_backchannel_gap_ms, 3000);
}

TEST(Transcript, EmptyButStartedFile) {
  Session s(header(Condition::BC));
  s.next_prompt(0);
  const auto path = temp_file("started.jsonl");
  persist(s.transcript(), path);
  std::ifstream in(path);
  std::string l1, l2, l3;
  std::getline(in, l1);
  std::getline(in, l2);
  EXPECT_FALSE(std::getline(in, l3));
  EXPECT_EQ(l1, R"({"schema":1,"session_id":"s-test","condition":"bc","created_at":"2026-01-01T00:00:00Z"})");
  EXPECT_EQ(l2, R"({"t":0,"type":"question","index":1,"text":"Would you like to be famous? In what way?"})");
  std::filesystem::remove(path);
}

TEST(Transcript, RoundTripIsByteIdentical) {
  Harness h(Condition::BcAl);
  h.session = Session({kTranscriptSchema, "s-rt", Condition::BcAl, "2026-01-01T00:00:00Z",
                       ListenerSettings{"gpt-4o", 0.7}});
  replay_inputs(h.conv, testing::recorded_stream());
  const std::string first = transcript_to_string(h.session.transcript());
  std::istringstream in(first);
  const auto loaded = read_transcript(in);
  EXPECT_EQ(loaded, h.session.transcript());
  EXPECT_EQ(transcript_to_string(loaded), first);
}

TEST(Transcript, WriterMatchesPersist) {
  const auto path = temp_file("writer.jsonl");
  Session s(header(Condition::BcAl));
  LexiconSentiment lex;
  ActiveListener listener(std::make_shared<MockCompletionClient>());
  {
    TranscriptWriter writer(path, s.transcript().header);
    Conversation conv(s, lex, &listener, [&](const TranscriptEvent& e) { writer.append(e); });
    replay_inputs(conv, testing::recorded_stream());
  }
  std::ifstream in(path, std::ios::binary);
  std::stringstream file;
  file << in.rdbuf();
  EXPECT_EQ(file.str(), transcript_to_string(s.transcript()));
  std::filesystem::remove(path);
}

TEST(Transcript, CorruptLineReportsLineNumber) {
  std::istringstream in(
      "{\"schema\":1,\"session_id\":\"x\",\"condition\":\"bc\",\"created_at\":\"\"}\n"
      "{\"t\":0,\"type\":\"question\",\"index\":1,\"text\":\"q\"}\n"
      "{\"t\":5,\"type\":\"utter\n");
  try {
    read_transcript(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Transcript, SchemaMismatch) {
  std::istringstream in("{\"schema\":2,\"session_id\":\"x\",\"condition\":\"bc\",\"created_at\":\"\"}\n");
  try {
    read_transcript(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaVersionMismatch);
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(Transcript, MissingFileIsIoError) {
  try {
    load("/nonexistent/dir/t.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(Inputs, JsonRoundTrip) {
  const auto inputs = testing::recorded_stream();
  std::stringstream buf;
  for (const auto& in : inputs) buf << to_json(in).dump() << '\n';
  const auto back = read_inputs(buf);
  ASSERT_EQ(back.size(), inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i)
    EXPECT_EQ(to_json(back[i]).dump(), to_json(inputs[i]).dump());
}

TEST(Inputs, PcmRoundTrip) {
  const std::vector<float> x{0.0f, 0.5f, -0.5f, 1.0f, -1.0f};
  const auto back = decode_pcm16_b64(encode_pcm16_b64(x));
  ASSERT_EQ(back.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(back[i], x[i], 1.0 / 32767);
  EXPECT_THROW(decode_pcm16_b64("abc"), Error);
  EXPECT_THROW(decode_pcm16_b64("!!!!"), Error);
}

}  // namespace
}  // namespace attentive
