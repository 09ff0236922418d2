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

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "attentive/http_completion.hpp"
#include "attentive/listener.hpp"

namespace attentive {
namespace {

class FakeEndpoint {
 public:
  FakeEndpoint() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      {
        std::lock_guard lock(mu_);
        last_body_ = req.body;
        last_auth_ = req.get_header_value("Authorization");
      }
      if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
      res.status = status_;
      res.set_content(reply_, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }

  void reply(int status, std::string body, std::chrono::milliseconds delay = {}) {
    status_ = status;
    reply_ = std::move(body);
    delay_ = delay;
  }

  EndpointConfig config() const {
    EndpointConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1/";
    c.model = "test-model";
    c.api_key_env = "ATTENTIVE_TEST_KEY";
    c.timeout_ms = 2000;
    return c;
  }

  std::string last_body() {
    std::lock_guard lock(mu_);
    return last_body_;
  }
  std::string last_auth() {
    std::lock_guard lock(mu_);
    return last_auth_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  int status_ = 200;
  std::string reply_;
  std::chrono::milliseconds delay_{0};
  std::mutex mu_;
  std::string last_body_, last_auth_;
};

std::string ok_reply(const std::string& content, const std::string& finish = "stop") {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}},
                                      {"finish_reason", finish}}}}}
      .dump();
}

ErrorCode code_of(HttpCompletionClient& c, const CompletionRequest& r) {
  try {
    c.complete(r);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::InvalidArgument;
}

const CompletionRequest kRequest{"", {{"user", "Human: I love hiking"}}, 0.7};

TEST(HttpCompletion, ReturnsContentAndSendsRequest) {
  FakeEndpoint ep;
  ep.reply(200, ok_reply("That sounds lovely."));
  ::setenv("ATTENTIVE_TEST_KEY", "sekret", 1);
  HttpCompletionClient c(ep.config());
  EXPECT_EQ(c.complete(kRequest), "That sounds lovely.");
  const auto body = nlohmann::json::parse(ep.last_body());
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_EQ(body["messages"][0]["content"], "Human: I love hiking");
  EXPECT_DOUBLE_EQ(body["temperature"].get<double>(), 0.7);
  EXPECT_EQ(ep.last_auth(), "Bearer sekret");
  ::unsetenv("ATTENTIVE_TEST_KEY");
}

TEST(HttpCompletion, ErrorMapping) {
  FakeEndpoint ep;
  HttpCompletionClient c(ep.config());
  ep.reply(400, R"({"error":{"code":"content_filter","message":"no"}})");
  EXPECT_EQ(code_of(c, kRequest), ErrorCode::ContentFiltered);
  ep.reply(400, R"({"error":{"code":"x","innererror":{"code":"ResponsibleAIPolicyViolation"}}})");
  EXPECT_EQ(code_of(c, kRequest), ErrorCode::ContentFiltered);
  ep.reply(200, ok_reply("", "content_filter"));
  EXPECT_EQ(code_of(c, kRequest), ErrorCode::ContentFiltered);
  ep.reply(503, "busy");
  EXPECT_EQ(code_of(c, kRequest), ErrorCode::BackendUnavailable);
  ep.reply(200, "not json");
  EXPECT_EQ(code_of(c, kRequest), ErrorCode::MalformedBackendReply);
  ep.reply(200, R"({"choices":[]})");
  EXPECT_EQ(code_of(c, kRequest), ErrorCode::MalformedBackendReply);
}

TEST(HttpCompletion, TimeoutIsBounded) {
  FakeEndpoint ep;
  ep.reply(200, ok_reply("late"), std::chrono::milliseconds(1500));
  auto cfg = ep.config();
  cfg.timeout_ms = 300;
  HttpCompletionClient c(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  EXPECT_EQ(code_of(c, kRequest), ErrorCode::BackendUnavailable);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::milliseconds(1200));
}

TEST(HttpCompletion, RefusedConnection) {
  EndpointConfig cfg;
  {
    FakeEndpoint ep;
    cfg = ep.config();
  }
  cfg.timeout_ms = 500;
  HttpCompletionClient c(cfg);
  EXPECT_EQ(code_of(c, kRequest), ErrorCode::BackendUnavailable);
}

TEST(HttpCompletion, ContentFilterDrivesListenerFallback) {
  FakeEndpoint ep;
  ep.reply(400, R"({"error":{"code":"content_filter"}})");
  ActiveListener listener(std::make_shared<HttpCompletionClient>(ep.config()));
  const auto r = listener.respond("something awful", {}, 5);
  EXPECT_EQ(r.source, ResponseSource::ScriptedFallback);
  EXPECT_EQ(r.text, ScriptedFallbacks{}.at(5));
}

}  // namespace
}  // namespace attentive
