// Copyright 2026 The Storyfier Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include <httplib.h>

#include "storyfier/error.hpp"
#include "storyfier/genclient.hpp"

namespace storyfier::testing {

/// httplib server on a free loopback port, served from a background thread.
class StubServer {
 public:
  StubServer() = default;
  ~StubServer() { stop(); }
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  httplib::Server& server() { return server_; }

  void start() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw std::runtime_error("stub server could not bind");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void stop() {
    if (thread_.joinable()) {
      server_.stop();
      thread_.join();
    }
  }

  int port() const { return port_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = -1;
};

/// Returns scripted outputs in order; an empty script entry throws BackendError.
class ScriptedBackend : public genclient::Backend {
 public:
  std::deque<std::optional<std::vector<std::string>>> stories;
  std::deque<std::optional<std::string>> spans;
  std::vector<genclient::StoryCall> story_calls;
  std::vector<genclient::InfillCall> infill_calls;

  std::vector<std::string> generate(const genclient::StoryCall& call) override {
    std::lock_guard lock(mu_);
    story_calls.push_back(call);
    if (stories.empty()) throw BackendError("script exhausted");
    auto next = stories.front();
    stories.pop_front();
    if (!next) throw BackendError("scripted failure");
    return *next;
  }

  std::string infill(const genclient::InfillCall& call) override {
    std::lock_guard lock(mu_);
    infill_calls.push_back(call);
    if (spans.empty()) throw BackendError("script exhausted");
    auto next = spans.front();
    spans.pop_front();
    if (!next) throw BackendError("scripted failure");
    return *next;
  }

  std::string describe() const override { return "scripted"; }

 private:
  std::mutex mu_;
};

}  // namespace storyfier::testing
