// Copyright 2026 The promptprobe Authors. All rights reserved.
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

// Shared fixtures for the test binaries: scratch directories, scripted
// transports and backends, repository paths.

#pragma once

#include <atomic>
#include <deque>
#include <filesystem>
#include <mutex>
#include <random>
#include <string>

#include "promptprobe/http.hpp"
#include "promptprobe/vlm.hpp"

namespace promptprobe::testing {

inline std::filesystem::path source_dir() { return PROMPTPROBE_SOURCE_DIR; }
inline std::filesystem::path bundle_dir() { return source_dir() / "data" / "replay_bundle"; }

/// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("promptprobe-" + tag + "-" + std::to_string(rd()) + "-" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Transport that replays a queue of scripted responses and counts calls.
/// An empty queue answers with `fallback`.
class ScriptedTransport : public HttpTransport {
 public:
  struct Step {
    bool throw_transport_error = false;
    HttpResponse response;
  };

  explicit ScriptedTransport(HttpResponse fallback = {200, "{}"}) : fallback_(std::move(fallback)) {}

  void push(int status, std::string body) { steps_.push_back({false, {status, std::move(body)}}); }
  void push_transport_error() { steps_.push_back({true, {}}); }

  HttpResponse post_json(const std::string& url, const HttpHeaders& headers,
                         const std::string& body) override {
    std::lock_guard lock(mutex_);
    ++calls_;
    last_url_ = url;
    last_headers_ = headers;
    last_body_ = body;
    if (steps_.empty()) return fallback_;
    Step step = steps_.front();
    steps_.pop_front();
    if (step.throw_transport_error) throw TransportError("connection reset");
    return step.response;
  }

  int calls() const { return calls_.load(); }
  std::string last_url() const { return last_url_; }
  HttpHeaders last_headers() const { return last_headers_; }
  std::string last_body() const { return last_body_; }

 private:
  std::mutex mutex_;
  std::deque<Step> steps_;
  HttpResponse fallback_;
  std::atomic<int> calls_{0};
  std::string last_url_;
  HttpHeaders last_headers_;
  std::string last_body_;
};

/// VLM backend that answers every call with a fixed text and counts calls.
class CountingVlmBackend : public VlmBackend {
 public:
  explicit CountingVlmBackend(std::string answer = "answer") : answer_(std::move(answer)) {}

  VlmReply complete(const VlmRequest&, const RgbImage&, const VlmCallContext&) override {
    ++calls_;
    return {answer_, "{\"scripted\":true}"};
  }
  Provenance provenance() const override { return Provenance::live; }
  int calls() const { return calls_.load(); }

 private:
  std::string answer_;
  std::atomic<int> calls_{0};
};

/// Chat-completions response body carrying `text`.
inline std::string chat_body(const std::string& text) {
  nlohmann::json j = {{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}}};
  return j.dump();
}

}  // namespace promptprobe::testing
