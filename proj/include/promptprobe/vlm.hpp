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

#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <tuple>

#include "promptprobe/http.hpp"
#include "promptprobe/prompt.hpp"
#include "promptprobe/raster.hpp"
#include "promptprobe/store.hpp"
#include "promptprobe/templates.hpp"
#include "promptprobe/vocabulary.hpp"

namespace promptprobe {

struct DecodingParams {
  // Omitted from the payload when unset, for endpoints that reject it.
  std::optional<double> temperature = 0.0;
  std::optional<int> max_tokens;

  bool operator==(const DecodingParams&) const = default;
};

/// Everything that determines a model answer; its canonical JSON is the
/// cache key. `input_text` is the prompt being enhanced (empty for initial
/// generation).
struct VlmRequest {
  std::string template_id;
  std::string instruction;
  std::string input_text;
  std::string image_hash;
  std::string model_id;
  DecodingParams decoding;

  nlohmann::json to_json() const;
  std::string cache_key() const;
};

struct VlmResponse {
  std::string text;
  std::string timestamp;
  std::string raw_payload_hash;

  bool operator==(const VlmResponse&) const = default;
};

class VlmCache {
 public:
  explicit VlmCache(ExchangeStore& store) : store_(store) {}

  std::optional<VlmResponse> cache_get(const VlmRequest& request) const;
  void cache_put(const VlmRequest& request, const VlmResponse& response);

 private:
  ExchangeStore& store_;
};

/// Identifies which dataset item a call is about. Only scripted backends
/// look at it; it is not part of the cache key.
struct VlmCallContext {
  std::string image_id;
  std::string target_id;
  std::optional<DetailLevel> level;
  std::optional<EnhancementMethod> method;
};

struct VlmReply {
  std::string text;
  std::string raw_payload;
};

class VlmBackend {
 public:
  virtual ~VlmBackend() = default;
  virtual VlmReply complete(const VlmRequest& request, const RgbImage& image,
                            const VlmCallContext& context) = 0;
  virtual Provenance provenance() const = 0;
};

/// OpenAI-style chat completions: the instruction as the system message, the
/// optional input text plus one base64 PNG as the user message.
class ChatCompletionsBackend : public VlmBackend {
 public:
  ChatCompletionsBackend(HttpTransport& transport, std::string base_url, std::string token);

  nlohmann::json build_payload(const VlmRequest& request, const RgbImage& image) const;
  static std::string parse_reply(const std::string& body);

  VlmReply complete(const VlmRequest& request, const RgbImage& image,
                    const VlmCallContext& context) override;
  Provenance provenance() const override { return Provenance::live; }

 private:
  HttpTransport& transport_;
  std::string url_;
  std::string token_;
};

/// Scripted answers read from a JSON file:
///   {"initial": [{image_id, target_id, detail_level, text}],
///    "enhance": [{method, input_text, image_id?, text}]}
/// Enhancement rules without image_id apply to every image.
class FixtureVlmBackend : public VlmBackend {
 public:
  static FixtureVlmBackend from_file(const std::filesystem::path& path);
  static FixtureVlmBackend from_json(const nlohmann::json& doc);

  VlmReply complete(const VlmRequest& request, const RgbImage& image,
                    const VlmCallContext& context) override;
  Provenance provenance() const override { return Provenance::fixture; }

 private:
  std::map<std::tuple<std::string, std::string, DetailLevel>, std::string> initial_;
  std::map<std::tuple<EnhancementMethod, std::string, std::string>, std::string> enhance_;
};

struct VlmSettings {
  // Base URL of an OpenAI-compatible API, or "fixture:<path>".
  std::string endpoint;
  std::string model_id = "gpt-5-2025-08-07";
  std::string token_env = "OPENAI_API_KEY";
  DecodingParams decoding;
  int max_in_flight = 4;
  int max_attempts = 3;
  double initial_backoff_seconds = 1.0;

  bool operator==(const VlmSettings&) const = default;
};

struct VlmStats {
  std::size_t lookups = 0;
  std::size_t hits = 0;
  std::size_t backend_calls = 0;
};

/// Prompt generation and enhancement with caching and replay.
///
/// live:   always asks the backend, records every exchange.
/// cached: serves recorded exchanges, asks the backend on a miss.
/// replay: serves recorded exchanges only; a miss raises ReplayMiss.
class VlmClient {
 public:
  using Sleeper = std::function<void(std::chrono::duration<double>)>;

  VlmClient(VlmSettings settings, RunMode mode, VlmBackend* backend, ExchangeStore* store,
            Sleeper sleeper = {});

  PromptVariant generate_initial_prompt(const RgbImage& overlay_image, DetailLevel level,
                                        const std::string& image_id,
                                        const std::string& target_id);

  EnhancedPrompt enhance_key_object(const RgbImage& image, const PromptVariant& prompt);

  /// Output is normalized (trim, lower-case, collapse whitespace) and checked
  /// against `vocabulary`. Out-of-vocabulary answers pass through flagged.
  EnhancedPrompt enhance_semantic_category(
      const RgbImage& image, const PromptVariant& prompt,
      const CategoryVocabulary& vocabulary = CategoryVocabulary::bundled());

  EnhancedPrompt enhance(EnhancementMethod method, const RgbImage& image,
                         const PromptVariant& prompt);

  VlmStats stats() const;
  const VlmSettings& settings() const { return settings_; }

 private:
  struct Answer {
    std::string text;
    Provenance provenance;
  };

  Answer exchange(const VlmRequest& request, const RgbImage& image,
                  const VlmCallContext& context);
  VlmReply call_with_retries(const VlmRequest& request, const RgbImage& image,
                             const VlmCallContext& context);
  VlmRequest make_request(TemplateId id, std::string instruction, std::string input_text,
                          const RgbImage& image) const;

  VlmSettings settings_;
  RunMode mode_;
  VlmBackend* backend_;
  ExchangeStore* store_;
  Sleeper sleeper_;
  std::counting_semaphore<1024> in_flight_;
  std::atomic<std::size_t> lookups_{0};
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> backend_calls_{0};
};

}  // namespace promptprobe
