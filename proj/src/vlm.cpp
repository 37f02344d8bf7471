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

#include "promptprobe/vlm.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <ctime>
#include <fstream>
#include <thread>

#include "promptprobe/errors.hpp"
#include "promptprobe/hash.hpp"

namespace promptprobe {

using nlohmann::json;

namespace {

std::string utc_timestamp() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)));
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// RAII permit on the in-flight semaphore.
class Permit {
 public:
  explicit Permit(std::counting_semaphore<1024>& sem) : sem_(sem) { sem_.acquire(); }
  ~Permit() { sem_.release(); }
  Permit(const Permit&) = delete;
  Permit& operator=(const Permit&) = delete;

 private:
  std::counting_semaphore<1024>& sem_;
};

}  // namespace

json VlmRequest::to_json() const {
  json decoding_json = json::object();
  if (decoding.temperature) decoding_json["temperature"] = *decoding.temperature;
  if (decoding.max_tokens) decoding_json["max_tokens"] = *decoding.max_tokens;
  return {{"kind", "vlm"},
          {"template_id", template_id},
          {"instruction", instruction},
          {"input_text", input_text},
          {"image_hash", image_hash},
          {"model_id", model_id},
          {"decoding", std::move(decoding_json)}};
}

std::string VlmRequest::cache_key() const { return ExchangeStore::key_for(to_json()); }

std::optional<VlmResponse> VlmCache::cache_get(const VlmRequest& request) const {
  const auto stored = store_.get(request.to_json());
  if (!stored) return std::nullopt;
  try {
    VlmResponse r{stored->at("text").get<std::string>(),
                  stored->at("timestamp").get<std::string>(),
                  stored->at("raw_payload_hash").get<std::string>()};
    return r;
  } catch (const json::exception& e) {
    if (store_.replay()) {
      throw ReplayError("corrupted replay entry " + request.cache_key() + ": " + e.what());
    }
    spdlog::warn("ignoring malformed cache response {}: {}", request.cache_key(), e.what());
    return std::nullopt;
  }
}

void VlmCache::cache_put(const VlmRequest& request, const VlmResponse& response) {
  store_.put(request.to_json(), {{"text", response.text},
                                 {"timestamp", response.timestamp},
                                 {"raw_payload_hash", response.raw_payload_hash}});
}

// --- ChatCompletionsBackend ------------------------------------------------

ChatCompletionsBackend::ChatCompletionsBackend(HttpTransport& transport,
                                               std::string base_url, std::string token)
    : transport_(transport), token_(std::move(token)) {
  while (!base_url.empty() && base_url.back() == '/') base_url.pop_back();
  url_ = base_url + "/chat/completions";
}

json ChatCompletionsBackend::build_payload(const VlmRequest& request,
                                           const RgbImage& image) const {
  json user_content = json::array();
  if (!request.input_text.empty()) {
    user_content.push_back({{"type", "text"}, {"text", "Text prompt: " + request.input_text}});
  }
  const auto png = encode_png(image);
  user_content.push_back(
      {{"type", "image_url"},
       {"image_url", {{"url", "data:image/png;base64," + base64_encode(png)}}}});
  json payload = {{"model", request.model_id},
                  {"messages",
                   {{{"role", "system"}, {"content", request.instruction}},
                    {{"role", "user"}, {"content", std::move(user_content)}}}}};
  if (request.decoding.temperature) payload["temperature"] = *request.decoding.temperature;
  if (request.decoding.max_tokens) payload["max_tokens"] = *request.decoding.max_tokens;
  return payload;
}

std::string ChatCompletionsBackend::parse_reply(const std::string& body) {
  try {
    const json j = json::parse(body);
    const json& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    std::string text;
    for (const json& part : content) {
      if (part.value("type", "") == "text") text += part.at("text").get<std::string>();
    }
    return text;
  } catch (const json::exception& e) {
    throw VlmError(std::string("unparseable chat completion: ") + e.what());
  }
}

VlmReply ChatCompletionsBackend::complete(const VlmRequest& request, const RgbImage& image,
                                          const VlmCallContext&) {
  HttpHeaders headers;
  if (!token_.empty()) headers.emplace_back("Authorization", "Bearer " + token_);
  const auto response = transport_.post_json(url_, headers, build_payload(request, image).dump());
  if (is_transient_status(response.status)) {
    throw TransportError("HTTP " + std::to_string(response.status) + " from " + url_);
  }
  if (response.status != 200) {
    throw VlmError("HTTP " + std::to_string(response.status) + " from " + url_ + ": " +
                   response.body.substr(0, 200));
  }
  return {parse_reply(response.body), response.body};
}

// --- FixtureVlmBackend -----------------------------------------------------

FixtureVlmBackend FixtureVlmBackend::from_json(const json& doc) {
  FixtureVlmBackend backend;
  try {
    for (const json& r : doc.value("initial", json::array())) {
      backend.initial_[{r.at("image_id").get<std::string>(),
                        r.at("target_id").get<std::string>(),
                        parse_detail_level(r.at("detail_level").get<std::string>())}] =
          r.at("text").get<std::string>();
    }
    for (const json& r : doc.value("enhance", json::array())) {
      backend.enhance_[{parse_enhancement_method(r.at("method").get<std::string>()),
                        r.value("image_id", std::string()),
                        r.at("input_text").get<std::string>()}] =
          r.at("text").get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed VLM fixture: ") + e.what());
  }
  return backend;
}

FixtureVlmBackend FixtureVlmBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("VLM fixture not found: " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed VLM fixture " + path.string() + ": " + e.what());
  }
}

VlmReply FixtureVlmBackend::complete(const VlmRequest& request, const RgbImage&,
                                     const VlmCallContext& context) {
  if (context.method) {
    auto it = enhance_.find({*context.method, context.image_id, request.input_text});
    if (it == enhance_.end()) it = enhance_.find({*context.method, "", request.input_text});
    if (it == enhance_.end()) {
      throw VlmError("no fixture answer for " + std::string(to_string(*context.method)) +
                     " of \"" + request.input_text + "\" on " + context.image_id);
    }
    return {it->second, it->second};
  }
  if (!context.level) throw VlmError("fixture call without level or method");
  auto it = initial_.find({context.image_id, context.target_id, *context.level});
  if (it == initial_.end()) {
    throw VlmError("no fixture prompt for " + context.image_id + "/" + context.target_id +
                   " at " + std::string(to_string(*context.level)));
  }
  return {it->second, it->second};
}

// --- VlmClient -------------------------------------------------------------

VlmClient::VlmClient(VlmSettings settings, RunMode mode, VlmBackend* backend,
                     ExchangeStore* store, Sleeper sleeper)
    : settings_(std::move(settings)),
      mode_(mode),
      backend_(backend),
      store_(store),
      sleeper_(std::move(sleeper)),
      in_flight_(std::clamp(settings_.max_in_flight, 1, 1024)) {
  if (!sleeper_) {
    sleeper_ = [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); };
  }
  if (mode_ == RunMode::replay && (store_ == nullptr || !store_->replay())) {
    throw ConfigError("replay mode requires a replay store");
  }
  if (mode_ != RunMode::replay && backend_ == nullptr) {
    throw ConfigError("live and cached modes require a VLM backend");
  }
  if (mode_ == RunMode::cached && store_ == nullptr) {
    throw ConfigError("cached mode requires a cache store");
  }
}

VlmRequest VlmClient::make_request(TemplateId id, std::string instruction,
                                   std::string input_text, const RgbImage& image) const {
  return {std::string(to_string(id)), std::move(instruction), std::move(input_text),
          content_hash(image), settings_.model_id, settings_.decoding};
}

VlmReply VlmClient::call_with_retries(const VlmRequest& request, const RgbImage& image,
                                      const VlmCallContext& context) {
  auto backoff = std::chrono::duration<double>(settings_.initial_backoff_seconds);
  const int attempts = std::max(1, settings_.max_attempts);
  for (int attempt = 1;; ++attempt) {
    try {
      Permit permit(in_flight_);
      ++backend_calls_;
      return backend_->complete(request, image, context);
    } catch (const TransportError& e) {
      if (attempt >= attempts) {
        throw VlmError(fmt::format("VLM endpoint failed after {} attempts: {}", attempts,
                                   e.what()));
      }
      spdlog::warn("VLM attempt {}/{} failed: {}; retrying in {:.1f}s", attempt, attempts,
                   e.what(), backoff.count());
      sleeper_(backoff);
      backoff *= 2;
    }
  }
}

VlmClient::Answer VlmClient::exchange(const VlmRequest& request, const RgbImage& image,
                                      const VlmCallContext& context) {
  if (mode_ != RunMode::live && store_ != nullptr) {
    ++lookups_;
    VlmCache cache(*store_);
    if (auto hit = cache.cache_get(request)) {
      ++hits_;
      return {hit->text,
              mode_ == RunMode::replay ? Provenance::replay : Provenance::cache};
    }
  }
  const VlmReply reply = call_with_retries(request, image, context);
  if (store_ != nullptr) {
    VlmCache(*store_).cache_put(
        request, {reply.text, utc_timestamp(), sha256_hex(reply.raw_payload)});
  }
  return {reply.text, backend_->provenance()};
}

PromptVariant VlmClient::generate_initial_prompt(const RgbImage& overlay_image,
                                                 DetailLevel level,
                                                 const std::string& image_id,
                                                 const std::string& target_id) {
  const TemplateId id = initial_template_for(level);
  const VlmRequest request =
      make_request(id, render_initial_instruction(level), "", overlay_image);
  Answer answer =
      exchange(request, overlay_image, {image_id, target_id, level, std::nullopt});
  std::string text = trim(answer.text);
  if (text.empty()) throw VlmError("empty prompt");
  return make_prompt_variant(std::move(text), level, image_id, target_id, answer.provenance,
                             request.template_id, settings_.model_id);
}

EnhancedPrompt VlmClient::enhance_key_object(const RgbImage& image,
                                             const PromptVariant& prompt) {
  if (prompt.text.empty()) throw ValidationError("empty prompt");
  const VlmRequest request =
      make_request(TemplateId::enhance_key_object_extraction,
                   render_enhancement_instruction(EnhancementMethod::key_object_extraction),
                   prompt.text, image);
  Answer answer = exchange(request, image,
                           {prompt.image_id, prompt.target_id, prompt.detail_level,
                            EnhancementMethod::key_object_extraction});
  std::string text = trim(answer.text);
  if (text.empty()) throw VlmError("empty prompt");
  return {std::move(text), EnhancementMethod::key_object_extraction, prompt, std::nullopt};
}

EnhancedPrompt VlmClient::enhance_semantic_category(const RgbImage& image,
                                                    const PromptVariant& prompt,
                                                    const CategoryVocabulary& vocabulary) {
  if (prompt.text.empty()) throw ValidationError("empty prompt");
  const VlmRequest request = make_request(
      TemplateId::enhance_semantic_category_grounding,
      render_enhancement_instruction(EnhancementMethod::semantic_category_grounding),
      prompt.text, image);
  Answer answer = exchange(request, image,
                           {prompt.image_id, prompt.target_id, prompt.detail_level,
                            EnhancementMethod::semantic_category_grounding});
  std::string text = normalize_category(answer.text);
  if (text.empty()) throw VlmError("empty prompt");
  const bool valid = vocabulary.contains(text);
  return {std::move(text), EnhancementMethod::semantic_category_grounding, prompt, valid};
}

EnhancedPrompt VlmClient::enhance(EnhancementMethod method, const RgbImage& image,
                                  const PromptVariant& prompt) {
  switch (method) {
    case EnhancementMethod::raw: return passthrough_raw(prompt);
    case EnhancementMethod::key_object_extraction: return enhance_key_object(image, prompt);
    case EnhancementMethod::semantic_category_grounding:
      return enhance_semantic_category(image, prompt);
  }
  throw ValidationError("unknown enhancement method");
}

VlmStats VlmClient::stats() const { return {lookups_.load(), hits_.load(), backend_calls_.load()}; }

}  // namespace promptprobe
