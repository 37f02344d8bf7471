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

#include "promptprobe/detector.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "promptprobe/errors.hpp"
#include "promptprobe/hash.hpp"
#include "promptprobe/vocabulary.hpp"

namespace promptprobe {

using nlohmann::json;

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

BoundingBox box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ValidationError("box must have 4 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

// Score from whichever confidence source the entry carries.
double score_from_json(const json& d) {
  if (d.contains("token_logits")) {
    const auto logits = d.at("token_logits").get<std::vector<double>>();
    return gd_confidence(logits);
  }
  if (d.contains("objectness")) {
    return yoloe_confidence(d.at("objectness").get<double>(), d.at("class_prob").get<double>());
  }
  return d.at("score").get<double>();
}

bool truthy(const std::map<std::string, std::string>& params, const std::string& key,
            bool fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  return it->second == "true" || it->second == "1" || it->second == "yes";
}

}  // namespace

std::string_view to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::grounding_transformer: return "grounding_transformer";
    case DetectorKind::realtime_embedding: return "realtime_embedding";
    case DetectorKind::mock: return "mock";
  }
  return "?";
}

DetectorKind parse_detector_kind(std::string_view name) {
  for (DetectorKind k : {DetectorKind::grounding_transformer, DetectorKind::realtime_embedding,
                         DetectorKind::mock}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown detector kind: " + std::string(name));
}

double gd_confidence(std::span<const double> token_logits) {
  if (token_logits.empty()) throw ValidationError("gd_confidence: empty logit vector");
  double best = 0.0;
  for (double logit : token_logits) {
    if (!std::isfinite(logit)) throw ValidationError("gd_confidence: non-finite logit");
    best = std::max(best, sigmoid(logit));
  }
  return best;
}

double yoloe_confidence(double objectness, double class_prob) {
  if (!(objectness >= 0.0 && objectness <= 1.0) || !(class_prob >= 0.0 && class_prob <= 1.0)) {
    throw ValidationError("yoloe_confidence: inputs must lie in [0, 1]");
  }
  return objectness * class_prob;
}

// --- detection JSON ----------------------------------------------------------

json detections_to_json(std::span<const Detection> detections) {
  json out = json::array();
  for (const Detection& d : detections) {
    json j = {{"box", {d.box.x1, d.box.y1, d.box.x2, d.box.y2}},
              {"score", d.score},
              {"backend_id", d.backend_id}};
    if (d.matched_phrase) j["phrase"] = *d.matched_phrase;
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<Detection> detections_from_json(const json& j) {
  std::vector<Detection> out;
  for (const json& d : j) {
    Detection det;
    det.box = box_from_json(d.at("box"));
    det.score = d.at("score").get<double>();
    det.backend_id = d.value("backend_id", std::string());
    if (d.contains("phrase")) det.matched_phrase = d.at("phrase").get<std::string>();
    out.push_back(std::move(det));
  }
  return out;
}

// --- mock fixtures -----------------------------------------------------------

std::vector<MockFixtureStore::Rule> MockFixtureStore::parse_rules(const json& doc) {
  if (!doc.is_array()) throw ConfigError("mock fixture must be a list of rules");
  std::vector<Rule> rules;
  for (const json& r : doc) {
    Rule rule;
    rule.prompt_substring = normalize_category(r.value("prompt_substring", std::string()));
    if (r.contains("image_id")) rule.image_id = r.at("image_id").get<std::string>();
    for (const json& d : r.at("detections")) {
      Detection det;
      det.box = box_from_json(d.at("box"));
      det.score = score_from_json(d);
      if (d.contains("phrase")) det.matched_phrase = d.at("phrase").get<std::string>();
      rule.detections.push_back(std::move(det));
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

MockFixtureStore MockFixtureStore::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("mock fixture directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  MockFixtureStore store;
  for (const auto& file : files) {
    std::ifstream in(file);
    try {
      store.add_scenario(file.stem().string(), parse_rules(json::parse(in)));
    } catch (const json::exception& e) {
      throw ConfigError("malformed mock fixture " + file.string() + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ConfigError("malformed mock fixture " + file.string() + ": " + e.what());
    }
  }
  return store;
}

void MockFixtureStore::add_scenario(std::string scenario, std::vector<Rule> rules) {
  scenarios_[std::move(scenario)] = std::move(rules);
}

bool MockFixtureStore::has_scenario(std::string_view scenario) const {
  return scenarios_.find(scenario) != scenarios_.end();
}

std::vector<Detection> MockFixtureStore::mock_detect(std::string_view scenario,
                                                     std::string_view image_id,
                                                     std::string_view prompt_text) const {
  auto it = scenarios_.find(scenario);
  if (it == scenarios_.end()) {
    throw ConfigError("unknown mock scenario: " + std::string(scenario));
  }
  const std::string prompt = normalize_category(prompt_text);
  for (const Rule& rule : it->second) {
    if (rule.image_id && *rule.image_id != image_id) continue;
    if (prompt.find(rule.prompt_substring) == std::string::npos) continue;
    return rule.detections;
  }
  return {};
}

MockBackend::MockBackend(std::shared_ptr<const MockFixtureStore> store, std::string scenario,
                         std::string backend_id)
    : store_(std::move(store)), scenario_(std::move(scenario)), backend_id_(std::move(backend_id)) {
  if (!store_->has_scenario(scenario_)) {
    throw ConfigError("unknown mock scenario: " + scenario_);
  }
}

std::vector<Detection> MockBackend::infer(std::string_view image_id, const RgbImage&,
                                          std::string_view prompt) {
  auto out = store_->mock_detect(scenario_, image_id, prompt);
  for (Detection& d : out) d.backend_id = backend_id_;
  return out;
}

// --- remote services ---------------------------------------------------------

RemoteDetectorBackend::RemoteDetectorBackend(DetectorSpec spec, HttpTransport& transport)
    : spec_(std::move(spec)), transport_(transport) {
  auto it = spec_.params.find("service_url");
  if (it == spec_.params.end() || it->second.empty()) {
    throw ConfigError("detector " + spec_.backend_id + " needs params.service_url");
  }
  url_ = it->second;
  reentrant_ = truthy(spec_.params, "reentrant", false);
}

std::vector<Detection> RemoteDetectorBackend::parse_response(DetectorKind kind,
                                                             const json& body,
                                                             int image_width,
                                                             int image_height,
                                                             const std::string& backend_id) {
  std::vector<Detection> out;
  for (const json& d : body.at("detections")) {
    Detection det;
    det.backend_id = backend_id;
    try {
      const json& b = d.at("box");
      const std::string format = d.value("box_format", std::string("xyxy"));
      if (format == "cxcywh_norm") {
        if (!b.is_array() || b.size() != 4) throw ValidationError("box must have 4 numbers");
        det.box = from_normalized_center(b[0].get<double>(), b[1].get<double>(),
                                         b[2].get<double>(), b[3].get<double>(), image_width,
                                         image_height);
      } else if (format == "xyxy") {
        det.box = box_from_json(b);
      } else {
        throw ValidationError("unknown box_format " + format);
      }
      if (kind == DetectorKind::grounding_transformer && d.contains("token_logits")) {
        det.score = gd_confidence(d.at("token_logits").get<std::vector<double>>());
      } else if (kind == DetectorKind::realtime_embedding && d.contains("objectness")) {
        det.score = yoloe_confidence(d.at("objectness").get<double>(),
                                     d.at("class_prob").get<double>());
      } else {
        det.score = d.at("score").get<double>();
      }
    } catch (const ValidationError& e) {
      spdlog::warn("{}: dropping malformed detection: {}", backend_id, e.what());
      continue;
    } catch (const json::exception& e) {
      spdlog::warn("{}: dropping malformed detection: {}", backend_id, e.what());
      continue;
    }
    if (d.contains("phrase")) det.matched_phrase = d.at("phrase").get<std::string>();
    out.push_back(std::move(det));
  }
  return out;
}

std::vector<Detection> RemoteDetectorBackend::infer(std::string_view, const RgbImage& image,
                                                    std::string_view prompt) {
  json params = json::object();
  for (const auto& [k, v] : spec_.params) {
    if (k != "service_url" && k != "reentrant") params[k] = v;
  }
  const json request = {{"prompt", prompt},
                        {"width", image.width()},
                        {"height", image.height()},
                        {"image_png_base64", base64_encode(encode_png(image))},
                        {"params", params}};
  HttpResponse response;
  try {
    response = transport_.post_json(url_, {}, request.dump());
  } catch (const TransportError& e) {
    throw BackendError(spec_.backend_id + " unavailable: " + e.what());
  }
  if (response.status != 200) {
    throw BackendError(spec_.backend_id + " returned HTTP " + std::to_string(response.status));
  }
  try {
    return parse_response(spec_.kind, json::parse(response.body), image.width(),
                          image.height(), spec_.backend_id);
  } catch (const json::exception& e) {
    throw BackendError(spec_.backend_id + " returned unparseable output: " + e.what());
  }
}

// --- recording -----------------------------------------------------------------

RecordingBackend::RecordingBackend(DetectorSpec spec, std::unique_ptr<DetectorBackend> inner,
                                   ExchangeStore& store, RunMode mode)
    : spec_(std::move(spec)), inner_(std::move(inner)), store_(store), mode_(mode) {
  if (mode_ != RunMode::replay && inner_ == nullptr) {
    throw ConfigError("detector " + spec_.backend_id + " has no backend outside replay mode");
  }
}

std::vector<Detection> RecordingBackend::infer(std::string_view image_id,
                                               const RgbImage& image,
                                               std::string_view prompt) {
  json params = json::object();
  for (const auto& [k, v] : spec_.params) params[k] = v;
  const json request = {{"kind", "detector"},
                        {"backend_id", spec_.backend_id},
                        {"detector_kind", to_string(spec_.kind)},
                        {"params", params},
                        {"image_hash", content_hash(image)},
                        {"prompt", prompt}};
  if (mode_ != RunMode::live) {
    if (auto hit = store_.get(request)) {
      try {
        return detections_from_json(hit->at("detections"));
      } catch (const std::exception& e) {
        if (store_.replay()) {
          throw ReplayError("corrupted replay entry " + ExchangeStore::key_for(request) + ": " +
                            e.what());
        }
        spdlog::warn("{}: ignoring malformed cached detections: {}", spec_.backend_id, e.what());
      }
    }
  }
  auto detections = inner_->infer(image_id, image, prompt);
  store_.put(request, {{"detections", detections_to_json(detections)}});
  return detections;
}

// --- contract ------------------------------------------------------------------

std::vector<Detection> postprocess_detections(std::vector<Detection> raw,
                                              const DetectorSpec& spec, int image_width,
                                              int image_height, std::size_t* dropped) {
  std::vector<Detection> out;
  std::size_t n_dropped = 0;
  for (Detection& d : raw) {
    const bool finite_box = std::isfinite(d.box.x1) && std::isfinite(d.box.y1) &&
                            std::isfinite(d.box.x2) && std::isfinite(d.box.y2);
    if (!std::isfinite(d.score) || d.score < 0.0 || d.score > 1.0 || !finite_box ||
        !(d.box.x1 < d.box.x2) || !(d.box.y1 < d.box.y2)) {
      spdlog::debug("{}: dropping malformed detection (score {})", spec.backend_id, d.score);
      ++n_dropped;
      continue;
    }
    auto clipped = clip_box(d.box, image_width, image_height);
    if (!clipped) {
      ++n_dropped;
      continue;
    }
    if (d.score < spec.score_threshold) continue;
    d.box = *clipped;
    if (d.backend_id.empty()) d.backend_id = spec.backend_id;
    out.push_back(std::move(d));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Detection& a, const Detection& b) { return a.score > b.score; });
  if (dropped) *dropped = n_dropped;
  return out;
}

Detector::Detector(DetectorSpec spec, std::unique_ptr<DetectorBackend> backend)
    : spec_(std::move(spec)), backend_(std::move(backend)) {
  if (!(spec_.score_threshold >= 0.0 && spec_.score_threshold <= 1.0)) {
    throw ConfigError("score_threshold of " + spec_.backend_id + " must lie in [0, 1]");
  }
  if (!backend_) throw ConfigError("detector " + spec_.backend_id + " has no backend");
}

std::vector<Detection> Detector::detect(const RgbImage& image, std::string_view image_id,
                                        const EnhancedPrompt& prompt) {
  if (prompt.text.empty()) throw ValidationError("detect: empty prompt");
  if (image.empty()) throw ValidationError("detect: empty image");
  std::vector<Detection> raw;
  if (backend_->reentrant()) {
    raw = backend_->infer(image_id, image, prompt.text);
  } else {
    std::lock_guard lock(serial_);
    raw = backend_->infer(image_id, image, prompt.text);
  }
  std::size_t dropped = 0;
  auto out = postprocess_detections(std::move(raw), spec_, image.width(), image.height(),
                                    &dropped);
  if (dropped > 0) {
    dropped_ += dropped;
    spdlog::warn("{}: dropped {} malformed detection(s) on {}", spec_.backend_id, dropped,
                 image_id);
  }
  return out;
}

}  // namespace promptprobe
