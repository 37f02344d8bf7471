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
#include <filesystem>
#include <json.hpp>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "promptprobe/detection.hpp"
#include "promptprobe/http.hpp"
#include "promptprobe/prompt.hpp"
#include "promptprobe/raster.hpp"
#include "promptprobe/store.hpp"

namespace promptprobe {

enum class DetectorKind { grounding_transformer, realtime_embedding, mock };

std::string_view to_string(DetectorKind kind);
DetectorKind parse_detector_kind(std::string_view name);

struct DetectorSpec {
  std::string backend_id;
  DetectorKind kind = DetectorKind::mock;
  double score_threshold = 0.25;
  std::map<std::string, std::string> params;

  bool operator==(const DetectorSpec&) const = default;
};

/// Phrase-grounding confidence: the largest sigmoid over per-token logits.
/// Throws ValidationError on an empty vector or a non-finite logit.
double gd_confidence(std::span<const double> token_logits);

/// Objectness times class probability. Both inputs must lie in [0, 1].
double yoloe_confidence(double objectness, double class_prob);

/// Source of raw, unfiltered detections for one (image, prompt).
class DetectorBackend {
 public:
  virtual ~DetectorBackend() = default;
  virtual std::vector<Detection> infer(std::string_view image_id, const RgbImage& image,
                                       std::string_view prompt) = 0;
  virtual bool reentrant() const = 0;
};

/// Scripted detections for offline runs. A fixture directory holds one
/// `<scenario>.json` per scenario, each a list of rules
///   {prompt_substring, image_id?, detections: [{box, score | token_logits |
///    objectness + class_prob, phrase?}]}
/// matched top-down against the normalized prompt; first match wins. An
/// empty substring matches every prompt.
class MockFixtureStore {
 public:
  struct Rule {
    std::string prompt_substring;
    std::optional<std::string> image_id;
    std::vector<Detection> detections;
  };

  static MockFixtureStore load(const std::filesystem::path& dir);
  static std::vector<Rule> parse_rules(const nlohmann::json& doc);

  void add_scenario(std::string scenario, std::vector<Rule> rules);
  bool has_scenario(std::string_view scenario) const;

  /// Throws ConfigError for an unknown scenario. Scores are computed but no
  /// threshold is applied.
  std::vector<Detection> mock_detect(std::string_view scenario, std::string_view image_id,
                                     std::string_view prompt_text) const;

 private:
  std::map<std::string, std::vector<Rule>, std::less<>> scenarios_;
};

class MockBackend : public DetectorBackend {
 public:
  MockBackend(std::shared_ptr<const MockFixtureStore> store, std::string scenario,
              std::string backend_id);
  std::vector<Detection> infer(std::string_view image_id, const RgbImage& image,
                               std::string_view prompt) override;
  bool reentrant() const override { return true; }

 private:
  std::shared_ptr<const MockFixtureStore> store_;
  std::string scenario_;
  std::string backend_id_;
};

/// Client for an inference service hosting a grounding or realtime detector.
/// Request: {prompt, width, height, image_png_base64, params}. Response:
/// {detections: [{box, box_format?, token_logits | objectness + class_prob,
/// phrase?}]}; box_format is "xyxy" (absolute corners, default) or
/// "cxcywh_norm" (normalized center format).
class RemoteDetectorBackend : public DetectorBackend {
 public:
  RemoteDetectorBackend(DetectorSpec spec, HttpTransport& transport);

  /// Converts a service response into detections with scores computed by the
  /// confidence rule of `kind`.
  static std::vector<Detection> parse_response(DetectorKind kind, const nlohmann::json& body,
                                               int image_width, int image_height,
                                               const std::string& backend_id);

  std::vector<Detection> infer(std::string_view image_id, const RgbImage& image,
                               std::string_view prompt) override;
  bool reentrant() const override { return reentrant_; }

 private:
  DetectorSpec spec_;
  HttpTransport& transport_;
  std::string url_;
  bool reentrant_;
};

/// Records every exchange of `inner` into a store; serves from the store
/// instead in replay mode (where `inner` may be null).
class RecordingBackend : public DetectorBackend {
 public:
  RecordingBackend(DetectorSpec spec, std::unique_ptr<DetectorBackend> inner,
                   ExchangeStore& store, RunMode mode);
  std::vector<Detection> infer(std::string_view image_id, const RgbImage& image,
                               std::string_view prompt) override;
  bool reentrant() const override { return inner_ == nullptr || inner_->reentrant(); }

 private:
  DetectorSpec spec_;
  std::unique_ptr<DetectorBackend> inner_;
  ExchangeStore& store_;
  RunMode mode_;
};

/// Drops malformed detections (non-finite or out-of-range score, inverted or
/// non-finite box), clips boxes to the image, applies the score threshold and
/// orders by descending score (stable).
std::vector<Detection> postprocess_detections(std::vector<Detection> raw,
                                              const DetectorSpec& spec, int image_width,
                                              int image_height,
                                              std::size_t* dropped = nullptr);

/// The language-conditioned detection contract over a pluggable backend.
class Detector {
 public:
  Detector(DetectorSpec spec, std::unique_ptr<DetectorBackend> backend);

  std::vector<Detection> detect(const RgbImage& image, std::string_view image_id,
                                const EnhancedPrompt& prompt);

  const DetectorSpec& spec() const { return spec_; }
  bool reentrant() const { return backend_->reentrant(); }
  std::size_t dropped() const { return dropped_.load(); }

 private:
  DetectorSpec spec_;
  std::unique_ptr<DetectorBackend> backend_;
  std::mutex serial_;
  std::atomic<std::size_t> dropped_{0};
};

nlohmann::json detections_to_json(std::span<const Detection> detections);
std::vector<Detection> detections_from_json(const nlohmann::json& j);

}  // namespace promptprobe
