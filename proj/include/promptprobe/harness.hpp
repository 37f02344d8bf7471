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

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "promptprobe/dataset.hpp"
#include "promptprobe/detector.hpp"
#include "promptprobe/metrics.hpp"
#include "promptprobe/overlay.hpp"
#include "promptprobe/report.hpp"
#include "promptprobe/store.hpp"
#include "promptprobe/vlm.hpp"

namespace promptprobe {

inline constexpr int kConfigSchemaVersion = 1;

struct MetricsSettings {
  MatchCriterion criterion = MatchCriterion::largest_intersection;
  ConfidenceMode confidence_mode = ConfidenceMode::zero_fill;
};

/// Declarative description of a run. Relative paths in the source document
/// are resolved against the config file's directory.
struct RunConfig {
  int schema_version = kConfigSchemaVersion;
  std::filesystem::path manifest_path;
  std::vector<DetectorSpec> backends;
  std::vector<DetailLevel> prompt_levels;
  std::vector<EnhancementMethod> enhancement_methods;
  VlmSettings vlm;
  RunMode mode = RunMode::cached;
  std::optional<std::filesystem::path> replay_store;
  std::optional<std::filesystem::path> cache_dir;
  OverlayStyle overlay_style = default_target_style();
  MetricsSettings metrics;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  int workers = 1;
  std::string config_hash;

  std::filesystem::path effective_cache_dir() const;
};

/// Throws ConfigError on schema violations.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// SHA-256 of the canonical serialization of `doc` without its execution-only
/// keys (workers, output_dir, mode, cache_dir, replay_store, seed). Key order does
/// not matter.
std::string config_hash(const nlohmann::json& doc);

/// Everything that happened for one target under one condition.
struct TargetRecord {
  std::string image_id;
  std::string target_id;
  ConditionKey key;
  std::string initial_prompt;
  std::string initial_provenance;
  std::string enhanced_prompt;
  std::optional<bool> category_valid;
  std::vector<Detection> detections;
  TargetMatch match;
  std::optional<std::string> error;

  bool operator==(const TargetRecord&) const = default;
};

nlohmann::json record_to_json(const TargetRecord& record);
TargetRecord record_from_json(const nlohmann::json& j);
std::vector<TargetRecord> load_records(const std::filesystem::path& path);

/// Hooks for tests and embedding: replace the network transport or the VLM
/// backend, and the retry sleeper.
struct RunEnvironment {
  HttpTransport* transport = nullptr;
  VlmBackend* vlm_backend = nullptr;
  VlmClient::Sleeper sleeper;
};

struct RunResult {
  RunReport report;
  std::vector<TargetRecord> records;
  VlmStats vlm_stats;
};

/// overlay -> initial prompt per level -> each enhancement -> each backend ->
/// matching, over every manifest target. Per-cell failures become gaps;
/// replay-store failures abort with ReplayError.
RunResult run(const RunConfig& config, const RunEnvironment& env = {});

/// report.json, records.jsonl and run.json under config.output_dir.
void write_run_outputs(const RunResult& result, const RunConfig& config);

struct FailureExport {
  std::size_t exported = 0;
  std::filesystem::path index_path;
};

/// Renders every target whose IoU is below `iou_threshold` into
/// <run_dir>/failures/<image_id>/<target>__<level>__<method>__<backend>.png
/// and lists them in <run_dir>/failures/index.jsonl.
FailureExport export_failures(const std::filesystem::path& run_dir, double iou_threshold);

}  // namespace promptprobe
