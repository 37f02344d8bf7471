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

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "promptprobe/metrics.hpp"
#include "promptprobe/prompt.hpp"

namespace promptprobe {

// A configured cell that could not be computed.
struct CellGap {
  ConditionKey key;
  std::string cause;

  bool operator==(const CellGap&) const = default;
};

struct ImprovementRow {
  ConditionKey key;  // the enhanced cell; compared against raw
  double delta_miou_pp = 0;
  double delta_conf_pp = 0;

  bool operator==(const ImprovementRow&) const = default;
};

// A target the detector found nothing for.
struct FailureRef {
  std::string image_id;
  std::string target_id;
  ConditionKey key;

  bool operator==(const FailureRef&) const = default;
};

struct RunMetadata {
  int schema_version = 1;
  std::string config_hash;
  std::string mode;
  std::vector<DetailLevel> prompt_levels;
  std::vector<EnhancementMethod> enhancement_methods;
  std::vector<std::string> backends;
  std::string match_criterion = "largest_intersection";
  std::string confidence_mode = "zero_fill";
  std::size_t n_images = 0;
  std::size_t n_targets = 0;
  std::size_t vlm_lookups = 0;
  std::size_t vlm_hits = 0;
  double cache_hit_rate = 0;
  std::size_t category_invalid_count = 0;

  bool operator==(const RunMetadata&) const = default;
};

/// One evaluation run: a cell per (prompt type, method, backend) or a named
/// gap, plus improvement rows against the raw prompt.
struct RunReport {
  RunMetadata metadata;
  std::vector<ConditionResult> cells;
  std::vector<CellGap> gaps;
  std::vector<ImprovementRow> improvements;
  std::vector<FailureRef> failure_index;

  const ConditionResult* find(const ConditionKey& key) const;
  const CellGap* find_gap(const ConditionKey& key) const;

  bool operator==(const RunReport&) const = default;
};

/// Improvement of every non-raw cell over the raw cell with the same prompt
/// type and backend, in metadata order. Cells without a raw partner are skipped.
std::vector<ImprovementRow> compute_improvements(const RunReport& report);

nlohmann::json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);
RunReport load_report(const std::filesystem::path& path);

std::string render_json(const RunReport& report);
std::string render_csv(const RunReport& report);
/// Grouped by prompt type, three method rows per group, best value per
/// column within a group in bold, gaps as an em dash with a footnote.
std::string render_markdown(const RunReport& report);

/// Writes report.<fmt> into `out_dir` for each of "csv", "json", "md" and
/// returns the written paths. Throws Error if the directory is unwritable.
std::vector<std::filesystem::path> emit_report(const RunReport& report,
                                               std::span<const std::string> formats,
                                               const std::filesystem::path& out_dir);

// --- claims ------------------------------------------------------------------

enum class ClaimMetric { miou, confidence };

struct Claim {
  std::string name;
  DetailLevel prompt_type = DetailLevel::pragmatic_ambiguity;
  std::string backend_id;
  EnhancementMethod from = EnhancementMethod::raw;
  EnhancementMethod to = EnhancementMethod::semantic_category_grounding;
  ClaimMetric metric = ClaimMetric::miou;
  double expected_pp = 0;
  double tolerance_pp = 0.01;
};

/// {"schema_version": 1, "claims": [{name, prompt_type, backend_id, from,
/// to, metric, expected_pp, tolerance_pp}]}. An empty file holds no claims.
std::vector<Claim> load_claims(const std::filesystem::path& path);
std::vector<Claim> parse_claims(const nlohmann::json& doc);

struct ClaimOutcome {
  std::string name;
  bool passed = false;
  std::optional<double> observed_pp;
  std::optional<double> residual_pp;  // observed - expected
  std::string message;
};

std::vector<ClaimOutcome> consistency_check(const RunReport& report,
                                            std::span<const Claim> claims);

/// One PASS/FAIL line per claim and a summary line.
std::string format_claim_listing(std::span<const ClaimOutcome> outcomes);

}  // namespace promptprobe
