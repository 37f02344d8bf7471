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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "promptprobe/detection.hpp"
#include "promptprobe/geometry.hpp"
#include "promptprobe/prompt.hpp"

namespace promptprobe {

/// Intersection over union under the half-open convention. Symmetric; exactly
/// 1 for identical boxes.
double iou(const BoundingBox& a, const BoundingBox& b);

struct GroundTruth {
  std::string target_id;
  BoundingBox box;
};

enum class MatchCriterion { largest_intersection, largest_iou };

std::string_view to_string(MatchCriterion criterion);
MatchCriterion parse_match_criterion(std::string_view name);

struct TargetMatch {
  std::string target_id;
  std::optional<std::size_t> pred_index;
  std::optional<Detection> matched_detection;
  double intersection_area = 0;
  double iou = 0;
  double confidence = 0;

  bool matched() const { return pred_index.has_value(); }
  bool operator==(const TargetMatch&) const = default;
};

struct MatchResult {
  std::vector<TargetMatch> entries;
};

/// For every ground truth independently, picks the prediction with the largest
/// intersection area (or IoU, for the sensitivity criterion). Ties go to the
/// higher score, then the lower index. A prediction may serve several ground
/// truths. No overlap at all leaves the ground truth unmatched (iou 0,
/// confidence 0).
MatchResult match_largest_intersection(
    std::span<const GroundTruth> gts, std::span<const Detection> preds,
    MatchCriterion criterion = MatchCriterion::largest_intersection);

enum class ConfidenceMode { zero_fill, matched_only };

std::string_view to_string(ConfidenceMode mode);
ConfidenceMode parse_confidence_mode(std::string_view name);

struct ConditionKey {
  DetailLevel prompt_type = DetailLevel::standard;
  EnhancementMethod method = EnhancementMethod::raw;
  std::string backend_id;

  auto operator<=>(const ConditionKey&) const = default;
};

/// Per-target outcome inside one condition cell.
struct TargetOutcome {
  std::string image_id;
  TargetMatch match;
  bool category_invalid = false;
};

struct ConditionResult {
  ConditionKey key;
  double miou_percent = 0;
  double mean_confidence_percent = 0;
  std::size_t n_targets = 0;
  std::size_t n_no_detection = 0;
  std::size_t n_category_invalid = 0;

  bool operator==(const ConditionResult&) const = default;
};

/// Means over all targets of the cell, as percentages. Outcomes are sorted by
/// (image_id, target_id) before summation so the result does not depend on
/// input order. Throws ValidationError("empty condition") for no outcomes.
ConditionResult aggregate(const ConditionKey& key, std::vector<TargetOutcome> outcomes,
                          ConfidenceMode mode = ConfidenceMode::zero_fill);

struct Improvement {
  double delta_miou_pp = 0;
  double delta_conf_pp = 0;
};

/// Percentage-point change from `from` to `to`. Both cells must share prompt
/// type and backend.
Improvement improvement(const ConditionResult& from, const ConditionResult& to);

/// Fixed two-decimal rendering with round-half-even applied to the shortest
/// round-trip decimal form of `value` (so 35.845 -> "35.84", 0.135 -> "0.14").
std::string format_fixed2(double value);

/// `value` rounded as format_fixed2 would print it.
double round2(double value);

}  // namespace promptprobe
