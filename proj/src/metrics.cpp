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

#include "promptprobe/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "promptprobe/errors.hpp"

namespace promptprobe {

double iou(const BoundingBox& a, const BoundingBox& b) {
  if (a == b) return 1.0;
  const double inter = intersection_area(a, b);
  if (inter <= 0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::string_view to_string(MatchCriterion criterion) {
  return criterion == MatchCriterion::largest_intersection ? "largest_intersection"
                                                           : "largest_iou";
}

MatchCriterion parse_match_criterion(std::string_view name) {
  if (name == "largest_intersection") return MatchCriterion::largest_intersection;
  if (name == "largest_iou") return MatchCriterion::largest_iou;
  throw ConfigError("unknown match criterion: " + std::string(name));
}

std::string_view to_string(ConfidenceMode mode) {
  return mode == ConfidenceMode::zero_fill ? "zero_fill" : "matched_only";
}

ConfidenceMode parse_confidence_mode(std::string_view name) {
  if (name == "zero_fill") return ConfidenceMode::zero_fill;
  if (name == "matched_only") return ConfidenceMode::matched_only;
  throw ConfigError("unknown confidence mode: " + std::string(name));
}

MatchResult match_largest_intersection(std::span<const GroundTruth> gts,
                                       std::span<const Detection> preds,
                                       MatchCriterion criterion) {
  MatchResult result;
  result.entries.reserve(gts.size());
  for (const GroundTruth& gt : gts) {
    TargetMatch m;
    m.target_id = gt.target_id;
    double best_key = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const double inter = intersection_area(gt.box, preds[i].box);
      if (inter <= 0) continue;
      const double key =
          criterion == MatchCriterion::largest_intersection ? inter : iou(gt.box, preds[i].box);
      const bool better = !m.pred_index || key > best_key ||
                          (key == best_key && preds[i].score > preds[*m.pred_index].score);
      if (!better) continue;
      best_key = key;
      m.pred_index = i;
    }
    if (m.pred_index) {
      const Detection& d = preds[*m.pred_index];
      m.matched_detection = d;
      m.intersection_area = intersection_area(gt.box, d.box);
      m.iou = iou(gt.box, d.box);
      m.confidence = d.score;
    }
    result.entries.push_back(std::move(m));
  }
  return result;
}

ConditionResult aggregate(const ConditionKey& key, std::vector<TargetOutcome> outcomes,
                          ConfidenceMode mode) {
  if (outcomes.empty()) throw ValidationError("empty condition");
  std::sort(outcomes.begin(), outcomes.end(), [](const TargetOutcome& a, const TargetOutcome& b) {
    if (a.image_id != b.image_id) return a.image_id < b.image_id;
    return a.match.target_id < b.match.target_id;
  });
  ConditionResult r;
  r.key = key;
  r.n_targets = outcomes.size();
  double iou_sum = 0;
  double conf_sum = 0;
  std::size_t n_matched = 0;
  for (const TargetOutcome& o : outcomes) {
    iou_sum += o.match.iou;
    conf_sum += o.match.confidence;
    if (o.match.matched()) {
      ++n_matched;
    } else {
      ++r.n_no_detection;
    }
    if (o.category_invalid) ++r.n_category_invalid;
  }
  const double n = static_cast<double>(outcomes.size());
  r.miou_percent = 100.0 * iou_sum / n;
  if (mode == ConfidenceMode::zero_fill) {
    r.mean_confidence_percent = 100.0 * conf_sum / n;
  } else {
    r.mean_confidence_percent =
        n_matched == 0 ? 0.0 : 100.0 * conf_sum / static_cast<double>(n_matched);
  }
  return r;
}

Improvement improvement(const ConditionResult& from, const ConditionResult& to) {
  if (from.key.prompt_type != to.key.prompt_type || from.key.backend_id != to.key.backend_id) {
    throw ValidationError("improvement: cells differ in prompt type or backend");
  }
  return {to.miou_percent - from.miou_percent,
          to.mean_confidence_percent - from.mean_confidence_percent};
}

std::string format_fixed2(double value) {
  if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
  char buf[512];
  auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
  std::string s(buf, res.ptr);
  bool negative = false;
  if (!s.empty() && s[0] == '-') {
    negative = true;
    s.erase(0, 1);
  }
  auto dot = s.find('.');
  std::string int_part = dot == std::string::npos ? s : s.substr(0, dot);
  std::string frac = dot == std::string::npos ? "" : s.substr(dot + 1);

  // Digits kept: int_part + two fractional digits, as one decimal string.
  std::string kept = int_part + (frac + "00").substr(0, 2);
  const std::string rest = frac.size() > 2 ? frac.substr(2) : "";
  bool round_up = false;
  if (!rest.empty()) {
    if (rest[0] > '5') {
      round_up = true;
    } else if (rest[0] == '5') {
      const bool beyond = rest.find_first_not_of('0', 1) != std::string::npos;
      round_up = beyond || ((kept.back() - '0') % 2 == 1);
    }
  }
  if (round_up) {
    int i = static_cast<int>(kept.size()) - 1;
    while (i >= 0 && kept[static_cast<std::size_t>(i)] == '9') {
      kept[static_cast<std::size_t>(i)] = '0';
      --i;
    }
    if (i < 0) {
      kept.insert(kept.begin(), '1');
    } else {
      ++kept[static_cast<std::size_t>(i)];
    }
  }
  std::string out = kept.substr(0, kept.size() - 2) + "." + kept.substr(kept.size() - 2);
  if (out[0] == '.') out.insert(out.begin(), '0');
  if (negative && out.find_first_not_of("0.") != std::string::npos) out.insert(out.begin(), '-');
  return out;
}

double round2(double value) { return std::stod(format_fixed2(value)); }

}  // namespace promptprobe
