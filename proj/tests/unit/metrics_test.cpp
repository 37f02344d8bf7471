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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <tuple>

#include "promptprobe/errors.hpp"

namespace promptprobe {
namespace {

// Cell-count IoU of integer-corner boxes on a grid.
double raster_iou(const BoundingBox& a, const BoundingBox& b, int grid) {
  int inter = 0, uni = 0;
  for (int y = 0; y < grid; ++y) {
    for (int x = 0; x < grid; ++x) {
      const bool in_a = x >= a.x1 && x < a.x2 && y >= a.y1 && y < a.y2;
      const bool in_b = x >= b.x1 && x < b.x2 && y >= b.y1 && y < b.y2;
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

BoundingBox random_int_box(std::mt19937_64& rng, int grid) {
  std::uniform_int_distribution<int> u(0, grid);
  int x1 = u(rng), x2 = u(rng), y1 = u(rng), y2 = u(rng);
  while (x1 == x2) x2 = u(rng);
  while (y1 == y2) y2 = u(rng);
  return {double(std::min(x1, x2)), double(std::min(y1, y2)), double(std::max(x1, x2)),
          double(std::max(y1, y2))};
}

TEST(Iou, WorkedExamples) {
  EXPECT_NEAR(iou({0, 0, 10, 10}, {5, 5, 15, 15}), 1.0 / 7.0, 1e-15);
  EXPECT_EQ(iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
  EXPECT_EQ(iou({0, 0, 10, 10}, {10, 0, 20, 10}), 0.0);
  EXPECT_EQ(iou({0, 0, 10, 10}, {0, 0, 5, 10}), 0.5);
}

TEST(Iou, MatchesRasterOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const BoundingBox a = random_int_box(rng, 64), b = random_int_box(rng, 64);
    ASSERT_NEAR(iou(a, b), raster_iou(a, b, 64), 1e-9);
  }
}

TEST(Iou, SymmetricAndScaleInvariant) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 100), s(0.01, 50);
  for (int trial = 0; trial < 1000; ++trial) {
    double c[8];
    for (double& v : c) v = u(rng);
    const BoundingBox a{std::min(c[0], c[1]), std::min(c[2], c[3]), std::max(c[0], c[1]),
                        std::max(c[2], c[3])};
    const BoundingBox b{std::min(c[4], c[5]), std::min(c[6], c[7]), std::max(c[4], c[5]),
                        std::max(c[6], c[7])};
    const double k = s(rng);
    const double v = iou(a, b);
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
    ASSERT_EQ(v, iou(b, a));
    ASSERT_NEAR(iou({a.x1 * k, a.y1 * k, a.x2 * k, a.y2 * k}, {b.x1 * k, b.y1 * k, b.x2 * k, b.y2 * k}),
                v, 1e-12);
  }
}

// Enumerates every prediction and keeps the lexicographic maximum of
// (intersection, score, -index) among overlapping ones.
std::optional<std::size_t> brute_force_match(const BoundingBox& gt,
                                             const std::vector<Detection>& preds) {
  std::optional<std::size_t> best;
  std::tuple<double, double, long> best_key{};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double inter = intersection_area(gt, preds[i].box);
    if (inter <= 0) continue;
    const std::tuple<double, double, long> key{inter, preds[i].score, -static_cast<long>(i)};
    if (!best || key > best_key) {
      best = i;
      best_key = key;
    }
  }
  return best;
}

TEST(Matching, EqualsBruteForceWithTieBreaks) {
  std::mt19937_64 rng(3);
  const double scores[] = {0.3, 0.5, 0.8};  // few values, so score ties happen
  for (int trial = 0; trial < 500; ++trial) {
    const int grid = 4 + static_cast<int>(rng() % 12);  // small grids force area ties
    std::vector<GroundTruth> gts;
    for (int g = 0, n = 1 + static_cast<int>(rng() % 5); g < n; ++g) {
      gts.push_back({"t" + std::to_string(g), random_int_box(rng, grid)});
    }
    std::vector<Detection> preds;
    for (int p = 0, n = static_cast<int>(rng() % 11); p < n; ++p) {
      preds.push_back({random_int_box(rng, grid), scores[rng() % 3], "m", {}});
    }
    const MatchResult result = match_largest_intersection(gts, preds);
    ASSERT_EQ(result.entries.size(), gts.size());
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const auto expected = brute_force_match(gts[g].box, preds);
      const TargetMatch& m = result.entries[g];
      ASSERT_EQ(m.pred_index, expected) << "trial " << trial << " gt " << g;
      EXPECT_EQ(m.target_id, gts[g].target_id);
      if (expected) {
        EXPECT_EQ(m.iou, iou(gts[g].box, preds[*expected].box));
        EXPECT_EQ(m.confidence, preds[*expected].score);
        EXPECT_EQ(m.matched_detection, preds[*expected]);
      } else {
        EXPECT_EQ(m.iou, 0.0);
        EXPECT_EQ(m.confidence, 0.0);
      }
    }
  }
}

TEST(Matching, EqualIntersectionGoesToHigherScore) {
  const GroundTruth gt{"t", {0, 0, 10, 10}};
  const std::vector<Detection> preds = {{{0, 0, 5, 10}, 0.6, "m", {}},
                                        {{5, 0, 10, 10}, 0.8, "m", {}}};
  const TargetMatch m = match_largest_intersection(std::span(&gt, 1), preds).entries[0];
  EXPECT_EQ(m.pred_index, 1u);
  EXPECT_DOUBLE_EQ(m.intersection_area, 50);
  EXPECT_DOUBLE_EQ(m.iou, 0.5);
  EXPECT_EQ(m.confidence, 0.8);
}

TEST(Matching, LargestIntersectionIsNotLargestIou) {
  const GroundTruth gt{"t", {0, 0, 10, 10}};
  // A huge box covering the target beats a tight box covering part of it.
  const std::vector<Detection> preds = {{{0, 0, 100, 100}, 0.5, "m", {}},
                                        {{0, 0, 8, 8}, 0.9, "m", {}}};
  EXPECT_EQ(match_largest_intersection(std::span(&gt, 1), preds).entries[0].pred_index, 0u);
  EXPECT_EQ(match_largest_intersection(std::span(&gt, 1), preds, MatchCriterion::largest_iou)
                .entries[0]
                .pred_index,
            1u);
}

TEST(Matching, PredictionsMayServeSeveralTargets) {
  const GroundTruth gts[] = {{"a", {0, 0, 10, 10}}, {"b", {5, 5, 15, 15}}, {"c", {50, 50, 60, 60}}};
  const std::vector<Detection> preds = {{{0, 0, 15, 15}, 0.7, "m", {}}};
  const auto r = match_largest_intersection(gts, preds);
  EXPECT_EQ(r.entries[0].pred_index, 0u);
  EXPECT_EQ(r.entries[1].pred_index, 0u);
  EXPECT_FALSE(r.entries[2].matched());
}

TargetOutcome outcome(std::string image, std::string target, double iou_value, double conf,
                      bool matched = true) {
  TargetOutcome o;
  o.image_id = std::move(image);
  o.match.target_id = std::move(target);
  o.match.iou = iou_value;
  o.match.confidence = conf;
  if (matched) o.match.pred_index = 0;
  return o;
}

const ConditionKey kKey{DetailLevel::standard, EnhancementMethod::raw, "gd"};

TEST(Aggregate, ZeroFillAndMatchedOnly) {
  const std::vector<TargetOutcome> outcomes = {outcome("a", "t", 0.5, 0.8),
                                               outcome("b", "t", 0.0, 0.0, false),
                                               outcome("c", "t", 1.0, 0.6)};
  const ConditionResult z = aggregate(kKey, outcomes);
  EXPECT_DOUBLE_EQ(z.miou_percent, 50.0);
  EXPECT_DOUBLE_EQ(z.mean_confidence_percent, 140.0 / 3.0);
  EXPECT_EQ(z.n_targets, 3u);
  EXPECT_EQ(z.n_no_detection, 1u);
  const ConditionResult m = aggregate(kKey, outcomes, ConfidenceMode::matched_only);
  EXPECT_DOUBLE_EQ(m.mean_confidence_percent, 70.0);
  EXPECT_DOUBLE_EQ(m.miou_percent, 50.0);
  EXPECT_THROW(aggregate(kKey, {}), ValidationError);
}

TEST(Aggregate, PermutationInvariant) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TargetOutcome> outcomes;
    for (int i = 0, n = 1 + static_cast<int>(rng() % 40); i < n; ++i) {
      const bool hit = rng() % 4 != 0;
      outcomes.push_back(outcome("img" + std::to_string(i), "t", hit ? u(rng) : 0,
                                 hit ? u(rng) : 0, hit));
    }
    const ConditionResult reference = aggregate(kKey, outcomes);
    std::shuffle(outcomes.begin(), outcomes.end(), rng);
    ASSERT_EQ(aggregate(kKey, outcomes), reference);
  }
}

TEST(Improvement, AntisymmetricAndKeyChecked) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 100);
  for (int trial = 0; trial < 500; ++trial) {
    ConditionResult a{kKey, u(rng), u(rng), 1, 0, 0};
    ConditionResult b{{DetailLevel::standard, EnhancementMethod::key_object_extraction, "gd"},
                      u(rng), u(rng), 1, 0, 0};
    const Improvement ab = improvement(a, b), ba = improvement(b, a);
    ASSERT_EQ(ab.delta_miou_pp, -ba.delta_miou_pp);
    ASSERT_EQ(ab.delta_conf_pp, -ba.delta_conf_pp);
  }
  ConditionResult a{kKey, 1, 1, 1, 0, 0};
  ConditionResult other_backend{{DetailLevel::standard, EnhancementMethod::raw, "yolo"}, 1, 1, 1, 0, 0};
  EXPECT_THROW(improvement(a, other_backend), ValidationError);
}

TEST(Improvement, PragmaticGainsFromPublishedAggregates) {
  auto cell = [](EnhancementMethod m, const char* b, double miou, double conf) {
    return ConditionResult{{DetailLevel::pragmatic_ambiguity, m, b}, miou, conf, 264, 0, 0};
  };
  using M = EnhancementMethod;
  const Improvement gd_scg = improvement(cell(M::raw, "gd", 35.84, 44.59),
                                         cell(M::semantic_category_grounding, "gd", 90.99, 77.51));
  const Improvement gd_koe = improvement(cell(M::raw, "gd", 35.84, 44.59),
                                         cell(M::key_object_extraction, "gd", 86.82, 86.27));
  const Improvement y_scg = improvement(cell(M::raw, "y", 9.56, 8.61),
                                        cell(M::semantic_category_grounding, "y", 65.66, 57.35));
  EXPECT_EQ(format_fixed2(gd_scg.delta_miou_pp), "55.15");
  EXPECT_EQ(format_fixed2(gd_koe.delta_conf_pp), "41.68");
  EXPECT_EQ(format_fixed2(y_scg.delta_miou_pp), "56.10");
  EXPECT_EQ(format_fixed2(y_scg.delta_conf_pp), "48.74");
}

TEST(FormatFixed2, RoundHalfEvenOnShortestDecimal) {
  EXPECT_EQ(format_fixed2(35.845), "35.84");
  EXPECT_EQ(format_fixed2(35.835), "35.84");
  EXPECT_EQ(format_fixed2(0.135), "0.14");
  EXPECT_EQ(format_fixed2(0.125), "0.12");
  EXPECT_EQ(format_fixed2(0.12500001), "0.13");
  EXPECT_EQ(format_fixed2(99.995), "100.00");
  EXPECT_EQ(format_fixed2(9.999), "10.00");
  EXPECT_EQ(format_fixed2(5), "5.00");
  EXPECT_EQ(format_fixed2(0), "0.00");
  EXPECT_EQ(format_fixed2(-0.004), "0.00");
  EXPECT_EQ(format_fixed2(-1.235), "-1.24");
  EXPECT_EQ(format_fixed2(1e-9), "0.00");
  EXPECT_DOUBLE_EQ(round2(55.149999999), 55.15);
}

}  // namespace
}  // namespace promptprobe
