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

#include "promptprobe/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace promptprobe {
namespace {

TEST(ValidateBox, AcceptsBoxesInsideTheImage) {
  EXPECT_FALSE(validate_box({0, 0, 10, 10}, 10, 10));
  EXPECT_FALSE(validate_box({2.5, 3.25, 7.75, 9.5}, 10, 10));
}

TEST(ValidateBox, NamesTheFirstViolation) {
  EXPECT_EQ(validate_box({5, 0, 5, 4}, 10, 10), "x1 < x2 required");
  EXPECT_EQ(validate_box({0, 6, 4, 2}, 10, 10), "y1 < y2 required");
  EXPECT_EQ(validate_box({-1, 0, 4, 4}, 10, 10), "x1 is negative");
  EXPECT_EQ(validate_box({0, -1, 4, 4}, 10, 10), "y1 is negative");
  EXPECT_EQ(validate_box({0, 0, 11, 4}, 10, 10), "x2 exceeds width");
  EXPECT_EQ(validate_box({0, 0, 4, 11}, 10, 10), "y2 exceeds height");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(validate_box({nan, 0, 4, 4}, 10, 10), "non-finite coordinate");
  EXPECT_EQ(validate_box({0, 0, std::numeric_limits<double>::infinity(), 4}, 10, 10),
            "non-finite coordinate");
}

// Exhaustive: every integer box with corners in [-1, w+1] x [-1, h+1] on
// small grids is accepted exactly when the textbook predicate holds.
TEST(ValidateBox, ExhaustiveSmallGrids) {
  for (int w = 1; w <= 8; ++w) {
    for (int h = 1; h <= 8; h += 3) {
      for (int x1 = -1; x1 <= w + 1; ++x1) {
        for (int x2 = -1; x2 <= w + 1; ++x2) {
          for (int y1 = -1; y1 <= h + 1; ++y1) {
            for (int y2 = -1; y2 <= h + 1; ++y2) {
              const bool expected = 0 <= x1 && x1 < x2 && x2 <= w && 0 <= y1 && y1 < y2 && y2 <= h;
              const BoundingBox b{double(x1), double(y1), double(x2), double(y2)};
              ASSERT_EQ(!validate_box(b, w, h).has_value(), expected)
                  << x1 << "," << y1 << "," << x2 << "," << y2 << " in " << w << "x" << h;
            }
          }
        }
      }
    }
  }
}

TEST(Intersection, OverlapAndDisjoint) {
  EXPECT_DOUBLE_EQ(intersection_area({0, 0, 10, 10}, {5, 5, 15, 15}), 25.0);
  EXPECT_DOUBLE_EQ(intersection_area({0, 0, 10, 10}, {10, 0, 20, 10}), 0.0);  // edge touch
  EXPECT_DOUBLE_EQ(intersection_area({0, 0, 10, 10}, {20, 20, 30, 30}), 0.0);
  EXPECT_DOUBLE_EQ(intersection_area({0, 0, 10, 10}, {2, 2, 4, 4}), 4.0);
}

TEST(ClipBox, ClampsAndDropsEmpty) {
  EXPECT_EQ(clip_box({-5, -5, 5, 5}, 10, 10), (BoundingBox{0, 0, 5, 5}));
  EXPECT_EQ(clip_box({5, 5, 50, 50}, 10, 10), (BoundingBox{5, 5, 10, 10}));
  EXPECT_FALSE(clip_box({12, 0, 20, 5}, 10, 10));
  EXPECT_FALSE(clip_box({-8, -8, 0, 0}, 10, 10));
}

TEST(FromNormalizedCenter, ConvertsToCorners) {
  const BoundingBox b = from_normalized_center(0.5, 0.5, 0.5, 0.25, 200, 100);
  EXPECT_DOUBLE_EQ(b.x1, 50);
  EXPECT_DOUBLE_EQ(b.x2, 150);
  EXPECT_DOUBLE_EQ(b.y1, 37.5);
  EXPECT_DOUBLE_EQ(b.y2, 62.5);
}

}  // namespace
}  // namespace promptprobe
