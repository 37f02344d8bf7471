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
#include <string>

namespace promptprobe {

/// Axis-aligned box in absolute pixels, half-open: [x1, x2) x [y1, y2).
struct BoundingBox {
  double x1 = 0;
  double y1 = 0;
  double x2 = 0;
  double y2 = 0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }

  bool operator==(const BoundingBox&) const = default;
};

/// Returns std::nullopt when 0 <= x1 < x2 <= width and 0 <= y1 < y2 <= height,
/// otherwise a short description of the first violated condition.
std::optional<std::string> validate_box(const BoundingBox& box, double width,
                                        double height);

/// Area of the overlap; 0 for disjoint or edge-touching boxes.
double intersection_area(const BoundingBox& a, const BoundingBox& b);

/// Clamps to [0, width] x [0, height]. Empty when nothing of the box remains.
std::optional<BoundingBox> clip_box(const BoundingBox& box, double width,
                                    double height);

/// Normalized center format (cx, cy, w, h in [0,1]) to absolute corners.
BoundingBox from_normalized_center(double cx, double cy, double w, double h,
                                   double image_width, double image_height);

}  // namespace promptprobe
