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

#include <algorithm>
#include <cmath>

namespace promptprobe {

std::optional<std::string> validate_box(const BoundingBox& box, double width,
                                        double height) {
  if (!std::isfinite(box.x1) || !std::isfinite(box.y1) ||
      !std::isfinite(box.x2) || !std::isfinite(box.y2)) {
    return "non-finite coordinate";
  }
  if (!(box.x1 < box.x2)) return "x1 < x2 required";
  if (!(box.y1 < box.y2)) return "y1 < y2 required";
  if (box.x1 < 0) return "x1 is negative";
  if (box.y1 < 0) return "y1 is negative";
  if (box.x2 > width) return "x2 exceeds width";
  if (box.y2 > height) return "y2 exceeds height";
  return std::nullopt;
}

double intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0 || h <= 0) return 0.0;
  return w * h;
}

std::optional<BoundingBox> clip_box(const BoundingBox& box, double width,
                                    double height) {
  BoundingBox out{std::clamp(box.x1, 0.0, width), std::clamp(box.y1, 0.0, height),
                  std::clamp(box.x2, 0.0, width), std::clamp(box.y2, 0.0, height)};
  if (!(out.x1 < out.x2) || !(out.y1 < out.y2)) return std::nullopt;
  return out;
}

BoundingBox from_normalized_center(double cx, double cy, double w, double h,
                                   double image_width, double image_height) {
  return {(cx - w / 2) * image_width, (cy - h / 2) * image_height,
          (cx + w / 2) * image_width, (cy + h / 2) * image_height};
}

}  // namespace promptprobe
