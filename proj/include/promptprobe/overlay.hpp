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

#include "promptprobe/detection.hpp"
#include "promptprobe/geometry.hpp"
#include "promptprobe/raster.hpp"

namespace promptprobe {

struct OverlayStyle {
  Rgb border_color{255, 0, 0};
  int border_width = 3;
  std::optional<std::string> label_text;

  bool operator==(const OverlayStyle&) const = default;
};

OverlayStyle default_target_style();
OverlayStyle default_ground_truth_style();
OverlayStyle default_prediction_style();

/// Integer pixel rectangle [x0, x1) x [y0, y1). A pixel belongs to a box when
/// its center lies inside the box.
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  bool empty() const { return x0 >= x1 || y0 >= y1; }
  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

PixelRect pixel_rect(const BoundingBox& box, int image_width, int image_height);

/// Pixels of `rect` within `width` of its edge. The whole rect when the
/// band would be wider than half the rect.
bool in_border_band(const PixelRect& rect, int width, int x, int y);

/// Where a label of `text` is placed for a box: above it when there is room,
/// otherwise just inside its top edge. Clipped to the image.
PixelRect label_rect(const PixelRect& box_rect, std::string_view text, int image_width,
                     int image_height);

/// Copy of `image` with `box` outlined. Throws ValidationError if the box is
/// not valid for the image.
RgbImage render_target_overlay(const RgbImage& image, const BoundingBox& box,
                               const OverlayStyle& style);

/// Ground truths first, predictions on top, each prediction labelled with its
/// score to two decimals. Predictions are clipped to the image; fully
/// out-of-frame predictions are skipped.
RgbImage render_detections(const RgbImage& image, std::span<const BoundingBox> gts,
                           std::span<const Detection> preds, const OverlayStyle& style_gt,
                           const OverlayStyle& style_pred);

}  // namespace promptprobe
