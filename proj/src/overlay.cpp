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

#include "promptprobe/overlay.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "font5x8.hpp"
#include "promptprobe/errors.hpp"

namespace promptprobe {

namespace {

constexpr int kLabelPad = 1;
constexpr int kLabelHeight = font::kGlyphHeight + 2 * kLabelPad;

int label_width(std::string_view text) {
  return static_cast<int>(text.size()) * (font::kGlyphWidth + 1) + kLabelPad;
}

Rgb contrasting(Rgb c) {
  const int luma = 299 * c.r + 587 * c.g + 114 * c.b;
  return luma > 128000 ? Rgb{0, 0, 0} : Rgb{255, 255, 255};
}

void draw_band(RgbImage& img, const PixelRect& rect, int width, Rgb color) {
  for (int y = rect.y0; y < rect.y1; ++y) {
    for (int x = rect.x0; x < rect.x1; ++x) {
      if (in_border_band(rect, width, x, y)) img.set(x, y, color);
    }
  }
}

// Label origin before clipping; glyphs are positioned relative to it.
void draw_label(RgbImage& img, const PixelRect& box_rect, std::string_view text,
                Rgb background) {
  if (text.empty()) return;
  const PixelRect area = label_rect(box_rect, text, img.width(), img.height());
  if (area.empty()) return;
  const int origin_x = box_rect.x0;
  const int origin_y = box_rect.y0 >= kLabelHeight ? box_rect.y0 - kLabelHeight : box_rect.y0;
  const Rgb ink = contrasting(background);
  for (int y = area.y0; y < area.y1; ++y) {
    for (int x = area.x0; x < area.x1; ++x) img.set(x, y, background);
  }
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto& columns = font::glyph(text[i]);
    const int gx = origin_x + kLabelPad + static_cast<int>(i) * (font::kGlyphWidth + 1);
    for (int col = 0; col < font::kGlyphWidth; ++col) {
      for (int row = 0; row < font::kGlyphHeight; ++row) {
        if (!(columns[static_cast<std::size_t>(col)] & (1u << row))) continue;
        const int x = gx + col;
        const int y = origin_y + kLabelPad + row;
        if (area.contains(x, y)) img.set(x, y, ink);
      }
    }
  }
}

void check_style(const OverlayStyle& style) {
  if (style.border_width < 1) throw ValidationError("border_width must be >= 1");
}

}  // namespace

OverlayStyle default_target_style() { return {{255, 0, 0}, 3, std::nullopt}; }
OverlayStyle default_ground_truth_style() { return {{0, 255, 0}, 2, std::nullopt}; }
OverlayStyle default_prediction_style() { return {{255, 0, 0}, 2, std::nullopt}; }

PixelRect pixel_rect(const BoundingBox& box, int image_width, int image_height) {
  auto edge = [](double v, int limit) {
    return std::clamp(static_cast<int>(std::ceil(v - 0.5)), 0, limit);
  };
  return {edge(box.x1, image_width), edge(box.y1, image_height), edge(box.x2, image_width),
          edge(box.y2, image_height)};
}

bool in_border_band(const PixelRect& rect, int width, int x, int y) {
  if (!rect.contains(x, y)) return false;
  return x < rect.x0 + width || x >= rect.x1 - width || y < rect.y0 + width ||
         y >= rect.y1 - width;
}

PixelRect label_rect(const PixelRect& box_rect, std::string_view text, int image_width,
                     int image_height) {
  if (text.empty()) return {};
  const int y0 = box_rect.y0 >= kLabelHeight ? box_rect.y0 - kLabelHeight : box_rect.y0;
  PixelRect r{box_rect.x0, y0, box_rect.x0 + label_width(text), y0 + kLabelHeight};
  r.x0 = std::clamp(r.x0, 0, image_width);
  r.x1 = std::clamp(r.x1, 0, image_width);
  r.y0 = std::clamp(r.y0, 0, image_height);
  r.y1 = std::clamp(r.y1, 0, image_height);
  return r;
}

RgbImage render_target_overlay(const RgbImage& image, const BoundingBox& box,
                               const OverlayStyle& style) {
  check_style(style);
  if (auto violation = validate_box(box, image.width(), image.height())) {
    throw ValidationError("overlay box rejected: " + *violation);
  }
  RgbImage out = image;
  const PixelRect rect = pixel_rect(box, image.width(), image.height());
  draw_band(out, rect, style.border_width, style.border_color);
  if (style.label_text) draw_label(out, rect, *style.label_text, style.border_color);
  return out;
}

RgbImage render_detections(const RgbImage& image, std::span<const BoundingBox> gts,
                           std::span<const Detection> preds, const OverlayStyle& style_gt,
                           const OverlayStyle& style_pred) {
  check_style(style_gt);
  check_style(style_pred);
  RgbImage out = image;
  for (const BoundingBox& gt : gts) {
    if (auto violation = validate_box(gt, image.width(), image.height())) {
      throw ValidationError("ground-truth box rejected: " + *violation);
    }
    const PixelRect rect = pixel_rect(gt, image.width(), image.height());
    draw_band(out, rect, style_gt.border_width, style_gt.border_color);
    if (style_gt.label_text) draw_label(out, rect, *style_gt.label_text, style_gt.border_color);
  }
  for (const Detection& pred : preds) {
    const auto clipped = clip_box(pred.box, image.width(), image.height());
    if (!clipped) continue;
    const PixelRect rect = pixel_rect(*clipped, image.width(), image.height());
    if (rect.empty()) continue;
    draw_band(out, rect, style_pred.border_width, style_pred.border_color);
    std::string label = fmt::format("{:.2f}", pred.score);
    if (style_pred.label_text) label = *style_pred.label_text + " " + label;
    draw_label(out, rect, label, style_pred.border_color);
  }
  return out;
}

}  // namespace promptprobe
