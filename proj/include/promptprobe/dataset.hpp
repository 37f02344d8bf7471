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
#include <optional>
#include <string>
#include <vector>

#include "promptprobe/geometry.hpp"

namespace promptprobe {

struct Target {
  std::string target_id;
  BoundingBox box;
  // Fixture-authoring metadata only; never sent to a detector.
  std::optional<std::string> label_hint;

  bool operator==(const Target&) const = default;
};

struct AnnotatedImage {
  std::string image_id;
  std::filesystem::path image_path;
  int width = 0;
  int height = 0;
  std::vector<Target> targets;

  bool operator==(const AnnotatedImage&) const = default;
};

/// Parses one manifest line. Relative image paths are resolved against
/// `base_dir`. Throws ValidationError naming `line_number` when the record is
/// malformed, or naming image_id/target_id when a box is out of bounds.
AnnotatedImage parse_manifest_record(const std::string& line, std::size_t line_number,
                                     const std::filesystem::path& base_dir);

/// Loads a line-delimited JSON manifest. Blank lines are skipped. Order is
/// preserved and image_id uniqueness enforced.
std::vector<AnnotatedImage> load_manifest(const std::filesystem::path& path);

std::string to_manifest_record(const AnnotatedImage& image);
void write_manifest(const std::filesystem::path& path,
                    const std::vector<AnnotatedImage>& images);

std::size_t count_targets(const std::vector<AnnotatedImage>& images);

}  // namespace promptprobe
