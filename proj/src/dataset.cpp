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

#include "promptprobe/dataset.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <json.hpp>
#include <set>

#include "promptprobe/errors.hpp"

namespace promptprobe {

using nlohmann::json;

namespace {

std::string at_line(std::size_t line_number) {
  return "manifest line " + std::to_string(line_number) + ": ";
}

BoundingBox parse_box(const json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw std::invalid_argument("box must be [x1, y1, x2, y2]");
  }
  for (const auto& v : j) {
    if (!v.is_number()) throw std::invalid_argument("box coordinates must be numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace

AnnotatedImage parse_manifest_record(const std::string& line, std::size_t line_number,
                                     const std::filesystem::path& base_dir) {
  AnnotatedImage image;
  try {
    const json j = json::parse(line);
    if (!j.is_object()) throw std::invalid_argument("record is not an object");
    image.image_id = j.at("image_id").get<std::string>();
    if (image.image_id.empty()) throw std::invalid_argument("empty image_id");
    std::filesystem::path p = j.at("image_path").get<std::string>();
    image.image_path = p.is_absolute() ? p : (base_dir / p).lexically_normal();
    image.width = j.at("width").get<int>();
    image.height = j.at("height").get<int>();
    if (image.width <= 0 || image.height <= 0) {
      throw std::invalid_argument("width and height must be positive");
    }
    const json& targets = j.at("targets");
    if (!targets.is_array()) throw std::invalid_argument("targets must be an array");
    for (const json& t : targets) {
      Target target;
      target.target_id = t.at("target_id").get<std::string>();
      target.box = parse_box(t.at("box"));
      if (t.contains("label_hint") && !t.at("label_hint").is_null()) {
        target.label_hint = t.at("label_hint").get<std::string>();
      }
      image.targets.push_back(std::move(target));
    }
  } catch (const json::exception& e) {
    throw ValidationError(at_line(line_number) + e.what());
  } catch (const std::invalid_argument& e) {
    throw ValidationError(at_line(line_number) + e.what());
  }

  if (image.targets.empty()) {
    throw ValidationError(at_line(line_number) + "image " + image.image_id +
                          " has no targets");
  }
  std::set<std::string> seen;
  for (const Target& t : image.targets) {
    if (!seen.insert(t.target_id).second) {
      throw ValidationError(at_line(line_number) + "duplicate target_id " + t.target_id +
                            " in image " + image.image_id);
    }
    if (auto violation = validate_box(t.box, image.width, image.height)) {
      throw ValidationError("invalid box for image_id " + image.image_id +
                            ", target_id " + t.target_id + ": " + *violation);
    }
  }
  return image;
}

std::vector<AnnotatedImage> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("manifest not found: " + path.string());
  const auto base_dir = path.parent_path();

  std::vector<AnnotatedImage> images;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    AnnotatedImage image = parse_manifest_record(line, line_number, base_dir);
    if (!ids.insert(image.image_id).second) {
      throw ValidationError(at_line(line_number) + "duplicate image_id " + image.image_id);
    }
    images.push_back(std::move(image));
  }
  if (images.empty()) {
    spdlog::warn("manifest {} contains no records", path.string());
  } else {
    spdlog::info("loaded {} images ({} targets) from {}", images.size(),
                 count_targets(images), path.string());
  }
  return images;
}

std::string to_manifest_record(const AnnotatedImage& image) {
  json targets = json::array();
  for (const Target& t : image.targets) {
    json jt = {{"target_id", t.target_id},
               {"box", {t.box.x1, t.box.y1, t.box.x2, t.box.y2}}};
    if (t.label_hint) jt["label_hint"] = *t.label_hint;
    targets.push_back(std::move(jt));
  }
  json j = {{"image_id", image.image_id},
            {"image_path", image.image_path.generic_string()},
            {"width", image.width},
            {"height", image.height},
            {"targets", std::move(targets)}};
  return j.dump();
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<AnnotatedImage>& images) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path.string());
  for (const auto& image : images) out << to_manifest_record(image) << '\n';
}

std::size_t count_targets(const std::vector<AnnotatedImage>& images) {
  std::size_t n = 0;
  for (const auto& image : images) n += image.targets.size();
  return n;
}

}  // namespace promptprobe
