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

#include "promptprobe/prompt.hpp"

#include "promptprobe/errors.hpp"

namespace promptprobe {

std::string_view to_string(DetailLevel level) {
  switch (level) {
    case DetailLevel::underdetailed: return "underdetailed";
    case DetailLevel::standard: return "standard";
    case DetailLevel::overdetailed: return "overdetailed";
    case DetailLevel::pragmatic_ambiguity: return "pragmatic_ambiguity";
  }
  return "?";
}

std::string_view to_string(EnhancementMethod method) {
  switch (method) {
    case EnhancementMethod::raw: return "raw";
    case EnhancementMethod::key_object_extraction: return "key_object_extraction";
    case EnhancementMethod::semantic_category_grounding: return "semantic_category_grounding";
  }
  return "?";
}

std::string_view to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::live: return "live";
    case Provenance::cache: return "cache";
    case Provenance::replay: return "replay";
    case Provenance::fixture: return "fixture";
  }
  return "?";
}

std::string_view display_name(DetailLevel level) {
  switch (level) {
    case DetailLevel::underdetailed: return "Underdetailed";
    case DetailLevel::standard: return "Standard";
    case DetailLevel::overdetailed: return "Overdetailed";
    case DetailLevel::pragmatic_ambiguity: return "Pragmatic Ambiguity";
  }
  return "?";
}

std::string_view display_name(EnhancementMethod method) {
  switch (method) {
    case EnhancementMethod::raw: return "Raw Prompt";
    case EnhancementMethod::key_object_extraction: return "Key Object Extraction";
    case EnhancementMethod::semantic_category_grounding: return "Semantic Category Grounding";
  }
  return "?";
}

DetailLevel parse_detail_level(std::string_view name) {
  for (DetailLevel level : kAllDetailLevels) {
    if (to_string(level) == name) return level;
  }
  throw ValidationError("unknown detail level: " + std::string(name));
}

EnhancementMethod parse_enhancement_method(std::string_view name) {
  for (EnhancementMethod method : kAllEnhancementMethods) {
    if (to_string(method) == name) return method;
  }
  throw ValidationError("unknown enhancement method: " + std::string(name));
}

Provenance parse_provenance(std::string_view name) {
  for (Provenance p : {Provenance::live, Provenance::cache, Provenance::replay,
                       Provenance::fixture}) {
    if (to_string(p) == name) return p;
  }
  throw ValidationError("unknown provenance: " + std::string(name));
}

PromptVariant make_prompt_variant(std::string text, DetailLevel level, std::string image_id,
                                  std::string target_id, Provenance provenance,
                                  std::string template_id, std::string vlm_model_id) {
  if (text.empty()) throw ValidationError("empty prompt");
  return {std::move(text),     level,       std::move(image_id),   std::move(target_id),
          provenance,          std::move(template_id), std::move(vlm_model_id)};
}

EnhancedPrompt passthrough_raw(const PromptVariant& prompt) {
  return {prompt.text, EnhancementMethod::raw, prompt, std::nullopt};
}

}  // namespace promptprobe
