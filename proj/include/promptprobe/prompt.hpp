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

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace promptprobe {

enum class DetailLevel { underdetailed, standard, overdetailed, pragmatic_ambiguity };

inline constexpr std::array<DetailLevel, 4> kAllDetailLevels = {
    DetailLevel::underdetailed, DetailLevel::standard, DetailLevel::overdetailed,
    DetailLevel::pragmatic_ambiguity};

enum class EnhancementMethod { raw, key_object_extraction, semantic_category_grounding };

inline constexpr std::array<EnhancementMethod, 3> kAllEnhancementMethods = {
    EnhancementMethod::raw, EnhancementMethod::key_object_extraction,
    EnhancementMethod::semantic_category_grounding};

enum class Provenance { live, cache, replay, fixture };

std::string_view to_string(DetailLevel level);
std::string_view to_string(EnhancementMethod method);
std::string_view to_string(Provenance provenance);

// Human-readable row labels used in rendered tables.
std::string_view display_name(DetailLevel level);
std::string_view display_name(EnhancementMethod method);

/// Throw ValidationError on unknown names.
DetailLevel parse_detail_level(std::string_view name);
EnhancementMethod parse_enhancement_method(std::string_view name);
Provenance parse_provenance(std::string_view name);

/// A generated prompt for one target at one detail level.
struct PromptVariant {
  std::string text;
  DetailLevel detail_level = DetailLevel::standard;
  std::string image_id;
  std::string target_id;
  Provenance provenance = Provenance::live;
  std::string template_id;
  std::string vlm_model_id;

  bool operator==(const PromptVariant&) const = default;
};

/// Builds a PromptVariant, rejecting empty text.
PromptVariant make_prompt_variant(std::string text, DetailLevel level, std::string image_id,
                                  std::string target_id, Provenance provenance,
                                  std::string template_id, std::string vlm_model_id);

struct EnhancedPrompt {
  std::string text;
  EnhancementMethod method = EnhancementMethod::raw;
  PromptVariant source;
  // Set for semantic_category_grounding only.
  std::optional<bool> category_valid;

  bool operator==(const EnhancedPrompt&) const = default;
};

/// The "Raw Prompt" row: text copied verbatim.
EnhancedPrompt passthrough_raw(const PromptVariant& prompt);

}  // namespace promptprobe
