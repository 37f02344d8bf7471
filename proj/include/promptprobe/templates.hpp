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

#include <string>
#include <string_view>

#include "promptprobe/prompt.hpp"

namespace promptprobe {

// Instruction templates sent to the vision-language model.
enum class TemplateId {
  initial_natural_language,
  initial_pragmatic_ambiguity,
  enhance_key_object_extraction,
  enhance_semantic_category_grounding,
};

std::string_view to_string(TemplateId id);

TemplateId initial_template_for(DetailLevel level);

/// Instruction for initial prompt generation. For the three descriptive
/// levels this is the natural-language template with its length word set to
/// the level name; pragmatic ambiguity has its own template.
std::string render_initial_instruction(DetailLevel level);

/// Instruction for an enhancement method. Throws ValidationError for `raw`,
/// which never reaches the model.
std::string render_enhancement_instruction(EnhancementMethod method);

}  // namespace promptprobe
