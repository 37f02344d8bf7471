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

#include "promptprobe/templates.hpp"

#include "promptprobe/errors.hpp"

namespace promptprobe {

namespace {

constexpr std::string_view kNaturalLanguageHead =
    "You are a regular person who refers to objects using referring expressions. "
    "Given an image along with bounding boxes, please generate a discriminative and "
    "unambiguous expression to describe the target object. You should only refer to "
    "the intrinsic characteristics of the object, not its location. Assume the image "
    "clearly indicates the target object with its bounding box. Do not include any "
    "location words. Only describe intrinsic attributes such as shape, color, "
    "material, or other visual properties. The length of the expression should be ";

constexpr std::string_view kNaturalLanguageTail =
    ", as a human might naturally vary in phrasing.";

constexpr std::string_view kPragmaticAmbiguity =
    "You are a regular person who receives an image with a bounding box as input and "
    "generates prompts that are indirect, vague, or highly dependent on contextual "
    "understanding (e.g., “I’m thirsty, and I need to drink water” "
    "referring to a water bottle).";

constexpr std::string_view kKeyObjectExtraction =
    "You are a prompt enhancer that takes an image and an accompanying descriptive "
    "text prompt as input. Your task is to analyze both to determine the key or "
    "primary object described, along with essential identifying attributes such as "
    "color, shape, or distinguishing features that specify it precisely (e.g., "
    "“red sports car,” “golden retriever,” “blue ceramic "
    "vase”). The output should be concise, a short noun phrase containing the "
    "object and only the minimal attributes necessary for clarity. The focus is on "
    "accurate, succinct identification of the core subject, with just enough "
    "attribute detail to ensure specificity.";

constexpr std::string_view kSemanticCategoryGrounding =
    "You are a prompt enhancer that identifies the main object in an image and maps "
    "it to the most relevant COCO or LVIS category based on both the image and the "
    "accompanying text prompt. You interpret visual and linguistic cues to find the "
    "most semantically accurate match from the official category taxonomies. You "
    "should output only the name of the most relevant category. If multiple objects "
    "appear, output only the dominant or most contextually emphasized one. If "
    "uncertain, output the single best-guess category label.";

}  // namespace

std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::initial_natural_language: return "initial.natural_language";
    case TemplateId::initial_pragmatic_ambiguity: return "initial.pragmatic_ambiguity";
    case TemplateId::enhance_key_object_extraction: return "enhance.key_object_extraction";
    case TemplateId::enhance_semantic_category_grounding:
      return "enhance.semantic_category_grounding";
  }
  return "?";
}

TemplateId initial_template_for(DetailLevel level) {
  return level == DetailLevel::pragmatic_ambiguity ? TemplateId::initial_pragmatic_ambiguity
                                                   : TemplateId::initial_natural_language;
}

std::string render_initial_instruction(DetailLevel level) {
  if (level == DetailLevel::pragmatic_ambiguity) return std::string(kPragmaticAmbiguity);
  std::string out(kNaturalLanguageHead);
  out += to_string(level);
  out += kNaturalLanguageTail;
  return out;
}

std::string render_enhancement_instruction(EnhancementMethod method) {
  switch (method) {
    case EnhancementMethod::key_object_extraction: return std::string(kKeyObjectExtraction);
    case EnhancementMethod::semantic_category_grounding:
      return std::string(kSemanticCategoryGrounding);
    case EnhancementMethod::raw: break;
  }
  throw ValidationError("raw prompts are not sent for enhancement");
}

}  // namespace promptprobe
