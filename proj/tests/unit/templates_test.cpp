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

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "promptprobe/errors.hpp"
#include "support.hpp"

namespace promptprobe {
namespace {

std::string golden(const std::string& name) {
  std::ifstream in(testing::source_dir() / "tests" / "golden" / "templates" / (name + ".txt"),
                   std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Templates, InitialInstructionsMatchGoldenTexts) {
  for (DetailLevel level : kAllDetailLevels) {
    const std::string name = "initial_" + std::string(to_string(level));
    const std::string expected = golden(name);
    ASSERT_FALSE(expected.empty()) << name;
    EXPECT_EQ(render_initial_instruction(level), expected) << name;
  }
}

TEST(Templates, EnhancementInstructionsMatchGoldenTexts) {
  EXPECT_EQ(render_enhancement_instruction(EnhancementMethod::key_object_extraction),
            golden("enhance_key_object_extraction"));
  EXPECT_EQ(render_enhancement_instruction(EnhancementMethod::semantic_category_grounding),
            golden("enhance_semantic_category_grounding"));
  EXPECT_THROW(render_enhancement_instruction(EnhancementMethod::raw), ValidationError);
}

TEST(Templates, DetailWordIsTheOnlyDifference) {
  const std::string under = render_initial_instruction(DetailLevel::underdetailed);
  const std::string over = render_initial_instruction(DetailLevel::overdetailed);
  EXPECT_NE(under.find("should be underdetailed,"), std::string::npos);
  EXPECT_NE(over.find("should be overdetailed,"), std::string::npos);
  EXPECT_EQ(under.substr(0, under.find("underdetailed")), over.substr(0, over.find("overdetailed")));
}

TEST(Templates, IdsPerLevel) {
  EXPECT_EQ(initial_template_for(DetailLevel::standard), TemplateId::initial_natural_language);
  EXPECT_EQ(initial_template_for(DetailLevel::pragmatic_ambiguity),
            TemplateId::initial_pragmatic_ambiguity);
  EXPECT_EQ(to_string(TemplateId::enhance_semantic_category_grounding),
            "enhance.semantic_category_grounding");
}

}  // namespace
}  // namespace promptprobe
