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

#include "promptprobe/report.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "promptprobe/errors.hpp"
#include "support.hpp"

namespace promptprobe {
namespace {

using testing::ScratchDir;

RunReport reference_report() {
  return load_report(testing::source_dir() / "data" / "reference" / "published_report.json");
}

RunReport small_report() {
  RunReport r;
  r.metadata.config_hash = "abc";
  r.metadata.mode = "replay";
  r.metadata.prompt_levels = {DetailLevel::standard};
  r.metadata.enhancement_methods = {EnhancementMethod::raw,
                                    EnhancementMethod::key_object_extraction};
  r.metadata.backends = {"gd", "yolo"};
  r.cells = {{{DetailLevel::standard, EnhancementMethod::raw, "gd"}, 50.004, 60, 2, 1, 0},
             {{DetailLevel::standard, EnhancementMethod::raw, "yolo"}, 40, 30.5, 2, 0, 0},
             {{DetailLevel::standard, EnhancementMethod::key_object_extraction, "gd"}, 50.0, 70.125, 2, 0, 0}};
  r.gaps = {{{DetailLevel::standard, EnhancementMethod::key_object_extraction, "yolo"},
             "img1/t: yolo unavailable"}};
  r.improvements = compute_improvements(r);
  r.failure_index = {{"img1", "t", {DetailLevel::standard, EnhancementMethod::raw, "gd"}}};
  return r;
}

TEST(Report, ReferenceTableLoads) {
  const RunReport r = reference_report();
  EXPECT_EQ(r.cells.size(), 24u);
  const auto* c = r.find({DetailLevel::pragmatic_ambiguity,
                          EnhancementMethod::semantic_category_grounding, "groundingdino"});
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->miou_percent, 90.99);
  EXPECT_EQ(r.improvements.size(), 16u);
}

TEST(Report, JsonRoundTrip) {
  for (const RunReport& r : {reference_report(), small_report()}) {
    const RunReport back = report_from_json(report_to_json(r));
    EXPECT_EQ(back, r);
    EXPECT_EQ(render_json(back), render_json(r));
  }
  // Random full-precision values survive.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 100);
  RunReport r = small_report();
  for (int i = 0; i < 100; ++i) {
    for (auto& c : r.cells) {
      c.miou_percent = u(rng);
      c.mean_confidence_percent = u(rng);
    }
    r.improvements = compute_improvements(r);
    ASSERT_EQ(report_from_json(report_to_json(r)), r);
  }
}

TEST(Report, ImprovementsPairWithRaw) {
  const RunReport r = small_report();
  ASSERT_EQ(r.improvements.size(), 1u);  // the yolo KOE cell is a gap
  EXPECT_EQ(r.improvements[0].key.backend_id, "gd");
  EXPECT_DOUBLE_EQ(r.improvements[0].delta_conf_pp, 10.125);
}

TEST(Report, CsvRowsInConfiguredOrderWithGaps) {
  const std::string csv = render_csv(small_report());
  std::istringstream in(csv);
  std::string header, row1, row2, row3, row4;
  std::getline(in, header);
  std::getline(in, row1);
  std::getline(in, row2);
  std::getline(in, row3);
  std::getline(in, row4);
  EXPECT_EQ(header.rfind("prompt_type,enhancement_method,backend_id,status,miou_percent", 0), 0u);
  EXPECT_EQ(row1.rfind("standard,raw,gd,ok,50.004,60,", 0), 0u) << row1;
  EXPECT_EQ(row2.rfind("standard,raw,yolo,ok,", 0), 0u);
  EXPECT_EQ(row3.rfind("standard,key_object_extraction,gd,ok,50,70.125,", 0), 0u) << row3;
  EXPECT_EQ(row4.rfind("standard,key_object_extraction,yolo,gap,", 0), 0u);
  EXPECT_NE(row4.find("yolo unavailable"), std::string::npos);
}

TEST(Report, MarkdownBoldsBestAndFootnotesGaps) {
  const std::string md = render_markdown(small_report());
  EXPECT_NE(md.find("| Standard | Raw Prompt | **50.00** | 60.00 | **40.00** | **30.50** |"),
            std::string::npos)
      << md;
  EXPECT_NE(md.find("|  | Key Object Extraction | **50.00** | **70.12** | —[^1] | —[^1] |"),
            std::string::npos)
      << md;
  EXPECT_NE(md.find("[^1]: standard / key_object_extraction / yolo: img1/t: yolo unavailable"),
            std::string::npos);
  EXPECT_NE(md.find("| Standard | Key Object Extraction | gd | +0.00 | +10.12 |"), std::string::npos)
      << md;
}

TEST(Report, MarkdownMatchesPublishedBolding) {
  const std::string md = render_markdown(reference_report());
  EXPECT_NE(md.find("| Pragmatic Ambiguity | Raw Prompt | 35.84 | 44.59 | 9.56 | 8.61 |"),
            std::string::npos);
  EXPECT_NE(md.find("|  | Semantic Category Grounding | **90.99** | 77.51 | **65.66** | **57.35** |"),
            std::string::npos);
  EXPECT_NE(md.find("| Overdetailed | Raw Prompt | 59.46 | 69.40 | **70.17** | **56.07** |"),
            std::string::npos);
}

TEST(Report, EmitWritesRequestedFormatsOnly) {
  ScratchDir dir("emit");
  const std::vector<std::string> none;
  EXPECT_TRUE(emit_report(small_report(), none, dir / "a").empty());
  EXPECT_FALSE(std::filesystem::exists(dir / "a"));
  const std::vector<std::string> two = {"csv", "md"};
  const auto written = emit_report(small_report(), two, dir / "b");
  ASSERT_EQ(written.size(), 2u);
  EXPECT_TRUE(std::filesystem::exists(dir / "b" / "report.csv"));
  EXPECT_FALSE(std::filesystem::exists(dir / "b" / "report.json"));
  const std::vector<std::string> bad = {"xml"};
  EXPECT_THROW(emit_report(small_report(), bad, dir / "c"), ConfigError);
}

TEST(Claims, PassFailAndAbsent) {
  const RunReport r = reference_report();
  const std::vector<Claim> claims =
      parse_claims(nlohmann::json::parse(std::ifstream(testing::source_dir() / "data" / "claims" /
                                                       "pragmatic_improvements.json")));
  ASSERT_EQ(claims.size(), 4u);
  for (const auto& o : consistency_check(r, claims)) {
    EXPECT_TRUE(o.passed) << o.name << ": " << o.message;
    EXPECT_NEAR(*o.residual_pp, 0.0, 0.005);
  }

  Claim off = claims[0];
  off.expected_pp = 55.17;
  Claim absent = claims[0];
  absent.backend_id = "nobody";
  const std::vector<Claim> more = {off, absent};
  const auto outcomes = consistency_check(r, more);
  EXPECT_FALSE(outcomes[0].passed);
  EXPECT_NEAR(*outcomes[0].residual_pp, -0.02, 1e-9);
  EXPECT_FALSE(outcomes[1].passed);
  EXPECT_EQ(outcomes[1].message, "cell absent");
  const std::string listing = format_claim_listing(outcomes);
  EXPECT_NE(listing.find("FAIL "), std::string::npos);
  EXPECT_NE(listing.find("0/2 claims passed"), std::string::npos);
}

TEST(Claims, EmptyFileHoldsNoClaims) {
  ScratchDir dir("claims");
  std::ofstream(dir / "empty.json") << "\n";
  EXPECT_TRUE(load_claims(dir / "empty.json").empty());
  std::ofstream(dir / "bad.json") << R"({"claims":[{"name":"x"}]})";
  EXPECT_THROW(load_claims(dir / "bad.json"), ConfigError);
  EXPECT_THROW(load_claims(dir / "missing.json"), ConfigError);
}

}  // namespace
}  // namespace promptprobe
