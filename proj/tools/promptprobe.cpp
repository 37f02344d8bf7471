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

// Command-line front end: run, report, check, failures.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "promptprobe/errors.hpp"
#include "promptprobe/harness.hpp"

namespace pp = promptprobe;

namespace {

constexpr int kExitClaimsFailed = 1;
constexpr int kExitError = 2;

std::vector<std::string> split_formats(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item != "csv" && item != "json" && item != "md") {
      throw pp::ConfigError("unknown report format: " + item);
    }
    out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prompt-formulation benchmark harness for open-set detectors"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")
      ->capture_default_str();

  auto* run_cmd = app.add_subcommand("run", "Evaluate every configured condition");
  std::string config_path;
  std::string mode;
  std::string out_dir;
  int workers = 0;
  std::string run_formats = "csv,json,md";
  run_cmd->add_option("--config", config_path, "Run configuration (JSON)")->required();
  run_cmd->add_option("--mode", mode, "live|cached|replay (overrides the config)");
  run_cmd->add_option("--out", out_dir, "Output directory (overrides the config)");
  run_cmd->add_option("--workers", workers, "Worker threads (overrides the config)");
  run_cmd->add_option("--format", run_formats, "Report formats to write")->capture_default_str();

  auto* report_cmd = app.add_subcommand("report", "Re-render the report of a finished run");
  std::string run_dir;
  std::string formats = "csv,json,md";
  report_cmd->add_option("--run", run_dir, "Run output directory")->required();
  report_cmd->add_option("--format", formats, "Comma-separated: csv,json,md")
      ->capture_default_str();

  auto* check_cmd = app.add_subcommand("check", "Compare improvements against expected deltas");
  std::string claims_path;
  check_cmd->add_option("--run", run_dir, "Run output directory")->required();
  check_cmd->add_option("--claims", claims_path, "Claims file (JSON)")->required();

  auto* failures_cmd = app.add_subcommand("failures", "Render low-IoU targets for inspection");
  double iou_threshold = 0.5;
  failures_cmd->add_option("--run", run_dir, "Run output directory")->required();
  failures_cmd->add_option("--iou-threshold", iou_threshold, "Export targets below this IoU")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*run_cmd) {
      pp::RunConfig config = pp::load_run_config(config_path);
      if (!mode.empty()) config.mode = pp::parse_run_mode(mode);
      if (!out_dir.empty()) config.output_dir = out_dir;
      if (workers > 0) config.workers = workers;
      const auto fmts = split_formats(run_formats);
      const pp::RunResult result = pp::run(config);
      pp::write_run_outputs(result, config);
      pp::emit_report(result.report, fmts, config.output_dir);
      std::cout << fmt::format("{} cells, {} gaps -> {}\n", result.report.cells.size(),
                               result.report.gaps.size(), config.output_dir.string());
    } else if (*report_cmd) {
      const pp::RunReport report = pp::load_report(std::filesystem::path(run_dir) / "report.json");
      for (const auto& path : pp::emit_report(report, split_formats(formats), run_dir)) {
        std::cout << path.string() << '\n';
      }
    } else if (*check_cmd) {
      const pp::RunReport report = pp::load_report(std::filesystem::path(run_dir) / "report.json");
      const auto claims = pp::load_claims(claims_path);
      const auto outcomes = pp::consistency_check(report, claims);
      const std::string listing = pp::format_claim_listing(outcomes);
      std::ofstream(std::filesystem::path(run_dir) / "claims.txt", std::ios::binary) << listing;
      std::cout << listing;
      for (const auto& o : outcomes) {
        if (!o.passed) return kExitClaimsFailed;
      }
    } else if (*failures_cmd) {
      const auto exported = pp::export_failures(run_dir, iou_threshold);
      std::cout << fmt::format("{} failure case(s) -> {}\n", exported.exported,
                               exported.index_path.string());
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitError;
  }
  return 0;
}
