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

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "promptprobe/errors.hpp"

namespace promptprobe {

using nlohmann::json;

namespace {

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json key_to_json(const ConditionKey& key) {
  return {{"prompt_type", to_string(key.prompt_type)},
          {"enhancement_method", to_string(key.method)},
          {"backend_id", key.backend_id}};
}

ConditionKey key_from_json(const json& j) {
  return {parse_detail_level(j.at("prompt_type").get<std::string>()),
          parse_enhancement_method(j.at("enhancement_method").get<std::string>()),
          j.at("backend_id").get<std::string>()};
}

std::string_view to_string(ClaimMetric metric) {
  return metric == ClaimMetric::miou ? "miou" : "confidence";
}

ClaimMetric parse_claim_metric(std::string_view name) {
  if (name == "miou") return ClaimMetric::miou;
  if (name == "confidence") return ClaimMetric::confidence;
  throw ConfigError("unknown claim metric: " + std::string(name));
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace

const ConditionResult* RunReport::find(const ConditionKey& key) const {
  for (const auto& c : cells) {
    if (c.key == key) return &c;
  }
  return nullptr;
}

const CellGap* RunReport::find_gap(const ConditionKey& key) const {
  for (const auto& g : gaps) {
    if (g.key == key) return &g;
  }
  return nullptr;
}

std::vector<ImprovementRow> compute_improvements(const RunReport& report) {
  std::vector<ImprovementRow> rows;
  for (DetailLevel level : report.metadata.prompt_levels) {
    for (const std::string& backend : report.metadata.backends) {
      const ConditionResult* raw = report.find({level, EnhancementMethod::raw, backend});
      if (raw == nullptr) continue;
      for (EnhancementMethod method : report.metadata.enhancement_methods) {
        if (method == EnhancementMethod::raw) continue;
        const ConditionResult* cell = report.find({level, method, backend});
        if (cell == nullptr) continue;
        const Improvement d = improvement(*raw, *cell);
        rows.push_back({cell->key, d.delta_miou_pp, d.delta_conf_pp});
      }
    }
  }
  return rows;
}

// --- JSON ----------------------------------------------------------------------

json report_to_json(const RunReport& report) {
  const RunMetadata& m = report.metadata;
  json levels = json::array();
  for (auto l : m.prompt_levels) levels.push_back(to_string(l));
  json methods = json::array();
  for (auto e : m.enhancement_methods) methods.push_back(to_string(e));

  json cells = json::array();
  for (const auto& c : report.cells) {
    json j = key_to_json(c.key);
    j["miou_percent"] = c.miou_percent;
    j["mean_confidence_percent"] = c.mean_confidence_percent;
    j["n_targets"] = c.n_targets;
    j["n_no_detection"] = c.n_no_detection;
    j["n_category_invalid"] = c.n_category_invalid;
    cells.push_back(std::move(j));
  }
  json gaps = json::array();
  for (const auto& g : report.gaps) {
    json j = key_to_json(g.key);
    j["cause"] = g.cause;
    gaps.push_back(std::move(j));
  }
  json improvements = json::array();
  for (const auto& r : report.improvements) {
    json j = key_to_json(r.key);
    j["delta_miou_pp"] = r.delta_miou_pp;
    j["delta_conf_pp"] = r.delta_conf_pp;
    improvements.push_back(std::move(j));
  }
  json failures = json::array();
  for (const auto& f : report.failure_index) {
    json j = key_to_json(f.key);
    j["image_id"] = f.image_id;
    j["target_id"] = f.target_id;
    failures.push_back(std::move(j));
  }
  return {{"schema_version", m.schema_version},
          {"metadata",
           {{"config_hash", m.config_hash},
            {"mode", m.mode},
            {"prompt_levels", std::move(levels)},
            {"enhancement_methods", std::move(methods)},
            {"backends", m.backends},
            {"match_criterion", m.match_criterion},
            {"confidence_mode", m.confidence_mode},
            {"n_images", m.n_images},
            {"n_targets", m.n_targets},
            {"vlm_lookups", m.vlm_lookups},
            {"vlm_hits", m.vlm_hits},
            {"cache_hit_rate", m.cache_hit_rate},
            {"category_invalid_count", m.category_invalid_count}}},
          {"cells", std::move(cells)},
          {"gaps", std::move(gaps)},
          {"improvements", std::move(improvements)},
          {"failure_index", std::move(failures)}};
}

RunReport report_from_json(const json& j) {
  RunReport r;
  try {
    RunMetadata& m = r.metadata;
    m.schema_version = j.at("schema_version").get<int>();
    const json& jm = j.at("metadata");
    m.config_hash = jm.at("config_hash").get<std::string>();
    m.mode = jm.at("mode").get<std::string>();
    for (const auto& l : jm.at("prompt_levels")) {
      m.prompt_levels.push_back(parse_detail_level(l.get<std::string>()));
    }
    for (const auto& e : jm.at("enhancement_methods")) {
      m.enhancement_methods.push_back(parse_enhancement_method(e.get<std::string>()));
    }
    m.backends = jm.at("backends").get<std::vector<std::string>>();
    m.match_criterion = jm.at("match_criterion").get<std::string>();
    m.confidence_mode = jm.at("confidence_mode").get<std::string>();
    m.n_images = jm.at("n_images").get<std::size_t>();
    m.n_targets = jm.at("n_targets").get<std::size_t>();
    m.vlm_lookups = jm.at("vlm_lookups").get<std::size_t>();
    m.vlm_hits = jm.at("vlm_hits").get<std::size_t>();
    m.cache_hit_rate = jm.at("cache_hit_rate").get<double>();
    m.category_invalid_count = jm.at("category_invalid_count").get<std::size_t>();

    for (const auto& c : j.at("cells")) {
      ConditionResult cr;
      cr.key = key_from_json(c);
      cr.miou_percent = c.at("miou_percent").get<double>();
      cr.mean_confidence_percent = c.at("mean_confidence_percent").get<double>();
      cr.n_targets = c.at("n_targets").get<std::size_t>();
      cr.n_no_detection = c.at("n_no_detection").get<std::size_t>();
      cr.n_category_invalid = c.at("n_category_invalid").get<std::size_t>();
      r.cells.push_back(std::move(cr));
    }
    for (const auto& g : j.at("gaps")) {
      r.gaps.push_back({key_from_json(g), g.at("cause").get<std::string>()});
    }
    for (const auto& i : j.at("improvements")) {
      r.improvements.push_back({key_from_json(i), i.at("delta_miou_pp").get<double>(),
                                i.at("delta_conf_pp").get<double>()});
    }
    for (const auto& f : j.at("failure_index")) {
      r.failure_index.push_back({f.at("image_id").get<std::string>(),
                                 f.at("target_id").get<std::string>(), key_from_json(f)});
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
  return r;
}

RunReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("report not found: " + path.string());
  try {
    return report_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed report " + path.string() + ": " + e.what());
  }
}

std::string render_json(const RunReport& report) { return report_to_json(report).dump(2) + "\n"; }

// --- CSV -----------------------------------------------------------------------

std::string render_csv(const RunReport& report) {
  std::ostringstream out;
  out << "prompt_type,enhancement_method,backend_id,status,miou_percent,"
         "mean_confidence_percent,n_targets,n_no_detection,n_category_invalid,"
         "delta_miou_pp,delta_conf_pp,gap_cause\n";
  for (DetailLevel level : report.metadata.prompt_levels) {
    for (EnhancementMethod method : report.metadata.enhancement_methods) {
      for (const std::string& backend : report.metadata.backends) {
        const ConditionKey key{level, method, backend};
        out << to_string(level) << ',' << to_string(method) << ',' << csv_field(backend) << ',';
        if (const ConditionResult* c = report.find(key)) {
          std::string dm, dc;
          for (const auto& row : report.improvements) {
            if (row.key == key) {
              dm = shortest(row.delta_miou_pp);
              dc = shortest(row.delta_conf_pp);
            }
          }
          out << "ok," << shortest(c->miou_percent) << ',' << shortest(c->mean_confidence_percent)
              << ',' << c->n_targets << ',' << c->n_no_detection << ',' << c->n_category_invalid
              << ',' << dm << ',' << dc << ",\n";
        } else {
          const CellGap* g = report.find_gap(key);
          out << "gap,,,,,,,," << csv_field(g ? g->cause : "cell absent") << '\n';
        }
      }
    }
  }
  return out.str();
}

// --- Markdown ------------------------------------------------------------------

std::string render_markdown(const RunReport& report) {
  const RunMetadata& m = report.metadata;
  std::ostringstream out;
  out << "# Prompt robustness report\n\n";
  out << "| Initial Prompt Type | Prompt Enhancement Method |";
  for (const auto& b : m.backends) out << ' ' << b << " mIoU (%) | " << b << " Conf (%) |";
  out << "\n|---|---|";
  for (std::size_t i = 0; i < m.backends.size(); ++i) out << "---:|---:|";
  out << '\n';

  std::vector<std::string> footnotes;
  for (DetailLevel level : m.prompt_levels) {
    // Best rounded value per (backend, metric) column within this group.
    std::vector<std::optional<double>> best(m.backends.size() * 2);
    for (EnhancementMethod method : m.enhancement_methods) {
      for (std::size_t b = 0; b < m.backends.size(); ++b) {
        if (const auto* c = report.find({level, method, m.backends[b]})) {
          const double vals[2] = {round2(c->miou_percent), round2(c->mean_confidence_percent)};
          for (int k = 0; k < 2; ++k) {
            auto& slot = best[b * 2 + static_cast<std::size_t>(k)];
            if (!slot || vals[k] > *slot) slot = vals[k];
          }
        }
      }
    }
    bool first = true;
    for (EnhancementMethod method : m.enhancement_methods) {
      out << "| " << (first ? display_name(level) : std::string_view()) << " | "
          << display_name(method) << " |";
      first = false;
      for (std::size_t b = 0; b < m.backends.size(); ++b) {
        const ConditionKey key{level, method, m.backends[b]};
        if (const auto* c = report.find(key)) {
          const double vals[2] = {c->miou_percent, c->mean_confidence_percent};
          for (int k = 0; k < 2; ++k) {
            const std::string text = format_fixed2(vals[k]);
            const auto& slot = best[b * 2 + static_cast<std::size_t>(k)];
            const bool bold = slot && round2(vals[k]) == *slot;
            out << ' ' << (bold ? "**" + text + "**" : text) << " |";
          }
        } else {
          const CellGap* g = report.find_gap(key);
          footnotes.push_back(fmt::format("{} / {} / {}: {}", to_string(level), to_string(method),
                                          m.backends[b], g ? g->cause : "cell absent"));
          const std::string mark = fmt::format("—[^{}]", footnotes.size());
          out << ' ' << mark << " | " << mark << " |";
        }
      }
      out << '\n';
    }
  }

  if (!report.improvements.empty()) {
    out << "\n## Improvement over raw prompt (percentage points)\n\n";
    out << "| Initial Prompt Type | Prompt Enhancement Method | Backend | ΔmIoU | ΔConf |\n";
    out << "|---|---|---|---:|---:|\n";
    for (const auto& row : report.improvements) {
      auto signed2 = [](double v) {
        const std::string s = format_fixed2(v);
        return s[0] == '-' ? s : "+" + s;
      };
      out << "| " << display_name(row.key.prompt_type) << " | " << display_name(row.key.method)
          << " | " << row.key.backend_id << " | " << signed2(row.delta_miou_pp) << " | "
          << signed2(row.delta_conf_pp) << " |\n";
    }
  }

  out << "\n## Run\n\n";
  out << "- config hash: `" << m.config_hash << "`\n";
  out << "- mode: " << m.mode << "\n";
  out << "- images: " << m.n_images << ", targets: " << m.n_targets << "\n";
  out << "- matching: " << m.match_criterion << ", confidence: " << m.confidence_mode << "\n";
  out << "- VLM cache hit rate: " << format_fixed2(100.0 * m.cache_hit_rate) << "% ("
      << m.vlm_hits << "/" << m.vlm_lookups << ")\n";
  out << "- out-of-vocabulary category answers: " << m.category_invalid_count << "\n";
  out << "- targets with no detection: " << report.failure_index.size() << "\n";

  if (!footnotes.empty()) {
    out << '\n';
    for (std::size_t i = 0; i < footnotes.size(); ++i) {
      out << "[^" << i + 1 << "]: " << footnotes[i] << '\n';
    }
  }
  return out.str();
}

std::vector<std::filesystem::path> emit_report(const RunReport& report,
                                               std::span<const std::string> formats,
                                               const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> written;
  if (formats.empty()) {
    spdlog::warn("no report formats requested; nothing written");
    return written;
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create output directory " + out_dir.string() + ": " + ec.message());
  for (const std::string& format : formats) {
    std::string text;
    if (format == "json") {
      text = render_json(report);
    } else if (format == "csv") {
      text = render_csv(report);
    } else if (format == "md") {
      text = render_markdown(report);
    } else {
      throw ConfigError("unknown report format: " + format);
    }
    const auto path = out_dir / ("report." + format);
    write_text(path, text);
    written.push_back(path);
  }
  return written;
}

// --- claims --------------------------------------------------------------------

std::vector<Claim> parse_claims(const json& doc) {
  std::vector<Claim> claims;
  if (doc.is_null()) return claims;
  try {
    for (const json& c : doc.at("claims")) {
      Claim claim;
      claim.name = c.at("name").get<std::string>();
      claim.prompt_type = parse_detail_level(c.at("prompt_type").get<std::string>());
      claim.backend_id = c.at("backend_id").get<std::string>();
      claim.from = parse_enhancement_method(c.value("from", std::string("raw")));
      claim.to = parse_enhancement_method(c.at("to").get<std::string>());
      claim.metric = parse_claim_metric(c.at("metric").get<std::string>());
      claim.expected_pp = c.at("expected_pp").get<double>();
      claim.tolerance_pp = c.value("tolerance_pp", 0.01);
      claims.push_back(std::move(claim));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed claim file: ") + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("malformed claim file: ") + e.what());
  }
  return claims;
}

std::vector<Claim> load_claims(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("claim file not found: " + path.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return {};
  try {
    return parse_claims(json::parse(text));
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed claim file " + path.string() + ": " + e.what());
  }
}

std::vector<ClaimOutcome> consistency_check(const RunReport& report,
                                            std::span<const Claim> claims) {
  std::vector<ClaimOutcome> outcomes;
  for (const Claim& claim : claims) {
    ClaimOutcome o;
    o.name = claim.name;
    const ConditionResult* from = report.find({claim.prompt_type, claim.from, claim.backend_id});
    const ConditionResult* to = report.find({claim.prompt_type, claim.to, claim.backend_id});
    if (from == nullptr || to == nullptr) {
      o.message = "cell absent";
      outcomes.push_back(std::move(o));
      continue;
    }
    const Improvement d = improvement(*from, *to);
    const double observed = claim.metric == ClaimMetric::miou ? d.delta_miou_pp : d.delta_conf_pp;
    const double residual = observed - claim.expected_pp;
    o.observed_pp = observed;
    o.residual_pp = residual;
    // Slack for binary representation of two-decimal inputs.
    o.passed = std::abs(residual) <= claim.tolerance_pp + 1e-9;
    o.message = fmt::format("observed {} pp, expected {} ± {} pp, residual {}",
                            format_fixed2(observed), format_fixed2(claim.expected_pp),
                            format_fixed2(claim.tolerance_pp), format_fixed2(residual));
    outcomes.push_back(std::move(o));
  }
  return outcomes;
}

std::string format_claim_listing(std::span<const ClaimOutcome> outcomes) {
  std::ostringstream out;
  std::size_t passed = 0;
  for (const auto& o : outcomes) {
    if (o.passed) ++passed;
    out << (o.passed ? "PASS " : "FAIL ") << o.name << ": " << o.message << '\n';
  }
  out << passed << "/" << outcomes.size() << " claims passed\n";
  return out.str();
}

}  // namespace promptprobe
