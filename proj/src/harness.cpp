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

#include "promptprobe/harness.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <thread>

#include "promptprobe/errors.hpp"
#include "promptprobe/hash.hpp"

namespace promptprobe {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::string param_string(const json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

Rgb parse_color(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("border_color must be [r, g, b]");
  std::array<std::uint8_t, 3> c{};
  for (std::size_t i = 0; i < 3; ++i) {
    const int v = j[i].get<int>();
    if (v < 0 || v > 255) throw ConfigError("border_color channels must lie in [0, 255]");
    c[i] = static_cast<std::uint8_t>(v);
  }
  return {c[0], c[1], c[2]};
}

std::string utc_now() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)));
}

json match_to_json(const TargetMatch& m) {
  json j = {{"intersection_area", m.intersection_area},
            {"iou", m.iou},
            {"confidence", m.confidence}};
  j["pred_index"] = m.pred_index ? json(*m.pred_index) : json(nullptr);
  return j;
}

}  // namespace

// --- config ----------------------------------------------------------------------

std::filesystem::path RunConfig::effective_cache_dir() const {
  return cache_dir ? *cache_dir : output_dir / "cache";
}

std::string config_hash(const json& doc) {
  json canonical = doc;
  for (const char* key : {"workers", "output_dir", "mode", "cache_dir", "replay_store", "seed"}) {
    canonical.erase(key);
  }
  return sha256_hex(canonical.dump());
}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
  RunConfig c;
  try {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    c.schema_version = doc.at("schema_version").get<int>();
    if (c.schema_version != kConfigSchemaVersion) {
      throw ConfigError(fmt::format("unsupported config schema_version {} (expected {})",
                                    c.schema_version, kConfigSchemaVersion));
    }
    c.manifest_path = resolve(base_dir, doc.at("manifest").get<std::string>());

    if (doc.contains("prompt_levels")) {
      for (const auto& l : doc.at("prompt_levels")) {
        c.prompt_levels.push_back(parse_detail_level(l.get<std::string>()));
      }
    } else {
      c.prompt_levels.assign(kAllDetailLevels.begin(), kAllDetailLevels.end());
    }
    if (doc.contains("enhancement_methods")) {
      for (const auto& m : doc.at("enhancement_methods")) {
        c.enhancement_methods.push_back(parse_enhancement_method(m.get<std::string>()));
      }
    } else {
      c.enhancement_methods.assign(kAllEnhancementMethods.begin(), kAllEnhancementMethods.end());
    }

    std::set<std::string> ids;
    for (const auto& b : doc.at("backends")) {
      DetectorSpec spec;
      spec.backend_id = b.at("backend_id").get<std::string>();
      spec.kind = parse_detector_kind(b.at("kind").get<std::string>());
      spec.score_threshold = b.value("score_threshold", 0.25);
      if (b.contains("params")) {
        for (const auto& [k, v] : b.at("params").items()) spec.params[k] = param_string(v);
      }
      if (auto it = spec.params.find("fixture_dir"); it != spec.params.end()) {
        it->second = resolve(base_dir, it->second).string();
      }
      if (!(spec.score_threshold >= 0.0 && spec.score_threshold <= 1.0)) {
        throw ConfigError("score_threshold of " + spec.backend_id + " must lie in [0, 1]");
      }
      if (!ids.insert(spec.backend_id).second) {
        throw ConfigError("duplicate backend_id " + spec.backend_id);
      }
      c.backends.push_back(std::move(spec));
    }

    if (doc.contains("vlm")) {
      const json& v = doc.at("vlm");
      c.vlm.endpoint = v.value("endpoint", std::string());
      if (c.vlm.endpoint.rfind("fixture:", 0) == 0) {
        c.vlm.endpoint = "fixture:" + resolve(base_dir, c.vlm.endpoint.substr(8)).string();
      }
      c.vlm.model_id = v.value("model_id", c.vlm.model_id);
      c.vlm.token_env = v.value("token_env", c.vlm.token_env);
      if (v.contains("decoding")) {
        const json& d = v.at("decoding");
        if (d.contains("temperature")) {
          c.vlm.decoding.temperature =
              d.at("temperature").is_null() ? std::nullopt
                                            : std::optional<double>(d.at("temperature").get<double>());
        }
        if (d.contains("max_tokens") && !d.at("max_tokens").is_null()) {
          c.vlm.decoding.max_tokens = d.at("max_tokens").get<int>();
        }
      }
      c.vlm.max_in_flight = v.value("max_in_flight", c.vlm.max_in_flight);
      c.vlm.max_attempts = v.value("max_attempts", c.vlm.max_attempts);
      c.vlm.initial_backoff_seconds = v.value("initial_backoff_seconds", c.vlm.initial_backoff_seconds);
    }

    c.mode = parse_run_mode(doc.value("mode", std::string("cached")));
    if (doc.contains("replay_store")) {
      c.replay_store = resolve(base_dir, doc.at("replay_store").get<std::string>());
    }
    if (doc.contains("cache_dir")) {
      c.cache_dir = resolve(base_dir, doc.at("cache_dir").get<std::string>());
    }
    if (doc.contains("overlay_style")) {
      const json& s = doc.at("overlay_style");
      if (s.contains("border_color")) c.overlay_style.border_color = parse_color(s.at("border_color"));
      c.overlay_style.border_width = s.value("border_width", c.overlay_style.border_width);
      if (s.contains("label_text") && !s.at("label_text").is_null()) {
        c.overlay_style.label_text = s.at("label_text").get<std::string>();
      }
      if (c.overlay_style.border_width < 1) throw ConfigError("border_width must be >= 1");
    }
    if (doc.contains("metrics")) {
      const json& m = doc.at("metrics");
      c.metrics.criterion =
          parse_match_criterion(m.value("match_criterion", std::string("largest_intersection")));
      c.metrics.confidence_mode =
          parse_confidence_mode(m.value("confidence_mode", std::string("zero_fill")));
    }
    c.output_dir = resolve(base_dir, doc.value("output_dir", std::string("out")));
    c.seed = doc.value("seed", std::uint64_t{0});
    c.workers = doc.value("workers", 1);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  if (c.backends.empty()) throw ConfigError("config needs at least one backend");
  if (c.prompt_levels.empty()) throw ConfigError("config needs at least one prompt level");
  if (c.enhancement_methods.empty()) throw ConfigError("config needs at least one enhancement method");
  if (c.workers < 1) throw ConfigError("workers must be >= 1");
  c.config_hash = config_hash(doc);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config not found: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  return parse_run_config(doc, std::filesystem::absolute(path).parent_path());
}

// --- records ---------------------------------------------------------------------

json record_to_json(const TargetRecord& r) {
  json j = {{"image_id", r.image_id},
            {"target_id", r.target_id},
            {"prompt_type", to_string(r.key.prompt_type)},
            {"enhancement_method", to_string(r.key.method)},
            {"backend_id", r.key.backend_id},
            {"initial_prompt", r.initial_prompt},
            {"initial_provenance", r.initial_provenance},
            {"enhanced_prompt", r.enhanced_prompt},
            {"detections", detections_to_json(r.detections)},
            {"match", match_to_json(r.match)}};
  j["category_valid"] = r.category_valid ? json(*r.category_valid) : json(nullptr);
  j["error"] = r.error ? json(*r.error) : json(nullptr);
  return j;
}

TargetRecord record_from_json(const json& j) {
  TargetRecord r;
  r.image_id = j.at("image_id").get<std::string>();
  r.target_id = j.at("target_id").get<std::string>();
  r.key = {parse_detail_level(j.at("prompt_type").get<std::string>()),
           parse_enhancement_method(j.at("enhancement_method").get<std::string>()),
           j.at("backend_id").get<std::string>()};
  r.initial_prompt = j.at("initial_prompt").get<std::string>();
  r.initial_provenance = j.at("initial_provenance").get<std::string>();
  r.enhanced_prompt = j.at("enhanced_prompt").get<std::string>();
  if (!j.at("category_valid").is_null()) r.category_valid = j.at("category_valid").get<bool>();
  r.detections = detections_from_json(j.at("detections"));
  const json& m = j.at("match");
  r.match.target_id = r.target_id;
  if (!m.at("pred_index").is_null()) {
    r.match.pred_index = m.at("pred_index").get<std::size_t>();
    r.match.matched_detection = r.detections.at(*r.match.pred_index);
  }
  r.match.intersection_area = m.at("intersection_area").get<double>();
  r.match.iou = m.at("iou").get<double>();
  r.match.confidence = m.at("confidence").get<double>();
  if (!j.at("error").is_null()) r.error = j.at("error").get<std::string>();
  return r;
}

std::vector<TargetRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("records not found: " + path.string());
  std::vector<TargetRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw ValidationError(fmt::format("{} line {}: {}", path.string(), n, e.what()));
    }
  }
  return out;
}

// --- run -------------------------------------------------------------------------

namespace {

class Pipeline {
 public:
  Pipeline(const RunConfig& config, const RunEnvironment& env) : config_(config) {
    const bool replay = config.mode == RunMode::replay;
    if (replay) {
      if (!config.replay_store) throw ConfigError("replay mode requires replay_store");
      store_ = std::make_unique<ExchangeStore>(*config.replay_store, true);
    } else {
      store_ = std::make_unique<ExchangeStore>(config.effective_cache_dir(), false);
    }

    auto transport = [&]() -> HttpTransport& {
      if (env.transport) return *env.transport;
      if (!owned_transport_) owned_transport_ = make_http_transport();
      return *owned_transport_;
    };

    VlmBackend* vlm_backend = env.vlm_backend;
    if (!replay && vlm_backend == nullptr) {
      const std::string& endpoint = config.vlm.endpoint;
      if (endpoint.rfind("fixture:", 0) == 0) {
        owned_vlm_ = std::make_unique<FixtureVlmBackend>(
            FixtureVlmBackend::from_file(endpoint.substr(8)));
      } else if (!endpoint.empty()) {
        const char* token = std::getenv(config.vlm.token_env.c_str());
        if (token == nullptr || *token == '\0') {
          spdlog::warn("environment variable {} is unset; calling {} without a token",
                       config.vlm.token_env, endpoint);
        }
        owned_vlm_ = std::make_unique<ChatCompletionsBackend>(transport(), endpoint,
                                                              token ? token : "");
      } else {
        throw ConfigError("vlm.endpoint is required outside replay mode");
      }
      vlm_backend = owned_vlm_.get();
    }
    vlm_ = std::make_unique<VlmClient>(config.vlm, config.mode, vlm_backend, store_.get(),
                                       env.sleeper);

    for (const DetectorSpec& spec : config.backends) {
      std::unique_ptr<DetectorBackend> backend;
      if (spec.kind == DetectorKind::mock) {
        auto dir_it = spec.params.find("fixture_dir");
        if (dir_it == spec.params.end()) {
          throw ConfigError("mock backend " + spec.backend_id + " needs params.fixture_dir");
        }
        auto& fixtures = mock_stores_[dir_it->second];
        if (!fixtures) {
          fixtures = std::make_shared<const MockFixtureStore>(MockFixtureStore::load(dir_it->second));
        }
        auto scenario_it = spec.params.find("scenario");
        backend = std::make_unique<MockBackend>(
            fixtures, scenario_it != spec.params.end() ? scenario_it->second : spec.backend_id,
            spec.backend_id);
      } else {
        std::unique_ptr<DetectorBackend> inner;
        if (!replay) inner = std::make_unique<RemoteDetectorBackend>(spec, transport());
        backend = std::make_unique<RecordingBackend>(spec, std::move(inner), *store_, config.mode);
      }
      detectors_.push_back(std::make_unique<Detector>(spec, std::move(backend)));
    }
  }

  std::vector<TargetRecord> process_image(const AnnotatedImage& item) {
    std::vector<TargetRecord> records;
    RgbImage image;
    std::optional<std::string> image_error;
    try {
      image = load_image(item.image_path);
      if (image.width() != item.width || image.height() != item.height) {
        image_error = fmt::format("image is {}x{}, manifest says {}x{}", image.width(),
                                  image.height(), item.width, item.height);
      }
    } catch (const Error& e) {
      image_error = e.what();
    }

    std::map<std::pair<std::size_t, std::string>, std::vector<Detection>> detection_memo;
    for (const Target& target : item.targets) {
      std::optional<RgbImage> overlay;
      if (!image_error) overlay = render_target_overlay(image, target.box, config_.overlay_style);
      const GroundTruth gt{target.target_id, target.box};

      for (DetailLevel level : config_.prompt_levels) {
        std::optional<PromptVariant> initial;
        std::optional<std::string> initial_error = image_error;
        if (!initial_error) {
          try {
            initial = vlm_->generate_initial_prompt(*overlay, level, item.image_id,
                                                    target.target_id);
          } catch (const ReplayError&) {
            throw;
          } catch (const Error& e) {
            initial_error = std::string("initial prompt: ") + e.what();
          }
        }

        for (EnhancementMethod method : config_.enhancement_methods) {
          std::optional<EnhancedPrompt> enhanced;
          std::optional<std::string> enhance_error = initial_error;
          if (!enhance_error) {
            try {
              enhanced = vlm_->enhance(method, image, *initial);
            } catch (const ReplayError&) {
              throw;
            } catch (const Error& e) {
              enhance_error = std::string(to_string(method)) + ": " + e.what();
            }
          }

          for (std::size_t b = 0; b < detectors_.size(); ++b) {
            Detector& detector = *detectors_[b];
            TargetRecord rec;
            rec.image_id = item.image_id;
            rec.target_id = target.target_id;
            rec.key = {level, method, detector.spec().backend_id};
            rec.match.target_id = target.target_id;
            if (initial) {
              rec.initial_prompt = initial->text;
              rec.initial_provenance = std::string(to_string(initial->provenance));
            }
            if (enhanced) {
              rec.enhanced_prompt = enhanced->text;
              rec.category_valid = enhanced->category_valid;
            }
            rec.error = enhance_error;
            if (!rec.error) {
              try {
                const auto memo_key = std::make_pair(b, enhanced->text);
                auto it = detection_memo.find(memo_key);
                if (it == detection_memo.end()) {
                  it = detection_memo
                           .emplace(memo_key, detector.detect(image, item.image_id, *enhanced))
                           .first;
                }
                rec.detections = it->second;
                rec.match = match_largest_intersection(std::span(&gt, 1), rec.detections,
                                                       config_.metrics.criterion)
                                .entries.front();
              } catch (const ReplayError&) {
                throw;
              } catch (const Error& e) {
                rec.error = detector.spec().backend_id + ": " + e.what();
              }
            }
            records.push_back(std::move(rec));
          }
        }
      }
    }
    return records;
  }

  VlmStats vlm_stats() const { return vlm_->stats(); }

 private:
  const RunConfig& config_;
  std::unique_ptr<ExchangeStore> store_;
  std::unique_ptr<HttpTransport> owned_transport_;
  std::unique_ptr<VlmBackend> owned_vlm_;
  std::unique_ptr<VlmClient> vlm_;
  std::map<std::string, std::shared_ptr<const MockFixtureStore>> mock_stores_;
  std::vector<std::unique_ptr<Detector>> detectors_;
};

std::size_t index_of(std::span<const DetailLevel> v, DetailLevel x) {
  return static_cast<std::size_t>(std::find(v.begin(), v.end(), x) - v.begin());
}
std::size_t index_of(std::span<const EnhancementMethod> v, EnhancementMethod x) {
  return static_cast<std::size_t>(std::find(v.begin(), v.end(), x) - v.begin());
}

}  // namespace

RunResult run(const RunConfig& config, const RunEnvironment& env) {
  const auto manifest = load_manifest(config.manifest_path);
  Pipeline pipeline(config, env);

  // Scheduling order only; results are reassembled by manifest position.
  std::vector<std::size_t> order(manifest.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(config.seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::vector<TargetRecord>> per_image(manifest.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    while (!abort.load()) {
      const std::size_t slot = next.fetch_add(1);
      if (slot >= order.size()) return;
      const std::size_t i = order[slot];
      try {
        per_image[i] = pipeline.process_image(manifest[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        abort = true;
      }
    }
  };
  const int n_workers =
      std::max(1, std::min<int>(config.workers, static_cast<int>(std::max<std::size_t>(1, manifest.size()))));
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < n_workers; ++t) threads.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  RunResult result;
  for (auto& recs : per_image) {
    for (auto& r : recs) result.records.push_back(std::move(r));
  }
  const auto& levels = config.prompt_levels;
  const auto& methods = config.enhancement_methods;
  std::map<std::string, std::size_t> backend_pos;
  for (std::size_t b = 0; b < config.backends.size(); ++b) backend_pos[config.backends[b].backend_id] = b;
  std::stable_sort(result.records.begin(), result.records.end(),
                   [&](const TargetRecord& a, const TargetRecord& b) {
                     auto key = [&](const TargetRecord& r) {
                       return std::make_tuple(r.image_id, r.target_id, index_of(levels, r.key.prompt_type),
                                              index_of(methods, r.key.method),
                                              backend_pos[r.key.backend_id]);
                     };
                     return key(a) < key(b);
                   });

  RunReport& report = result.report;
  RunMetadata& meta = report.metadata;
  meta.config_hash = config.config_hash;
  meta.mode = std::string(to_string(config.mode));
  meta.prompt_levels = levels;
  meta.enhancement_methods = methods;
  for (const auto& spec : config.backends) meta.backends.push_back(spec.backend_id);
  meta.match_criterion = std::string(to_string(config.metrics.criterion));
  meta.confidence_mode = std::string(to_string(config.metrics.confidence_mode));
  meta.n_images = manifest.size();
  meta.n_targets = count_targets(manifest);

  std::map<ConditionKey, std::vector<const TargetRecord*>> by_cell;
  for (const auto& r : result.records) by_cell[r.key].push_back(&r);

  for (DetailLevel level : levels) {
    for (EnhancementMethod method : methods) {
      for (const auto& spec : config.backends) {
        const ConditionKey key{level, method, spec.backend_id};
        const auto& recs = by_cell[key];
        const TargetRecord* failed = nullptr;
        for (const auto* r : recs) {
          if (r->error) {
            failed = r;
            break;
          }
        }
        if (recs.empty()) {
          report.gaps.push_back({key, "no targets"});
          continue;
        }
        if (failed) {
          report.gaps.push_back(
              {key, fmt::format("{}/{}: {}", failed->image_id, failed->target_id, *failed->error)});
          continue;
        }
        std::vector<TargetOutcome> outcomes;
        for (const auto* r : recs) {
          outcomes.push_back({r->image_id, r->match, r->category_valid.has_value() && !*r->category_valid});
          if (!r->match.matched()) report.failure_index.push_back({r->image_id, r->target_id, key});
        }
        report.cells.push_back(aggregate(key, std::move(outcomes), config.metrics.confidence_mode));
      }
    }
  }
  std::sort(report.failure_index.begin(), report.failure_index.end(),
            [&](const FailureRef& a, const FailureRef& b) {
              auto key = [&](const FailureRef& f) {
                return std::make_tuple(f.image_id, f.target_id, index_of(levels, f.key.prompt_type),
                                       index_of(methods, f.key.method), backend_pos[f.key.backend_id]);
              };
              return key(a) < key(b);
            });
  report.improvements = compute_improvements(report);

  for (const auto& r : result.records) {
    if (r.key.method == EnhancementMethod::semantic_category_grounding &&
        r.key.backend_id == config.backends.front().backend_id && r.category_valid &&
        !*r.category_valid) {
      ++meta.category_invalid_count;
    }
  }
  result.vlm_stats = pipeline.vlm_stats();
  meta.vlm_lookups = result.vlm_stats.lookups;
  meta.vlm_hits = result.vlm_stats.hits;
  meta.cache_hit_rate = meta.vlm_lookups == 0
                            ? 0.0
                            : static_cast<double>(meta.vlm_hits) / static_cast<double>(meta.vlm_lookups);
  spdlog::info("run complete: {} cells, {} gaps, VLM cache hit rate {:.1f}%", report.cells.size(),
               report.gaps.size(), 100.0 * meta.cache_hit_rate);
  return result;
}

void write_run_outputs(const RunResult& result, const RunConfig& config) {
  const auto& dir = config.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());

  const std::string formats[] = {"json"};
  emit_report(result.report, formats, dir);

  std::ofstream records(dir / "records.jsonl", std::ios::binary | std::ios::trunc);
  if (!records) throw Error("cannot write " + (dir / "records.jsonl").string());
  for (const auto& r : result.records) records << record_to_json(r).dump() << '\n';

  const json run_meta = {{"config_hash", config.config_hash},
                         {"mode", to_string(config.mode)},
                         {"manifest", std::filesystem::absolute(config.manifest_path).string()},
                         {"workers", config.workers},
                         {"seed", config.seed},
                         {"finished_at", utc_now()},
                         {"vlm_lookups", result.vlm_stats.lookups},
                         {"vlm_hits", result.vlm_stats.hits},
                         {"vlm_backend_calls", result.vlm_stats.backend_calls}};
  std::ofstream out(dir / "run.json", std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + (dir / "run.json").string());
  out << run_meta.dump(2) << '\n';
}

// --- failures --------------------------------------------------------------------

FailureExport export_failures(const std::filesystem::path& run_dir, double iou_threshold) {
  std::ifstream meta_in(run_dir / "run.json");
  if (!meta_in) throw ConfigError("not a run directory (run.json missing): " + run_dir.string());
  const json meta = json::parse(meta_in);
  const auto manifest = load_manifest(meta.at("manifest").get<std::string>());
  std::map<std::string, const AnnotatedImage*> by_id;
  for (const auto& item : manifest) by_id[item.image_id] = &item;

  const auto records = load_records(run_dir / "records.jsonl");
  const auto failures_dir = run_dir / "failures";
  std::filesystem::create_directories(failures_dir);

  FailureExport result;
  result.index_path = failures_dir / "index.jsonl";
  std::ofstream index(result.index_path, std::ios::binary | std::ios::trunc);
  if (!index) throw Error("cannot write " + result.index_path.string());

  std::map<std::string, RgbImage> images;
  for (const TargetRecord& r : records) {
    if (r.error || !(r.match.iou < iou_threshold)) continue;
    auto item_it = by_id.find(r.image_id);
    if (item_it == by_id.end()) {
      spdlog::warn("record for unknown image {} skipped", r.image_id);
      continue;
    }
    const AnnotatedImage& item = *item_it->second;
    auto img_it = images.find(r.image_id);
    if (img_it == images.end()) img_it = images.emplace(r.image_id, load_image(item.image_path)).first;

    std::vector<BoundingBox> gts;
    for (const Target& t : item.targets) {
      if (t.target_id == r.target_id) gts.push_back(t.box);
    }
    const RgbImage rendered = render_detections(img_it->second, gts, r.detections,
                                                default_ground_truth_style(),
                                                default_prediction_style());
    const std::string condition =
        fmt::format("{}__{}__{}__{}", r.target_id, to_string(r.key.prompt_type),
                    to_string(r.key.method), r.key.backend_id);
    const auto rel = std::filesystem::path(r.image_id) / (condition + ".png");
    write_png(failures_dir / rel, rendered);

    const json entry = {{"image_id", r.image_id},
                        {"target_id", r.target_id},
                        {"prompt_type", to_string(r.key.prompt_type)},
                        {"enhancement_method", to_string(r.key.method)},
                        {"backend_id", r.key.backend_id},
                        {"initial_prompt", r.initial_prompt},
                        {"prompt_text", r.enhanced_prompt},
                        {"iou", r.match.iou},
                        {"confidence", r.match.confidence},
                        {"n_detections", r.detections.size()},
                        {"image", rel.generic_string()}};
    index << entry.dump() << '\n';
    ++result.exported;
  }
  spdlog::info("exported {} failure case(s) below IoU {}", result.exported, iou_threshold);
  return result;
}

}  // namespace promptprobe
