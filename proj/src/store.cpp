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

#include "promptprobe/store.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <sstream>

#include "promptprobe/errors.hpp"
#include "promptprobe/hash.hpp"

namespace promptprobe {

using nlohmann::json;

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::live: return "live";
    case RunMode::cached: return "cached";
    case RunMode::replay: return "replay";
  }
  return "?";
}

RunMode parse_run_mode(std::string_view name) {
  for (RunMode m : {RunMode::live, RunMode::cached, RunMode::replay}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown mode: " + std::string(name));
}

ExchangeStore::ExchangeStore(std::filesystem::path dir, bool replay)
    : dir_(std::move(dir)), replay_(replay) {
  if (replay_) {
    if (!std::filesystem::is_directory(dir_)) {
      throw ConfigError("replay store not found: " + dir_.string());
    }
  } else {
    std::filesystem::create_directories(dir_);
  }
}

std::string ExchangeStore::key_for(const json& request) {
  return sha256_hex(request.dump());
}

std::filesystem::path ExchangeStore::path_for(std::string_view key) const {
  return dir_ / (std::string(key) + ".json");
}

std::optional<json> ExchangeStore::get(const json& request) const {
  const std::string key = key_for(request);
  const auto path = path_for(key);
  std::ifstream in(path);
  if (!in) {
    if (replay_) throw ReplayMiss(key);
    return std::nullopt;
  }
  std::string problem;
  try {
    const json record = json::parse(in);
    if (record.at("key").get<std::string>() != key) {
      problem = "key field does not match file name";
    } else if (record.at("request") != request) {
      problem = "stored request differs from lookup request";
    } else {
      return record.at("response");
    }
  } catch (const json::exception& e) {
    problem = e.what();
  }
  if (replay_) throw ReplayError("corrupted replay entry " + key + ": " + problem);
  spdlog::warn("ignoring corrupted cache entry {}: {}", key, problem);
  return std::nullopt;
}

void ExchangeStore::put(const json& request, const json& response) {
  if (replay_) throw Error("replay store is read-only");
  const std::string key = key_for(request);
  const json record = {{"key", key}, {"request", request}, {"response", response}};
  const std::string text = record.dump(2) + "\n";

  std::lock_guard lock(write_mutex_);
  const auto final_path = path_for(key);
  auto tmp = final_path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write cache entry " + tmp.string());
    out << text;
  }
  std::filesystem::rename(tmp, final_path);
}

}  // namespace promptprobe
