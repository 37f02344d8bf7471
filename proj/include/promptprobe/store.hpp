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

#include <filesystem>
#include <json.hpp>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace promptprobe {

enum class RunMode { live, cached, replay };

std::string_view to_string(RunMode mode);
RunMode parse_run_mode(std::string_view name);

/// Content-addressed store of request/response exchanges, one
/// `<hex key>.json` file per exchange. The key is the SHA-256 of the
/// request's canonical JSON serialization (sorted keys, no whitespace).
///
/// A replay store is read-only: a missing entry raises ReplayMiss and a
/// corrupted one raises Error. Otherwise both are treated as misses.
class ExchangeStore {
 public:
  ExchangeStore(std::filesystem::path dir, bool replay);

  static std::string key_for(const nlohmann::json& request);

  std::optional<nlohmann::json> get(const nlohmann::json& request) const;
  void put(const nlohmann::json& request, const nlohmann::json& response);

  bool replay() const { return replay_; }
  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path_for(std::string_view key) const;

 private:
  std::filesystem::path dir_;
  bool replay_;
  std::mutex write_mutex_;
};

}  // namespace promptprobe
