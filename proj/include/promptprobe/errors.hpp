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

#include <stdexcept>
#include <string>

namespace promptprobe {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing files, bad config documents, unknown scenarios.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A malformed record or a value that violates a type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class VlmError : public Error {
 public:
  using Error::Error;
};

// Replay-store failures. These abort a run instead of becoming report gaps.
class ReplayError : public Error {
 public:
  using Error::Error;
};

class ReplayMiss : public ReplayError {
 public:
  explicit ReplayMiss(const std::string& key)
      : ReplayError("replay miss: " + key), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

}  // namespace promptprobe
