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

#include <optional>
#include <string>

#include "promptprobe/geometry.hpp"

namespace promptprobe {

/// One predicted box. Scores live in [0, 1].
struct Detection {
  BoundingBox box;
  double score = 0;
  std::string backend_id;
  std::optional<std::string> matched_phrase;

  bool operator==(const Detection&) const = default;
};

}  // namespace promptprobe
