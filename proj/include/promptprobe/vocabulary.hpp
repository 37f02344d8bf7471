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

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>

namespace promptprobe {

/// Trim, ASCII lower-case, collapse internal whitespace runs to one space.
std::string normalize_category(std::string_view text);

/// Set of category names. Each source line is one category; '/' separates
/// synonyms, and every synonym is a member.
class CategoryVocabulary {
 public:
  static CategoryVocabulary from_lines(std::string_view text);

  /// COCO (80) and LVIS v1 (1203) names compiled into the library.
  static const CategoryVocabulary& bundled();

  /// Normalizes `text` before lookup.
  bool contains(std::string_view text) const;

  std::size_t category_count() const { return categories_; }
  std::size_t term_count() const { return terms_.size(); }

  void merge(const CategoryVocabulary& other);

 private:
  std::unordered_set<std::string> terms_;
  std::size_t categories_ = 0;
};

}  // namespace promptprobe
