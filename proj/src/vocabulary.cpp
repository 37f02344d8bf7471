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

#include "promptprobe/vocabulary.hpp"

#include <cctype>

namespace promptprobe {

// Generated from data/vocab/*.txt at configure time.
extern const std::string_view kCocoCategories;
extern const std::string_view kLvisCategories;

std::string normalize_category(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isspace(uc)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(uc)));
  }
  return out;
}

CategoryVocabulary CategoryVocabulary::from_lines(std::string_view text) {
  CategoryVocabulary vocab;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    bool any = false;
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t slash = line.find('/', start);
      if (slash == std::string_view::npos) slash = line.size();
      std::string term = normalize_category(line.substr(start, slash - start));
      if (!term.empty()) {
        vocab.terms_.insert(std::move(term));
        any = true;
      }
      start = slash + 1;
    }
    if (any) ++vocab.categories_;
  }
  return vocab;
}

const CategoryVocabulary& CategoryVocabulary::bundled() {
  static const CategoryVocabulary vocab = [] {
    CategoryVocabulary v = from_lines(kCocoCategories);
    v.merge(from_lines(kLvisCategories));
    return v;
  }();
  return vocab;
}

bool CategoryVocabulary::contains(std::string_view text) const {
  return terms_.count(normalize_category(text)) > 0;
}

void CategoryVocabulary::merge(const CategoryVocabulary& other) {
  terms_.insert(other.terms_.begin(), other.terms_.end());
  categories_ += other.categories_;
}

}  // namespace promptprobe
