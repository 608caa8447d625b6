// Copyright 2026 The im2recipe Authors. All Rights Reserved.
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

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "im2recipe/core/error.hpp"

namespace im2recipe::text {

/// Lowercases and splits on anything that is not a letter or digit.
inline std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

/// Token <-> id map with four reserved ids.
class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnknown = 1;
  static constexpr std::size_t kStartOfRecipe = 2;
  static constexpr std::size_t kEndOfRecipe = 3;
  static constexpr std::size_t kSpecialCount = 4;
  static constexpr std::array<std::string_view, kSpecialCount> kSpecialTokens = {"<pad>", "<unk>", "<sor>", "<eor>"};

  Vocabulary() {
    for (auto s : kSpecialTokens) push(std::string(s));
  }

  /// Tokens ordered by descending frequency, then lexically; tokens seen
  /// fewer than `min_count` times are left out.
  static Vocabulary build(const std::vector<std::vector<std::string>>& sequences, std::size_t min_count = 1) {
    std::map<std::string, std::size_t> counts;
    for (const auto& seq : sequences) {
      for (const auto& t : seq) ++counts[t];
    }
    std::vector<std::pair<std::string, std::size_t>> items(counts.begin(), counts.end());
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    Vocabulary v;
    for (const auto& [tok, c] : items) {
      if (c >= min_count && !is_special(tok)) v.push(tok);
    }
    return v;
  }

  static bool is_special(std::string_view tok) {
    return std::find(kSpecialTokens.begin(), kSpecialTokens.end(), tok) != kSpecialTokens.end();
  }

  std::size_t size() const noexcept { return tokens_.size(); }
  bool contains(std::string_view tok) const { return ids_.contains(std::string(tok)); }

  std::size_t id(std::string_view tok) const {
    auto it = ids_.find(std::string(tok));
    return it == ids_.end() ? kUnknown : it->second;
  }

  const std::string& token(std::size_t id) const {
    if (id >= tokens_.size()) throw NotFoundError("vocabulary id " + std::to_string(id) + " out of range");
    return tokens_[id];
  }

  std::vector<std::size_t> encode(const std::vector<std::string>& toks) const {
    std::vector<std::size_t> out;
    out.reserve(toks.size());
    for (const auto& t : toks) out.push_back(id(t));
    return out;
  }

  std::size_t add(const std::string& tok) {
    if (auto it = ids_.find(tok); it != ids_.end()) return it->second;
    return push(tok);
  }

  /// "id<TAB>token" per line.
  void save(std::ostream& out) const {
    for (std::size_t i = 0; i < tokens_.size(); ++i) out << i << '\t' << tokens_[i] << '\n';
  }

  static Vocabulary load(std::istream& in, const std::string& source = "<vocabulary>") {
    Vocabulary v;
    v.tokens_.clear();
    v.ids_.clear();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw ParseError(source, lineno, "expected id<TAB>token");
      std::size_t id = 0;
      try {
        id = std::stoul(line.substr(0, tab));
      } catch (const std::exception&) {
        throw ParseError(source, lineno, "bad id");
      }
      if (id != v.tokens_.size()) throw ParseError(source, lineno, "ids must be dense and ordered");
      const std::string tok = line.substr(tab + 1);
      if (v.ids_.contains(tok)) throw ParseError(source, lineno, "duplicate token " + tok);
      v.push(tok);
    }
    for (std::size_t k = 0; k < kSpecialCount; ++k) {
      if (v.tokens_.size() <= k || v.tokens_[k] != kSpecialTokens[k]) {
        throw ParseError(source, k + 1, "reserved token " + std::string(kSpecialTokens[k]) + " missing");
      }
    }
    return v;
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::size_t push(std::string tok) {
    const std::size_t id = tokens_.size();
    ids_.emplace(tok, id);
    tokens_.push_back(std::move(tok));
    return id;
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> ids_;
};

}  // namespace im2recipe::text
