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
#include <map>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "im2recipe/corpus/recipe.hpp"
#include "im2recipe/text/vocabulary.hpp"

namespace im2recipe::retrieval {

inline constexpr std::size_t kBackgroundClass = 0;

/// Dish names used as seed categories, matched against titles before bigrams.
inline const std::vector<std::string>& default_seed_categories() {
  static const std::vector<std::string> kSeeds = {
      "apple pie",      "baby back ribs", "baklava",        "beef carpaccio", "beef tartare",   "beet salad",
      "beignets",       "bibimbap",       "bread pudding",  "breakfast burrito", "bruschetta", "caesar salad",
      "cannoli",        "caprese salad",  "carrot cake",    "ceviche",        "cheesecake",     "cheese plate",
      "chicken curry",  "chicken quesadilla", "chicken wings", "chocolate cake", "chocolate mousse", "churros",
      "clam chowder",   "club sandwich",  "crab cakes",     "creme brulee",   "croque madame",  "cup cakes",
      "deviled eggs",   "donuts",         "dumplings",      "edamame",        "eggs benedict",  "escargots",
      "falafel",        "filet mignon",   "fish and chips", "foie gras",      "french fries",   "french onion soup",
      "french toast",   "fried calamari", "fried rice",     "frozen yogurt",  "garlic bread",   "gnocchi",
      "greek salad",    "grilled cheese sandwich", "grilled salmon", "guacamole", "gyoza",        "hamburger",
      "hot and sour soup", "hot dog",     "huevos rancheros", "hummus",       "ice cream",      "lasagna",
      "lobster bisque", "lobster roll sandwich", "macaroni and cheese", "macarons", "miso soup",   "mussels",
      "nachos",         "omelette",       "onion rings",    "oysters",        "pad thai",       "paella",
      "pancakes",       "panna cotta",    "peking duck",    "pho",            "pizza",          "pork chop",
      "poutine",        "prime rib",      "pulled pork sandwich", "ramen",    "ravioli",        "red velvet cake",
      "risotto",        "samosa",         "sashimi",        "scallops",       "seaweed salad",  "shrimp and grits",
      "spaghetti bolognese", "spaghetti carbonara", "spring rolls", "steak",  "strawberry shortcake", "sushi",
      "tacos",          "takoyaki",       "tiramisu",       "tuna tartare",   "waffles",
  };
  return kSeeds;
}

/// Bigrams rejected from the frequency list: anything with a digit or a
/// one-letter word, and bigrams that start or end with filler words.
inline const std::vector<std::string>& default_bigram_blocklist() {
  static const std::vector<std::string> kPatterns = {
      R"([0-9])",
      R"((^| )[a-z]( |$))",
      R"(^(the|a|an|and|with|of|for|in|on|or|to|my|our|your|best|easy|quick|simple|homemade|classic|healthy|low|no|super|perfect|grandma|mom|weeknight|make|how)( |$))",
      R"(( |^)(the|a|an|and|with|of|for|in|on|or|to|recipe|recipes|style|ever|way|version|i|ii|iii)$)",
  };
  return kPatterns;
}

struct CategoryConfig {
  std::vector<std::string> seeds = default_seed_categories();
  std::size_t top_bigrams = 2000;
  std::vector<std::string> blocklist = default_bigram_blocklist();
  /// Bigrams must appear in at least this many training titles.
  std::size_t min_count = 1;
};

/// Category 0 is the background class; the rest are ordered by descending
/// training-title frequency, then by name.
struct CategorySet {
  std::vector<std::string> names{"background"};
  std::vector<std::size_t> frequency{0};

  std::size_t size() const noexcept { return names.size(); }
};

struct CategoryAssignment {
  CategorySet set;
  std::vector<std::size_t> labels;
  /// Fraction of recipes assigned a non-background class.
  double coverage = 0.0;
};

inline std::string normalized_title(const std::string& title) {
  std::string out;
  for (const auto& t : text::tokenize(title)) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

/// True when `phrase` occurs in `title` starting and ending on word boundaries.
inline bool title_contains(const std::string& norm_title, const std::string& phrase) {
  if (phrase.empty()) return false;
  const std::string hay = " " + norm_title + " ";
  return hay.find(" " + phrase + " ") != std::string::npos;
}

/// Highest-frequency category whose name occurs in the title; background
/// when none does or the title is empty.
inline std::size_t assign_category(const CategorySet& set, const std::string& title) {
  const std::string norm = normalized_title(title);
  if (norm.empty()) return kBackgroundClass;
  for (std::size_t c = 1; c < set.size(); ++c) {
    if (title_contains(norm, set.names[c])) return c;
  }
  return kBackgroundClass;
}

inline CategoryAssignment assign_categories(const CategorySet& set, const std::vector<Recipe>& recipes) {
  CategoryAssignment a;
  a.set = set;
  std::size_t covered = 0;
  for (const auto& r : recipes) {
    a.labels.push_back(assign_category(set, r.title));
    covered += a.labels.back() != kBackgroundClass;
  }
  a.coverage = recipes.empty() ? 0.0 : static_cast<double>(covered) / static_cast<double>(recipes.size());
  return a;
}

/// Builds the category set from training-partition titles, then labels every
/// recipe. Seeds matched in no training title are dropped.
inline CategoryAssignment build_categories(const std::vector<Recipe>& recipes, const CategoryConfig& cfg = {}) {
  std::vector<std::regex> block;
  for (const auto& p : cfg.blocklist) {
    try {
      block.emplace_back(p, std::regex::ECMAScript | std::regex::optimize);
    } catch (const std::regex_error& e) {
      throw ConfigError("category blocklist pattern '" + p + "': " + e.what());
    }
  }
  std::vector<std::string> titles;
  for (const auto& r : recipes) {
    if (r.partition == Partition::kTraining) titles.push_back(normalized_title(r.title));
  }

  std::map<std::string, std::size_t> bigram_count;
  for (const auto& t : titles) {
    const auto w = text::tokenize(t);
    std::set<std::string> seen;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) seen.insert(w[i] + " " + w[i + 1]);
    for (const auto& b : seen) ++bigram_count[b];
  }
  std::vector<std::pair<std::string, std::size_t>> bigrams;
  for (const auto& [b, c] : bigram_count) {
    if (c < cfg.min_count) continue;
    if (std::any_of(block.begin(), block.end(), [&](const std::regex& re) { return std::regex_search(b, re); })) continue;
    bigrams.emplace_back(b, c);
  }
  std::stable_sort(bigrams.begin(), bigrams.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (bigrams.size() > cfg.top_bigrams) bigrams.resize(cfg.top_bigrams);

  std::map<std::string, std::size_t> freq;
  for (const auto& s : cfg.seeds) {
    const std::string norm = normalized_title(s);
    const auto c = static_cast<std::size_t>(
        std::count_if(titles.begin(), titles.end(), [&](const std::string& t) { return title_contains(t, norm); }));
    if (c > 0) freq[norm] = c;
  }
  for (const auto& [b, c] : bigrams) freq.emplace(b, c);

  std::vector<std::pair<std::string, std::size_t>> ordered(freq.begin(), freq.end());
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  CategorySet set;
  for (const auto& [name, c] : ordered) {
    set.names.push_back(name);
    set.frequency.push_back(c);
  }
  return assign_categories(set, recipes);
}

inline nlohmann::ordered_json to_json(const CategorySet& s) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < s.size(); ++c) j.push_back({{"id", c}, {"name", s.names[c]}, {"frequency", s.frequency[c]}});
  return j;
}

inline CategorySet category_set_from_json(const nlohmann::ordered_json& j) {
  CategorySet s;
  s.names.clear();
  s.frequency.clear();
  for (std::size_t c = 0; c < j.size(); ++c) {
    if (j[c].at("id").get<std::size_t>() != c) throw ConfigError("category ids must be dense and ordered");
    s.names.push_back(j[c].at("name").get<std::string>());
    s.frequency.push_back(j[c].at("frequency").get<std::size_t>());
  }
  if (s.names.empty() || s.names[0] != "background") throw ConfigError("category 0 must be the background class");
  return s;
}

}  // namespace im2recipe::retrieval
