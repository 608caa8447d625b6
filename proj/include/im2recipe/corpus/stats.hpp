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

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <unordered_map>

#include "im2recipe/corpus/partition.hpp"
#include "im2recipe/corpus/recipe.hpp"
#include "json.hpp"

namespace im2recipe {

struct CountHistogram {
  std::map<std::size_t, std::size_t> bins;  // count value -> number of recipes
  double mean = 0.0;
};

struct CorpusStats {
  std::size_t recipes = 0;
  std::size_t images = 0;
  CountHistogram ingredients;
  CountHistogram instructions;
  CountHistogram images_per_recipe;
  /// Fraction of recipes whose normalized title is shared with another recipe.
  double duplicate_title_rate = 0.0;
  std::size_t recipes_without_images = 0;
  std::array<std::size_t, kPartitionCount> recipes_per_partition{};
};

inline CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats s;
  s.recipes = corpus.recipes().size();
  s.images = corpus.images().size();
  std::unordered_map<std::string, std::size_t> titles;
  double ing = 0, ins = 0, img = 0;
  for (std::size_t i = 0; i < corpus.recipes().size(); ++i) {
    const Recipe& r = corpus.recipes()[i];
    const std::size_t n_img = corpus.images_of(i).size();
    ++s.ingredients.bins[r.ingredients.size()];
    ++s.instructions.bins[r.instructions.size()];
    ++s.images_per_recipe.bins[n_img];
    ing += static_cast<double>(r.ingredients.size());
    ins += static_cast<double>(r.instructions.size());
    img += static_cast<double>(n_img);
    if (n_img == 0) ++s.recipes_without_images;
    ++s.recipes_per_partition[static_cast<std::size_t>(r.partition)];
    ++titles[normalize_title(r.title)];
  }
  if (s.recipes > 0) {
    const double n = static_cast<double>(s.recipes);
    s.ingredients.mean = ing / n;
    s.instructions.mean = ins / n;
    s.images_per_recipe.mean = img / n;
    std::size_t shared = 0;
    for (const auto& [_, c] : titles) {
      if (c > 1) shared += c;
    }
    s.duplicate_title_rate = static_cast<double>(shared) / n;
  }
  return s;
}

inline nlohmann::ordered_json to_json(const CountHistogram& h) {
  nlohmann::ordered_json bins = nlohmann::ordered_json::object();
  for (const auto& [k, v] : h.bins) bins[std::to_string(k)] = v;
  return {{"mean", h.mean}, {"bins", bins}};
}

inline nlohmann::ordered_json to_json(const CorpusStats& s) {
  return {{"recipes", s.recipes},
          {"images", s.images},
          {"ingredients_per_recipe", to_json(s.ingredients)},
          {"instructions_per_recipe", to_json(s.instructions)},
          {"images_per_recipe", to_json(s.images_per_recipe)},
          {"duplicate_title_rate", s.duplicate_title_rate},
          {"recipes_without_images", s.recipes_without_images},
          {"recipes_per_partition",
           {{"training", s.recipes_per_partition[0]},
            {"validation", s.recipes_per_partition[1]},
            {"test", s.recipes_per_partition[2]}}}};
}

}  // namespace im2recipe
