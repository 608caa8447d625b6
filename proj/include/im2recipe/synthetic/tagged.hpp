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

#include <string>
#include <vector>

#include "im2recipe/core/random.hpp"
#include "im2recipe/text/extractor.hpp"

namespace im2recipe::synthetic {

/// Ingredient sentences built from templates, so the gold name span is known:
///   [quantity] [unit] [of] [descriptor] name [", " trailing descriptor]
inline std::vector<text::TaggedSentence> tagged_ingredient_sentences(std::size_t n, std::uint64_t seed) {
  static const std::vector<std::string> kNames = {
      "olive oil", "salt",      "black pepper", "butter",      "flour",     "sugar",       "brown sugar",
      "milk",      "egg",       "garlic",       "onion",       "red onion", "tomato",      "basil",
      "parsley",   "chicken breast", "ground beef", "rice",    "water",     "lemon juice", "honey",
      "vanilla extract", "baking soda", "cinnamon", "carrot",  "celery",    "potato",      "cheddar cheese",
      "parmesan cheese", "heavy cream", "soy sauce", "ginger", "cilantro",  "cumin",       "paprika",
      "yogurt",    "spinach",   "mushroom",     "bell pepper", "vinegar"};
  static const std::vector<std::string> kUnits = {"cup", "cups", "tbsp", "tablespoon", "tablespoons", "teaspoon",
                                                  "tsp", "ounce", "oz",  "pound",      "lb",          "g",
                                                  "grams", "ml", "pinch", "clove", "cloves"};
  static const std::vector<std::string> kQuantities = {"1", "2", "3", "4", "1/2", "1 1/2", "0.5", "a", "250"};
  static const std::vector<std::string> kLead = {"chopped", "fresh", "minced", "large", "diced", "grated"};
  static const std::vector<std::string> kTrail = {"finely chopped", "to taste", "divided", "melted",
                                                  "at room temperature", "thinly sliced"};
  Rng rng(seed);
  auto pick = [&](const std::vector<std::string>& v) -> const std::string& { return v[uniform_index(rng, v.size())]; };
  std::vector<text::TaggedSentence> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    text::TaggedSentence s;
    auto emit = [&](const std::string& phrase, int label) {
      for (auto& t : text::tokenize(phrase)) {
        s.tokens.push_back(std::move(t));
        s.labels.push_back(label);
      }
    };
    const bool bare = bernoulli(rng, 0.1);
    if (!bare) {
      emit(pick(kQuantities), 0);
      if (bernoulli(rng, 0.8)) emit(pick(kUnits), 0);
      if (bernoulli(rng, 0.2)) emit("of", 0);
      if (bernoulli(rng, 0.3)) emit(pick(kLead), 0);
    }
    emit(pick(kNames), 1);
    if (!bare && bernoulli(rng, 0.3)) emit(pick(kTrail), 0);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace im2recipe::synthetic
