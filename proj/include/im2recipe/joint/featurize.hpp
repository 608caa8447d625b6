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

#include "im2recipe/corpus/recipe.hpp"
#include "im2recipe/joint/model.hpp"
#include "im2recipe/text/extractor.hpp"
#include "im2recipe/text/skip_instructions.hpp"
#include "im2recipe/text/word2vec.hpp"

namespace im2recipe::joint {

/// Ingredient-name token of every ingredient sentence.
inline std::vector<std::string> ingredient_tokens(const Recipe& r, const text::IngredientNameExtractor& ex) {
  std::vector<std::string> out;
  out.reserve(r.ingredients.size());
  for (const auto& s : r.ingredients) out.push_back(ex.extract(s));
  return out;
}

inline text::InstructionTokens instruction_tokens(const Recipe& r) {
  text::InstructionTokens out;
  out.reserve(r.instructions.size());
  for (const auto& s : r.instructions) out.push_back(text::tokenize(s));
  return out;
}

/// The three pretrained text components the joint model reads from.
struct Featurizer {
  text::IngredientNameExtractor extractor;
  text::IngredientVectors word_vectors;
  text::SkipInstructionsEncoder instructions;

  /// Unknown ingredients map to the unknown row. Instructions that tokenize
  /// to nothing are dropped; if none remain the recipe gets a single
  /// encoding of the end-of-recipe marker.
  RecipeFeatures featurize(const Recipe& r) const {
    RecipeFeatures f;
    for (const auto& tok : ingredient_tokens(r, extractor)) {
      const auto row = word_vectors.row(word_vectors.vocabulary.id(tok));
      f.ingredients.emplace_back(row.begin(), row.end());
    }
    for (const auto& toks : instruction_tokens(r)) {
      if (!toks.empty()) f.instructions.push_back(instructions.encode_instruction(toks));
    }
    if (f.instructions.empty()) {
      ad::Tape tape;
      const auto v = instructions.encode(tape, {text::Vocabulary::kEndOfRecipe}).value().data();
      f.instructions.emplace_back(v.begin(), v.end());
    }
    if (f.ingredients.empty()) throw EmptyInputError("recipe " + r.id + " has no ingredients");
    return f;
  }

  std::vector<RecipeFeatures> featurize_all(const std::vector<Recipe>& recipes) const {
    std::vector<RecipeFeatures> out;
    out.reserve(recipes.size());
    for (const auto& r : recipes) out.push_back(featurize(r));
    return out;
  }
};

}  // namespace im2recipe::joint
