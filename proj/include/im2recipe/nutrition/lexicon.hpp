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
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "im2recipe/core/error.hpp"
#include "json.hpp"

namespace im2recipe::nutrition {

/// Crude English singularization, applied to both sides of every match.
inline std::string singular(std::string w) {
  auto ends = [&](std::string_view s) { return w.size() > s.size() + 1 && w.ends_with(s); };
  if (ends("ies")) return w.substr(0, w.size() - 3) + "y";
  if (ends("oes") || ends("ches") || ends("shes") || ends("sses") || ends("xes")) return w.substr(0, w.size() - 2);
  if (w.size() > 3 && w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us")) return w.substr(0, w.size() - 1);
  return w;
}

/// Lowercased alphanumeric words of a sentence.
inline std::vector<std::string> words_of(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
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

/// Canonical ingredient names plus synonym spellings that map onto them.
class IngredientLexicon {
 public:
  IngredientLexicon() = default;

  IngredientLexicon(std::vector<std::string> names, std::map<std::string, std::string> synonyms = {}) {
    for (auto& n : names) add(n);
    for (auto& [alias, canon] : synonyms) add_synonym(alias, canon);
  }

  void add(const std::string& canonical) {
    if (words_of(canonical).empty()) throw ConfigError("lexicon: empty ingredient name");
    if (canon_.insert(canonical).second) forms_.push_back({canonical, canonical, singular_words(canonical)});
  }

  void add_synonym(const std::string& alias, const std::string& canonical) {
    add(canonical);
    forms_.push_back({alias, canonical, singular_words(alias)});
  }

  std::size_t size() const noexcept { return canon_.size(); }
  const std::set<std::string>& names() const noexcept { return canon_; }

  /// The canonical name with the most words, all of which appear in the
  /// sentence (singular/plural insensitive). Ties go to the lexically smaller
  /// canonical name.
  std::optional<std::string> canonicalize(std::string_view sentence) const {
    std::set<std::string> present;
    for (auto& w : words_of(sentence)) present.insert(singular(w));
    const Form* best = nullptr;
    for (const Form& f : forms_) {
      const bool all = std::all_of(f.words.begin(), f.words.end(), [&](const auto& w) { return present.contains(w); });
      if (!all) continue;
      if (!best || f.words.size() > best->words.size() ||
          (f.words.size() == best->words.size() && f.canonical < best->canonical)) {
        best = &f;
      }
    }
    if (!best) return std::nullopt;
    return best->canonical;
  }

  static IngredientLexicon from_json(const nlohmann::json& j) {
    IngredientLexicon lex;
    for (const auto& n : j.at("names")) lex.add(n.get<std::string>());
    if (j.contains("synonyms")) {
      for (const auto& [alias, canon] : j.at("synonyms").items()) lex.add_synonym(alias, canon.get<std::string>());
    }
    return lex;
  }

  /// Small starter list; user lexicons extend or replace it.
  static IngredientLexicon starter() {
    IngredientLexicon lex({
        "all purpose flour", "almond", "apple", "apple juice", "bacon", "baking powder", "baking soda", "banana",
        "basil", "bean", "beef", "black pepper", "bread crumb", "broccoli", "brown sugar", "butter", "buttermilk",
        "carrot", "cassava", "cayenne pepper", "celery", "cheddar cheese", "cheese", "chicken", "chicken breast",
        "chicken broth", "chickpea", "chili powder", "cilantro", "cinnamon", "cocoa powder", "coconut milk", "corn",
        "cornstarch", "cream", "cream cheese", "cumin", "egg", "egg white", "egg yolk", "eggplant", "flour", "garlic",
        "ginger", "green onion", "heavy cream", "honey", "lemon", "lemon juice", "lettuce", "lime", "lime juice",
        "maple syrup", "mayonnaise", "milk", "mushroom", "mustard", "nutmeg", "oat", "olive oil", "onion", "orange",
        "orange juice", "oregano", "paprika", "parmesan cheese", "parsley", "pasta", "peanut butter", "pepper",
        "pork", "potato", "powdered sugar", "rice", "salt", "shrimp", "soy sauce", "spinach", "sugar",
        "sweet potato", "thyme", "tomato", "tomato paste", "tomato sauce", "vanilla extract", "vegetable oil",
        "vinegar", "walnut", "water", "white sugar", "yeast", "yogurt", "zucchini",
    });
    lex.add_synonym("yuca", "cassava");
    lex.add_synonym("manioc", "cassava");
    lex.add_synonym("mandioca", "cassava");
    lex.add_synonym("scallion", "green onion");
    lex.add_synonym("spring onion", "green onion");
    lex.add_synonym("garbanzo bean", "chickpea");
    lex.add_synonym("aubergine", "eggplant");
    lex.add_synonym("courgette", "zucchini");
    lex.add_synonym("coriander leaf", "cilantro");
    lex.add_synonym("icing sugar", "powdered sugar");
    return lex;
  }

 private:
  struct Form {
    std::string alias;
    std::string canonical;
    std::vector<std::string> words;
  };

  static std::vector<std::string> singular_words(const std::string& s) {
    auto w = words_of(s);
    for (auto& x : w) x = singular(x);
    return w;
  }

  std::set<std::string> canon_;
  std::vector<Form> forms_;
};

}  // namespace im2recipe::nutrition
