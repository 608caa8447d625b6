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
#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "im2recipe/core/random.hpp"
#include "im2recipe/corpus/partition.hpp"
#include "im2recipe/corpus/recipe.hpp"

namespace im2recipe::synthetic {

struct SyntheticConfig {
  std::size_t recipes = 500;
  std::size_t categories = 10;
  std::size_t feature_dim = 64;
  std::size_t latent_dim = 16;
  std::size_t min_images = 1;
  std::size_t max_images = 2;
  /// Stddev of per-image feature noise.
  double noise = 0.1;
  std::uint64_t seed = kDefaultSeed;
};

struct SyntheticCorpus {
  Corpus corpus;
  /// Generating category of each recipe (0-based, corpus order).
  std::vector<std::size_t> true_category;
  /// Dish bigram of each generating category.
  std::vector<std::string> category_names;
};

namespace detail {

struct Dish {
  const char* bigram;
  std::vector<const char*> core;
};

struct Pantry {
  const char* name;
  const char* unit;
};

inline const std::vector<Dish>& dishes() {
  static const std::vector<Dish> kDishes = {
      {"chocolate cake", {"flour", "sugar", "butter", "cocoa powder", "baking powder", "milk"}},
      {"chicken soup", {"chicken breast", "carrot", "celery", "onion", "chicken broth", "thyme"}},
      {"beef stew", {"beef", "potato", "carrot", "tomato paste", "onion", "red wine"}},
      {"pasta salad", {"pasta", "olive oil", "tomato", "basil", "parmesan cheese", "vinegar"}},
      {"banana bread", {"banana", "flour", "brown sugar", "butter", "baking soda", "walnut"}},
      {"apple pie", {"apple", "sugar", "cinnamon", "flour", "butter", "nutmeg"}},
      {"fried rice", {"rice", "soy sauce", "green onion", "vegetable oil", "garlic", "peas"}},
      {"pork chops", {"pork", "garlic", "mustard", "honey", "thyme", "olive oil"}},
      {"potato salad", {"potato", "mayonnaise", "mustard", "celery", "paprika", "dill"}},
      {"french toast", {"bread", "milk", "cinnamon", "vanilla extract", "maple syrup", "butter"}},
      {"shrimp tacos", {"shrimp", "lime juice", "cilantro", "chili powder", "tortilla", "cabbage"}},
      {"vegetable curry", {"coconut milk", "curry powder", "chickpea", "spinach", "ginger", "onion"}},
      {"lemon bars", {"lemon juice", "powdered sugar", "flour", "butter", "lemon zest", "sugar"}},
      {"mushroom risotto", {"rice", "mushroom", "chicken broth", "parmesan cheese", "white wine", "shallot"}},
      {"oatmeal cookies", {"oat", "brown sugar", "butter", "raisin", "flour", "cinnamon"}},
      {"tomato soup", {"tomato", "onion", "garlic", "cream", "basil", "vegetable broth"}},
  };
  return kDishes;
}

inline const std::vector<Pantry>& pantry() {
  static const std::vector<Pantry> kPantry = {
      {"flour", "cup"}, {"sugar", "cup"}, {"butter", "tablespoon"}, {"cocoa powder", "cup"},
      {"baking powder", "teaspoon"}, {"milk", "cup"}, {"chicken breast", "pound"}, {"carrot", "cup"},
      {"celery", "cup"}, {"onion", "cup"}, {"chicken broth", "cup"}, {"thyme", "teaspoon"},
      {"beef", "pound"}, {"potato", "pound"}, {"tomato paste", "tablespoon"}, {"red wine", "cup"},
      {"pasta", "ounce"}, {"olive oil", "tablespoon"}, {"tomato", "cup"}, {"basil", "tablespoon"},
      {"parmesan cheese", "cup"}, {"vinegar", "tablespoon"}, {"banana", "cup"}, {"brown sugar", "cup"},
      {"baking soda", "teaspoon"}, {"walnut", "cup"}, {"apple", "cup"}, {"cinnamon", "teaspoon"},
      {"nutmeg", "pinch"}, {"rice", "cup"}, {"soy sauce", "tablespoon"}, {"green onion", "cup"},
      {"vegetable oil", "tablespoon"}, {"garlic", "teaspoon"}, {"peas", "cup"}, {"pork", "pound"},
      {"mustard", "tablespoon"}, {"honey", "tablespoon"}, {"mayonnaise", "cup"}, {"paprika", "teaspoon"},
      {"dill", "teaspoon"}, {"bread", "ounce"}, {"vanilla extract", "teaspoon"}, {"maple syrup", "cup"},
      {"shrimp", "pound"}, {"lime juice", "tablespoon"}, {"cilantro", "cup"}, {"chili powder", "teaspoon"},
      {"tortilla", "ounce"}, {"cabbage", "cup"}, {"coconut milk", "cup"}, {"curry powder", "tablespoon"},
      {"chickpea", "cup"}, {"spinach", "cup"}, {"ginger", "teaspoon"}, {"lemon juice", "cup"},
      {"powdered sugar", "cup"}, {"lemon zest", "teaspoon"}, {"mushroom", "cup"}, {"white wine", "cup"},
      {"shallot", "tablespoon"}, {"oat", "cup"}, {"raisin", "cup"}, {"cream", "cup"},
      {"vegetable broth", "cup"}, {"salt", "teaspoon"}, {"black pepper", "teaspoon"}, {"water", "cup"},
      {"egg white", "cup"}, {"cheddar cheese", "cup"}, {"yogurt", "cup"}, {"corn", "cup"},
      {"zucchini", "cup"}, {"bell pepper", "cup"}, {"parsley", "tablespoon"}, {"oregano", "teaspoon"},
      {"cumin", "teaspoon"}, {"almond", "cup"}, {"bacon", "ounce"}, {"lettuce", "cup"},
  };
  return kPantry;
}

inline const char* unit_of(const std::string& name) {
  for (const auto& p : pantry()) {
    if (name == p.name) return p.unit;
  }
  return "cup";
}

inline std::string quantity_text(Rng& rng, double* value) {
  static const std::vector<std::pair<const char*, double>> kQuantities = {
      {"1", 1.0}, {"2", 2.0}, {"3", 3.0}, {"1/2", 0.5}, {"1/4", 0.25}, {"1 1/2", 1.5}, {"3/4", 0.75}};
  const auto& q = kQuantities[uniform_index(rng, kQuantities.size())];
  *value = q.second;
  return q.first;
}

}  // namespace detail

inline constexpr std::size_t kMaxSyntheticCategories = 16;

/// Aligned recipe/image corpus. Each recipe draws its ingredients from its
/// category's core list and the shared pantry; its latent vector is the
/// category prototype plus the normalized sum of its ingredients' latents,
/// and each image feature is a fixed random projection of that latent plus
/// Gaussian noise. Partitions are assigned 70/15/15.
inline SyntheticCorpus generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.recipes < 2) throw ConfigError("gen-synthetic: need at least 2 recipes");
  if (cfg.categories == 0 || cfg.categories > kMaxSyntheticCategories) {
    throw ConfigError("gen-synthetic: categories must be in [1, " + std::to_string(kMaxSyntheticCategories) + "]");
  }
  if (cfg.feature_dim == 0 || cfg.latent_dim == 0) throw ConfigError("gen-synthetic: dimensions must be positive");
  if (cfg.min_images > cfg.max_images || cfg.max_images == 0) throw ConfigError("gen-synthetic: bad image count range");
  if (!(cfg.noise >= 0.0)) throw ConfigError("gen-synthetic: noise must be >= 0");

  Rng rng(cfg.seed);
  const auto& pan = detail::pantry();
  const std::size_t L = cfg.latent_dim;
  std::vector<std::vector<double>> ingredient_latent(pan.size());
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  for (auto& v : ingredient_latent) {
    v.resize(L);
    for (auto& x : v) x = unit_normal(rng);
  }
  std::vector<std::vector<double>> prototype(cfg.categories, std::vector<double>(L));
  for (auto& p : prototype) {
    for (auto& x : p) x = unit_normal(rng);
  }
  const Tensor projection = normal_tensor({cfg.feature_dim, L}, 1.0 / std::sqrt(static_cast<double>(L)), rng);
  auto pantry_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < pan.size(); ++i) {
      if (name == pan[i].name) return i;
    }
    throw ConfigError("gen-synthetic: ingredient '" + name + "' missing from pantry");
  };

  static const std::vector<const char*> kAdjectives = {"easy", "classic", "quick", "homemade", "rustic", "simple",
                                                       "spicy", "creamy", "grandma's", "weeknight", "best", "healthy"};
  SyntheticCorpus out;
  for (std::size_t k = 0; k < cfg.categories; ++k) out.category_names.emplace_back(detail::dishes()[k].bigram);
  std::vector<Recipe> recipes;
  std::vector<ImageRecord> images;
  std::set<std::set<std::size_t>> seen;
  std::size_t image_counter = 0;
  char buf[32];
  for (std::size_t r = 0; r < cfg.recipes; ++r) {
    const std::size_t k = r % cfg.categories;
    const auto& dish = detail::dishes()[k];
    std::set<std::size_t> chosen;
    for (int attempt = 0; attempt < 100; ++attempt) {
      chosen.clear();
      std::vector<const char*> core = dish.core;
      std::shuffle(core.begin(), core.end(), rng);
      const std::size_t from_core = 2 + uniform_index(rng, 3);
      for (std::size_t c = 0; c < from_core; ++c) chosen.insert(pantry_index(core[c]));
      const std::size_t extra = 2 + uniform_index(rng, 3);
      while (chosen.size() < from_core + extra) chosen.insert(uniform_index(rng, pan.size()));
      if (seen.insert(chosen).second) break;
    }
    std::vector<std::size_t> order(chosen.begin(), chosen.end());
    std::shuffle(order.begin(), order.end(), rng);

    Recipe rec;
    std::snprintf(buf, sizeof buf, "r%05zu", r);
    rec.id = buf;
    rec.title = std::string(kAdjectives[uniform_index(rng, kAdjectives.size())]) + " " + dish.bigram;
    std::vector<std::string> units;
    std::vector<double> quantities;
    std::vector<std::string> names;
    for (std::size_t idx : order) {
      double q = 0;
      const std::string qt = detail::quantity_text(rng, &q);
      const std::string unit = pan[idx].unit;
      rec.ingredients.push_back(qt + " " + unit + " " + pan[idx].name);
      units.push_back(unit);
      quantities.push_back(q);
      names.emplace_back(pan[idx].name);
    }
    rec.units = std::move(units);
    rec.quantities = std::move(quantities);

    auto name = [&](std::size_t i) { return names[i % names.size()]; };
    rec.instructions.push_back("combine the " + name(0) + " and " + name(1) + " in a large bowl");
    const std::size_t middle = 1 + uniform_index(rng, 3);
    for (std::size_t s = 0; s < middle; ++s) {
      const std::size_t minutes = 5 * (1 + uniform_index(rng, 6));
      switch (uniform_index(rng, 3)) {
        case 0: rec.instructions.push_back("add the " + name(2 + s) + " and stir well"); break;
        case 1:
          rec.instructions.push_back("cook the " + name(2 + s) + " over medium heat for " + std::to_string(minutes) +
                                     " minutes");
          break;
        default: rec.instructions.push_back("fold in the " + name(2 + s) + " gently"); break;
      }
    }
    rec.instructions.push_back("serve the " + std::string(dish.bigram) + " warm");

    std::vector<double> z = prototype[k];
    const double inv = 1.0 / std::sqrt(static_cast<double>(order.size()));
    for (std::size_t idx : order) {
      for (std::size_t i = 0; i < L; ++i) z[i] += inv * ingredient_latent[idx][i];
    }
    const std::size_t n_images = cfg.min_images + uniform_index(rng, cfg.max_images - cfg.min_images + 1);
    std::normal_distribution<double> noise(0.0, cfg.noise > 0 ? cfg.noise : 1.0);
    for (std::size_t m = 0; m < n_images; ++m) {
      ImageRecord img;
      std::snprintf(buf, sizeof buf, "i%06zu", image_counter++);
      img.image_id = buf;
      img.recipe_id = rec.id;
      img.feature.resize(cfg.feature_dim);
      for (std::size_t d = 0; d < cfg.feature_dim; ++d) {
        img.feature[d] = linalg::dot(projection.row(d), z) + (cfg.noise > 0 ? noise(rng) : 0.0);
      }
      images.push_back(std::move(img));
    }
    recipes.push_back(std::move(rec));
    out.true_category.push_back(k);
  }
  out.corpus = Corpus(std::move(recipes), std::move(images));
  assign_partitions(out.corpus, PartitionRatios{}, derive_seed(cfg.seed, 3));
  return out;
}

}  // namespace im2recipe::synthetic
