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
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "im2recipe/core/error.hpp"
#include "im2recipe/corpus/recipe.hpp"
#include "im2recipe/nutrition/lexicon.hpp"
#include "im2recipe/nutrition/parse.hpp"
#include "im2recipe/nutrition/record.hpp"
#include "im2recipe/nutrition/units.hpp"
#include "json.hpp"

namespace im2recipe::nutrition {

/// Per-100 g nutrient values keyed by food name.
class NutrientTable {
 public:
  void add(const std::string& name, const NutrientValues& per100g) {
    for (double v : {per100g.energy, per100g.protein, per100g.sugar, per100g.fat, per100g.saturates, per100g.salt}) {
      if (!(v >= 0.0)) throw ConfigError("nutrient table: negative or NaN value for " + name);
    }
    if (!foods_.emplace(name, per100g).second) throw ConfigError("nutrient table: duplicate food " + name);
  }

  std::size_t size() const noexcept { return foods_.size(); }

  /// Exact name first; otherwise the first food (by name) whose words contain
  /// every word of `ingredient`.
  std::optional<std::pair<std::string, NutrientValues>> find(const std::string& ingredient) const {
    if (auto it = foods_.find(ingredient); it != foods_.end()) return *it;
    auto want = words_of(ingredient);
    for (auto& w : want) w = singular(w);
    if (want.empty()) return std::nullopt;
    for (const auto& [name, values] : foods_) {
      auto have = words_of(name);
      for (auto& w : have) w = singular(w);
      const bool all = std::all_of(want.begin(), want.end(),
                                   [&](const auto& w) { return std::find(have.begin(), have.end(), w) != have.end(); });
      if (all) return std::pair{name, values};
    }
    return std::nullopt;
  }

  /// Tab-separated, header row naming columns: name, energy, protein, sugar,
  /// fat, saturates, salt (any order).
  static NutrientTable read_tsv(std::istream& in, const std::string& source = "<nutrient-table>") {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError(source, 1, "empty nutrient table");
    ++lineno;
    const auto header = split_tab(line);
    const std::array<std::string, 7> cols = {"name", "energy", "protein", "sugar", "fat", "saturates", "salt"};
    std::array<std::size_t, 7> pos{};
    for (std::size_t k = 0; k < cols.size(); ++k) {
      auto it = std::find(header.begin(), header.end(), cols[k]);
      if (it == header.end()) throw ParseError(source, 1, "missing column '" + cols[k] + "'");
      pos[k] = static_cast<std::size_t>(it - header.begin());
    }
    NutrientTable table;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto f = split_tab(line);
      if (f.size() != header.size()) throw ParseError(source, lineno, "wrong number of columns");
      std::array<double, 6> v{};
      for (std::size_t k = 0; k < 6; ++k) {
        try {
          std::size_t used = 0;
          v[k] = std::stod(f[pos[k + 1]], &used);
          if (used != f[pos[k + 1]].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
          throw ParseError(source, lineno, "bad number in column '" + cols[k + 1] + "'");
        }
      }
      try {
        table.add(f[pos[0]], {v[0], v[1], v[2], v[3], v[4], v[5]});
      } catch (const ConfigError& e) {
        throw ParseError(source, lineno, e.what());
      }
    }
    return table;
  }

  static NutrientTable read_tsv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open " + path);
    return read_tsv(in, path);
  }

 private:
  static std::vector<std::string> split_tab(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, '\t')) {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      out.push_back(cur);
    }
    return out;
  }

  std::map<std::string, NutrientValues> foods_;
};

/// Grams per one unit. Mass approximations (water-equivalent for volumes).
class UnitConversions {
 public:
  UnitConversions() = default;

  static UnitConversions defaults() {
    UnitConversions c;
    const std::array<double, kUnitCount> grams = {
        35239.07,  // bushel
        244.0,     // cup
        0.62,      // dash
        0.05,      // drop
        29.57,     // fl. oz
        1.0,       // g
        3785.41,   // gallon
        240.0,     // glass
        1000.0,    // kg
        1000.0,    // liter
        1.0,       // ml
        28.35,     // ounce
        0.31,      // pinch
        473.18,    // pint
        453.59,    // pound
        946.35,    // quart
        59.15,     // scoop
        44.36,     // shot
        14.79,     // tablespoon
        4.93,      // teaspoon
    };
    for (std::size_t k = 0; k < kUnitCount; ++k) c.grams_[static_cast<Unit>(k)] = grams[k];
    return c;
  }

  void set(Unit u, double grams) {
    if (!(grams > 0.0)) throw ConfigError("unit conversion for " + std::string(unit_name(u)) + " must be > 0");
    grams_[u] = grams;
  }

  void erase(Unit u) { grams_.erase(u); }

  double grams(Unit u) const {
    auto it = grams_.find(u);
    if (it == grams_.end()) throw ConfigError("no gram conversion configured for unit '" + std::string(unit_name(u)) + "'");
    return it->second;
  }

  /// {"cup": 244, "fl. oz": 29.57, ...}; keys must be unit spellings.
  static UnitConversions from_json(const nlohmann::json& j) {
    UnitConversions c;
    for (const auto& [key, value] : j.items()) {
      auto u = unit_from_string(key);
      if (!u) throw ConfigError("unit conversions: unknown unit '" + key + "'");
      c.set(*u, value.get<double>());
    }
    return c;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [u, g] : grams_) j[std::string(unit_name(u))] = g;
    return j;
  }

 private:
  std::map<Unit, double> grams_;
};

struct LightBand {
  double low = 0.0;   // green at or below
  double high = 0.0;  // red above
};

/// Per-100 g bands for the four labelled nutrients.
struct LightThresholds {
  LightBand fat{3.0, 17.5};
  LightBand saturates{1.5, 5.0};
  LightBand sugar{5.0, 22.5};
  LightBand salt{0.3, 1.5};

  static LightThresholds from_json(const nlohmann::json& j) {
    LightThresholds t;
    auto band = [&](const char* key, LightBand& b) {
      if (!j.contains(key)) return;
      b.low = j.at(key).at("low").get<double>();
      b.high = j.at(key).at("high").get<double>();
      if (!(b.low >= 0.0) || !(b.high >= b.low)) throw ConfigError(std::string("thresholds: bad band for ") + key);
    };
    band("fat", t.fat);
    band("saturates", t.saturates);
    band("sugar", t.sugar);
    band("salt", t.salt);
    return t;
  }

  nlohmann::ordered_json to_json() const {
    auto b = [](const LightBand& x) { return nlohmann::ordered_json{{"low", x.low}, {"high", x.high}}; };
    return {{"fat", b(fat)}, {"saturates", b(saturates)}, {"sugar", b(sugar)}, {"salt", b(salt)}};
  }
};

inline Light classify(double per100g, const LightBand& band) {
  if (per100g <= band.low) return Light::kGreen;
  if (per100g > band.high) return Light::kRed;
  return Light::kAmber;
}

inline TrafficLights traffic_lights(const NutrientValues& per100g, const LightThresholds& t = {}) {
  return {classify(per100g.sugar, t.sugar), classify(per100g.fat, t.fat), classify(per100g.saturates, t.saturates),
          classify(per100g.salt, t.salt)};
}

/// Why a recipe has no nutrition record.
struct Incomplete {
  std::size_t ingredient = 0;
  std::string reason;
};

using NutritionOutcome = std::variant<NutritionRecord, Incomplete>;

struct NutritionContext {
  const NutrientTable* table = nullptr;
  const UnitConversions* conversions = nullptr;
  const IngredientLexicon* lexicon = nullptr;
  LightThresholds thresholds;
};

/// Mass and nutrient contribution of one ingredient sentence, or the reason
/// it cannot be measured.
struct IngredientContribution {
  double mass_g = 0.0;
  NutrientValues nutrients;
};

inline std::variant<IngredientContribution, std::string> ingredient_contribution(const std::string& sentence,
                                                                               const NutritionContext& ctx) {
  auto parsed = parse_ingredient(sentence);
  if (!parsed) return std::string("unparseable ingredient");
  if (!parsed->unit) return std::string("no measurable unit");
  if (!parsed->quantity) return std::string("no numerical quantity");
  auto canonical = ctx.lexicon->canonicalize(parsed->name);
  if (!canonical) return std::string("ingredient not in lexicon: " + parsed->name);
  auto food = ctx.table->find(*canonical);
  if (!food) return std::string("ingredient not in nutrient table: " + *canonical);
  IngredientContribution c;
  c.mass_g = parsed->quantity->to_double() * ctx.conversions->grams(*parsed->unit);
  c.nutrients = food->second.scaled(c.mass_g / 100.0);
  return c;
}

/// Sums ingredient contributions; incomplete when any ingredient cannot be
/// measured. Throws ConfigError when a parsed unit has no conversion.
inline NutritionOutcome compute_nutrition(const std::vector<std::string>& ingredients, const NutritionContext& ctx) {
  if (!ctx.table || !ctx.conversions || !ctx.lexicon) throw ConfigError("nutrition: context is missing a table");
  if (ingredients.empty()) return Incomplete{0, "no ingredients"};
  NutritionRecord rec;
  for (std::size_t i = 0; i < ingredients.size(); ++i) {
    auto c = ingredient_contribution(ingredients[i], ctx);
    if (auto* why = std::get_if<std::string>(&c)) return Incomplete{i, *why};
    const auto& contrib = std::get<IngredientContribution>(c);
    rec.mass_g += contrib.mass_g;
    rec.total += contrib.nutrients;
  }
  rec.per100g = rec.total.scaled(100.0 / rec.mass_g);
  rec.lights = traffic_lights(rec.per100g, ctx.thresholds);
  return rec;
}

inline NutritionOutcome compute_nutrition(const Recipe& recipe, const NutritionContext& ctx) {
  return compute_nutrition(recipe.ingredients, ctx);
}

}  // namespace im2recipe::nutrition
