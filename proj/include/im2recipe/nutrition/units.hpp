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
#include <cctype>
#include <cstdint>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace im2recipe::nutrition {

/// The twenty measurable units, in their canonical singular spelling.
enum class Unit : std::uint8_t {
  kBushel, kCup, kDash, kDrop, kFluidOunce, kGram, kGallon, kGlass, kKilogram, kLiter,
  kMilliliter, kOunce, kPinch, kPint, kPound, kQuart, kScoop, kShot, kTablespoon, kTeaspoon,
};

inline constexpr std::size_t kUnitCount = 20;

inline constexpr std::array<std::string_view, kUnitCount> kUnitNames = {
    "bushel", "cup",   "dash",  "drop",  "fl. oz", "g",     "gallon", "glass",      "kg",       "liter",
    "ml",     "ounce", "pinch", "pint",  "pound",  "quart", "scoop",  "shot",       "tablespoon", "teaspoon",
};

inline std::string_view unit_name(Unit u) { return kUnitNames[static_cast<std::size_t>(u)]; }

/// Spellings accepted in ingredient text (lowercase, trailing '.' stripped).
inline const std::map<std::string, Unit, std::less<>>& unit_aliases() {
  static const std::map<std::string, Unit, std::less<>> aliases = [] {
    std::map<std::string, Unit, std::less<>> m;
    auto add = [&](Unit u, std::initializer_list<const char*> names) {
      for (const char* n : names) m.emplace(n, u);
    };
    add(Unit::kBushel, {"bushel", "bushels", "bu"});
    add(Unit::kCup, {"cup", "cups", "c"});
    add(Unit::kDash, {"dash", "dashes"});
    add(Unit::kDrop, {"drop", "drops"});
    add(Unit::kFluidOunce, {"fl. oz", "fl oz", "fl.oz", "floz", "fluid ounce", "fluid ounces", "fluid oz"});
    add(Unit::kGram, {"g", "gram", "grams", "gr", "grs"});
    add(Unit::kGallon, {"gallon", "gallons", "gal"});
    add(Unit::kGlass, {"glass", "glasses"});
    add(Unit::kKilogram, {"kg", "kgs", "kilogram", "kilograms", "kilo", "kilos"});
    add(Unit::kLiter, {"liter", "liters", "litre", "litres", "l"});
    add(Unit::kMilliliter, {"ml", "mls", "milliliter", "milliliters", "millilitre", "millilitres"});
    add(Unit::kOunce, {"ounce", "ounces", "oz"});
    add(Unit::kPinch, {"pinch", "pinches"});
    add(Unit::kPint, {"pint", "pints", "pt"});
    add(Unit::kPound, {"pound", "pounds", "lb", "lbs"});
    add(Unit::kQuart, {"quart", "quarts", "qt", "qts"});
    add(Unit::kScoop, {"scoop", "scoops"});
    add(Unit::kShot, {"shot", "shots"});
    add(Unit::kTablespoon, {"tablespoon", "tablespoons", "tbsp", "tbsps", "tbs", "tbl", "tbls"});
    add(Unit::kTeaspoon, {"teaspoon", "teaspoons", "tsp", "tsps"});
    return m;
  }();
  return aliases;
}

inline std::optional<Unit> unit_from_string(std::string_view text) {
  std::string key(text);
  for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (auto it = unit_aliases().find(key); it != unit_aliases().end()) return it->second;
  while (!key.empty() && key.back() == '.') key.pop_back();
  if (auto it = unit_aliases().find(key); it != unit_aliases().end()) return it->second;
  return std::nullopt;
}

/// Count/container words that are units in the text but carry no mass.
inline bool is_non_measurable_unit(std::string_view word) {
  static const std::array<std::string_view, 38> words = {
      "bunch",  "bunches",  "slice",  "slices", "loaf",    "loaves",   "clove",   "cloves",  "can",    "cans",
      "package", "packages", "pkg",   "piece",  "pieces",  "head",     "heads",   "stalk",   "stalks", "sprig",
      "sprigs", "handful",  "handfuls", "jar",  "jars",    "box",      "boxes",   "bag",     "bags",   "stick",
      "sticks", "packet",   "packets", "container", "containers", "bottle", "bottles", "envelope",
  };
  for (auto w : words) {
    if (w == word) return true;
  }
  return false;
}

}  // namespace im2recipe::nutrition
