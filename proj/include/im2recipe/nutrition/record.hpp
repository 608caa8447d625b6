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
#include <string_view>

#include "im2recipe/core/error.hpp"
#include "json.hpp"

namespace im2recipe::nutrition {

/// Nutrient masses in grams (energy in kcal).
struct NutrientValues {
  double energy = 0.0;
  double protein = 0.0;
  double sugar = 0.0;
  double fat = 0.0;
  double saturates = 0.0;
  double salt = 0.0;

  NutrientValues& operator+=(const NutrientValues& o) {
    energy += o.energy;
    protein += o.protein;
    sugar += o.sugar;
    fat += o.fat;
    saturates += o.saturates;
    salt += o.salt;
    return *this;
  }

  NutrientValues scaled(double k) const {
    return {energy * k, protein * k, sugar * k, fat * k, saturates * k, salt * k};
  }

  friend bool operator==(const NutrientValues&, const NutrientValues&) = default;
};

enum class Light { kGreen, kAmber, kRed };

inline std::string_view to_string(Light l) {
  switch (l) {
    case Light::kGreen: return "green";
    case Light::kAmber: return "amber";
    case Light::kRed: return "red";
  }
  return "?";
}

inline Light light_from_string(std::string_view s) {
  if (s == "green") return Light::kGreen;
  if (s == "amber") return Light::kAmber;
  if (s == "red") return Light::kRed;
  throw Error("unknown traffic light '" + std::string(s) + "'");
}

struct TrafficLights {
  Light sugar = Light::kGreen;
  Light fat = Light::kGreen;
  Light saturates = Light::kGreen;
  Light salt = Light::kGreen;

  friend bool operator==(const TrafficLights&, const TrafficLights&) = default;
};

/// Whole-recipe nutrition: totals, total ingredient mass, per-100 g values and lights.
struct NutritionRecord {
  NutrientValues total;
  double mass_g = 0.0;
  NutrientValues per100g;
  TrafficLights lights;

  friend bool operator==(const NutritionRecord&, const NutritionRecord&) = default;
};

inline void to_json(nlohmann::ordered_json& j, const NutrientValues& v) {
  j = nlohmann::ordered_json{{"energy", v.energy}, {"protein", v.protein},     {"sugar", v.sugar},
                             {"fat", v.fat},       {"saturates", v.saturates}, {"salt", v.salt}};
}

inline void from_json(const nlohmann::ordered_json& j, NutrientValues& v) {
  v.energy = j.at("energy").get<double>();
  v.protein = j.at("protein").get<double>();
  v.sugar = j.at("sugar").get<double>();
  v.fat = j.at("fat").get<double>();
  v.saturates = j.at("saturates").get<double>();
  v.salt = j.at("salt").get<double>();
}

inline void to_json(nlohmann::ordered_json& j, const TrafficLights& l) {
  j = nlohmann::ordered_json{{"sugar", to_string(l.sugar)},
                             {"fat", to_string(l.fat)},
                             {"saturates", to_string(l.saturates)},
                             {"salt", to_string(l.salt)}};
}

inline void from_json(const nlohmann::ordered_json& j, TrafficLights& l) {
  l.sugar = light_from_string(j.at("sugar").get<std::string>());
  l.fat = light_from_string(j.at("fat").get<std::string>());
  l.saturates = light_from_string(j.at("saturates").get<std::string>());
  l.salt = light_from_string(j.at("salt").get<std::string>());
}

inline void to_json(nlohmann::ordered_json& j, const NutritionRecord& r) {
  j = nlohmann::ordered_json{{"total", r.total}, {"mass_g", r.mass_g}, {"per100g", r.per100g}, {"lights", r.lights}};
}

inline void from_json(const nlohmann::ordered_json& j, NutritionRecord& r) {
  j.at("total").get_to(r.total);
  r.mass_g = j.at("mass_g").get<double>();
  j.at("per100g").get_to(r.per100g);
  j.at("lights").get_to(r.lights);
}

}  // namespace im2recipe::nutrition
