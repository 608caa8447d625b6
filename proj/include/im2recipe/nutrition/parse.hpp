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

// Deterministic quantity-unit-ingredient grammar:
//
//   sentence := [quantity] ["(" quantity unit ")"] [unit | count-word] ["of"] tail
//   quantity := int | decimal | int "/" int | int int "/" int | unicode fraction | "a" | "an"
//
// parse_ingredient never throws; anything outside the grammar is nullopt.

#include <cctype>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "im2recipe/nutrition/units.hpp"

namespace im2recipe::nutrition {

/// Exact non-negative rational; fractions stay exact until to_double().
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t n, std::int64_t d) {
    const std::int64_t g = std::gcd(n, d);
    return g ? Rational{n / g, d / g} : Rational{0, 1};
  }

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool positive() const { return num > 0; }

  friend Rational operator+(Rational a, Rational b) { return make(a.num * b.den + b.num * a.den, a.den * b.den); }
  friend Rational operator*(Rational a, Rational b) { return make(a.num * b.num, a.den * b.den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

struct ParsedIngredient {
  std::optional<Rational> quantity;
  std::optional<Unit> unit;
  std::string name;
  std::string raw;
};

namespace detail {

constexpr std::int64_t kMaxComponent = 1'000'000'000;

inline std::optional<std::int64_t> parse_int(std::string_view s) {
  if (s.empty() || s.size() > 9) return std::nullopt;
  std::int64_t v = 0;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

inline std::optional<Rational> unicode_fraction(std::string_view s) {
  struct Entry {
    std::string_view glyph;
    std::int64_t n, d;
  };
  static constexpr Entry kGlyphs[] = {{"½", 1, 2}, {"¼", 1, 4}, {"¾", 3, 4}, {"⅓", 1, 3},
                                      {"⅔", 2, 3}, {"⅛", 1, 8}, {"⅜", 3, 8}, {"⅕", 1, 5}};
  for (const auto& e : kGlyphs) {
    if (s == e.glyph) return Rational::make(e.n, e.d);
  }
  return std::nullopt;
}

/// One quantity token: "3", "0.25", "1/2", "½", "a", "an".
inline std::optional<Rational> parse_quantity_token(std::string_view s) {
  if (s == "a" || s == "an" || s == "one") return Rational{1, 1};
  if (auto u = unicode_fraction(s)) return u;
  if (auto i = parse_int(s)) return Rational{*i, 1};
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto n = parse_int(s.substr(0, slash));
    auto d = parse_int(s.substr(slash + 1));
    if (n && d && *d > 0) return Rational::make(*n, *d);
    return std::nullopt;
  }
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    auto whole = dot == 0 ? std::optional<std::int64_t>(0) : parse_int(s.substr(0, dot));
    auto frac_str = s.substr(dot + 1);
    auto frac = parse_int(frac_str);
    if (!whole || !frac || frac_str.size() > 6) return std::nullopt;
    std::int64_t scale = 1;
    for (std::size_t k = 0; k < frac_str.size(); ++k) scale *= 10;
    return Rational::make(*whole * scale + *frac, scale);
  }
  // "1½"
  for (std::size_t cut = 1; cut < s.size(); ++cut) {
    auto whole = parse_int(s.substr(0, cut));
    auto glyph = unicode_fraction(s.substr(cut));
    if (whole && glyph) return Rational{*whole, 1} + *glyph;
  }
  return std::nullopt;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline std::string strip_punct(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::string_view(",;:()").find(s[b]) != std::string_view::npos) ++b;
  while (e > b && std::string_view(",;:()").find(s[e - 1]) != std::string_view::npos) --e;
  return std::string(s.substr(b, e - b));
}

/// Longest unit match starting at token `i` (handles "fl. oz", "fluid ounces").
inline std::optional<std::pair<Unit, std::size_t>> match_unit(const std::vector<std::string>& toks, std::size_t i) {
  if (i + 1 < toks.size()) {
    if (auto u = unit_from_string(toks[i] + " " + strip_punct(toks[i + 1]))) return std::pair{*u, std::size_t{2}};
  }
  if (i < toks.size()) {
    if (auto u = unit_from_string(strip_punct(toks[i]))) return std::pair{*u, std::size_t{1}};
  }
  return std::nullopt;
}

}  // namespace detail

inline std::optional<ParsedIngredient> parse_ingredient(std::string_view sentence) {
  ParsedIngredient out;
  out.raw = std::string(sentence);
  const auto toks = detail::split_ws(detail::lower(sentence));
  if (toks.empty()) return std::nullopt;
  std::size_t i = 0;

  if (auto q = detail::parse_quantity_token(toks[i])) {
    out.quantity = *q;
    ++i;
    if (i < toks.size() && toks[i] != "a" && toks[i] != "an") {
      auto frac = detail::parse_quantity_token(toks[i]);
      if (frac && frac->den > 1 && frac->num < frac->den && out.quantity->den == 1) {
        out.quantity = *out.quantity + *frac;
        ++i;
      }
    }
  }

  // "1 (15 ounce) can tomatoes" -> 15 ounce
  if (out.quantity && i < toks.size() && toks[i].starts_with("(")) {
    std::vector<std::string> inner;
    std::size_t j = i;
    bool closed = false;
    for (; j < toks.size() && !closed; ++j) {
      std::string t = toks[j];
      if (t.ends_with(")")) closed = true;
      inner.push_back(detail::strip_punct(t));
    }
    if (closed && inner.size() >= 2) {
      auto q = detail::parse_quantity_token(inner[0]);
      auto u = detail::match_unit(inner, 1);
      if (q && u && 1 + u->second == inner.size()) {
        out.quantity = *out.quantity * *q;
        out.unit = u->first;
        i = j;
        if (i < toks.size() && is_non_measurable_unit(detail::strip_punct(toks[i]))) ++i;
      }
    }
  }

  if (!out.unit && i < toks.size()) {
    // A bare "c"/"l"/"g" only counts as a unit after a quantity.
    auto u = detail::match_unit(toks, i);
    const bool ambiguous = u && u->second == 1 && detail::strip_punct(toks[i]).size() == 1 && !out.quantity;
    if (u && !ambiguous && i + u->second < toks.size()) {
      out.unit = u->first;
      i += u->second;
    } else if (u && !ambiguous) {
      return std::nullopt;  // a measure with nothing measured
    } else if (is_non_measurable_unit(detail::strip_punct(toks[i])) && i + 1 < toks.size()) {
      ++i;
    }
  }

  if (i < toks.size() && toks[i] == "of") ++i;
  std::string name;
  for (; i < toks.size(); ++i) {
    if (!name.empty()) name.push_back(' ');
    name += toks[i];
  }
  out.name = detail::strip_punct(name);
  if (out.name.empty()) return std::nullopt;
  if (out.quantity && !out.quantity->positive()) return std::nullopt;
  return out;
}

}  // namespace im2recipe::nutrition
