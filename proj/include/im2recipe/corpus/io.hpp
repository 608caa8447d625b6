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

// Layer 1: JSON lines, one Recipe per line.
//   {"id","title","ingredients","instructions","partition",
//    "units"?, "quantities"?, "nutrition"?, "category"?}
// Layer 2: JSON lines {"image_id","recipe_id","feature","source"?}, or a
// binary feature matrix plus a TSV manifest (image_id, recipe_id, source).

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "im2recipe/core/error.hpp"
#include "im2recipe/corpus/recipe.hpp"
#include "json.hpp"

namespace im2recipe::corpus_io {

using json = nlohmann::ordered_json;

namespace detail {

inline void require_keys(const json& j, const std::set<std::string>& allowed, const std::set<std::string>& required,
                         const std::string& source, std::size_t line) {
  if (!j.is_object()) throw ParseError(source, line, "record is not a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) throw ParseError(source, line, "unknown field '" + key + "'");
  }
  for (const auto& key : required) {
    if (!j.contains(key)) throw ParseError(source, line, "missing field '" + key + "'");
  }
}

inline std::vector<std::string> string_list(const json& j, const char* field, const std::string& source,
                                            std::size_t line) {
  const json& v = j.at(field);
  if (!v.is_array()) throw ParseError(source, line, std::string(field) + " must be a list");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw ParseError(source, line, std::string(field) + " must contain strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

inline std::vector<double> number_list(const json& j, const char* field, const std::string& source,
                                       std::size_t line) {
  const json& v = j.at(field);
  if (!v.is_array()) throw ParseError(source, line, std::string(field) + " must be a list");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) throw ParseError(source, line, std::string(field) + " must contain numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace detail

inline Recipe recipe_from_json(const json& j, const std::string& source = "<layer1>", std::size_t line = 1) {
  detail::require_keys(j,
                       {"id", "title", "ingredients", "instructions", "partition", "units", "quantities", "nutrition",
                        "category"},
                       {"id", "title", "ingredients", "instructions", "partition"}, source, line);
  Recipe r;
  try {
    r.id = j.at("id").get<std::string>();
    r.title = j.at("title").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, line, std::string("id/title: ") + e.what());
  }
  r.ingredients = detail::string_list(j, "ingredients", source, line);
  r.instructions = detail::string_list(j, "instructions", source, line);
  const json& part = j.at("partition");
  auto p = part.is_string() ? partition_from_string(part.get<std::string>()) : std::nullopt;
  if (!p) throw ParseError(source, line, "partition must be training|validation|test");
  r.partition = *p;
  if (j.contains("units") && !j.at("units").is_null()) r.units = detail::string_list(j, "units", source, line);
  if (j.contains("quantities") && !j.at("quantities").is_null()) {
    r.quantities = detail::number_list(j, "quantities", source, line);
  }
  if (j.contains("nutrition") && !j.at("nutrition").is_null()) {
    try {
      r.nutrition = j.at("nutrition").get<nutrition::NutritionRecord>();
    } catch (const std::exception& e) {
      throw ParseError(source, line, std::string("nutrition: ") + e.what());
    }
  }
  if (j.contains("category") && !j.at("category").is_null()) {
    if (!j.at("category").is_number_unsigned()) throw ParseError(source, line, "category must be a non-negative integer");
    r.category = j.at("category").get<std::size_t>();
  }
  try {
    validate_recipe(r);
  } catch (const IntegrityError& e) {
    throw ParseError(source, line, e.what());
  }
  return r;
}

inline json recipe_to_json(const Recipe& r) {
  json j;
  j["id"] = r.id;
  j["title"] = r.title;
  j["ingredients"] = r.ingredients;
  j["instructions"] = r.instructions;
  j["partition"] = std::string(to_string(r.partition));
  if (r.units) j["units"] = *r.units;
  if (r.quantities) j["quantities"] = *r.quantities;
  if (r.nutrition) j["nutrition"] = *r.nutrition;
  if (r.category) j["category"] = *r.category;
  return j;
}

inline ImageRecord image_from_json(const json& j, const std::string& source = "<layer2>", std::size_t line = 1) {
  detail::require_keys(j, {"image_id", "recipe_id", "feature", "source"}, {"image_id", "recipe_id", "feature"}, source,
                       line);
  ImageRecord im;
  try {
    im.image_id = j.at("image_id").get<std::string>();
    im.recipe_id = j.at("recipe_id").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, line, std::string("image_id/recipe_id: ") + e.what());
  }
  im.feature = detail::number_list(j, "feature", source, line);
  if (im.feature.empty()) throw ParseError(source, line, "feature must be non-empty");
  if (j.contains("source")) {
    auto s = j.at("source").is_string() ? image_source_from_string(j.at("source").get<std::string>()) : std::nullopt;
    if (!s) throw ParseError(source, line, "source must be site|search");
    im.source = *s;
  }
  return im;
}

inline json image_to_json(const ImageRecord& im) {
  json j;
  j["image_id"] = im.image_id;
  j["recipe_id"] = im.recipe_id;
  j["feature"] = im.feature;
  j["source"] = std::string(to_string(im.source));
  return j;
}

template <class T, class Parse>
std::vector<T> read_jsonl(std::istream& in, const std::string& source, Parse parse) {
  std::vector<T> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(source, lineno, std::string("malformed JSON: ") + e.what());
    }
    out.push_back(parse(j, source, lineno));
  }
  return out;
}

inline std::vector<Recipe> read_layer1(std::istream& in, const std::string& source = "<layer1>") {
  return read_jsonl<Recipe>(in, source, [](const json& j, const std::string& s, std::size_t l) {
    return recipe_from_json(j, s, l);
  });
}

inline std::vector<ImageRecord> read_layer2(std::istream& in, const std::string& source = "<layer2>") {
  return read_jsonl<ImageRecord>(in, source, [](const json& j, const std::string& s, std::size_t l) {
    return image_from_json(j, s, l);
  });
}

inline void write_layer1(std::ostream& out, const std::vector<Recipe>& recipes) {
  for (const Recipe& r : recipes) out << recipe_to_json(r).dump() << '\n';
}

inline void write_layer2(std::ostream& out, const std::vector<ImageRecord>& images) {
  for (const ImageRecord& im : images) out << image_to_json(im).dump() << '\n';
}

// ---- binary feature matrix ---------------------------------------------------
// "I2RF" | u32 version=1 | u64 rows | u64 cols | rows*cols little-endian f64

inline constexpr char kFeatureMagic[4] = {'I', '2', 'R', 'F'};

inline void write_feature_matrix(std::ostream& bin, std::ostream& manifest, const std::vector<ImageRecord>& images) {
  static_assert(std::endian::native == std::endian::little, "binary feature files assume a little-endian host");
  const std::uint32_t version = 1;
  const std::uint64_t rows = images.size();
  const std::uint64_t cols = images.empty() ? 0 : images.front().feature.size();
  bin.write(kFeatureMagic, 4);
  bin.write(reinterpret_cast<const char*>(&version), sizeof(version));
  bin.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  bin.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  for (const ImageRecord& im : images) {
    if (im.feature.size() != cols) throw DimensionError("write_feature_matrix: ragged features");
    bin.write(reinterpret_cast<const char*>(im.feature.data()), static_cast<std::streamsize>(cols * sizeof(double)));
    manifest << im.image_id << '\t' << im.recipe_id << '\t' << to_string(im.source) << '\n';
  }
}

inline std::vector<ImageRecord> read_feature_matrix(std::istream& bin, std::istream& manifest,
                                                    const std::string& source = "<features>") {
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t rows = 0, cols = 0;
  bin.read(magic, 4);
  bin.read(reinterpret_cast<char*>(&version), sizeof(version));
  bin.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  bin.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  if (!bin || std::memcmp(magic, kFeatureMagic, 4) != 0) throw ParseError(source, 0, "not a feature matrix file");
  if (version != 1) throw ParseError(source, 0, "unsupported feature matrix version");
  std::vector<ImageRecord> out;
  out.reserve(rows);
  std::string line;
  std::size_t lineno = 0;
  for (std::uint64_t r = 0; r < rows; ++r) {
    if (!std::getline(manifest, line)) throw ParseError(source + ".manifest", lineno + 1, "manifest shorter than matrix");
    ++lineno;
    std::istringstream fields(line);
    ImageRecord im;
    std::string src;
    if (!std::getline(fields, im.image_id, '\t') || !std::getline(fields, im.recipe_id, '\t')) {
      throw ParseError(source + ".manifest", lineno, "expected image_id<TAB>recipe_id[<TAB>source]");
    }
    if (std::getline(fields, src, '\t')) {
      auto s = image_source_from_string(src);
      if (!s) throw ParseError(source + ".manifest", lineno, "source must be site|search");
      im.source = *s;
    }
    im.feature.resize(cols);
    bin.read(reinterpret_cast<char*>(im.feature.data()), static_cast<std::streamsize>(cols * sizeof(double)));
    if (!bin) throw ParseError(source, r, "truncated feature matrix");
    out.push_back(std::move(im));
  }
  return out;
}

// ---- files -------------------------------------------------------------------

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

inline std::vector<Recipe> load_layer1_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path);
  return read_layer1(in, path);
}

/// JSONL, or `<path>.bin` with its manifest at `<path>.bin.manifest`.
inline std::vector<ImageRecord> load_layer2_file(const std::string& path) {
  if (ends_with(path, ".bin")) {
    std::ifstream bin(path, std::ios::binary);
    std::ifstream manifest(path + ".manifest");
    if (!bin || !manifest) throw NotFoundError("cannot open " + path + " and its .manifest");
    return read_feature_matrix(bin, manifest, path);
  }
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path);
  return read_layer2(in, path);
}

inline Corpus load_corpus(const std::string& layer1_path, const std::string& layer2_path) {
  auto recipes = load_layer1_file(layer1_path);
  auto images = layer2_path.empty() ? std::vector<ImageRecord>{} : load_layer2_file(layer2_path);
  return Corpus(std::move(recipes), std::move(images));
}

inline void save_layer1_file(const std::string& path, const std::vector<Recipe>& recipes) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_layer1(out, recipes);
}

inline void save_layer2_file(const std::string& path, const std::vector<ImageRecord>& images) {
  if (ends_with(path, ".bin")) {
    std::ofstream bin(path, std::ios::binary);
    std::ofstream manifest(path + ".manifest");
    if (!bin || !manifest) throw Error("cannot write " + path);
    write_feature_matrix(bin, manifest, images);
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_layer2(out, images);
}

inline void save_corpus(const Corpus& corpus, const std::string& layer1_path, const std::string& layer2_path) {
  save_layer1_file(layer1_path, corpus.recipes());
  save_layer2_file(layer2_path, corpus.images());
}

}  // namespace im2recipe::corpus_io
