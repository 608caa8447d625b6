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
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "im2recipe/core/error.hpp"
#include "im2recipe/nutrition/record.hpp"

namespace im2recipe {

enum class Partition { kTraining = 0, kValidation = 1, kTest = 2 };

inline constexpr std::size_t kPartitionCount = 3;

inline std::string_view to_string(Partition p) {
  switch (p) {
    case Partition::kTraining: return "training";
    case Partition::kValidation: return "validation";
    case Partition::kTest: return "test";
  }
  return "?";
}

inline std::optional<Partition> partition_from_string(std::string_view s) {
  if (s == "training") return Partition::kTraining;
  if (s == "validation") return Partition::kValidation;
  if (s == "test") return Partition::kTest;
  return std::nullopt;
}

enum class ImageSource { kSite, kSearch };

inline std::string_view to_string(ImageSource s) { return s == ImageSource::kSite ? "site" : "search"; }

inline std::optional<ImageSource> image_source_from_string(std::string_view s) {
  if (s == "site") return ImageSource::kSite;
  if (s == "search") return ImageSource::kSearch;
  return std::nullopt;
}

/// One Layer-1 record.
struct Recipe {
  std::string id;
  std::string title;
  std::vector<std::string> ingredients;
  std::vector<std::string> instructions;
  Partition partition = Partition::kTraining;
  std::optional<std::vector<std::string>> units;
  std::optional<std::vector<double>> quantities;
  std::optional<nutrition::NutritionRecord> nutrition;
  std::optional<std::size_t> category;

  friend bool operator==(const Recipe&, const Recipe&) = default;
};

/// One Layer-2 record: a precomputed image feature attached to a recipe.
struct ImageRecord {
  std::string image_id;
  std::string recipe_id;
  std::vector<double> feature;
  ImageSource source = ImageSource::kSite;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

/// Throws IntegrityError / ParseError-free checks on a single recipe.
inline void validate_recipe(const Recipe& r) {
  if (r.id.empty()) throw IntegrityError("recipe with empty id");
  if (r.ingredients.empty()) throw IntegrityError("recipe " + r.id + " has no ingredients");
  if (r.instructions.empty()) throw IntegrityError("recipe " + r.id + " has no instructions");
  if (r.units && r.units->size() != r.ingredients.size()) {
    throw IntegrityError("recipe " + r.id + ": units length differs from ingredients length");
  }
  if (r.quantities && r.quantities->size() != r.ingredients.size()) {
    throw IntegrityError("recipe " + r.id + ": quantities length differs from ingredients length");
  }
}

/// In-memory Layer-1 + Layer-2 corpus indexed by recipe id and image id.
/// Every image's partition is its recipe's partition.
class Corpus {
 public:
  Corpus() = default;

  Corpus(std::vector<Recipe> recipes, std::vector<ImageRecord> images)
      : recipes_(std::move(recipes)), images_(std::move(images)) {
    reindex();
  }

  const std::vector<Recipe>& recipes() const noexcept { return recipes_; }
  const std::vector<ImageRecord>& images() const noexcept { return images_; }
  std::size_t feature_dim() const noexcept { return feature_dim_; }

  const Recipe& recipe(std::string_view id) const { return recipes_[recipe_index(id)]; }

  std::size_t recipe_index(std::string_view id) const {
    auto it = recipe_by_id_.find(std::string(id));
    if (it == recipe_by_id_.end()) throw NotFoundError("no recipe with id " + std::string(id));
    return it->second;
  }

  bool has_recipe(std::string_view id) const { return recipe_by_id_.contains(std::string(id)); }

  std::size_t image_index(std::string_view id) const {
    auto it = image_by_id_.find(std::string(id));
    if (it == image_by_id_.end()) throw NotFoundError("no image with id " + std::string(id));
    return it->second;
  }

  /// Image indices of a recipe, ordered by image id.
  const std::vector<std::size_t>& images_of(std::size_t recipe_idx) const { return images_of_[recipe_idx]; }

  Partition image_partition(std::size_t image_idx) const {
    return recipes_[recipe_of_image_[image_idx]].partition;
  }

  std::size_t recipe_of_image(std::size_t image_idx) const { return recipe_of_image_[image_idx]; }

  std::vector<Partition> image_partitions() const {
    std::vector<Partition> out(images_.size());
    for (std::size_t i = 0; i < images_.size(); ++i) out[i] = image_partition(i);
    return out;
  }

  /// Replaces images, re-validating references.
  void set_images(std::vector<ImageRecord> images) {
    images_ = std::move(images);
    reindex();
  }

  void set_partition(std::size_t recipe_idx, Partition p) { recipes_[recipe_idx].partition = p; }
  void set_category(std::size_t recipe_idx, std::optional<std::size_t> c) { recipes_[recipe_idx].category = c; }
  void set_nutrition(std::size_t recipe_idx, std::optional<nutrition::NutritionRecord> n) {
    recipes_[recipe_idx].nutrition = std::move(n);
  }

 private:
  void reindex() {
    recipe_by_id_.clear();
    image_by_id_.clear();
    for (std::size_t i = 0; i < recipes_.size(); ++i) {
      validate_recipe(recipes_[i]);
      if (!recipe_by_id_.emplace(recipes_[i].id, i).second) {
        throw IntegrityError("duplicate recipe id " + recipes_[i].id);
      }
    }
    images_of_.assign(recipes_.size(), {});
    recipe_of_image_.assign(images_.size(), 0);
    feature_dim_ = images_.empty() ? 0 : images_.front().feature.size();
    for (std::size_t i = 0; i < images_.size(); ++i) {
      const ImageRecord& im = images_[i];
      if (im.image_id.empty()) throw IntegrityError("image with empty id");
      if (!image_by_id_.emplace(im.image_id, i).second) throw IntegrityError("duplicate image id " + im.image_id);
      auto it = recipe_by_id_.find(im.recipe_id);
      if (it == recipe_by_id_.end()) {
        throw IntegrityError("image " + im.image_id + " references missing recipe " + im.recipe_id);
      }
      if (im.feature.empty() || im.feature.size() != feature_dim_) {
        throw DimensionError("image " + im.image_id + " has feature length " + std::to_string(im.feature.size()) +
                             ", expected " + std::to_string(feature_dim_));
      }
      recipe_of_image_[i] = it->second;
      images_of_[it->second].push_back(i);
    }
    for (auto& list : images_of_) {
      std::sort(list.begin(), list.end(),
                [&](std::size_t a, std::size_t b) { return images_[a].image_id < images_[b].image_id; });
    }
  }

  std::vector<Recipe> recipes_;
  std::vector<ImageRecord> images_;
  std::unordered_map<std::string, std::size_t> recipe_by_id_;
  std::unordered_map<std::string, std::size_t> image_by_id_;
  std::vector<std::vector<std::size_t>> images_of_;
  std::vector<std::size_t> recipe_of_image_;
  std::size_t feature_dim_ = 0;
};

}  // namespace im2recipe
