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
#include <cctype>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "im2recipe/core/error.hpp"
#include "im2recipe/core/random.hpp"
#include "im2recipe/corpus/recipe.hpp"

namespace im2recipe {

struct PartitionRatios {
  double training = 0.7;
  double validation = 0.15;
  double test = 0.15;
};

/// Largest-remainder split of n items; remainder ties go to the earlier
/// partition (training, then validation, then test).
inline std::array<std::size_t, kPartitionCount> partition_sizes(std::size_t n, const PartitionRatios& r) {
  const std::array<double, kPartitionCount> ratio = {r.training, r.validation, r.test};
  for (double x : ratio) {
    if (!(x >= 0.0)) throw ConfigError("partition ratios must be non-negative");
  }
  if (std::abs(ratio[0] + ratio[1] + ratio[2] - 1.0) > 1e-9) throw ConfigError("partition ratios must sum to 1");
  std::array<std::size_t, kPartitionCount> sizes{};
  std::array<double, kPartitionCount> rem{};
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < kPartitionCount; ++k) {
    const double exact = ratio[k] * static_cast<double>(n);
    sizes[k] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    rem[k] = exact - static_cast<double>(sizes[k]);
    assigned += sizes[k];
  }
  std::array<std::size_t, kPartitionCount> idx = {0, 1, 2};
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b] + 1e-12; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++sizes[idx[k % kPartitionCount]];
  return sizes;
}

/// Splits recipes (and with them their images) by recipe. Recipes are sorted
/// by id, shuffled with `seed`, then cut into training/validation/test runs.
inline void assign_partitions(Corpus& corpus, const PartitionRatios& ratios, std::uint64_t seed) {
  const std::size_t n = corpus.recipes().size();
  if (n == 0) throw EmptyInputError("assign_partitions: empty corpus");
  const auto sizes = partition_sizes(n, ratios);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return corpus.recipes()[a].id < corpus.recipes()[b].id; });
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t pos = 0;
  for (std::size_t k = 0; k < kPartitionCount; ++k) {
    for (std::size_t c = 0; c < sizes[k]; ++c) corpus.set_partition(order[pos++], static_cast<Partition>(k));
  }
}

inline std::string normalize_title(std::string_view title) {
  std::string out;
  bool space = false;
  for (char ch : title) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}

/// Recipe id for each of `image_count` images retrieved for a shared title,
/// dealt round-robin over the recipes carrying that title in id order.
inline std::vector<std::string> distribute_title_images(const std::vector<Recipe>& recipes, std::string_view title,
                                                        std::size_t image_count) {
  const std::string key = normalize_title(title);
  std::vector<std::string> owners;
  for (const Recipe& r : recipes) {
    if (normalize_title(r.title) == key) owners.push_back(r.id);
  }
  if (owners.empty()) throw NotFoundError("no recipe titled '" + std::string(title) + "'");
  std::sort(owners.begin(), owners.end());
  std::vector<std::string> out(image_count);
  for (std::size_t i = 0; i < image_count; ++i) out[i] = owners[i % owners.size()];
  return out;
}

}  // namespace im2recipe
