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

// Exact and near-duplicate image removal over precomputed features.
//
// Images are visited training-first (then validation, then test), ties by
// image id. An image is dropped when an already-kept image is
//   - bit-identical in feature (exact stage, any partition), or
//   - closer than near_threshold within its partition, or
//   - closer than cross_partition_threshold in another partition.
// Visiting training first means a cross-partition collision always costs the
// validation/test copy. The kept set has no conflicting pair left, so a second
// pass removes nothing.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "im2recipe/core/error.hpp"
#include "im2recipe/core/tensor.hpp"
#include "im2recipe/corpus/recipe.hpp"

namespace im2recipe {

struct DedupConfig {
  bool exact = true;
  double near_threshold = 0.1;
  double cross_partition_threshold = 0.1;
  /// Near-duplicate distances are measured between L2-normalized features.
  bool normalize = true;
};

struct ExactCluster {
  std::string representative;
  std::vector<std::string> removed;
};

struct NearPair {
  std::string removed;
  std::string kept;
  double distance = 0.0;
  bool cross_partition = false;
};

struct DedupReport {
  std::vector<ExactCluster> exact_clusters;
  std::vector<NearPair> near_pairs;
  double near_threshold = 0.0;
  double cross_partition_threshold = 0.0;
  bool normalized = true;
  std::array<std::size_t, kPartitionCount> removed_per_partition{};
  std::array<std::size_t, kPartitionCount> kept_per_partition{};

  std::size_t removed_count() const {
    return std::accumulate(removed_per_partition.begin(), removed_per_partition.end(), std::size_t{0});
  }
};

struct DedupResult {
  std::vector<ImageRecord> kept;
  DedupReport report;
};

namespace detail {

inline std::vector<double> unit_copy(const std::vector<double>& v) {
  const double n = linalg::norm(v);
  std::vector<double> out = v;
  if (n > 0.0) {
    for (auto& x : out) x /= n;
  }
  return out;
}

}  // namespace detail

/// Distance used by dedup between two features under `cfg`.
inline double dedup_distance(const std::vector<double>& a, const std::vector<double>& b, const DedupConfig& cfg) {
  if (!cfg.normalize) return std::sqrt(linalg::squared_distance(a, b));
  return std::sqrt(linalg::squared_distance(detail::unit_copy(a), detail::unit_copy(b)));
}

/// `partitions[i]` is the partition of `images[i]`.
inline DedupResult dedup_images(std::span<const ImageRecord> images, std::span<const Partition> partitions,
                                const DedupConfig& cfg) {
  if (!(cfg.near_threshold >= 0.0) || !(cfg.cross_partition_threshold >= 0.0)) {
    throw ConfigError("dedup: thresholds must be >= 0");
  }
  if (cfg.cross_partition_threshold < cfg.near_threshold) {
    throw ConfigError("dedup: cross-partition threshold must be >= near threshold");
  }
  if (partitions.size() != images.size()) throw DimensionError("dedup: one partition per image required");
  const std::size_t dim = images.empty() ? 0 : images.front().feature.size();
  for (const auto& im : images) {
    if (im.feature.size() != dim) {
      throw DimensionError("dedup: image " + im.image_id + " has feature length " + std::to_string(im.feature.size()) +
                           ", expected " + std::to_string(dim));
    }
  }

  std::vector<std::size_t> order(images.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (partitions[a] != partitions[b]) return partitions[a] < partitions[b];
    return images[a].image_id < images[b].image_id;
  });

  std::vector<std::vector<double>> metric(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    metric[i] = cfg.normalize ? detail::unit_copy(images[i].feature) : images[i].feature;
  }

  DedupResult result;
  DedupReport& report = result.report;
  report.near_threshold = cfg.near_threshold;
  report.cross_partition_threshold = cfg.cross_partition_threshold;
  report.normalized = cfg.normalize;

  std::map<std::vector<double>, std::size_t> exact_owner;  // feature -> cluster index
  std::vector<std::size_t> kept;
  const double near2 = cfg.near_threshold * cfg.near_threshold;
  const double cross2 = cfg.cross_partition_threshold * cfg.cross_partition_threshold;

  for (std::size_t i : order) {
    const ImageRecord& im = images[i];
    const auto p = static_cast<std::size_t>(partitions[i]);
    if (cfg.exact) {
      if (auto it = exact_owner.find(im.feature); it != exact_owner.end()) {
        report.exact_clusters[it->second].removed.push_back(im.image_id);
        ++report.removed_per_partition[p];
        continue;
      }
    }
    bool removed = false;
    for (std::size_t j : kept) {
      const bool same = partitions[i] == partitions[j];
      const double limit2 = same ? near2 : cross2;
      if (limit2 == 0.0) continue;
      const double d2 = linalg::squared_distance(metric[i], metric[j]);
      if (d2 < limit2) {
        report.near_pairs.push_back({im.image_id, images[j].image_id, std::sqrt(d2), !same});
        ++report.removed_per_partition[p];
        removed = true;
        break;
      }
    }
    if (removed) continue;
    kept.push_back(i);
    ++report.kept_per_partition[p];
    if (cfg.exact) {
      exact_owner.emplace(im.feature, report.exact_clusters.size());
      report.exact_clusters.push_back({im.image_id, {}});
    }
  }

  std::erase_if(report.exact_clusters, [](const ExactCluster& c) { return c.removed.empty(); });
  std::sort(kept.begin(), kept.end());
  result.kept.reserve(kept.size());
  for (std::size_t i : kept) result.kept.push_back(images[i]);
  return result;
}

inline DedupResult dedup_images(const Corpus& corpus, const DedupConfig& cfg) {
  const auto partitions = corpus.image_partitions();
  return dedup_images(corpus.images(), partitions, cfg);
}

inline nlohmann::ordered_json to_json(const DedupReport& r) {
  nlohmann::ordered_json j;
  j["near_threshold"] = r.near_threshold;
  j["cross_partition_threshold"] = r.cross_partition_threshold;
  j["normalized"] = r.normalized;
  j["removed"] = r.removed_count();
  auto& per = j["per_partition"] = nlohmann::ordered_json::object();
  for (std::size_t k = 0; k < kPartitionCount; ++k) {
    per[std::string(to_string(static_cast<Partition>(k)))] = {{"kept", r.kept_per_partition[k]},
                                                              {"removed", r.removed_per_partition[k]}};
  }
  auto& clusters = j["exact_clusters"] = nlohmann::ordered_json::array();
  for (const auto& c : r.exact_clusters) clusters.push_back({{"representative", c.representative}, {"removed", c.removed}});
  auto& pairs = j["near_pairs"] = nlohmann::ordered_json::array();
  for (const auto& p : r.near_pairs) {
    pairs.push_back({{"removed", p.removed}, {"kept", p.kept}, {"distance", p.distance}, {"cross_partition", p.cross_partition}});
  }
  return j;
}

}  // namespace im2recipe
