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
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "im2recipe/core/random.hpp"
#include "im2recipe/core/tensor.hpp"

namespace im2recipe::retrieval {

/// Candidates by descending cosine to the query; ties go to the lower index.
/// Zero-norm candidates are left out and counted.
struct Ranking {
  std::vector<std::size_t> order;
  std::size_t excluded_zero_norm = 0;
};

inline Ranking rank(std::span<const double> query, const Tensor& candidates) {
  if (candidates.rank() != 2 || candidates.cols() != query.size()) {
    throw DimensionError("rank: candidate matrix " + shape_string(candidates.shape()) + " vs query of length " +
                         std::to_string(query.size()));
  }
  const double nq = linalg::norm(query);
  if (nq == 0.0) throw DegenerateInputError("rank: zero-norm query");
  Ranking out;
  std::vector<double> score(candidates.rows());
  for (std::size_t j = 0; j < candidates.rows(); ++j) {
    const double nc = linalg::norm(candidates.row(j));
    if (nc == 0.0) {
      ++out.excluded_zero_norm;
      continue;
    }
    score[j] = linalg::dot(query, candidates.row(j)) / (nq * nc);
    out.order.push_back(j);
  }
  std::stable_sort(out.order.begin(), out.order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  return out;
}

enum class QueryDirection { kIm2Recipe, kRecipe2Im };

inline std::string_view to_string(QueryDirection d) {
  return d == QueryDirection::kIm2Recipe ? "im2recipe" : "recipe2im";
}

inline std::optional<QueryDirection> direction_from_string(std::string_view s) {
  if (s == "im2recipe") return QueryDirection::kIm2Recipe;
  if (s == "recipe2im") return QueryDirection::kRecipe2Im;
  return std::nullopt;
}

enum class MedianRule { kLower, kMean };

struct EvalConfig {
  std::size_t n = 1000;
  std::size_t repeats = 10;
  QueryDirection direction = QueryDirection::kIm2Recipe;
  MedianRule median = MedianRule::kLower;
  std::uint64_t seed = kDefaultSeed;
};

struct RepeatResult {
  /// Sampled pair ids, ascending; query i's counterpart is candidate i.
  std::vector<std::string> pairs;
  std::vector<std::size_t> ranks;
  double medr = 0.0;
  double r1 = 0.0, r5 = 0.0, r10 = 0.0;
};

struct RetrievalReport {
  QueryDirection direction = QueryDirection::kIm2Recipe;
  std::size_t requested_n = 0;
  std::size_t n = 0;
  std::size_t repeats = 0;
  std::uint64_t seed = 0;
  MedianRule median = MedianRule::kLower;
  std::vector<RepeatResult> per_repeat;
  double mean_medr = 0.0;
  double mean_r1 = 0.0, mean_r5 = 0.0, mean_r10 = 0.0;
  /// Queries or true counterparts with zero norm; such a query scores rank N.
  std::size_t zero_norm_warnings = 0;
  bool pool_shrunk = false;
};

/// Median of a rank list: lower middle element for even lengths, or the mean
/// of both middles under MedianRule::kMean.
inline double median_rank(std::vector<std::size_t> ranks, MedianRule rule = MedianRule::kLower) {
  if (ranks.empty()) throw EmptyInputError("median of an empty rank list");
  std::sort(ranks.begin(), ranks.end());
  const std::size_t n = ranks.size();
  if (n % 2 == 1 || rule == MedianRule::kLower) return static_cast<double>(ranks[(n - 1) / 2]);
  return 0.5 * static_cast<double>(ranks[n / 2 - 1] + ranks[n / 2]);
}

inline double recall_at(const std::vector<std::size_t>& ranks, std::size_t k) {
  const auto hits = std::count_if(ranks.begin(), ranks.end(), [k](std::size_t r) { return r <= k; });
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

/// Ranks of each query's true counterpart among `candidates`, where query i
/// belongs with candidate i. Rank = 1 + number of candidates scoring higher,
/// or equal with a lower index; zero-norm candidates never count.
inline std::vector<std::size_t> true_ranks(const Tensor& queries, const Tensor& candidates,
                                           std::size_t* zero_norm_warnings = nullptr) {
  if (queries.shape() != candidates.shape() || queries.rank() != 2) {
    throw DimensionError("true_ranks: query and candidate matrices must have equal [N,d] shapes");
  }
  const std::size_t n = queries.rows();
  std::vector<double> cand_norm(n);
  for (std::size_t j = 0; j < n; ++j) cand_norm[j] = linalg::norm(candidates.row(j));
  std::vector<std::size_t> ranks(n);
  std::vector<double> score(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto q = queries.row(i);
    const double nq = linalg::norm(q);
    if (nq == 0.0 || cand_norm[i] == 0.0) {
      ranks[i] = n;
      if (zero_norm_warnings) ++*zero_norm_warnings;
      continue;
    }
    for (std::size_t j = 0; j < n; ++j) {
      score[j] = cand_norm[j] == 0.0 ? 0.0 : linalg::dot(q, candidates.row(j)) / (nq * cand_norm[j]);
    }
    std::size_t better = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || cand_norm[j] == 0.0) continue;
      if (score[j] > score[i] || (score[j] == score[i] && j < i)) ++better;
    }
    ranks[i] = better + 1;
  }
  return ranks;
}

/// Repeated retrieval over sampled pools. Row p of both matrices is the
/// embedding of pair p; `pair_ids` names the pairs and fixes tie order.
inline RetrievalReport evaluate(const Tensor& recipe_emb, const Tensor& image_emb,
                                const std::vector<std::string>& pair_ids, const EvalConfig& cfg) {
  if (recipe_emb.shape() != image_emb.shape() || recipe_emb.rank() != 2) {
    throw DimensionError("evaluate: recipe and image embeddings must have equal [P,d] shapes");
  }
  if (pair_ids.size() != recipe_emb.rows()) throw DimensionError("evaluate: one id per pair required");
  if (cfg.n < 2) throw ConfigError("evaluate: pool size N must be >= 2");
  if (cfg.repeats == 0) throw ConfigError("evaluate: repeats must be >= 1");
  const std::size_t total = recipe_emb.rows();
  if (total < 2) throw ConfigError("evaluate: need at least 2 pairs");

  RetrievalReport rep;
  rep.direction = cfg.direction;
  rep.requested_n = cfg.n;
  rep.n = std::min(cfg.n, total);
  rep.pool_shrunk = rep.n < cfg.n;
  rep.repeats = cfg.repeats;
  rep.seed = cfg.seed;
  rep.median = cfg.median;
  const std::size_t d = recipe_emb.cols();

  Rng rng(cfg.seed);
  std::vector<std::size_t> all(total);
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    std::iota(all.begin(), all.end(), 0);
    for (std::size_t k = 0; k < rep.n; ++k) std::swap(all[k], all[k + uniform_index(rng, total - k)]);
    std::vector<std::size_t> chosen(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(rep.n));
    std::sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) { return pair_ids[a] < pair_ids[b]; });

    Tensor rec({rep.n, d}), img({rep.n, d});
    RepeatResult res;
    for (std::size_t k = 0; k < rep.n; ++k) {
      std::copy_n(recipe_emb.row(chosen[k]).begin(), d, rec.row(k).begin());
      std::copy_n(image_emb.row(chosen[k]).begin(), d, img.row(k).begin());
      res.pairs.push_back(pair_ids[chosen[k]]);
    }
    res.ranks = cfg.direction == QueryDirection::kIm2Recipe ? true_ranks(img, rec, &rep.zero_norm_warnings)
                                                            : true_ranks(rec, img, &rep.zero_norm_warnings);
    res.medr = median_rank(res.ranks, cfg.median);
    res.r1 = recall_at(res.ranks, 1);
    res.r5 = recall_at(res.ranks, 5);
    res.r10 = recall_at(res.ranks, 10);
    rep.mean_medr += res.medr;
    rep.mean_r1 += res.r1;
    rep.mean_r5 += res.r5;
    rep.mean_r10 += res.r10;
    rep.per_repeat.push_back(std::move(res));
  }
  const double inv = 1.0 / static_cast<double>(cfg.repeats);
  rep.mean_medr *= inv;
  rep.mean_r1 *= inv;
  rep.mean_r5 *= inv;
  rep.mean_r10 *= inv;
  return rep;
}

/// Counts of ranks in [1], [2,5], [6,10], [11,50], [51,100], [101,500], [501,inf).
inline std::vector<std::size_t> rank_histogram(const std::vector<std::size_t>& ranks) {
  static constexpr std::size_t kUpper[] = {1, 5, 10, 50, 100, 500};
  std::vector<std::size_t> bins(std::size(kUpper) + 1, 0);
  for (std::size_t r : ranks) {
    std::size_t b = 0;
    while (b < std::size(kUpper) && r > kUpper[b]) ++b;
    ++bins[b];
  }
  return bins;
}

inline nlohmann::ordered_json to_json(const RetrievalReport& r, bool include_pairs = true) {
  nlohmann::ordered_json j;
  j["direction"] = to_string(r.direction);
  j["n"] = r.n;
  j["requested_n"] = r.requested_n;
  j["repeats"] = r.repeats;
  j["seed"] = r.seed;
  j["median_rule"] = r.median == MedianRule::kLower ? "lower" : "mean";
  j["tie_rule"] = "ascending pair id";
  j["mean_medr"] = r.mean_medr;
  j["mean_r1"] = r.mean_r1;
  j["mean_r5"] = r.mean_r5;
  j["mean_r10"] = r.mean_r10;
  j["zero_norm_warnings"] = r.zero_norm_warnings;
  j["pool_shrunk"] = r.pool_shrunk;
  auto& reps = j["per_repeat"] = nlohmann::ordered_json::array();
  for (const auto& p : r.per_repeat) {
    nlohmann::ordered_json e;
    e["medr"] = p.medr;
    e["r1"] = p.r1;
    e["r5"] = p.r5;
    e["r10"] = p.r10;
    e["rank_histogram"] = rank_histogram(p.ranks);
    if (include_pairs) {
      e["pairs"] = p.pairs;
      e["ranks"] = p.ranks;
    }
    reps.push_back(std::move(e));
  }
  return j;
}

inline void write_tsv(std::ostream& out, const RetrievalReport& r) {
  out << "direction\trepeat\tn\tmedr\tr1\tr5\tr10\n";
  for (std::size_t k = 0; k < r.per_repeat.size(); ++k) {
    const auto& p = r.per_repeat[k];
    out << to_string(r.direction) << '\t' << k << '\t' << r.n << '\t' << p.medr << '\t' << p.r1 << '\t' << p.r5 << '\t'
        << p.r10 << '\n';
  }
}

}  // namespace im2recipe::retrieval
