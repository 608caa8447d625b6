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
#include <numeric>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "im2recipe/core/error.hpp"
#include "im2recipe/core/tensor.hpp"
#include "im2recipe/retrieval/categories.hpp"

namespace im2recipe::analysis {

enum class Space { kRecipe, kImage };

inline std::string_view to_string(Space s) { return s == Space::kRecipe ? "recipe" : "image"; }

/// Row i of `embeddings` belongs to item ids[i] with title titles[i].
struct EmbeddingTable {
  Space space = Space::kRecipe;
  std::vector<std::string> ids;
  std::vector<std::string> titles;
  Tensor embeddings;

  std::size_t size() const noexcept { return ids.size(); }
  std::size_t dim() const noexcept { return embeddings.rank() == 2 ? embeddings.cols() : 0; }

  void check() const {
    if (embeddings.rank() != 2 || embeddings.rows() != ids.size() || titles.size() != ids.size()) {
      throw DimensionError("embedding table: ids, titles and rows must line up");
    }
  }
};

struct ConceptVector {
  std::string phrase;
  Space space = Space::kRecipe;
  std::vector<std::size_t> members;
  std::vector<double> mean;
  /// The member embeddings cancel out to the zero vector.
  bool degenerate = false;
};

/// Mean embedding of items whose title contains `phrase` as whole words,
/// ignoring case and punctuation.
inline ConceptVector concept_vector(const EmbeddingTable& table, std::string_view phrase) {
  table.check();
  ConceptVector c;
  c.phrase = retrieval::normalized_title(std::string(phrase));
  c.space = table.space;
  if (c.phrase.empty()) throw NotFoundError("concept phrase is empty");
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (retrieval::title_contains(retrieval::normalized_title(table.titles[i]), c.phrase)) c.members.push_back(i);
  }
  if (c.members.empty()) throw NotFoundError("no title contains '" + c.phrase + "'");
  c.mean.assign(table.dim(), 0.0);
  for (std::size_t i : c.members) {
    const auto row = table.embeddings.row(i);
    for (std::size_t k = 0; k < c.mean.size(); ++k) c.mean[k] += row[k];
  }
  for (auto& v : c.mean) v /= static_cast<double>(c.members.size());
  c.degenerate = linalg::norm(c.mean) == 0.0;
  return c;
}

struct Neighbor {
  std::size_t item = 0;
  double cosine = 0.0;
};

/// Top-k items by cosine to `query`, ties by ascending row. Excluded and
/// zero-norm rows are skipped; k beyond the eligible count returns them all.
inline std::vector<Neighbor> nearest(const EmbeddingTable& table, std::span<const double> query, std::size_t k,
                                     const std::set<std::size_t>& excluded = {}) {
  table.check();
  if (query.size() != table.dim()) throw DimensionError("nearest: query length does not match embedding dim");
  const double nq = linalg::norm(query);
  if (nq == 0.0) throw DegenerateInputError("nearest: zero query vector");
  std::vector<Neighbor> all;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (excluded.contains(i)) continue;
    const auto row = table.embeddings.row(i);
    const double nr = linalg::norm(row);
    if (nr == 0.0) continue;
    all.push_back({i, linalg::dot(query, row) / (nq * nr)});
  }
  std::stable_sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) { return a.cosine > b.cosine; });
  if (all.size() > k) all.resize(k);
  return all;
}

inline void require_same_space(const EmbeddingTable& table, std::initializer_list<const ConceptVector*> cs) {
  for (const ConceptVector* c : cs) {
    if (c->space != table.space || c->mean.size() != table.dim()) {
      throw DimensionError("concept '" + c->phrase + "' is not from this embedding space");
    }
  }
}

struct AnalogyResult {
  std::vector<double> query;
  std::size_t excluded = 0;
  std::vector<Neighbor> neighbors;
};

/// Neighbors of a - b + c, leaving out every member of the three concepts.
inline AnalogyResult analogy(const EmbeddingTable& table, const ConceptVector& a, const ConceptVector& b,
                             const ConceptVector& c, std::size_t k) {
  require_same_space(table, {&a, &b, &c});
  AnalogyResult out;
  out.query.resize(table.dim());
  for (std::size_t i = 0; i < out.query.size(); ++i) out.query[i] = a.mean[i] - b.mean[i] + c.mean[i];
  if (linalg::norm(out.query) == 0.0) throw DegenerateInputError("analogy vector is zero");
  std::set<std::size_t> excluded;
  for (const ConceptVector* cv : {&a, &b, &c}) excluded.insert(cv->members.begin(), cv->members.end());
  out.excluded = excluded.size();
  out.neighbors = nearest(table, out.query, k, excluded);
  return out;
}

/// Neighbors of x * first + (1 - x) * second over all items.
inline std::vector<Neighbor> interpolate(const EmbeddingTable& table, const ConceptVector& first,
                                         const ConceptVector& second, double x, std::size_t k) {
  if (!(x >= 0.0 && x <= 1.0)) throw ConfigError("interpolate: fraction must lie in [0, 1]");
  require_same_space(table, {&first, &second});
  std::vector<double> q(table.dim());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = x * first.mean[i] + (1.0 - x) * second.mean[i];
  return nearest(table, q, k);
}

struct UnitActivation {
  std::size_t item = 0;
  double value = 0.0;
};

/// Top-k rows by coordinate `unit`, descending, ties by ascending row.
inline std::vector<UnitActivation> top_unit_activations(const Tensor& embeddings, std::size_t unit, std::size_t k) {
  if (embeddings.rank() != 2) throw DimensionError("top_unit_activations: expected an [N,d] matrix");
  if (unit >= embeddings.cols()) {
    throw DimensionError("unit " + std::to_string(unit) + " out of range for dim " + std::to_string(embeddings.cols()));
  }
  std::vector<UnitActivation> all(embeddings.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = {i, embeddings.at(i, unit)};
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.value > b.value; });
  if (all.size() > k) all.resize(k);
  return all;
}

/// Recipe and image top activations for the same unit, side by side.
struct UnitReport {
  std::size_t unit = 0;
  std::vector<UnitActivation> recipes;
  std::vector<UnitActivation> images;
};

inline UnitReport unit_report(const EmbeddingTable& recipes, const EmbeddingTable& images, std::size_t unit,
                              std::size_t k) {
  recipes.check();
  images.check();
  return {unit, top_unit_activations(recipes.embeddings, unit, k), top_unit_activations(images.embeddings, unit, k)};
}

inline void write_neighbors_header(std::ostream& out) { out << "query\trank\titem_id\ttitle\tcosine\n"; }

inline void write_neighbors_tsv(std::ostream& out, std::string_view query, const EmbeddingTable& table,
                                const std::vector<Neighbor>& neighbors) {
  for (std::size_t r = 0; r < neighbors.size(); ++r) {
    const auto& n = neighbors[r];
    out << query << '\t' << r + 1 << '\t' << table.ids[n.item] << '\t' << table.titles[n.item] << '\t' << n.cosine
        << '\n';
  }
}

inline void write_units_tsv(std::ostream& out, const EmbeddingTable& recipes, const EmbeddingTable& images,
                            const UnitReport& rep) {
  out << "unit\trank\trecipe_id\trecipe_title\trecipe_value\timage_id\timage_title\timage_value\n";
  const std::size_t rows = std::max(rep.recipes.size(), rep.images.size());
  for (std::size_t r = 0; r < rows; ++r) {
    out << rep.unit << '\t' << r + 1;
    if (r < rep.recipes.size()) {
      const auto& a = rep.recipes[r];
      out << '\t' << recipes.ids[a.item] << '\t' << recipes.titles[a.item] << '\t' << a.value;
    } else {
      out << "\t\t\t";
    }
    if (r < rep.images.size()) {
      const auto& a = rep.images[r];
      out << '\t' << images.ids[a.item] << '\t' << images.titles[a.item] << '\t' << a.value;
    } else {
      out << "\t\t\t";
    }
    out << '\n';
  }
}

}  // namespace im2recipe::analysis
