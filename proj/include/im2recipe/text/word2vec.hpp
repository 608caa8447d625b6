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
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "im2recipe/core/checkpoint.hpp"
#include "im2recipe/core/random.hpp"
#include "im2recipe/core/tensor.hpp"
#include "im2recipe/text/vocabulary.hpp"

namespace im2recipe::text {

struct WordVectorConfig {
  std::size_t dim = 64;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  std::size_t min_count = 1;
  /// Subtract the mean trained vector from every row after training. Raw
  /// vectors share a large common direction that swamps per-token signal.
  bool center = true;
  std::uint64_t seed = kDefaultSeed;
};

/// One row per vocabulary id, specials included.
struct IngredientVectors {
  Vocabulary vocabulary;
  Tensor matrix;

  std::size_t dim() const { return matrix.cols(); }

  std::span<const double> row(std::size_t id) const { return matrix.row(id); }
  std::span<const double> operator[](std::string_view token) const { return matrix.row(vocabulary.id(token)); }

  /// "token v1 ... vd" per line, in id order.
  void save(std::ostream& out) const {
    for (std::size_t i = 0; i < vocabulary.size(); ++i) {
      out << vocabulary.token(i);
      for (double v : matrix.row(i)) out << ' ' << format_double(v);
      out << '\n';
    }
  }

  static IngredientVectors load(std::istream& in, const std::string& source = "<vectors>") {
    std::ostringstream vocab_text;
    std::vector<double> values;
    std::size_t dim = 0, rows = 0, lineno = 0;
    std::string line;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string tok, field;
      ls >> tok;
      std::size_t n = 0;
      while (ls >> field) {
        try {
          values.push_back(parse_double(field));
        } catch (const std::exception&) {
          throw ParseError(source, lineno, "bad number '" + field + "'");
        }
        ++n;
      }
      if (n == 0) throw ParseError(source, lineno, "token without vector");
      if (rows == 0) dim = n;
      if (n != dim) throw ParseError(source, lineno, "expected " + std::to_string(dim) + " values");
      vocab_text << rows++ << '\t' << tok << '\n';
    }
    if (rows == 0) throw ParseError(source, lineno, "empty vector file");
    std::istringstream vs(vocab_text.str());
    return {Vocabulary::load(vs, source), Tensor::matrix(rows, dim, std::move(values))};
  }

  void save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    save(out);
  }

  static IngredientVectors load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open " + path);
    return load(in, path);
  }
};

/// Negative-sampling loss for one (center, context) pair and its gradients:
///   -log s(u_o . v_c) - sum_k log s(-u_k . v_c)
struct SkipGramTerm {
  double loss = 0.0;
  std::vector<double> d_center;
  std::vector<double> d_context;
  std::vector<std::vector<double>> d_negatives;
};

inline SkipGramTerm skipgram_term(std::span<const double> center, std::span<const double> context,
                                  const std::vector<std::span<const double>>& negatives) {
  auto log_sigmoid = [](double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); };
  auto sigmoid = [](double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); };
  const std::size_t d = center.size();
  SkipGramTerm t;
  t.d_center.assign(d, 0.0);
  t.d_context.assign(d, 0.0);
  const double s = linalg::dot(context, center);
  t.loss = -log_sigmoid(s);
  const double gp = sigmoid(s) - 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    t.d_center[i] += gp * context[i];
    t.d_context[i] = gp * center[i];
  }
  for (const auto& neg : negatives) {
    const double sn = linalg::dot(neg, center);
    t.loss -= log_sigmoid(-sn);
    const double gn = sigmoid(sn);
    std::vector<double> dn(d);
    for (std::size_t i = 0; i < d; ++i) {
      t.d_center[i] += gn * neg[i];
      dn[i] = gn * center[i];
    }
    t.d_negatives.push_back(std::move(dn));
  }
  return t;
}

/// Skip-gram with negative sampling where every other ingredient of the same
/// recipe is a context word. Negatives follow unigram^0.75.
inline IngredientVectors train_word_vectors(const std::vector<std::vector<std::string>>& recipes,
                                            const WordVectorConfig& cfg) {
  if (cfg.dim < 2) throw ConfigError("word vectors: dim must be >= 2");
  if (!(cfg.learning_rate > 0)) throw ConfigError("word vectors: learning rate must be > 0");
  Vocabulary vocab = Vocabulary::build(recipes, cfg.min_count);
  const std::size_t words = vocab.size() - Vocabulary::kSpecialCount;
  if (words < cfg.negatives + 1) {
    throw ConfigError("word vectors: vocabulary of " + std::to_string(words) + " tokens is smaller than negatives+1 (" +
                      std::to_string(cfg.negatives + 1) + ")");
  }
  Rng rng(cfg.seed);
  const std::size_t v = vocab.size();
  Tensor input = uniform_tensor({v, cfg.dim}, 0.5 / static_cast<double>(cfg.dim), rng);
  Tensor output({v, cfg.dim});

  std::vector<std::vector<std::size_t>> ids;
  std::vector<double> freq(v, 0.0);
  std::size_t total_pairs = 0;
  for (const auto& r : recipes) {
    std::vector<std::size_t> seq;
    for (const auto& t : r) {
      if (vocab.contains(t)) seq.push_back(vocab.id(t));
    }
    for (auto id : seq) freq[id] += 1.0;
    total_pairs += seq.size() > 1 ? seq.size() * (seq.size() - 1) : 0;
    ids.push_back(std::move(seq));
  }
  if (total_pairs == 0) return {std::move(vocab), std::move(input)};

  for (auto& f : freq) f = std::pow(f, 0.75);
  std::discrete_distribution<std::size_t> noise(freq.begin(), freq.end());

  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  const double planned = static_cast<double>(total_pairs * cfg.epochs);
  double done = 0.0;
  std::vector<std::size_t> negs;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t r : order) {
      const auto& seq = ids[r];
      for (std::size_t a = 0; a < seq.size(); ++a) {
        for (std::size_t b = 0; b < seq.size(); ++b) {
          if (a == b) continue;
          const double lr = cfg.learning_rate * std::max(1e-4, 1.0 - done / planned);
          done += 1.0;
          const std::size_t center = seq[a], context = seq[b];
          negs.clear();
          while (negs.size() < cfg.negatives) {
            const std::size_t n = noise(rng);
            if (n != context) negs.push_back(n);
          }
          std::vector<std::span<const double>> neg_rows;
          for (auto n : negs) neg_rows.push_back(output.row(n));
          const SkipGramTerm t = skipgram_term(input.row(center), output.row(context), neg_rows);
          auto out_ctx = output.row(context);
          for (std::size_t i = 0; i < cfg.dim; ++i) out_ctx[i] -= lr * t.d_context[i];
          for (std::size_t k = 0; k < negs.size(); ++k) {
            auto row = output.row(negs[k]);
            for (std::size_t i = 0; i < cfg.dim; ++i) row[i] -= lr * t.d_negatives[k][i];
          }
          auto in_row = input.row(center);
          for (std::size_t i = 0; i < cfg.dim; ++i) in_row[i] -= lr * t.d_center[i];
        }
      }
    }
  }
  if (cfg.center) {
    std::vector<double> mean(cfg.dim, 0.0);
    for (std::size_t r = Vocabulary::kSpecialCount; r < v; ++r) {
      for (std::size_t i = 0; i < cfg.dim; ++i) mean[i] += input.at(r, i) / static_cast<double>(words);
    }
    for (std::size_t r = 0; r < v; ++r) {
      for (std::size_t i = 0; i < cfg.dim; ++i) input.at(r, i) -= mean[i];
    }
  }
  return {std::move(vocab), std::move(input)};
}

}  // namespace im2recipe::text
