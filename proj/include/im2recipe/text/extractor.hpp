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
#include <cctype>
#include <memory>
#include <numeric>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "im2recipe/core/autodiff.hpp"
#include "im2recipe/core/checkpoint.hpp"
#include "im2recipe/core/lstm.hpp"
#include "im2recipe/core/optim.hpp"
#include "im2recipe/nutrition/units.hpp"
#include "im2recipe/text/vocabulary.hpp"

namespace im2recipe::text {

/// Tokens of one ingredient sentence with 1 marking ingredient-name tokens.
struct TaggedSentence {
  std::vector<std::string> tokens;
  std::vector<int> labels;
};

inline const std::set<std::string, std::less<>>& extractor_stopwords() {
  static const std::set<std::string, std::less<>> kWords = {
      "a",        "an",      "the",     "of",      "and",      "or",      "to",      "taste",   "for",
      "at",       "in",      "into",    "with",    "about",    "plus",    "more",    "as",      "needed",
      "chopped",  "diced",   "minced",  "sliced",  "fresh",    "freshly", "ground",  "large",   "small",
      "medium",   "finely",  "coarsely", "grated", "shredded", "peeled",  "melted",  "softened", "beaten",
      "cut",      "optional", "divided", "packed", "warm",     "cold",    "hot",     "room",    "temperature",
      "cubed",    "crushed", "dried",   "whole",   "pieces",   "piece",   "thinly",  "lightly", "roughly",
      "halved",   "quartered", "drained", "rinsed", "trimmed", "extra",   "inch",    "inches",  "serving"};
  return kWords;
}

/// 1 for tokens that survive dropping quantities, units, count words and
/// stopwords/descriptors.
inline std::vector<int> rule_labels(const std::vector<std::string>& tokens) {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    const bool numeric = std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    const bool drop = numeric || nutrition::unit_from_string(t).has_value() || nutrition::is_non_measurable_unit(t) ||
                      extractor_stopwords().contains(t);
    out.push_back(drop ? 0 : 1);
  }
  return out;
}

/// First contiguous run of tokens scoring above 0.5, joined with '_'; the
/// unknown marker when no token qualifies.
inline std::string join_positive_run(const std::vector<std::string>& tokens, const std::vector<double>& scores) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (scores[i] > 0.5) {
      if (!out.empty()) out.push_back('_');
      out += tokens[i];
    } else if (!out.empty()) {
      break;
    }
  }
  return out.empty() ? std::string(Vocabulary::kSpecialTokens[Vocabulary::kUnknown]) : out;
}

struct ExtractorConfig {
  std::size_t embed_dim = 16;
  std::size_t hidden = 16;
  std::size_t epochs = 12;
  double learning_rate = 0.01;
  std::uint64_t seed = kDefaultSeed;
};

/// Bidirectional LSTM tagger with a logistic output per token. Without a
/// trained model it falls back to rule_labels.
class IngredientNameExtractor {
 public:
  IngredientNameExtractor() = default;

  bool trained() const noexcept { return model_ != nullptr; }

  static IngredientNameExtractor train(const std::vector<TaggedSentence>& data, const ExtractorConfig& cfg = {}) {
    if (data.empty()) throw EmptyInputError("extractor: no tagged sentences");
    std::vector<std::vector<std::string>> seqs;
    for (const auto& s : data) {
      if (s.tokens.size() != s.labels.size()) throw LabelError("extractor: tokens and labels differ in length");
      for (int l : s.labels) {
        if (l != 0 && l != 1) throw LabelError("extractor: labels must be 0 or 1");
      }
      seqs.push_back(s.tokens);
    }
    IngredientNameExtractor ex;
    ex.model_ = std::make_shared<Model>(Vocabulary::build(seqs), cfg.embed_dim, cfg.hidden, cfg.seed);
    Model& m = *ex.model_;
    Optimizer opt({.learning_rate = cfg.learning_rate});
    const auto params = m.parameters();
    Rng rng(derive_seed(cfg.seed, 1));
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t idx : order) {
        const auto& s = data[idx];
        if (s.tokens.empty()) continue;
        Optimizer::zero_grad(params);
        ad::Tape tape;
        std::vector<double> targets(s.labels.begin(), s.labels.end());
        ad::Var loss = ad::sigmoid_binary_cross_entropy(m.logits(tape, s.tokens), targets);
        tape.backward(loss);
        opt.step(params);
      }
    }
    return ex;
  }

  /// Per-token probability of belonging to the ingredient name.
  std::vector<double> scores(const std::vector<std::string>& tokens) const {
    if (tokens.empty()) return {};
    if (!model_) {
      const auto labels = rule_labels(tokens);
      return {labels.begin(), labels.end()};
    }
    ad::Tape tape;
    const ad::Var logits = model_->logits(tape, tokens);
    std::vector<double> out;
    for (double z : logits.value().data()) out.push_back(ad::detail::stable_sigmoid(z));
    return out;
  }

  std::string extract(const std::vector<std::string>& tokens) const { return join_positive_run(tokens, scores(tokens)); }
  std::string extract(std::string_view sentence) const { return extract(tokenize(sentence)); }

  /// Writes `prefix`.vocab and `prefix` (checkpoint); a rule-only extractor writes nothing.
  void save(const std::string& prefix) const {
    if (!model_) return;
    std::ofstream vocab(prefix + ".vocab");
    if (!vocab) throw Error("cannot write " + prefix + ".vocab");
    model_->vocab.save(vocab);
    const auto params = model_->parameters();
    std::vector<const Param*> cparams(params.begin(), params.end());
    save_checkpoint_file(prefix, cparams);
  }

  static IngredientNameExtractor load(const std::string& prefix) {
    std::ifstream vin(prefix + ".vocab");
    if (!vin) throw NotFoundError("cannot open " + prefix + ".vocab");
    Vocabulary vocab = Vocabulary::load(vin, prefix + ".vocab");
    const TensorMap values = load_checkpoint_file(prefix);
    auto find = [&](const std::string& name) -> const Tensor& {
      auto it = values.find(name);
      if (it == values.end()) throw NotFoundError("checkpoint lacks " + name);
      return it->second;
    };
    const Tensor& emb = find("extractor.embedding");
    const std::size_t hidden = find("extractor.fwd.b_input").size();
    IngredientNameExtractor ex;
    ex.model_ = std::make_shared<Model>(std::move(vocab), emb.cols(), hidden, 0);
    const auto params = ex.model_->parameters();
    restore_params(values, params);
    return ex;
  }

 private:
  struct Model {
    Vocabulary vocab;
    Param embedding;
    LstmCellParams fwd, bwd;
    Param out_w, out_b;

    Model(Vocabulary v, std::size_t embed, std::size_t hidden, std::uint64_t seed)
        : vocab(std::move(v)) {
      Rng rng(seed);
      embedding = Param("extractor.embedding", uniform_tensor({vocab.size(), embed}, 0.5, rng));
      fwd = LstmCellParams("extractor.fwd", embed, hidden, rng);
      bwd = LstmCellParams("extractor.bwd", embed, hidden, rng);
      out_w = Param("extractor.out_w", uniform_tensor({1, 2 * hidden}, 1.0 / std::sqrt(2.0 * hidden), rng));
      out_b = Param("extractor.out_b", Tensor({1}));
    }

    std::vector<Param*> parameters() {
      std::vector<Param*> ps{&embedding};
      for (Param* p : fwd.parameters()) ps.push_back(p);
      for (Param* p : bwd.parameters()) ps.push_back(p);
      ps.push_back(&out_w);
      ps.push_back(&out_b);
      return ps;
    }

    ad::Var logits(ad::Tape& tape, const std::vector<std::string>& tokens) {
      const ad::Var table = tape.param(embedding);
      std::vector<ad::Var> xs;
      for (const auto& t : tokens) xs.push_back(ad::gather_row(table, vocab.id(t)));
      const auto hf = run_lstm(tape, fwd, xs, false);
      const auto hb = run_lstm(tape, bwd, xs, true);
      const ad::Var w = tape.param(out_w), b = tape.param(out_b);
      std::vector<ad::Var> zs;
      for (std::size_t i = 0; i < xs.size(); ++i) zs.push_back(ad::linear(ad::concat(hf[i], hb[i]), w, b));
      return ad::concat(zs);
    }
  };

  std::shared_ptr<Model> model_;
};

}  // namespace im2recipe::text
