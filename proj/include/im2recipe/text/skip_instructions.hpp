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
#include <fstream>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "im2recipe/core/autodiff.hpp"
#include "im2recipe/core/checkpoint.hpp"
#include "im2recipe/core/lstm.hpp"
#include "im2recipe/core/optim.hpp"
#include "im2recipe/text/vocabulary.hpp"

namespace im2recipe::text {

/// Tokenized instructions of one recipe, in order.
using InstructionTokens = std::vector<std::vector<std::string>>;

struct SkipInstructionsConfig {
  std::size_t embed_dim = 32;
  std::size_t dim = 64;
  std::size_t epochs = 5;
  double learning_rate = 5e-3;
  std::size_t batch_size = 8;
  /// Longer instructions are truncated during training only.
  std::size_t max_tokens = 30;
  std::size_t min_count = 1;
  /// Also train a second decoder on the previous instruction.
  bool predict_previous = false;
  std::uint64_t seed = kDefaultSeed;
};

struct SkipInstructionsReport {
  std::vector<double> epoch_loss;
  std::size_t skipped_empty = 0;
  std::size_t pairs = 0;
};

/// LSTM sentence encoder plus an LSTM decoder that, given the encoding of one
/// instruction, predicts the tokens of the next one under teacher forcing.
/// The decoder input at step t is concat(embedding of gold token t-1, encoding),
/// with the pad token standing in before the first token.
class SkipInstructionsEncoder {
 public:
  SkipInstructionsEncoder() = default;

  SkipInstructionsEncoder(Vocabulary vocab, std::size_t embed_dim, std::size_t dim, bool predict_previous,
                          std::uint64_t seed)
      : m_(std::make_shared<Model>(std::move(vocab), embed_dim, dim, predict_previous, seed)) {}

  bool ready() const noexcept { return m_ != nullptr; }
  std::size_t dim() const { return model().encoder.hidden_size; }
  const Vocabulary& vocabulary() const { return model().vocab; }
  std::vector<Param*> parameters() const { return model().parameters(); }

  ad::Var encode(ad::Tape& tape, const std::vector<std::size_t>& ids) const {
    if (ids.empty()) throw EmptyInputError("skip-instructions: empty instruction");
    Model& m = model();
    const ad::Var table = tape.param(m.embedding);
    std::vector<ad::Var> xs;
    for (auto id : ids) xs.push_back(ad::gather_row(table, id));
    return encode_sequence(tape, m.encoder, nullptr, xs, Direction::kForward);
  }

  /// Fixed-length vector; out-of-vocabulary tokens go through the unknown id.
  std::vector<double> encode_instruction(const std::vector<std::string>& tokens) const {
    ad::Tape tape;
    const ad::Var v = encode(tape, model().vocab.encode(tokens));
    return {v.value().data().begin(), v.value().data().end()};
  }

  /// Per-step logits of the next-instruction decoder.
  std::vector<ad::Var> decode_logits(ad::Tape& tape, ad::Var context, const std::vector<std::size_t>& target,
                                     bool previous = false) const {
    Model& m = model();
    LstmCellParams& cell = previous ? m.prev_decoder : m.decoder;
    Param& w = previous ? m.prev_w : m.out_w;
    Param& b = previous ? m.prev_b : m.out_b;
    const ad::Var table = tape.param(m.embedding);
    const ad::Var wv = tape.param(w), bv = tape.param(b);
    LstmState s = zero_state(tape, cell.hidden_size);
    std::vector<ad::Var> out;
    std::size_t prev = Vocabulary::kPad;
    for (std::size_t tok : target) {
      s = lstm_step(tape, cell, ad::concat(ad::gather_row(table, prev), context), s.h, s.c);
      out.push_back(ad::linear(s.h, wv, bv));
      prev = tok;
    }
    return out;
  }

  /// Mean token cross-entropy of predicting `target` from `source`.
  ad::Var pair_loss(ad::Tape& tape, const std::vector<std::size_t>& source, const std::vector<std::size_t>& target,
                    bool previous = false) const {
    if (target.empty()) throw EmptyInputError("skip-instructions: empty target instruction");
    const ad::Var ctx = encode(tape, source);
    const auto logits = decode_logits(tape, ctx, target, previous);
    std::vector<ad::Var> terms;
    for (std::size_t k = 0; k < target.size(); ++k) terms.push_back(ad::softmax_cross_entropy(logits[k], target[k]));
    return ad::mean(terms);
  }

  /// Logit values per decoding step, for inspection.
  std::vector<std::vector<double>> step_logits(const std::vector<std::string>& source,
                                               const std::vector<std::string>& target) const {
    ad::Tape tape;
    const auto& v = model().vocab;
    const auto logits = decode_logits(tape, encode(tape, v.encode(source)), v.encode(target));
    std::vector<std::vector<double>> out;
    for (const auto& l : logits) out.emplace_back(l.value().data().begin(), l.value().data().end());
    return out;
  }

  bool has_previous_decoder() const { return model().predict_previous; }

  void save(const std::string& prefix) const {
    std::ofstream vocab(prefix + ".vocab");
    if (!vocab) throw Error("cannot write " + prefix + ".vocab");
    model().vocab.save(vocab);
    const auto params = parameters();
    std::vector<const Param*> cparams(params.begin(), params.end());
    save_checkpoint_file(prefix, cparams);
  }

  static SkipInstructionsEncoder load(const std::string& prefix) {
    std::ifstream vin(prefix + ".vocab");
    if (!vin) throw NotFoundError("cannot open " + prefix + ".vocab");
    Vocabulary vocab = Vocabulary::load(vin, prefix + ".vocab");
    const TensorMap values = load_checkpoint_file(prefix);
    auto emb = values.find("skip.embedding");
    auto enc = values.find("skip.encoder.b_input");
    if (emb == values.end() || enc == values.end()) throw NotFoundError(prefix + " is not a skip-instructions checkpoint");
    const bool prev = values.contains("skip.prev_decoder.b_input");
    SkipInstructionsEncoder e(std::move(vocab), emb->second.cols(), enc->second.size(), prev, 0);
    restore_params(values, e.parameters());
    return e;
  }

 private:
  struct Model {
    Vocabulary vocab;
    bool predict_previous = false;
    Param embedding;
    LstmCellParams encoder, decoder, prev_decoder;
    Param out_w, out_b, prev_w, prev_b;

    Model(Vocabulary v, std::size_t embed, std::size_t dim, bool previous, std::uint64_t seed)
        : vocab(std::move(v)), predict_previous(previous) {
      if (embed == 0 || dim == 0) throw ConfigError("skip-instructions: dimensions must be positive");
      Rng rng(seed);
      const std::size_t n = vocab.size();
      embedding = Param("skip.embedding", uniform_tensor({n, embed}, 0.1, rng));
      encoder = LstmCellParams("skip.encoder", embed, dim, rng);
      decoder = LstmCellParams("skip.decoder", embed + dim, dim, rng);
      const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
      out_w = Param("skip.out_w", uniform_tensor({n, dim}, bound, rng));
      out_b = Param("skip.out_b", Tensor({n}));
      if (previous) {
        prev_decoder = LstmCellParams("skip.prev_decoder", embed + dim, dim, rng);
        prev_w = Param("skip.prev_w", uniform_tensor({n, dim}, bound, rng));
        prev_b = Param("skip.prev_b", Tensor({n}));
      }
    }

    std::vector<Param*> parameters() {
      std::vector<Param*> ps{&embedding};
      for (Param* p : encoder.parameters()) ps.push_back(p);
      for (Param* p : decoder.parameters()) ps.push_back(p);
      ps.push_back(&out_w);
      ps.push_back(&out_b);
      if (predict_previous) {
        for (Param* p : prev_decoder.parameters()) ps.push_back(p);
        ps.push_back(&prev_w);
        ps.push_back(&prev_b);
      }
      return ps;
    }
  };

  Model& model() const {
    if (!m_) throw ConfigError("skip-instructions encoder is not initialized");
    return *m_;
  }

  std::shared_ptr<Model> m_;
};

namespace detail {

/// Id sequences with start/end-of-recipe markers; empty instructions dropped.
inline std::vector<std::vector<std::vector<std::size_t>>> instruction_id_sequences(
    const std::vector<InstructionTokens>& recipes, const Vocabulary& vocab, std::size_t max_tokens,
    std::size_t* skipped) {
  std::vector<std::vector<std::vector<std::size_t>>> out;
  for (const auto& r : recipes) {
    std::vector<std::vector<std::size_t>> seq{{Vocabulary::kStartOfRecipe}};
    for (const auto& ins : r) {
      if (ins.empty()) {
        if (skipped) ++*skipped;
        continue;
      }
      auto ids = vocab.encode(ins);
      if (max_tokens && ids.size() > max_tokens) ids.resize(max_tokens);
      seq.push_back(std::move(ids));
    }
    if (seq.size() == 1) continue;
    seq.push_back({Vocabulary::kEndOfRecipe});
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace detail

inline SkipInstructionsEncoder train_skip_instructions(const std::vector<InstructionTokens>& recipes,
                                                       const SkipInstructionsConfig& cfg,
                                                       SkipInstructionsReport* report = nullptr) {
  if (cfg.batch_size == 0) throw ConfigError("skip-instructions: batch size must be positive");
  std::vector<std::vector<std::string>> all;
  for (const auto& r : recipes) all.insert(all.end(), r.begin(), r.end());
  SkipInstructionsEncoder enc(Vocabulary::build(all, cfg.min_count), cfg.embed_dim, cfg.dim, cfg.predict_previous,
                              cfg.seed);
  SkipInstructionsReport local;
  const auto seqs = detail::instruction_id_sequences(recipes, enc.vocabulary(), cfg.max_tokens, &local.skipped_empty);
  struct Pair {
    const std::vector<std::size_t>* source;
    const std::vector<std::size_t>* target;
    const std::vector<std::size_t>* previous;
  };
  std::vector<Pair> pairs;
  for (const auto& s : seqs) {
    for (std::size_t k = 0; k + 1 < s.size(); ++k) pairs.push_back({&s[k], &s[k + 1], k > 0 ? &s[k - 1] : nullptr});
  }
  if (pairs.empty()) throw EmptyInputError("skip-instructions: no instruction pairs to train on");
  local.pairs = pairs.size();

  Optimizer opt({.learning_rate = cfg.learning_rate});
  const auto params = enc.parameters();
  Rng rng(derive_seed(cfg.seed, 2));
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(pairs.begin(), pairs.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < pairs.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(pairs.size(), start + cfg.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      Optimizer::zero_grad(params);
      for (std::size_t k = start; k < end; ++k) {
        ad::Tape tape;
        ad::Var loss = enc.pair_loss(tape, *pairs[k].source, *pairs[k].target);
        total += loss.item();
        if (cfg.predict_previous && pairs[k].previous) {
          loss = ad::add(loss, enc.pair_loss(tape, *pairs[k].source, *pairs[k].previous, true));
        }
        tape.backward(ad::scale(loss, inv));
      }
      opt.step(params);
    }
    local.epoch_loss.push_back(total / static_cast<double>(pairs.size()));
  }
  if (report) *report = local;
  return enc;
}

/// Fraction of next-instruction tokens whose argmax prediction under teacher
/// forcing equals the gold token.
inline double next_token_accuracy(const SkipInstructionsEncoder& enc, const std::vector<InstructionTokens>& recipes,
                                  std::size_t max_tokens = 0) {
  const auto seqs = detail::instruction_id_sequences(recipes, enc.vocabulary(), max_tokens, nullptr);
  std::size_t hit = 0, total = 0;
  for (const auto& s : seqs) {
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
      ad::Tape tape;
      const auto logits = enc.decode_logits(tape, enc.encode(tape, s[k]), s[k + 1]);
      for (std::size_t t = 0; t < logits.size(); ++t) {
        const auto d = logits[t].value().data();
        hit += static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin()) == s[k + 1][t];
        ++total;
      }
    }
  }
  return total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

}  // namespace im2recipe::text
