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

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "im2recipe/synthetic/corpus.hpp"
#include "im2recipe/synthetic/tagged.hpp"
#include "im2recipe/text/extractor.hpp"
#include "im2recipe/text/skip_instructions.hpp"
#include "im2recipe/text/vocabulary.hpp"
#include "im2recipe/text/word2vec.hpp"

namespace im2recipe::text {
namespace {

TEST(Tokenize, LowercasesAndSplits) {
  EXPECT_EQ(tokenize("Mix 2 Cups, flour!"), (std::vector<std::string>{"mix", "2", "cups", "flour"}));
  EXPECT_TRUE(tokenize(" ,;").empty());
}

TEST(Vocabulary, SpecialIdsAreFixed) {
  Vocabulary v = Vocabulary::build({{"b", "a", "b"}});
  EXPECT_EQ(v.token(Vocabulary::kPad), "<pad>");
  EXPECT_EQ(v.token(Vocabulary::kUnknown), "<unk>");
  EXPECT_EQ(v.token(Vocabulary::kStartOfRecipe), "<sor>");
  EXPECT_EQ(v.token(Vocabulary::kEndOfRecipe), "<eor>");
  EXPECT_EQ(v.id("b"), 4u);
  EXPECT_EQ(v.id("a"), 5u);
  EXPECT_EQ(v.id("zzz"), Vocabulary::kUnknown);
}

TEST(Vocabulary, RoundTrip) {
  Vocabulary v = Vocabulary::build({{"olive_oil", "salt", "pepper", "salt"}});
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v.id(v.token(i)), i);
  std::stringstream ss;
  v.save(ss);
  EXPECT_EQ(Vocabulary::load(ss), v);
}

TEST(Vocabulary, LoadRequiresSpecials) {
  std::stringstream ss("0\t<pad>\n1\tsalt\n");
  EXPECT_THROW(Vocabulary::load(ss), ParseError);
}

TEST(Extractor, RuleFallback) {
  IngredientNameExtractor ex;
  EXPECT_FALSE(ex.trained());
  EXPECT_EQ(ex.extract("2 tbsp of olive oil"), "olive_oil");
  EXPECT_EQ(ex.extract("salt"), "salt");
  EXPECT_EQ(ex.extract("1 cup finely chopped fresh cilantro"), "cilantro");
  EXPECT_EQ(ex.extract("2 cups"), "<unk>");
  EXPECT_EQ(ex.extract(""), "<unk>");
}

TEST(Extractor, TrainedTaggerGeneralizes) {
  auto data = synthetic::tagged_ingredient_sentences(200, 11);
  std::vector<TaggedSentence> train(data.begin(), data.begin() + 160), held(data.begin() + 160, data.end());
  const auto ex = IngredientNameExtractor::train(train);
  std::size_t hit = 0, total = 0;
  for (const auto& s : held) {
    const auto p = ex.scores(s.tokens);
    for (std::size_t i = 0; i < p.size(); ++i) {
      hit += (p[i] > 0.5) == (s.labels[i] == 1);
      ++total;
    }
  }
  EXPECT_GE(static_cast<double>(hit) / static_cast<double>(total), 0.95);
  EXPECT_EQ(ex.extract("2 tbsp of olive oil"), "olive_oil");
}

TEST(Extractor, SaveLoadPreservesScores) {
  const auto ex = IngredientNameExtractor::train(synthetic::tagged_ingredient_sentences(40, 3), {.epochs = 2});
  const std::string prefix = ::testing::TempDir() + "extractor.ckpt";
  ex.save(prefix);
  const auto back = IngredientNameExtractor::load(prefix);
  const auto toks = tokenize("3 cups brown sugar, divided");
  EXPECT_EQ(ex.scores(toks), back.scores(toks));
}

TEST(Extractor, RejectsBadLabels) {
  EXPECT_THROW(IngredientNameExtractor::train({{{"salt"}, {2}}}), LabelError);
  EXPECT_THROW(IngredientNameExtractor::train({{{"salt", "x"}, {1}}}), LabelError);
}

std::vector<std::vector<std::string>> cooccurrence_corpus() {
  std::vector<std::vector<std::string>> r;
  for (int i = 0; i < 60; ++i) {
    if (i % 3 == 0) r.push_back({"a", "b"});
    if (i % 3 == 1) r.push_back({"c", "d"});
    if (i % 3 == 2) r.push_back({"e", "f"});
  }
  return r;
}

TEST(WordVectors, CooccurringTokensAreCloser) {
  const auto v = train_word_vectors(cooccurrence_corpus(), {.dim = 16, .negatives = 3, .epochs = 20});
  EXPECT_GT(linalg::cosine(v["a"], v["b"]), linalg::cosine(v["a"], v["c"]));
  EXPECT_GT(linalg::cosine(v["c"], v["d"]), linalg::cosine(v["c"], v["e"]));
}

TEST(WordVectors, NoPairsLeavesInitialization) {
  const auto init = train_word_vectors({{"salt"}}, {.dim = 8, .negatives = 0, .epochs = 0});
  const auto trained = train_word_vectors({{"salt"}}, {.dim = 8, .negatives = 0, .epochs = 10});
  EXPECT_EQ(init.matrix, trained.matrix);
}

TEST(WordVectors, TooFewTokensForNegatives) {
  EXPECT_THROW(train_word_vectors({{"a", "b", "c"}}, {.negatives = 5}), ConfigError);
  EXPECT_THROW(train_word_vectors(cooccurrence_corpus(), {.dim = 1}), ConfigError);
}

TEST(WordVectors, DeterministicUnderSeed) {
  const WordVectorConfig cfg{.dim = 8, .negatives = 2, .epochs = 3, .seed = 99};
  EXPECT_EQ(train_word_vectors(cooccurrence_corpus(), cfg).matrix, train_word_vectors(cooccurrence_corpus(), cfg).matrix);
}

TEST(WordVectors, FileRoundTrip) {
  const auto v = train_word_vectors(cooccurrence_corpus(), {.dim = 5, .negatives = 2, .epochs = 2});
  std::stringstream ss;
  v.save(ss);
  const auto back = IngredientVectors::load(ss);
  EXPECT_EQ(back.vocabulary, v.vocabulary);
  EXPECT_EQ(back.matrix, v.matrix);
}

TEST(SkipGram, GradientMatchesFiniteDifferences) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    // Five-token vocabulary: center, context, three negatives.
    Tensor vecs = normal_tensor({5, 4}, 0.7, rng);
    auto loss_at = [&](const Tensor& m) {
      return skipgram_term(m.row(0), m.row(1), {m.row(2), m.row(3), m.row(4)}).loss;
    };
    const SkipGramTerm t = skipgram_term(vecs.row(0), vecs.row(1), {vecs.row(2), vecs.row(3), vecs.row(4)});
    std::vector<double> analytic = t.d_center;
    analytic.insert(analytic.end(), t.d_context.begin(), t.d_context.end());
    for (const auto& d : t.d_negatives) analytic.insert(analytic.end(), d.begin(), d.end());
    double diff = 0, a2 = 0, n2 = 0;
    const double eps = 1e-5;
    for (std::size_t i = 0; i < vecs.size(); ++i) {
      Tensor up = vecs, down = vecs;
      up[i] += eps;
      down[i] -= eps;
      const double numeric = (loss_at(up) - loss_at(down)) / (2 * eps);
      diff += (numeric - analytic[i]) * (numeric - analytic[i]);
      a2 += analytic[i] * analytic[i];
      n2 += numeric * numeric;
    }
    EXPECT_LT(std::sqrt(diff) / std::max(std::sqrt(a2), std::sqrt(n2)), 1e-4);
  }
}

std::vector<InstructionTokens> instruction_tokens(const Corpus& c) {
  std::vector<InstructionTokens> out;
  for (const auto& r : c.recipes()) {
    InstructionTokens ins;
    for (const auto& s : r.instructions) ins.push_back(tokenize(s));
    out.push_back(std::move(ins));
  }
  return out;
}

TEST(SkipInstructions, LossDecreasesOverFirstEpochs) {
  const auto syn = synthetic::generate_synthetic({.recipes = 50, .categories = 5, .seed = 7});
  SkipInstructionsReport report;
  train_skip_instructions(instruction_tokens(syn.corpus), {.embed_dim = 16, .dim = 32, .epochs = 5}, &report);
  ASSERT_EQ(report.epoch_loss.size(), 5u);
  for (std::size_t e = 1; e < 5; ++e) EXPECT_LT(report.epoch_loss[e], report.epoch_loss[e - 1]);
}

TEST(SkipInstructions, MemorizesSmallCorpus) {
  const std::vector<InstructionTokens> corpus = {{tokenize("whisk the eggs and sugar"), tokenize("bake until golden")}};
  const auto enc = train_skip_instructions(corpus, {.embed_dim = 16, .dim = 32, .epochs = 60, .learning_rate = 1e-2});
  EXPECT_GT(next_token_accuracy(enc, corpus), 0.9);
}

TEST(SkipInstructions, FixedLengthEncoding) {
  const std::vector<InstructionTokens> corpus = {{tokenize("mix well"), tokenize("bake it")}};
  const auto enc = train_skip_instructions(corpus, {.embed_dim = 4, .dim = 6, .epochs = 1});
  EXPECT_EQ(enc.encode_instruction({"mix"}).size(), 6u);
  EXPECT_EQ(enc.encode_instruction(std::vector<std::string>(100, "bake")).size(), 6u);
  EXPECT_EQ(enc.encode_instruction({"never", "seen"}).size(), 6u);
  EXPECT_THROW(enc.encode_instruction({}), EmptyInputError);
}

TEST(SkipInstructions, DeterministicAndOrderSensitive) {
  const std::vector<InstructionTokens> corpus = {{tokenize("mix the flour well"), tokenize("bake it now")}};
  const auto enc = train_skip_instructions(corpus, {.embed_dim = 4, .dim = 6, .epochs = 2});
  const std::vector<std::string> a{"mix", "the", "flour", "well"}, b{"well", "flour", "the", "mix"};
  EXPECT_EQ(enc.encode_instruction(a), enc.encode_instruction(a));
  EXPECT_NE(enc.encode_instruction(a), enc.encode_instruction(b));
}

TEST(SkipInstructions, DecoderSeesOnlyEarlierGoldTokens) {
  const std::vector<InstructionTokens> corpus = {{tokenize("mix the flour well"), tokenize("bake it now please")}};
  const auto enc = train_skip_instructions(corpus, {.embed_dim = 4, .dim = 6, .epochs = 2});
  const std::vector<std::string> src{"mix", "the", "flour"};
  const std::vector<std::string> tgt{"bake", "it", "now", "please"};
  const auto base = enc.step_logits(src, tgt);
  for (std::size_t k = 0; k < tgt.size(); ++k) {
    auto changed = tgt;
    changed[k] = "flour";
    const auto out = enc.step_logits(src, changed);
    for (std::size_t t = 0; t <= k; ++t) {
      EXPECT_EQ(out[t], base[t]) << "step " << t << " saw token " << k;
    }
    if (k + 1 < tgt.size()) {
      EXPECT_NE(out[k + 1], base[k + 1]);
    }
  }
  const auto other = enc.step_logits({"bake"}, tgt);
  EXPECT_NE(other[0], base[0]);
}

TEST(SkipInstructions, EmptyInstructionsAreSkipped) {
  const std::vector<InstructionTokens> corpus = {{tokenize("mix"), {}, tokenize("bake")}, {{}, tokenize("stir")}};
  SkipInstructionsReport report;
  train_skip_instructions(corpus, {.embed_dim = 4, .dim = 4, .epochs = 1}, &report);
  EXPECT_EQ(report.skipped_empty, 2u);
  EXPECT_EQ(report.pairs, 5u);
}

TEST(SkipInstructions, CheckpointRoundTrip) {
  const std::vector<InstructionTokens> corpus = {{tokenize("mix the flour"), tokenize("bake it")}};
  const auto enc = train_skip_instructions(corpus, {.embed_dim = 4, .dim = 5, .epochs = 2, .predict_previous = true});
  const std::string prefix = ::testing::TempDir() + "skip.ckpt";
  enc.save(prefix);
  const auto back = SkipInstructionsEncoder::load(prefix);
  EXPECT_TRUE(back.has_previous_decoder());
  EXPECT_EQ(back.encode_instruction({"mix", "flour"}), enc.encode_instruction({"mix", "flour"}));
}

}  // namespace
}  // namespace im2recipe::text
