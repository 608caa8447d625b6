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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "im2recipe/pipeline.hpp"
#include "im2recipe/retrieval/categories.hpp"
#include "im2recipe/retrieval/evaluate.hpp"
#include "im2recipe/synthetic/corpus.hpp"

namespace im2recipe::retrieval {
namespace {

Tensor matrix(std::vector<std::vector<double>> rows) {
  Tensor t({rows.size(), rows.front().size()});
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), t.row(i).begin());
  return t;
}

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "p%04zu", i);
    out.emplace_back(buf);
  }
  return out;
}

// Independent oracle: sort candidate indices by (cosine desc, index asc) and
// read off the position of the true counterpart.
std::vector<std::size_t> brute_ranks(const Tensor& q, const Tensor& c) {
  const std::size_t n = q.rows();
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> s;
    for (std::size_t j = 0; j < n; ++j) {
      double d = 0, a = 0, b = 0;
      for (std::size_t k = 0; k < q.cols(); ++k) {
        d += q.at(i, k) * c.at(j, k);
        a += q.at(i, k) * q.at(i, k);
        b += c.at(j, k) * c.at(j, k);
      }
      s.emplace_back(-d / std::sqrt(a * b), j);
    }
    std::sort(s.begin(), s.end());
    for (std::size_t p = 0; p < n; ++p) {
      if (s[p].second == i) out[i] = p + 1;
    }
  }
  return out;
}

TEST(Rank, QueryEqualToCandidateIsFirst) {
  const Tensor c = matrix({{1, 0}, {0, 1}, {1, 1}});
  const std::vector<double> q{0, 1};
  EXPECT_EQ(rank(q, c).order.front(), 1u);
}

TEST(Rank, HandComputedOrder) {
  // cos(q, c0) = 0.6, cos(q, c1) = -1, cos(q, c2) = 0.8 for q = (1, 0).
  const Tensor c = matrix({{3, 4}, {-2, 0}, {4, 3}});
  const std::vector<double> q{1, 0};
  EXPECT_EQ(rank(q, c).order, (std::vector<std::size_t>{2, 0, 1}));
}

TEST(Rank, TiesFollowCandidateIndex) {
  const Tensor c = matrix({{0, 1}, {2, 0}, {0, 3}, {1, 0}});
  const std::vector<double> q{1, 0};
  EXPECT_EQ(rank(q, c).order, (std::vector<std::size_t>{1, 3, 0, 2}));
}

TEST(Rank, ZeroNormCandidatesExcludedAndCounted) {
  const Tensor c = matrix({{0, 0}, {1, 0}, {0, 0}, {0, 1}});
  const auto r = rank(std::vector<double>{1, 1}, c);
  EXPECT_EQ(r.excluded_zero_norm, 2u);
  EXPECT_EQ(r.order, (std::vector<std::size_t>{1, 3}));
  EXPECT_THROW(rank(std::vector<double>{0, 0}, c), DegenerateInputError);
}

TEST(Rank, OutputIsPermutation) {
  Rng rng(3);
  const Tensor c = normal_tensor({40, 5}, 1.0, rng);
  auto order = rank(normal_tensor({5}, 1.0, rng).storage(), c).order;
  std::sort(order.begin(), order.end());
  std::vector<std::size_t> expect(40);
  std::iota(expect.begin(), expect.end(), 0);
  EXPECT_EQ(order, expect);
}

TEST(Median, LowerAndMeanRules) {
  EXPECT_EQ(median_rank({4, 1, 3, 2}), 2.0);
  EXPECT_EQ(median_rank({4, 1, 3, 2}, MedianRule::kMean), 2.5);
  EXPECT_EQ(median_rank({5, 1, 3}), 3.0);
  EXPECT_THROW(median_rank({}), EmptyInputError);
}

TEST(Evaluate, IdenticalEmbeddingsArePerfect) {
  Rng rng(4);
  const Tensor e = normal_tensor({30, 6}, 1.0, rng);
  const auto rep = evaluate(e, e, ids(30), {.n = 20, .repeats = 3});
  EXPECT_EQ(rep.mean_medr, 1.0);
  EXPECT_EQ(rep.mean_r1, 1.0);
}

TEST(Evaluate, MatchesBruteForceOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + trial;
    const Tensor r = normal_tensor({n, 4}, 1.0, rng);
    const Tensor v = normal_tensor({n, 4}, 1.0, rng);
    for (auto dir : {QueryDirection::kIm2Recipe, QueryDirection::kRecipe2Im}) {
      const auto rep = evaluate(r, v, ids(n), {.n = n, .repeats = 1, .direction = dir});
      const auto expect = dir == QueryDirection::kIm2Recipe ? brute_ranks(v, r) : brute_ranks(r, v);
      EXPECT_EQ(rep.per_repeat[0].ranks, expect);
      EXPECT_EQ(rep.per_repeat[0].medr, median_rank(expect));
    }
  }
}

TEST(Evaluate, ReportInvariants) {
  Rng rng(6);
  const Tensor r = normal_tensor({60, 3}, 1.0, rng);
  const Tensor v = normal_tensor({60, 3}, 1.0, rng);
  const auto rep = evaluate(r, v, ids(60), {.n = 25, .repeats = 4});
  for (const auto& rr : rep.per_repeat) {
    EXPECT_EQ(rr.medr, median_rank(rr.ranks));
    EXPECT_LE(rr.r1, rr.r5);
    EXPECT_LE(rr.r5, rr.r10);
    EXPECT_GE(rr.medr, 1.0);
    EXPECT_LE(rr.medr, 25.0);
    EXPECT_EQ(rr.medr == 1.0, rr.r1 >= 0.5);
  }
}

TEST(Evaluate, InvariantToCommonRescaling) {
  Rng rng(7);
  const Tensor r = normal_tensor({40, 5}, 1.0, rng);
  const Tensor v = normal_tensor({40, 5}, 1.0, rng);
  Tensor r2 = r, v2 = v;
  for (auto& x : r2.storage()) x *= 3.5;
  for (auto& x : v2.storage()) x *= 3.5;
  const EvalConfig cfg{.n = 30, .repeats = 3};
  EXPECT_EQ(to_json(evaluate(r, v, ids(40), cfg)).dump(), to_json(evaluate(r2, v2, ids(40), cfg)).dump());
}

TEST(Evaluate, PoolShrinksToAvailablePairs) {
  Rng rng(8);
  const Tensor e = normal_tensor({12, 3}, 1.0, rng);
  const auto rep = evaluate(e, e, ids(12), {.n = 1000, .repeats = 2});
  EXPECT_TRUE(rep.pool_shrunk);
  EXPECT_EQ(rep.n, 12u);
  EXPECT_EQ(rep.requested_n, 1000u);
}

TEST(Evaluate, ConfigErrors) {
  Rng rng(9);
  const Tensor e = normal_tensor({5, 3}, 1.0, rng);
  EXPECT_THROW(evaluate(e, e, ids(5), {.n = 1}), ConfigError);
  EXPECT_THROW(evaluate(e, e, ids(5), {.n = 5, .repeats = 0}), ConfigError);
  EXPECT_THROW(evaluate(e, e, ids(4), {.n = 5}), DimensionError);
}

TEST(Evaluate, ZeroNormTrueCounterpartRanksLast) {
  Tensor r = matrix({{1, 0}, {0, 1}, {1, 1}});
  Tensor v = r;
  v.at(1, 0) = v.at(1, 1) = 0.0;
  const auto rep = evaluate(r, v, ids(3), {.n = 3, .repeats = 1});
  EXPECT_EQ(rep.per_repeat[0].ranks, (std::vector<std::size_t>{1, 3, 1}));
  EXPECT_GT(rep.zero_norm_warnings, 0u);
}

TEST(Evaluate, RandomEmbeddingsNearHalfPool) {
  Rng rng(10);
  const Tensor r = normal_tensor({1000, 16}, 1.0, rng);
  const Tensor v = normal_tensor({1000, 16}, 1.0, rng);
  const auto rep = evaluate(r, v, ids(1000), {.n = 1000, .repeats = 10});
  EXPECT_NEAR(rep.mean_medr, 500.0, 50.0);
}

TEST(Evaluate, SeededAndReproducible) {
  Rng rng(11);
  const Tensor r = normal_tensor({50, 4}, 1.0, rng);
  const Tensor v = normal_tensor({50, 4}, 1.0, rng);
  const EvalConfig cfg{.n = 20, .repeats = 3, .seed = 99};
  const auto a = evaluate(r, v, ids(50), cfg);
  const auto b = evaluate(r, v, ids(50), cfg);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_EQ(a.per_repeat[0].pairs.size(), 20u);
  EXPECT_TRUE(std::is_sorted(a.per_repeat[0].pairs.begin(), a.per_repeat[0].pairs.end()));
}

TEST(Report, HistogramAndTsv) {
  EXPECT_EQ(rank_histogram({1, 1, 3, 7, 600, 40}), (std::vector<std::size_t>{2, 1, 1, 1, 0, 0, 1}));
  Rng rng(12);
  const Tensor e = normal_tensor({10, 3}, 1.0, rng);
  const auto rep = evaluate(e, e, ids(10), {.n = 10, .repeats = 2});
  std::ostringstream out;
  write_tsv(out, rep);
  const std::string tsv = out.str();
  EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 3);
  const auto j = to_json(rep);
  EXPECT_EQ(j["median_rule"], "lower");
  EXPECT_EQ(j["per_repeat"].size(), 2u);
}

Recipe titled(std::string id, std::string title, Partition p = Partition::kTraining) {
  Recipe r;
  r.id = std::move(id);
  r.title = std::move(title);
  r.partition = p;
  return r;
}

TEST(Categories, HigherFrequencyCategoryWins) {
  std::vector<Recipe> rs;
  for (int i = 0; i < 500; ++i) rs.push_back(titled("a" + std::to_string(i), "Chicken Salad"));
  for (int i = 0; i < 300; ++i) rs.push_back(titled("b" + std::to_string(i), "Grilled Chicken"));
  rs.push_back(titled("z", "Grilled Chicken Salad"));
  CategoryConfig cfg;
  cfg.seeds = {};
  const auto a = build_categories(rs, cfg);
  ASSERT_GE(a.set.size(), 3u);
  EXPECT_EQ(a.set.names[1], "chicken salad");
  EXPECT_EQ(a.set.frequency[1], 501u);
  EXPECT_EQ(a.set.names[2], "grilled chicken");
  EXPECT_EQ(a.set.names[a.labels.back()], "chicken salad");
}

TEST(Categories, UnmatchedAndEmptyTitlesAreBackground) {
  CategorySet s;
  s.names.push_back("apple pie");
  s.frequency.push_back(4);
  EXPECT_EQ(assign_category(s, "Beef Stew"), kBackgroundClass);
  EXPECT_EQ(assign_category(s, ""), kBackgroundClass);
  EXPECT_EQ(assign_category(s, "Pineapple Pie"), kBackgroundClass);
  EXPECT_EQ(assign_category(s, "Mom's Apple Pie!"), 1u);
}

TEST(Categories, OnlyTrainingTitlesCount) {
  std::vector<Recipe> rs{titled("a", "Beef Stew"), titled("b", "Fish Tacos", Partition::kTest),
                         titled("c", "Fish Tacos", Partition::kValidation)};
  CategoryConfig cfg;
  cfg.seeds = {"fish tacos"};
  const auto a = build_categories(rs, cfg);
  EXPECT_EQ(std::count(a.set.names.begin(), a.set.names.end(), "fish tacos"), 0);
  EXPECT_EQ(a.labels[1], kBackgroundClass);
}

TEST(Categories, BlocklistFiltersBigrams) {
  std::vector<Recipe> rs{titled("a", "The Best Soup"), titled("b", "Soup 2 Go"), titled("c", "Lentil Soup")};
  CategoryConfig cfg;
  cfg.seeds = {};
  const auto a = build_categories(rs, cfg);
  const std::set<std::string> names(a.set.names.begin(), a.set.names.end());
  EXPECT_TRUE(names.contains("lentil soup"));
  EXPECT_FALSE(names.contains("the best"));
  EXPECT_FALSE(names.contains("soup 2"));
  EXPECT_FALSE(names.contains("best soup"));
  cfg.blocklist = {"("};
  EXPECT_THROW(build_categories(rs, cfg), ConfigError);
}

TEST(Categories, SeedsMatchedBySubstringAndNamesUnique) {
  std::vector<Recipe> rs{titled("a", "Spicy Apple Pie Bars"), titled("b", "Apple Pie"), titled("c", "Ramen")};
  CategoryConfig cfg;
  cfg.seeds = {"apple pie", "ramen", "pho"};
  const auto a = build_categories(rs, cfg);
  EXPECT_EQ(a.set.names[1], "apple pie");
  EXPECT_EQ(a.set.frequency[1], 2u);
  const std::set<std::string> uniq(a.set.names.begin(), a.set.names.end());
  EXPECT_EQ(uniq.size(), a.set.names.size());
  EXPECT_FALSE(uniq.contains("pho"));
  for (std::size_t c = 1; c < a.set.size(); ++c) EXPECT_GT(a.set.frequency[c], 0u);
  EXPECT_NEAR(a.coverage, 1.0, 1e-12);
}

TEST(Categories, JsonRoundTrip) {
  std::vector<Recipe> rs{titled("a", "Apple Pie"), titled("b", "Lentil Soup")};
  const auto set = build_categories(rs).set;
  const auto back = category_set_from_json(to_json(set));
  EXPECT_EQ(back.names, set.names);
  EXPECT_EQ(back.frequency, set.frequency);
  EXPECT_THROW(category_set_from_json(nlohmann::ordered_json::array()), ConfigError);
}

struct SmallSystem {
  synthetic::SyntheticCorpus syn;
  joint::Featurizer featurizer;
  joint::JointModel model;
};

SmallSystem small_system() {
  auto syn = synthetic::generate_synthetic({.recipes = 40, .categories = 4, .feature_dim = 8, .seed = 3});
  joint::Featurizer f;
  f.word_vectors = fit_word_vectors(syn.corpus, f.extractor, {.dim = 6, .epochs = 1}, 3);
  f.instructions = fit_skip_instructions(syn.corpus, {.embed_dim = 4, .dim = 6, .epochs = 1}, 3);
  joint::ModelDims dims{.ingredient_hidden = 4, .instruction_hidden = 4, .embed_dim = 5};
  dims = resolve_dims(dims, f, syn.corpus, 1);
  joint::JointModel m(dims, 3);
  return {std::move(syn), std::move(f), std::move(m)};
}

TEST(EvaluateExternal, SameCorpusReproducesEvaluate) {
  auto s = small_system();
  const EvalConfig cfg{.n = 20, .repeats = 2};
  const auto a = evaluate_system(s.model, s.featurizer, s.syn.corpus, std::nullopt, cfg);
  const auto b = evaluate_external(s.model, s.featurizer, s.syn.corpus, cfg);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(EvaluateExternal, EmptyCorpusIsConfigError) {
  auto s = small_system();
  EXPECT_THROW(evaluate_external(s.model, s.featurizer, Corpus{}, {.n = 2}), ConfigError);
}

TEST(EvaluateExternal, CategoryMatchedKeepsAtMostOnePairPerCategory) {
  auto s = small_system();
  const auto cats = build_categories(s.syn.corpus.recipes()).set;
  const auto pairs = joint::evaluation_pairs(s.syn.corpus, std::nullopt);
  const auto assignment = assign_categories(cats, s.syn.corpus.recipes());
  const auto classes = recipe_classes(s.syn.corpus, assignment);
  const auto matched = category_matched_pairs(pairs, classes, 5);
  std::set<std::size_t> seen;
  for (std::size_t r : matched.recipes) {
    EXPECT_NE(classes[r], kBackgroundClass);
    EXPECT_TRUE(seen.insert(classes[r]).second);
  }
  std::set<std::size_t> present;
  for (std::size_t r : pairs.recipes) {
    if (classes[r] != kBackgroundClass) present.insert(classes[r]);
  }
  EXPECT_EQ(seen, present);
  const auto rep = evaluate_external(s.model, s.featurizer, s.syn.corpus, {.n = 1000, .repeats = 1}, true, &cats);
  EXPECT_EQ(rep.n, matched.recipes.size());
}

}  // namespace
}  // namespace im2recipe::retrieval
