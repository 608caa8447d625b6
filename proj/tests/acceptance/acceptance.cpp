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


// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fail. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "im2recipe/analysis/embedding_space.hpp"
#include "im2recipe/core/lstm.hpp"
#include "im2recipe/corpus/dedup.hpp"
#include "im2recipe/corpus/io.hpp"
#include "im2recipe/joint/model.hpp"
#include "im2recipe/nutrition/nutrition.hpp"
#include "im2recipe/pipeline.hpp"
#include "im2recipe/retrieval/evaluate.hpp"
#include "im2recipe/synthetic/corpus.hpp"
#include "im2recipe/text/word2vec.hpp"

namespace im2recipe {
namespace {

using testing::gradient_relative_error;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ---- 1 ----------------------------------------------------------------------

constexpr int kGradInstances = 20;
constexpr double kGradTolerance = 1e-4;

struct GradTally {
  std::map<std::string, double> worst;
  void add(const std::string& op, double err) { worst[op] = std::max(worst[op], err); }
};

double skipgram_error(Rng& rng) {
  const Tensor vecs = normal_tensor({5, 4}, 0.7, rng);
  auto loss_at = [](const Tensor& m) { return text::skipgram_term(m.row(0), m.row(1), {m.row(2), m.row(3), m.row(4)}).loss; };
  const auto t = text::skipgram_term(vecs.row(0), vecs.row(1), {vecs.row(2), vecs.row(3), vecs.row(4)});
  std::vector<double> analytic = t.d_center;
  analytic.insert(analytic.end(), t.d_context.begin(), t.d_context.end());
  for (const auto& d : t.d_negatives) analytic.insert(analytic.end(), d.begin(), d.end());
  double diff = 0, a2 = 0, n2 = 0;
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    Tensor up = vecs, down = vecs;
    up[i] += 1e-5;
    down[i] -= 1e-5;
    const double numeric = (loss_at(up) - loss_at(down)) / 2e-5;
    diff += (numeric - analytic[i]) * (numeric - analytic[i]);
    a2 += analytic[i] * analytic[i];
    n2 += numeric * numeric;
  }
  return std::sqrt(diff) / std::max({std::sqrt(a2), std::sqrt(n2), 1e-12});
}

joint::RecipeFeatures random_features(Rng& rng, std::size_t n_ing, std::size_t n_ins, const joint::ModelDims& d) {
  joint::RecipeFeatures f;
  for (std::size_t i = 0; i < n_ing; ++i) f.ingredients.push_back(normal_tensor({d.ingredient_dim}, 1.0, rng).storage());
  for (std::size_t i = 0; i < n_ins; ++i) f.instructions.push_back(normal_tensor({d.instruction_dim}, 1.0, rng).storage());
  return f;
}

Outcome gradient_integrity() {
  const auto t0 = Clock::now();
  Rng rng(101);
  GradTally tally;
  for (int k = 0; k < kGradInstances; ++k) {
    {
      Param x("x", normal_tensor({3, 4}, 1.0, rng)), w("w", normal_tensor({5, 4}, 1.0, rng)),
          b("b", normal_tensor({5}, 1.0, rng));
      const Tensor probe = normal_tensor({3, 5}, 1.0, rng);
      Param* ps[] = {&x, &w, &b};
      tally.add("linear", gradient_relative_error(ps, [&](ad::Tape& t) {
        return ad::sum(ad::mul(ad::linear(t.param(x), t.param(w), t.param(b)), t.constant(probe)));
      }));
    }
    {
      LstmCellParams cell("cell", 3, 4, rng);
      for (Param* p : cell.parameters()) p->value = normal_tensor(p->value.shape(), 0.5, rng);
      Param x("x", normal_tensor({3}, 1.0, rng)), h("h", normal_tensor({4}, 1.0, rng)), c("c", normal_tensor({4}, 1.0, rng));
      const Tensor ph = normal_tensor({4}, 1.0, rng), pc = normal_tensor({4}, 1.0, rng);
      std::vector<Param*> ps = cell.parameters();
      ps.insert(ps.end(), {&x, &h, &c});
      tally.add("lstm step", gradient_relative_error(ps, [&](ad::Tape& t) {
        const auto s = lstm_step(t, cell, t.param(x), t.param(h), t.param(c));
        return ad::add(ad::dot(s.h, t.constant(ph)), ad::dot(s.c, t.constant(pc)));
      }));
    }
    {
      LstmCellParams fwd("fwd", 2, 3, rng), bwd("bwd", 2, 3, rng);
      std::vector<Param> xs;
      const std::size_t len = 1 + uniform_index(rng, 4);
      for (std::size_t i = 0; i < len; ++i) xs.emplace_back("x" + std::to_string(i), normal_tensor({2}, 1.0, rng));
      std::vector<Param*> ps = fwd.parameters();
      for (Param* p : bwd.parameters()) ps.push_back(p);
      for (auto& x : xs) ps.push_back(&x);
      const Tensor probe = normal_tensor({6}, 1.0, rng);
      tally.add("bi-lstm encode", gradient_relative_error(ps, [&](ad::Tape& t) {
        std::vector<ad::Var> in;
        for (auto& x : xs) in.push_back(t.param(x));
        return ad::dot(encode_sequence(t, fwd, &bwd, in, Direction::kBidirectional), t.constant(probe));
      }));
    }
    {
      Param a("a", normal_tensor({5}, 1.0, rng)), b("b", normal_tensor({5}, 1.0, rng));
      Param* ps[] = {&a, &b};
      tally.add("cosine", gradient_relative_error(ps, [&](ad::Tape& t) { return ad::cosine(t.param(a), t.param(b)); }));
    }
    {
      Param logits("l", normal_tensor({3, 5}, 2.0, rng));
      const std::vector<std::size_t> labels = {uniform_index(rng, 5), uniform_index(rng, 5), uniform_index(rng, 5)};
      Param* ps[] = {&logits};
      tally.add("softmax-ce", gradient_relative_error(
                                  ps, [&](ad::Tape& t) { return ad::softmax_cross_entropy(t.param(logits), labels); }));
    }
    {
      // Resample until the hinge is not within 1e-3 of its kink.
      Param r("r", Tensor({6})), v("v", Tensor({6}));
      const int y = bernoulli(rng, 0.5) ? 1 : -1;
      do {
        r.value = normal_tensor({6}, 1.0, rng);
        v.value = normal_tensor({6}, 1.0, rng);
      } while (y == -1 && std::abs(linalg::cosine(r.value.storage(), v.value.storage()) - 0.1) < 1e-3);
      Param* ps[] = {&r, &v};
      tally.add("cosine-margin", gradient_relative_error(ps, [&](ad::Tape& t) {
        return joint::cosine_margin_loss(t.param(r), t.param(v), y, 0.1);
      }));
    }
    tally.add("skip-gram", skipgram_error(rng));
    {
      const joint::ModelDims d{.ingredient_dim = 3, .instruction_dim = 4, .image_dim = 5, .ingredient_hidden = 2,
                               .instruction_hidden = 3, .embed_dim = 4, .classes = 3};
      joint::JointModel model(d, 200 + k);
      std::vector<joint::RecipeFeatures> recipes;
      std::vector<std::vector<double>> images;
      for (int i = 0; i < 3; ++i) {
        recipes.push_back(random_features(rng, 1 + uniform_index(rng, 3), 1 + uniform_index(rng, 2), d));
        images.push_back(normal_tensor({5}, 1.0, rng).storage());
      }
      const joint::PairBatch batch{{0, 0, 1, uniform_index(rng, 3), uniform_index(rng, 3)},
                                   {1, 2, -1, uniform_index(rng, 3), uniform_index(rng, 3)}};
      const joint::PairInputs in{&recipes, &images};
      ad::Tape probe;
      const double c = linalg::cosine(model.embed_recipe(probe, recipes[1]).value().storage(),
                                      model.embed_image(probe, images[2]).value().storage());
      const double margin = std::abs(c - 0.1) < 1e-3 ? 0.05 : 0.1;
      const auto ps = model.parameters();
      tally.add("joint loss", gradient_relative_error(ps, [&](ad::Tape& t) {
        return joint::total_loss(t, model, batch, in, {.margin = margin, .lambda = 0.02});
      }));
    }
  }
  Outcome out{true, ""};
  for (const auto& [op, err] : tally.worst) {
    out.pass = out.pass && err < kGradTolerance;
    out.detail += fmt("%s %.1e; ", op.c_str(), err);
  }
  const double secs = seconds_since(t0);
  out.pass = out.pass && secs < 120.0;
  out.detail += fmt("%d instances each, %.1fs", kGradInstances, secs);
  return out;
}

// ---- 2 ----------------------------------------------------------------------

double margin_loss(std::vector<double> r, std::vector<double> v, int y) {
  ad::Tape t;
  return joint::cosine_margin_loss(t.constant(Tensor::vector(std::move(r))), t.constant(Tensor::vector(std::move(v))), y,
                                   0.1)
      .item();
}

Outcome loss_identities() {
  std::vector<std::string> failed;
  // cos = 1, y = +1.
  if (margin_loss({1, 0}, {2, 0}, 1) != 0.0) failed.push_back("cos=1,y=+1");
  // cos = 0.3, y = -1. The subtraction 0.3 - 0.1 is not representable as 0.2,
  // so this is checked to within two ulps.
  if (std::abs(margin_loss({1, 0}, {0.3, std::sqrt(1 - 0.09)}, -1) - 0.2) > 2 * std::numeric_limits<double>::epsilon() * 0.2) {
    failed.push_back("cos=0.3,y=-1");
  }
  if (margin_loss({1, 0}, {0.05, std::sqrt(1 - 0.0025)}, -1) != 0.0) failed.push_back("cos=0.05,y=-1");

  // lambda = 0 against an independent sum of cosine terms.
  Rng rng(202);
  const joint::ModelDims d{.ingredient_dim = 3, .instruction_dim = 4, .image_dim = 5, .ingredient_hidden = 2,
                           .instruction_hidden = 3, .embed_dim = 4, .classes = 3};
  joint::JointModel model(d, 203);
  std::vector<joint::RecipeFeatures> recipes;
  std::vector<std::vector<double>> images;
  for (int i = 0; i < 4; ++i) {
    recipes.push_back(random_features(rng, 2, 2, d));
    images.push_back(normal_tensor({5}, 1.0, rng).storage());
  }
  const joint::PairBatch batch{{0, 0, 1, 1, 1}, {1, 2, -1, 0, 2}, {3, 3, 1, 2, 2}};
  ad::Tape t;
  const double total = joint::total_loss(t, model, batch, {&recipes, &images}, {.margin = 0.1, .lambda = 0.0}).item();
  double expect = 0;
  for (const auto& row : batch) {
    const auto r = model.embed_recipe(t, recipes[row.recipe]).value().storage();
    const auto v = model.embed_image(t, images[row.image]).value().storage();
    const double c = linalg::cosine(r, v);
    expect += row.y == 1 ? 1.0 - c : std::max(0.0, c - 0.1);
  }
  expect /= static_cast<double>(batch.size());
  if (std::abs(total - expect) > 1e-14) failed.push_back(fmt("lambda=0 (%.17g vs %.17g)", total, expect));

  const double weighted =
      joint::weighted_loss(t.constant(Tensor::vector({0.2})), t.constant(Tensor::vector({1.5})), 0.02).item();
  if (weighted != 0.23) failed.push_back(fmt("0.2+0.02*1.5=%.17g", weighted));

  Outcome out{failed.empty(), "3 margin cases, lambda=0 reduction, weighted 0.23"};
  for (const auto& f : failed) out.detail += "; failed " + f;
  return out;
}

// ---- 3 ----------------------------------------------------------------------

std::vector<std::string> pair_ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(fmt("p%05zu", i));
  return out;
}

Outcome random_anchor() {
  const auto t0 = Clock::now();
  Rng rng(303);
  const std::size_t total = 2000;
  const Tensor r = normal_tensor({total, 32}, 1.0, rng), v = normal_tensor({total, 32}, 1.0, rng);
  const auto rep = retrieval::evaluate(r, v, pair_ids(total), {.n = 1000, .repeats = 10, .seed = 304});
  const double secs = seconds_since(t0);
  return {std::abs(rep.mean_medr - 500.0) <= 50.0 && secs < 60.0,
          fmt("mean MedR %.1f over %zu repeats of N=%zu (target 500 +/- 50), %.1fs", rep.mean_medr, rep.repeats, rep.n,
              secs)};
}

// ---- 4 and 5 ----------------------------------------------------------------

const synthetic::SyntheticCorpus& acceptance_corpus() {
  static const auto syn = synthetic::generate_synthetic({.recipes = 500, .categories = 10, .seed = 7});
  return syn;
}

// Settings for the 500-recipe synthetic corpus. Loss weights and the stage
// schedule keep their library defaults.
PipelineConfig synthetic_config(std::uint64_t seed) {
  PipelineConfig cfg;
  cfg.seed = seed;
  cfg.train.positive_prob = 0.5;
  cfg.train.optimizer.learning_rate = 3e-3;
  cfg.train.patience = 40;
  cfg.train.max_epochs_per_stage = 300;
  return cfg;
}

retrieval::RetrievalReport pool_report(TrainedSystem& sys, const Corpus& corpus) {
  return evaluate_system(sys.model, sys.featurizer, corpus, std::nullopt, {.n = 500, .repeats = 1});
}

Outcome synthetic_end_to_end() {
  const auto t0 = Clock::now();
  const auto& syn = acceptance_corpus();
  auto sys = train_pipeline(syn.corpus, synthetic_config(kDefaultSeed));
  const auto rep = pool_report(sys, syn.corpus);
  const double secs = seconds_since(t0);
  return {rep.mean_medr <= 5.0 && rep.mean_r1 >= 0.5 && secs <= 900.0,
          fmt("MedR %.1f, R@1 %.3f, R@5 %.3f, R@10 %.3f on a %zu-item pool; %zu epochs, %.0fs", rep.mean_medr,
              rep.mean_r1, rep.mean_r5, rep.mean_r10, rep.n, sys.log.epochs.size(), secs)};
}

// A shorter schedule with smaller encoders so ten trainings fit the budget.
PipelineConfig trend_config(std::uint64_t seed, double lambda) {
  PipelineConfig cfg = synthetic_config(seed);
  cfg.train.loss.lambda = lambda;
  cfg.train.patience = 15;
  cfg.train.max_epochs_per_stage = 80;
  cfg.dims.embed_dim = 64;
  cfg.dims.ingredient_hidden = 32;
  cfg.dims.instruction_hidden = 32;
  return cfg;
}

Outcome regularization_trend() {
  const auto t0 = Clock::now();
  const auto& syn = acceptance_corpus();
  double with = 0, without = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto a = train_pipeline(syn.corpus, trend_config(seed, 0.02));
    auto b = train_pipeline(syn.corpus, trend_config(seed, 0.0));
    const double ma = pool_report(a, syn.corpus).mean_medr, mb = pool_report(b, syn.corpus).mean_medr;
    with += ma;
    without += mb;
    per_seed += fmt(" %g/%g", ma, mb);
  }
  return {with <= without, fmt("mean MedR lambda=0.02 %.1f vs lambda=0 %.1f (per seed%s), %.0fs", with / 5,
                               without / 5, per_seed.c_str(), seconds_since(t0))};
}

// ---- 6 ----------------------------------------------------------------------

double oracle_median(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  return static_cast<double>(v[(v.size() - 1) / 2]);
}

Outcome retrieval_oracle() {
  Rng rng(606);
  int agree = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t total = 2 + uniform_index(rng, 70);
    const std::size_t n = std::min<std::size_t>(total, 2 + uniform_index(rng, 49));
    const std::size_t dim = 1 + uniform_index(rng, 6);
    Tensor r = normal_tensor({total, dim}, 1.0, rng), v = normal_tensor({total, dim}, 1.0, rng);
    // Coarse values so exact cosine ties occur.
    if (trial % 4 == 0) {
      for (auto& x : r.storage()) x = std::round(x);
      for (auto& x : v.storage()) x = std::round(x);
    }
    const auto ids = pair_ids(total);
    const auto dir = trial % 2 ? retrieval::QueryDirection::kRecipe2Im : retrieval::QueryDirection::kIm2Recipe;
    const auto rep = retrieval::evaluate(r, v, ids, {.n = n, .repeats = 1, .direction = dir, .seed = 700u + trial});
    const auto& rr = rep.per_repeat.at(0);
    std::vector<std::size_t> rows;
    for (const auto& id : rr.pairs) rows.push_back(std::stoul(id.substr(1)));
    const Tensor& q = dir == retrieval::QueryDirection::kIm2Recipe ? v : r;
    const Tensor& c = dir == retrieval::QueryDirection::kIm2Recipe ? r : v;
    // Rank = 1 + candidates strictly closer + tied candidates earlier in the
    // pool; a zero-norm query or counterpart ranks last.
    auto cosine = [&](std::size_t a, std::size_t b) {
      double d = 0, na = 0, nb = 0;
      for (std::size_t k = 0; k < dim; ++k) {
        d += q.at(a, k) * c.at(b, k);
        na += q.at(a, k) * q.at(a, k);
        nb += c.at(b, k) * c.at(b, k);
      }
      return std::pair{d / (std::sqrt(na) * std::sqrt(nb)), na > 0 && nb > 0};
    };
    std::vector<std::size_t> ranks;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto [own, ok] = cosine(rows[i], rows[i]);
      if (!ok) {
        ranks.push_back(rows.size());
        continue;
      }
      std::size_t rank = 1;
      for (std::size_t j = 0; j < rows.size(); ++j) {
        if (j == i) continue;
        const auto [s, valid] = cosine(rows[i], rows[j]);
        if (valid && (s > own || (s == own && j < i))) ++rank;
      }
      ranks.push_back(rank);
    }
    auto recall = [&](std::size_t k) {
      return static_cast<double>(std::count_if(ranks.begin(), ranks.end(), [&](std::size_t x) { return x <= k; })) /
             static_cast<double>(ranks.size());
    };
    const bool same = rows.size() == n && std::is_sorted(rr.pairs.begin(), rr.pairs.end()) && rr.ranks == ranks &&
                      rr.medr == oracle_median(ranks) && rr.r1 == recall(1) && rr.r5 == recall(5) &&
                      rr.r10 == recall(10);
    agree += same;
  }
  return {agree == 100, fmt("%d/100 random cases match the brute-force ranks, MedR and R@K exactly", agree)};
}

// ---- 7 ----------------------------------------------------------------------

Outcome dedup_guarantees() {
  Rng rng(707);
  int violations = 0, idempotence = 0, exact_survivors = 0, trials = 100;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<ImageRecord> ims;
    std::vector<Partition> parts;
    const std::size_t n = 20 + uniform_index(rng, 40);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> f = normal_tensor({4}, 1.0, rng).storage();
      if (i > 0 && bernoulli(rng, 0.35)) {
        f = ims[uniform_index(rng, ims.size())].feature;
        if (bernoulli(rng, 0.5)) {
          for (auto& x : f) x += 0.05 * (uniform01(rng) - 0.5);
        }
      }
      ims.push_back({fmt("img%04zu", i), fmt("r%zu", uniform_index(rng, 10)), f, ImageSource::kSite});
      parts.push_back(static_cast<Partition>(uniform_index(rng, 3)));
    }
    const double near = 0.02 + 0.1 * uniform01(rng);
    const DedupConfig cfg{.near_threshold = near,
                          .cross_partition_threshold = near + 0.3 * uniform01(rng),
                          .normalize = trial % 2 == 0};
    const auto res = dedup_images(ims, parts, cfg);
    std::map<std::string, Partition> part_of;
    for (std::size_t i = 0; i < n; ++i) part_of[ims[i].image_id] = parts[i];
    std::vector<Partition> kept_parts;
    for (const auto& im : res.kept) kept_parts.push_back(part_of.at(im.image_id));
    for (std::size_t a = 0; a < res.kept.size(); ++a) {
      for (std::size_t b = a + 1; b < res.kept.size(); ++b) {
        exact_survivors += res.kept[a].feature == res.kept[b].feature;
        if (kept_parts[a] != kept_parts[b] &&
            dedup_distance(res.kept[a].feature, res.kept[b].feature, cfg) < cfg.cross_partition_threshold) {
          ++violations;
        }
      }
    }
    const auto again = dedup_images(res.kept, kept_parts, cfg);
    idempotence += again.kept == res.kept && again.report.removed_count() == 0;
  }
  return {violations == 0 && exact_survivors == 0 && idempotence == trials,
          fmt("%d trials: %d cross-partition pairs under threshold, %d surviving exact duplicates, %d/%d idempotent",
              trials, violations, exact_survivors, idempotence, trials)};
}

// ---- 8 ----------------------------------------------------------------------

Outcome nutrition_pipeline() {
  using namespace nutrition;
  std::vector<std::string> failed;
  auto expect_parse = [&](const char* s, std::int64_t qty, std::optional<Unit> unit, const char* name) {
    const auto p = parse_ingredient(s);
    if (!p || p->unit != unit || p->name != name || (unit && p->quantity != Rational{qty, 1})) failed.push_back(s);
  };
  expect_parse("2 cups of milk", 2, Unit::kCup, "milk");
  expect_parse("4 teaspoons of honey", 4, Unit::kTeaspoon, "honey");
  expect_parse("a bunch of cilantro", 0, std::nullopt, "cilantro");

  std::istringstream tsv(
      "name\tenergy\tprotein\tsugar\tfat\tsaturates\tsalt\n"
      "milk\t61\t3.15\t5.05\t3.25\t1.87\t0.1\n"
      "sugar\t387\t0\t99.8\t0\t0\t0\n"
      "butter\t717\t0.85\t0.06\t81.1\t51.4\t1.6\n"
      "flour\t364\t10.3\t0.27\t0.98\t0.16\t0.005\n"
      "salt\t0\t0\t0\t0\t0\t97\n");
  const auto table = NutrientTable::read_tsv(tsv);
  const auto conversions = UnitConversions::defaults();
  const IngredientLexicon lexicon({"milk", "sugar", "butter", "flour", "salt"});
  const NutritionContext ctx{&table, &conversions, &lexicon, {}};

  Rng rng(808);
  const std::vector<std::string> units = {"cup", "tbsp", "teaspoons", "g", "kg", "ounces", "pinch", "pound"};
  const std::vector<std::string> foods = {"milk", "sugar", "butter", "flour", "salt"};
  const std::vector<std::string> qty = {"1", "2", "1/2", "3/4", "1 1/2", "0.5", "12"};
  auto sentence = [&] {
    return qty[uniform_index(rng, qty.size())] + " " + units[uniform_index(rng, units.size())] + " " +
           foods[uniform_index(rng, foods.size())];
  };
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * (1.0 + std::abs(a)); };
  int additive = 0, monotone = 0, incomplete = 0;
  // Each of these foods has the highest density of its nutrient in the table,
  // so adding it can only raise that nutrient per 100 g.
  const std::vector<std::pair<std::string, double NutrientValues::*>> densest = {
      {"1 cup sugar", &NutrientValues::sugar},
      {"1 cup butter", &NutrientValues::fat},
      {"1 cup butter", &NutrientValues::saturates},
      {"1 tbsp salt", &NutrientValues::salt}};
  auto light_of = [](const TrafficLights& l, double NutrientValues::* m) {
    if (m == &NutrientValues::sugar) return l.sugar;
    if (m == &NutrientValues::fat) return l.fat;
    if (m == &NutrientValues::saturates) return l.saturates;
    return l.salt;
  };
  const std::vector<std::string> unmeasurable = {"a bunch of cilantro", "2 slices butter", "1 loaf of flour",
                                                 "salt to taste", "3 sprigs milk"};
  for (int k = 0; k < 1000; ++k) {
    std::vector<std::string> a, b;
    for (std::size_t i = 0, m = 1 + uniform_index(rng, 5); i < m; ++i) a.push_back(sentence());
    for (std::size_t i = 0, m = 1 + uniform_index(rng, 5); i < m; ++i) b.push_back(sentence());
    auto ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    const auto ra = std::get<NutritionRecord>(compute_nutrition(a, ctx));
    const auto rb = std::get<NutritionRecord>(compute_nutrition(b, ctx));
    const auto rab = std::get<NutritionRecord>(compute_nutrition(ab, ctx));
    additive += close(rab.mass_g, ra.mass_g + rb.mass_g) && close(rab.total.energy, ra.total.energy + rb.total.energy) &&
                close(rab.total.protein, ra.total.protein + rb.total.protein) &&
                close(rab.total.sugar, ra.total.sugar + rb.total.sugar) &&
                close(rab.total.fat, ra.total.fat + rb.total.fat) &&
                close(rab.total.saturates, ra.total.saturates + rb.total.saturates) &&
                close(rab.total.salt, ra.total.salt + rb.total.salt);

    const auto& [extra, member] = densest[uniform_index(rng, densest.size())];
    auto more = a;
    more.push_back(extra);
    const auto rm = std::get<NutritionRecord>(compute_nutrition(more, ctx));
    monotone += rm.per100g.*member >= ra.per100g.*member - 1e-12 &&
                static_cast<int>(light_of(rm.lights, member)) >= static_cast<int>(light_of(ra.lights, member));

    auto bad = a;
    bad.insert(bad.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, bad.size() + 1)),
               unmeasurable[uniform_index(rng, unmeasurable.size())]);
    incomplete += std::holds_alternative<Incomplete>(compute_nutrition(bad, ctx));
  }
  const bool units_ok = kUnitCount == 20 && !unit_from_string("bunch") && !unit_from_string("slice") &&
                        !unit_from_string("loaf");
  return {failed.empty() && additive == 1000 && monotone == 1000 && incomplete == 1000 && units_ok,
          fmt("parse examples %zu/3; additive %d/1000; monotone %d/1000; incomplete %d/1000; %zu-unit table%s",
              3 - failed.size(), additive, monotone, incomplete, kUnitCount, units_ok ? "" : " (unit set wrong)")};
}

// ---- 9 ----------------------------------------------------------------------

Outcome analogy_oracle() {
  using namespace analysis;
  const std::vector<std::string> attrs = {"chicken", "beef", "tofu", "shrimp", "pork", "lentil"};
  const std::vector<std::string> dishes = {"pizza", "salad", "soup", "tacos", "curry", "pasta"};
  Rng rng(909);
  int hits = 0, endpoints = 0;
  for (int trial = 0; trial < 100; ++trial) {
    // Each item is attribute + dish + noise, titled "<attribute> <dish>".
    const std::size_t dim = 16;
    std::vector<std::vector<double>> a, d;
    for (std::size_t i = 0; i < attrs.size(); ++i) a.push_back(normal_tensor({dim}, 1.0, rng).storage());
    for (std::size_t i = 0; i < dishes.size(); ++i) d.push_back(normal_tensor({dim}, 1.0, rng).storage());
    EmbeddingTable table;
    std::vector<double> flat;
    for (std::size_t i = 0; i < attrs.size(); ++i) {
      for (std::size_t j = 0; j < dishes.size(); ++j) {
        for (std::size_t c = 0, copies = 1 + uniform_index(rng, 3); c < copies; ++c) {
          for (std::size_t k = 0; k < dim; ++k) flat.push_back(a[i][k] + d[j][k] + 0.05 * std::normal_distribution<>()(rng));
          table.ids.push_back(fmt("item%zu", table.ids.size()));
          table.titles.push_back(attrs[i] + " " + dishes[j]);
        }
      }
    }
    table.embeddings = Tensor({table.ids.size(), dim}, std::move(flat));

    const std::size_t x = uniform_index(rng, 6), p = uniform_index(rng, 6);
    std::size_t w = uniform_index(rng, 5), q = uniform_index(rng, 5);
    w += w >= x;
    q += q >= p;
    // (x p) - (w p) + (w q) lands on (x q).
    const auto ca = concept_vector(table, attrs[x] + " " + dishes[p]);
    const auto cb = concept_vector(table, attrs[w] + " " + dishes[p]);
    const auto cc = concept_vector(table, attrs[w] + " " + dishes[q]);
    const auto res = analogy(table, ca, cb, cc, 1);
    hits += table.titles[res.neighbors.at(0).item] == attrs[x] + " " + dishes[q];

    const auto c1 = concept_vector(table, attrs[uniform_index(rng, 6)]);
    const auto c2 = concept_vector(table, dishes[uniform_index(rng, 6)]);
    auto same = [](const std::vector<Neighbor>& u, const std::vector<Neighbor>& v) {
      return u.size() == v.size() && std::equal(u.begin(), u.end(), v.begin(), [](const Neighbor& s, const Neighbor& t) {
               return s.item == t.item && s.cosine == t.cosine;
             });
    };
    endpoints += same(interpolate(table, c1, c2, 1.0, 10), nearest(table, c1.mean, 10)) &&
                 same(interpolate(table, c1, c2, 0.0, 10), nearest(table, c2.mean, 10));
  }
  return {hits >= 95 && endpoints == 100,
          fmt("analogy target at rank 1 in %d/100 constructions; interpolation endpoints exact in %d/100", hits,
              endpoints)};
}

// ---- 10 ---------------------------------------------------------------------

Outcome determinism() {
  auto run = [] {
    const auto syn = synthetic::generate_synthetic({.recipes = 120, .categories = 6, .seed = 7});
    std::ostringstream corpus_bytes;
    corpus_io::write_layer1(corpus_bytes, syn.corpus.recipes());
    corpus_io::write_layer2(corpus_bytes, syn.corpus.images());
    PipelineConfig cfg;
    cfg.seed = 7;
    cfg.word_vectors.dim = 16;
    cfg.skip.dim = 16;
    cfg.skip.epochs = 2;
    cfg.dims = {.ingredient_hidden = 8, .instruction_hidden = 8, .embed_dim = 16};
    cfg.train.max_epochs_per_stage = 3;
    cfg.train.patience = 2;
    auto sys = train_pipeline(syn.corpus, cfg);
    const auto rep = evaluate_system(sys.model, sys.featurizer, syn.corpus, Partition::kTest, {.n = 1000, .repeats = 10});
    return std::pair{corpus_bytes.str(), retrieval::to_json(rep).dump()};
  };
  const auto first = run(), second = run();
  return {first == second, fmt("corpus %s, RetrievalReport %s (%zu bytes)", first.first == second.first ? "identical" : "differs",
                               first.second == second.second ? "identical" : "differs", first.second.size())};
}

}  // namespace
}  // namespace im2recipe

int main(int argc, char** argv) {
  using namespace im2recipe;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient integrity", gradient_integrity},  {"loss identities", loss_identities},
      {"random-ranking anchor", random_anchor},     {"synthetic end-to-end", synthetic_end_to_end},
      {"regularization trend", regularization_trend}, {"retrieval oracle", retrieval_oracle},
      {"dedup guarantees", dedup_guarantees},       {"nutrition pipeline", nutrition_pipeline},
      {"analogy oracle", analogy_oracle},           {"determinism", determinism},
  };
  std::set<std::size_t> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoul(argv[i]));
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!selected.empty() && !selected.contains(k + 1)) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
