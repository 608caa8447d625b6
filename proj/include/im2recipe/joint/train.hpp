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
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"

#include "im2recipe/core/optim.hpp"
#include "im2recipe/corpus/recipe.hpp"
#include "im2recipe/joint/model.hpp"
#include "im2recipe/retrieval/evaluate.hpp"

namespace im2recipe::joint {

struct TrainConfig {
  LossWeights loss;
  double positive_prob = 0.2;
  std::size_t batch_size = 32;
  OptimizerConfig optimizer;
  std::size_t first_stage = 1;
  std::size_t last_stage = 3;
  /// Epochs without a better validation score before the stage ends.
  std::size_t patience = 3;
  std::size_t max_epochs_per_stage = 20;
  std::size_t val_pool = 500;
  std::size_t val_repeats = 3;
  std::uint64_t seed = kDefaultSeed;

  void validate() const {
    if (!(loss.margin > 0.0 && loss.margin < 1.0)) throw ConfigError("margin must be in (0,1)");
    if (!(loss.lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
    if (!(positive_prob > 0.0 && positive_prob <= 1.0)) throw ConfigError("positive probability must be in (0,1]");
    if (batch_size == 0) throw ConfigError("batch size must be positive");
    if (first_stage < 1 || last_stage > 3 || first_stage > last_stage) throw ConfigError("stages must satisfy 1 <= first <= last <= 3");
    if (patience == 0 || max_epochs_per_stage == 0) throw ConfigError("patience and max epochs must be positive");
    if (val_pool < 2 || val_repeats == 0) throw ConfigError("validation pool must be >= 2 with >= 1 repeat");
  }
};

/// Stage 1 freezes the image projection; stage 2 freezes the recipe side and
/// the classifier; stage 3 frees everything.
inline void apply_stage(JointModel& m, std::size_t stage) {
  for (Param* p : m.parameters()) p->frozen = false;
  if (stage == 1) {
    for (Param* p : m.image_side()) p->frozen = true;
  } else if (stage == 2) {
    for (Param* p : m.recipe_side()) p->frozen = true;
    m.classifier_w.frozen = true;
  }
}

/// Featurized corpus split into a training pair pool and validation pairs.
struct TrainingData {
  std::vector<RecipeFeatures> recipes;
  std::vector<std::vector<double>> images;
  PairPool train;
  std::vector<std::size_t> val_recipes;
  std::vector<std::size_t> val_images;
  std::vector<std::string> val_ids;
  bool validation_from_training = false;

  PairInputs inputs() const { return {&recipes, &images}; }
};

/// Each recipe's lowest-id image forms its evaluation pair.
struct EvalPairs {
  std::vector<std::size_t> recipes;
  std::vector<std::size_t> images;
  std::vector<std::string> ids;
};

inline EvalPairs evaluation_pairs(const Corpus& corpus, std::optional<Partition> partition) {
  EvalPairs out;
  for (std::size_t r = 0; r < corpus.recipes().size(); ++r) {
    const auto& rec = corpus.recipes()[r];
    if (partition && rec.partition != *partition) continue;
    const auto ims = corpus.images_of(r);
    if (ims.empty()) continue;
    out.recipes.push_back(r);
    out.images.push_back(ims.front());
    out.ids.push_back(rec.id);
  }
  return out;
}

/// `classes[r]` is the class label of corpus recipe r.
inline TrainingData make_training_data(const Corpus& corpus, std::vector<RecipeFeatures> features,
                                       const std::vector<std::size_t>& classes) {
  if (features.size() != corpus.recipes().size() || classes.size() != corpus.recipes().size()) {
    throw DimensionError("training data: one feature set and class per recipe required");
  }
  TrainingData d;
  d.recipes = std::move(features);
  for (const auto& im : corpus.images()) d.images.push_back(im.feature);
  for (std::size_t r = 0; r < corpus.recipes().size(); ++r) {
    if (corpus.recipes()[r].partition != Partition::kTraining) continue;
    const auto ims = corpus.images_of(r);
    if (ims.empty()) continue;
    d.train.recipes.push_back(r);
    d.train.images.push_back(ims);
    d.train.classes.push_back(classes[r]);
  }
  d.train.check();
  EvalPairs val = evaluation_pairs(corpus, Partition::kValidation);
  if (val.recipes.size() < 2) {
    val = evaluation_pairs(corpus, Partition::kTraining);
    d.validation_from_training = true;
  }
  d.val_recipes = std::move(val.recipes);
  d.val_images = std::move(val.images);
  d.val_ids = std::move(val.ids);
  return d;
}

/// Stacks embeddings of the given recipes and images into [n, d] matrices.
inline std::pair<Tensor, Tensor> embed_pairs(JointModel& m, const std::vector<RecipeFeatures>& recipes,
                                             const std::vector<std::vector<double>>& images,
                                             const std::vector<std::size_t>& recipe_rows,
                                             const std::vector<std::size_t>& image_rows) {
  const std::size_t n = recipe_rows.size(), d = m.dims().embed_dim;
  Tensor re({n, d}), im({n, d});
  for (std::size_t k = 0; k < n; ++k) {
    const auto r = m.recipe_embedding(recipes.at(recipe_rows[k]));
    const auto v = m.image_embedding(images.at(image_rows[k]));
    std::copy(r.begin(), r.end(), re.row(k).begin());
    std::copy(v.begin(), v.end(), im.row(k).begin());
  }
  return {std::move(re), std::move(im)};
}

struct ValidationScore {
  double medr = 0.0;
  double r1 = 0.0;

  /// Lower MedR wins; equal MedR falls back to higher R@1.
  bool better_than(const ValidationScore& o) const { return medr < o.medr || (medr == o.medr && r1 > o.r1); }
};

inline ValidationScore validation_score(JointModel& m, const TrainingData& d, const TrainConfig& cfg) {
  const auto [re, im] = embed_pairs(m, d.recipes, d.images, d.val_recipes, d.val_images);
  retrieval::EvalConfig ec;
  ec.n = std::min(cfg.val_pool, d.val_recipes.size());
  ec.repeats = cfg.val_repeats;
  ec.seed = derive_seed(cfg.seed, 17);
  const auto rep = retrieval::evaluate(re, im, d.val_ids, ec);
  return {rep.mean_medr, rep.mean_r1};
}

struct EpochRecord {
  std::size_t epoch = 0;
  std::size_t stage = 0;
  double train_loss = 0.0;
  double val_medr = 0.0;
  double val_r1 = 0.0;
  std::uint64_t seed = 0;
  /// Set when this epoch ended its stage, e.g. "plateau" or "max_epochs".
  std::string event;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  double initial_medr = 0.0;
  double best_medr = 0.0;
  double best_r1 = 0.0;
  std::size_t best_epoch = 0;
  bool validation_from_training = false;
};

inline nlohmann::ordered_json to_json(const EpochRecord& e) {
  nlohmann::ordered_json j;
  j["epoch"] = e.epoch;
  j["stage"] = e.stage;
  j["train_loss"] = e.train_loss;
  j["val_medr"] = e.val_medr;
  j["val_r1"] = e.val_r1;
  j["seed"] = e.seed;
  if (!e.event.empty()) j["event"] = e.event;
  return j;
}

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Runs stages first_stage..last_stage. A stage ends after `patience` epochs
/// without a better validation score, or after max_epochs_per_stage;
/// the best weights seen so far are restored before the next stage and at
/// the end. A non-finite loss or gradient restores the best weights and
/// rethrows TrainingDivergenceError.
inline TrainLog train_joint(JointModel& model, const TrainingData& data, const TrainConfig& cfg,
                            const EpochCallback& on_epoch = {}) {
  cfg.validate();
  data.train.check();
  const auto params = model.parameters();
  auto snapshot = [&] {
    std::vector<Tensor> s;
    for (const Param* p : params) s.push_back(p->value);
    return s;
  };
  auto restore = [&](const std::vector<Tensor>& s) {
    for (std::size_t k = 0; k < params.size(); ++k) params[k]->value = s[k];
  };

  TrainLog log;
  log.validation_from_training = data.validation_from_training;
  ValidationScore best_score = validation_score(model, data, cfg);
  log.initial_medr = best_score.medr;
  log.best_medr = best_score.medr;
  log.best_r1 = best_score.r1;
  std::vector<Tensor> best = snapshot();

  Optimizer opt(cfg.optimizer);
  Rng rng(derive_seed(cfg.seed, 23));
  const PairInputs inputs = data.inputs();
  std::vector<std::size_t> slots(data.train.recipes.size());
  std::size_t epoch = 0;
  for (std::size_t stage = cfg.first_stage; stage <= cfg.last_stage; ++stage) {
    apply_stage(model, stage);
    std::size_t stale = 0;
    for (std::size_t e = 0; e < cfg.max_epochs_per_stage; ++e) {
      ++epoch;
      std::iota(slots.begin(), slots.end(), 0);
      std::shuffle(slots.begin(), slots.end(), rng);
      double loss_sum = 0.0;
      std::size_t batches = 0;
      for (std::size_t start = 0; start < slots.size(); start += cfg.batch_size) {
        const std::size_t end = std::min(slots.size(), start + cfg.batch_size);
        const PairBatch batch = sample_pairs(
            data.train, std::span<const std::size_t>(slots).subspan(start, end - start), cfg.positive_prob, rng);
        Optimizer::zero_grad(params);
        ad::Tape tape;
        const ad::Var loss = total_loss(tape, model, batch, inputs, cfg.loss);
        try {
          if (!std::isfinite(loss.item())) throw TrainingDivergenceError("non-finite training loss");
          tape.backward(loss);
          opt.step(params);
        } catch (const TrainingDivergenceError& err) {
          restore(best);
          apply_stage(model, 3);
          throw TrainingDivergenceError(std::string(err.what()) + " at epoch " + std::to_string(epoch) +
                                        " (stage " + std::to_string(stage) + "); best weights restored");
        }
        loss_sum += loss.item();
        ++batches;
      }
      EpochRecord rec;
      rec.epoch = epoch;
      rec.stage = stage;
      rec.train_loss = loss_sum / static_cast<double>(batches);
      const ValidationScore score = validation_score(model, data, cfg);
      rec.val_medr = score.medr;
      rec.val_r1 = score.r1;
      rec.seed = cfg.seed;
      if (score.better_than(best_score)) {
        best_score = score;
        log.best_medr = score.medr;
        log.best_r1 = score.r1;
        log.best_epoch = epoch;
        best = snapshot();
        stale = 0;
      } else {
        ++stale;
      }
      const bool plateau = stale >= cfg.patience;
      const bool last = e + 1 == cfg.max_epochs_per_stage;
      if (plateau) rec.event = "plateau";
      else if (last) rec.event = "max_epochs";
      log.epochs.push_back(rec);
      if (on_epoch) on_epoch(rec);
      if (plateau) break;
    }
    restore(best);
  }
  apply_stage(model, 3);
  return log;
}

}  // namespace im2recipe::joint
