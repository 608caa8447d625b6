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

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "im2recipe/core/autodiff.hpp"
#include "im2recipe/core/checkpoint.hpp"
#include "im2recipe/core/lstm.hpp"
#include "im2recipe/core/random.hpp"

namespace im2recipe::joint {

/// Pretrained, fixed inputs for one recipe: a word vector per ingredient and
/// an encoded vector per instruction, both in recipe order.
struct RecipeFeatures {
  std::vector<std::vector<double>> ingredients;
  std::vector<std::vector<double>> instructions;
};

struct ModelDims {
  std::size_t ingredient_dim = 64;
  std::size_t instruction_dim = 64;
  std::size_t image_dim = 64;
  /// Per direction.
  std::size_t ingredient_hidden = 64;
  std::size_t instruction_hidden = 64;
  std::size_t embed_dim = 128;
  std::size_t classes = 1;
};

/// Recipe branch: a bidirectional LSTM over ingredient vectors and an LSTM
/// over instruction vectors, concatenated and projected. Image branch: a
/// linear projection of the feature. One classifier matrix (no bias) is
/// applied to both branches.
class JointModel {
 public:
  LstmCellParams ingredient_fwd, ingredient_bwd, instruction_lstm;
  Param recipe_w, recipe_b, image_w, image_b, classifier_w;

  JointModel() = default;

  JointModel(const ModelDims& dims, std::uint64_t seed) : dims_(dims) {
    if (dims.ingredient_dim == 0 || dims.instruction_dim == 0 || dims.image_dim == 0 || dims.ingredient_hidden == 0 ||
        dims.instruction_hidden == 0 || dims.embed_dim == 0 || dims.classes == 0) {
      throw ConfigError("joint model: every dimension must be positive");
    }
    Rng rng(seed);
    ingredient_fwd = LstmCellParams("joint.ingredient_fwd", dims.ingredient_dim, dims.ingredient_hidden, rng);
    ingredient_bwd = LstmCellParams("joint.ingredient_bwd", dims.ingredient_dim, dims.ingredient_hidden, rng);
    instruction_lstm = LstmCellParams("joint.instruction", dims.instruction_dim, dims.instruction_hidden, rng);
    const std::size_t recipe_in = 2 * dims.ingredient_hidden + dims.instruction_hidden;
    recipe_w = Param("joint.recipe_w", glorot({dims.embed_dim, recipe_in}, rng));
    recipe_b = Param("joint.recipe_b", Tensor({dims.embed_dim}));
    image_w = Param("joint.image_w", glorot({dims.embed_dim, dims.image_dim}, rng));
    image_b = Param("joint.image_b", Tensor({dims.embed_dim}));
    classifier_w = Param("joint.classifier_w", glorot({dims.classes, dims.embed_dim}, rng));
  }

  const ModelDims& dims() const noexcept { return dims_; }

  ad::Var embed_recipe(ad::Tape& tape, const RecipeFeatures& f) {
    if (f.ingredients.empty()) throw EmptyInputError("embed_recipe: no ingredients");
    if (f.instructions.empty()) throw EmptyInputError("embed_recipe: no instructions");
    std::vector<ad::Var> ing, ins;
    for (const auto& v : f.ingredients) ing.push_back(tape.constant(Tensor::vector(v)));
    for (const auto& v : f.instructions) ins.push_back(tape.constant(Tensor::vector(v)));
    const ad::Var hg = encode_sequence(tape, ingredient_fwd, &ingredient_bwd, ing, Direction::kBidirectional);
    const ad::Var hs = encode_sequence(tape, instruction_lstm, nullptr, ins, Direction::kForward);
    return ad::linear(ad::concat(hg, hs), tape.param(recipe_w), tape.param(recipe_b));
  }

  ad::Var embed_image(ad::Tape& tape, std::span<const double> feature) {
    if (feature.size() != dims_.image_dim) {
      throw DimensionError("embed_image: feature of length " + std::to_string(feature.size()) + ", model expects " +
                           std::to_string(dims_.image_dim));
    }
    return ad::linear(tape.constant(Tensor::vector({feature.begin(), feature.end()})), tape.param(image_w),
                      tape.param(image_b));
  }

  std::vector<double> recipe_embedding(const RecipeFeatures& f) {
    ad::Tape tape;
    const auto v = embed_recipe(tape, f).value().data();
    return {v.begin(), v.end()};
  }

  std::vector<double> image_embedding(std::span<const double> feature) {
    ad::Tape tape;
    const auto v = embed_image(tape, feature).value().data();
    return {v.begin(), v.end()};
  }

  std::vector<Param*> recipe_side() {
    std::vector<Param*> ps;
    for (auto* cell : {&ingredient_fwd, &ingredient_bwd, &instruction_lstm}) {
      for (Param* p : cell->parameters()) ps.push_back(p);
    }
    ps.push_back(&recipe_w);
    ps.push_back(&recipe_b);
    return ps;
  }

  std::vector<Param*> image_side() { return {&image_w, &image_b}; }

  std::vector<Param*> parameters() {
    auto ps = recipe_side();
    ps.push_back(&image_w);
    ps.push_back(&image_b);
    ps.push_back(&classifier_w);
    return ps;
  }

  std::vector<const Param*> const_parameters() {
    const auto ps = parameters();
    return {ps.begin(), ps.end()};
  }

  void save(const std::string& path) { save_checkpoint_file(path, const_parameters()); }

  static JointModel load(const std::string& path) {
    const TensorMap v = load_checkpoint_file(path);
    auto get = [&](const std::string& name) -> const Tensor& {
      auto it = v.find(name);
      if (it == v.end()) throw NotFoundError(path + " lacks " + name);
      return it->second;
    };
    ModelDims d;
    d.ingredient_hidden = get("joint.ingredient_fwd.b_input").size();
    d.ingredient_dim = get("joint.ingredient_fwd.w_input").cols() - d.ingredient_hidden;
    d.instruction_hidden = get("joint.instruction.b_input").size();
    d.instruction_dim = get("joint.instruction.w_input").cols() - d.instruction_hidden;
    d.image_dim = get("joint.image_w").cols();
    d.embed_dim = get("joint.image_w").rows();
    d.classes = get("joint.classifier_w").rows();
    JointModel m(d, 0);
    restore_params(v, m.parameters());
    return m;
  }

 private:
  static Tensor glorot(Shape shape, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(shape[0] + shape[1]));
    return uniform_tensor(std::move(shape), bound, rng);
  }

  ModelDims dims_;
};

/// y = +1: 1 - cos(r, v).  y = -1: max(0, cos(r, v) - margin).
inline ad::Var cosine_margin_loss(ad::Var recipe, ad::Var image, int y, double margin) {
  if (y != 1 && y != -1) throw LabelError("cosine_margin_loss: y must be +1 or -1");
  const ad::Var c = ad::cosine(recipe, image);
  if (y == 1) return ad::add_scalar(ad::scale(c, -1.0), 1.0);
  return ad::relu(ad::add_scalar(c, -margin));
}

/// Softmax cross-entropy of the shared classifier on both embeddings.
inline ad::Var semantic_reg_loss(ad::Var recipe, ad::Var image, std::size_t recipe_class, std::size_t image_class,
                                 ad::Var classifier) {
  const ad::Var pr = ad::matvec(classifier, recipe);
  const ad::Var pv = ad::matvec(classifier, image);
  return ad::add(ad::softmax_cross_entropy(pr, recipe_class), ad::softmax_cross_entropy(pv, image_class));
}

struct PairRow {
  std::size_t recipe = 0;
  std::size_t image = 0;
  int y = 1;
  std::size_t recipe_class = 0;
  std::size_t image_class = 0;
};

using PairBatch = std::vector<PairRow>;

/// Where the model reads its inputs: features per recipe and image vectors,
/// both indexed by the numbers stored in PairRow.
struct PairInputs {
  const std::vector<RecipeFeatures>* recipes = nullptr;
  const std::vector<std::vector<double>>* images = nullptr;
};

struct LossWeights {
  double margin = 0.1;
  double lambda = 0.02;
};

/// L_cos + lambda * L_reg for one row.
inline ad::Var weighted_loss(ad::Var cosine_term, ad::Var reg_term, double lambda) {
  return ad::add(cosine_term, ad::scale(reg_term, lambda));
}

/// Mean over rows of L_cos + lambda * L_reg.
inline ad::Var total_loss(ad::Tape& tape, JointModel& model, const PairBatch& batch, const PairInputs& in,
                          const LossWeights& w) {
  if (batch.empty()) throw EmptyInputError("total_loss: empty batch");
  const ad::Var cls = tape.param(model.classifier_w);
  std::vector<ad::Var> terms;
  terms.reserve(batch.size());
  for (const auto& row : batch) {
    const ad::Var r = model.embed_recipe(tape, (*in.recipes).at(row.recipe));
    const ad::Var v = model.embed_image(tape, (*in.images).at(row.image));
    ad::Var term = cosine_margin_loss(r, v, row.y, w.margin);
    if (w.lambda != 0.0) {
      term = weighted_loss(term, semantic_reg_loss(r, v, row.recipe_class, row.image_class, cls), w.lambda);
    }
    terms.push_back(term);
  }
  return ad::mean(terms);
}

/// Recipes eligible for pairing, with the images of each.
struct PairPool {
  std::vector<std::size_t> recipes;
  std::vector<std::vector<std::size_t>> images;
  std::vector<std::size_t> classes;

  void check() const {
    if (recipes.size() < 2) throw SamplingError("pair sampling needs at least 2 recipes with images");
    for (const auto& im : images) {
      if (im.empty()) throw SamplingError("pair sampling: recipe without images in pool");
    }
  }
};

/// One row per requested pool slot: a positive pair (own image) with
/// probability `positive_prob`, otherwise the recipe with an image of a
/// different, uniformly chosen recipe. Class labels are each item's own class.
inline PairBatch sample_pairs(const PairPool& pool, std::span<const std::size_t> slots, double positive_prob,
                              Rng& rng) {
  pool.check();
  if (!(positive_prob > 0.0 && positive_prob <= 1.0)) throw ConfigError("positive probability must be in (0,1]");
  PairBatch batch;
  batch.reserve(slots.size());
  const std::size_t n = pool.recipes.size();
  for (std::size_t s : slots) {
    PairRow row;
    row.recipe = pool.recipes[s];
    row.recipe_class = pool.classes[s];
    std::size_t other = s;
    if (bernoulli(rng, positive_prob)) {
      row.y = 1;
    } else {
      row.y = -1;
      other = uniform_index(rng, n - 1);
      if (other >= s) ++other;
    }
    const auto& ims = pool.images[other];
    row.image = ims[uniform_index(rng, ims.size())];
    row.image_class = pool.classes[other];
    batch.push_back(row);
  }
  return batch;
}

inline PairBatch sample_pairs(const PairPool& pool, std::size_t batch_size, double positive_prob, std::uint64_t seed) {
  pool.check();
  Rng rng(seed);
  std::vector<std::size_t> slots(batch_size);
  for (auto& s : slots) s = uniform_index(rng, pool.recipes.size());
  return sample_pairs(pool, slots, positive_prob, rng);
}

}  // namespace im2recipe::joint
