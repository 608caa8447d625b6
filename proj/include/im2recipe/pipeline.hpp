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

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "im2recipe/analysis/embedding_space.hpp"
#include "im2recipe/corpus/recipe.hpp"
#include "im2recipe/joint/featurize.hpp"
#include "im2recipe/joint/model.hpp"
#include "im2recipe/joint/train.hpp"
#include "im2recipe/retrieval/categories.hpp"
#include "im2recipe/retrieval/evaluate.hpp"
#include "im2recipe/text/extractor.hpp"
#include "im2recipe/text/skip_instructions.hpp"
#include "im2recipe/text/word2vec.hpp"

namespace im2recipe {

struct PipelineConfig {
  text::WordVectorConfig word_vectors;
  text::SkipInstructionsConfig skip;
  retrieval::CategoryConfig categories;
  /// Only the hidden and embedding sizes are read; input sizes and class
  /// count come from the data.
  joint::ModelDims dims;
  joint::TrainConfig train;
  std::uint64_t seed = kDefaultSeed;
};

/// Ingredient tokens of every training-partition recipe.
inline std::vector<std::vector<std::string>> training_ingredient_tokens(const Corpus& c,
                                                                        const text::IngredientNameExtractor& ex) {
  std::vector<std::vector<std::string>> out;
  for (const auto& r : c.recipes()) {
    if (r.partition == Partition::kTraining) out.push_back(joint::ingredient_tokens(r, ex));
  }
  return out;
}

inline std::vector<text::InstructionTokens> training_instruction_tokens(const Corpus& c) {
  std::vector<text::InstructionTokens> out;
  for (const auto& r : c.recipes()) {
    if (r.partition == Partition::kTraining) out.push_back(joint::instruction_tokens(r));
  }
  return out;
}

inline text::IngredientVectors fit_word_vectors(const Corpus& c, const text::IngredientNameExtractor& ex,
                                                text::WordVectorConfig cfg, std::uint64_t seed) {
  cfg.seed = derive_seed(seed, 101);
  return text::train_word_vectors(training_ingredient_tokens(c, ex), cfg);
}

inline text::SkipInstructionsEncoder fit_skip_instructions(const Corpus& c, text::SkipInstructionsConfig cfg,
                                                           std::uint64_t seed,
                                                           text::SkipInstructionsReport* report = nullptr) {
  cfg.seed = derive_seed(seed, 102);
  return text::train_skip_instructions(training_instruction_tokens(c), cfg, report);
}

/// Class label per corpus recipe: the stored category when present,
/// otherwise the label from `assignment`.
inline std::vector<std::size_t> recipe_classes(const Corpus& c, const retrieval::CategoryAssignment& assignment) {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < c.recipes().size(); ++r) {
    const auto& cat = c.recipes()[r].category;
    out.push_back(cat ? *cat : assignment.labels.at(r));
    if (out.back() >= assignment.set.size()) {
      throw LabelError("recipe " + c.recipes()[r].id + " has category " + std::to_string(out.back()) + " but only " +
                       std::to_string(assignment.set.size()) + " classes exist");
    }
  }
  return out;
}

inline joint::ModelDims resolve_dims(joint::ModelDims dims, const joint::Featurizer& f, const Corpus& c,
                                     std::size_t classes) {
  dims.ingredient_dim = f.word_vectors.dim();
  dims.instruction_dim = f.instructions.dim();
  dims.image_dim = c.feature_dim();
  dims.classes = classes;
  return dims;
}

struct TrainedSystem {
  joint::Featurizer featurizer;
  retrieval::CategorySet categories;
  joint::JointModel model;
  joint::TrainLog log;
};

/// Fits whichever of word vectors, instruction encoder and categories are
/// not supplied, then trains the joint model.
inline TrainedSystem train_pipeline(const Corpus& corpus, const PipelineConfig& cfg,
                                    std::optional<joint::Featurizer> pretrained = std::nullopt,
                                    std::optional<retrieval::CategorySet> categories = std::nullopt,
                                    const joint::EpochCallback& on_epoch = {}) {
  TrainedSystem sys;
  if (pretrained) {
    sys.featurizer = std::move(*pretrained);
  }
  if (sys.featurizer.word_vectors.vocabulary.size() <= text::Vocabulary::kSpecialCount) {
    sys.featurizer.word_vectors = fit_word_vectors(corpus, sys.featurizer.extractor, cfg.word_vectors, cfg.seed);
  }
  if (!sys.featurizer.instructions.ready()) {
    sys.featurizer.instructions = fit_skip_instructions(corpus, cfg.skip, cfg.seed);
  }
  const auto assignment = categories ? retrieval::assign_categories(*categories, corpus.recipes())
                                     : retrieval::build_categories(corpus.recipes(), cfg.categories);
  sys.categories = assignment.set;
  const auto classes = recipe_classes(corpus, assignment);
  const auto data = joint::make_training_data(corpus, sys.featurizer.featurize_all(corpus.recipes()), classes);
  sys.model = joint::JointModel(resolve_dims(cfg.dims, sys.featurizer, corpus, assignment.set.size()),
                                derive_seed(cfg.seed, 103));
  joint::TrainConfig tc = cfg.train;
  tc.seed = derive_seed(cfg.seed, 104);
  sys.log = joint::train_joint(sys.model, data, tc, on_epoch);
  return sys;
}

inline retrieval::RetrievalReport evaluate_pairs(joint::JointModel& model, const joint::Featurizer& featurizer,
                                                 const Corpus& corpus, const joint::EvalPairs& pairs,
                                                 const retrieval::EvalConfig& cfg) {
  if (pairs.recipes.size() < 2) throw ConfigError("evaluate: fewer than 2 recipe-image pairs available");
  std::vector<joint::RecipeFeatures> feats;
  std::vector<std::vector<double>> images;
  std::vector<std::size_t> rows(pairs.recipes.size());
  for (std::size_t k = 0; k < pairs.recipes.size(); ++k) {
    feats.push_back(featurizer.featurize(corpus.recipes()[pairs.recipes[k]]));
    images.push_back(corpus.images()[pairs.images[k]].feature);
    rows[k] = k;
  }
  const auto [re, im] = joint::embed_pairs(model, feats, images, rows, rows);
  return retrieval::evaluate(re, im, pairs.ids, cfg);
}

/// Embeds each recipe of `partition` (all when nullopt) with its lowest-id
/// image and runs the retrieval protocol.
inline retrieval::RetrievalReport evaluate_system(joint::JointModel& model, const joint::Featurizer& featurizer,
                                                  const Corpus& corpus, std::optional<Partition> partition,
                                                  const retrieval::EvalConfig& cfg) {
  return evaluate_pairs(model, featurizer, corpus, joint::evaluation_pairs(corpus, partition), cfg);
}

/// Keeps one randomly chosen pair per non-background category.
inline joint::EvalPairs category_matched_pairs(const joint::EvalPairs& pairs, const std::vector<std::size_t>& classes,
                                               std::uint64_t seed) {
  std::map<std::size_t, std::vector<std::size_t>> by_class;
  for (std::size_t k = 0; k < pairs.recipes.size(); ++k) {
    const std::size_t c = classes.at(pairs.recipes[k]);
    if (c != retrieval::kBackgroundClass) by_class[c].push_back(k);
  }
  Rng rng(seed);
  joint::EvalPairs out;
  for (const auto& [c, members] : by_class) {
    const std::size_t k = members[uniform_index(rng, members.size())];
    out.recipes.push_back(pairs.recipes[k]);
    out.images.push_back(pairs.images[k]);
    out.ids.push_back(pairs.ids[k]);
  }
  return out;
}

/// Runs the protocol on a corpus the model was not trained on. With
/// `category_matched`, at most one pair per category enters the pool, with
/// categories assigned from the titles using `categories`.
inline retrieval::RetrievalReport evaluate_external(joint::JointModel& model, const joint::Featurizer& featurizer,
                                                    const Corpus& external, const retrieval::EvalConfig& cfg,
                                                    bool category_matched = false,
                                                    const retrieval::CategorySet* categories = nullptr) {
  if (external.recipes().empty() || external.images().empty()) {
    throw ConfigError("evaluate_external: external corpus has no recipes or no images");
  }
  auto pairs = joint::evaluation_pairs(external, std::nullopt);
  if (category_matched) {
    if (!categories) throw ConfigError("evaluate_external: category-matched mode needs a category set");
    const auto assignment = retrieval::assign_categories(*categories, external.recipes());
    pairs = category_matched_pairs(pairs, recipe_classes(external, assignment), derive_seed(cfg.seed, 105));
  }
  return evaluate_pairs(model, featurizer, external, pairs, cfg);
}

/// Embeds every recipe of `partition` (all when nullopt) in one space. Image
/// rows use each recipe's lowest-id image and carry the recipe title.
inline analysis::EmbeddingTable embedding_table(joint::JointModel& model, const joint::Featurizer& featurizer,
                                                const Corpus& corpus, std::optional<Partition> partition,
                                                analysis::Space space) {
  const auto pairs = joint::evaluation_pairs(corpus, partition);
  analysis::EmbeddingTable t;
  t.space = space;
  t.embeddings = Tensor({pairs.recipes.size(), model.dims().embed_dim});
  for (std::size_t k = 0; k < pairs.recipes.size(); ++k) {
    const Recipe& r = corpus.recipes()[pairs.recipes[k]];
    const ImageRecord& im = corpus.images()[pairs.images[k]];
    t.ids.push_back(space == analysis::Space::kRecipe ? r.id : im.image_id);
    t.titles.push_back(r.title);
    const auto e = space == analysis::Space::kRecipe ? model.recipe_embedding(featurizer.featurize(r))
                                                     : model.image_embedding(im.feature);
    std::copy(e.begin(), e.end(), t.embeddings.row(k).begin());
  }
  return t;
}

// Model directory layout written by save_system:
//   extractor, extractor.vocab   (only when the extractor was trained)
//   word_vectors.txt
//   skip, skip.vocab
//   categories.json
//   joint.ckpt
inline void save_featurizer(const joint::Featurizer& f, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  f.extractor.save((dir / "extractor").string());
  f.word_vectors.save_file((dir / "word_vectors.txt").string());
  f.instructions.save((dir / "skip").string());
}

inline joint::Featurizer load_featurizer(const std::filesystem::path& dir) {
  joint::Featurizer f;
  if (std::filesystem::exists(dir / "extractor")) f.extractor = text::IngredientNameExtractor::load((dir / "extractor").string());
  f.word_vectors = text::IngredientVectors::load_file((dir / "word_vectors.txt").string());
  f.instructions = text::SkipInstructionsEncoder::load((dir / "skip").string());
  return f;
}

inline void save_categories(const retrieval::CategorySet& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << retrieval::to_json(s).dump(2) << '\n';
}

inline retrieval::CategorySet load_categories(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path.string());
  try {
    return retrieval::category_set_from_json(nlohmann::ordered_json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 1, e.what());
  }
}

inline void save_system(TrainedSystem& sys, const std::filesystem::path& dir) {
  save_featurizer(sys.featurizer, dir);
  save_categories(sys.categories, dir / "categories.json");
  sys.model.save((dir / "joint.ckpt").string());
}

struct LoadedSystem {
  joint::Featurizer featurizer;
  retrieval::CategorySet categories;
  joint::JointModel model;
};

inline LoadedSystem load_system(const std::filesystem::path& dir) {
  return {load_featurizer(dir), load_categories(dir / "categories.json"),
          joint::JointModel::load((dir / "joint.ckpt").string())};
}

}  // namespace im2recipe
