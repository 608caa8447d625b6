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


// Command-line entry point. Every subcommand reads its flags, applies an
// optional --config JSON file on top, writes the resolved config next to its
// outputs and then runs.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "im2recipe/analysis/embedding_space.hpp"
#include "im2recipe/corpus/dedup.hpp"
#include "im2recipe/corpus/io.hpp"
#include "im2recipe/corpus/partition.hpp"
#include "im2recipe/corpus/stats.hpp"
#include "im2recipe/nutrition/nutrition.hpp"
#include "im2recipe/pipeline.hpp"
#include "im2recipe/synthetic/corpus.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
// Resolved configs; the struct mapping macros bind to this type.
using config_json = nlohmann::json;

namespace im2recipe::cli {
namespace {

int g_verbosity = 1;

template <class... Args>
void info(const Args&... args) {
  if (g_verbosity < 1) return;
  (std::cerr << ... << args) << '\n';
}

template <class... Args>
void debug(const Args&... args) {
  if (g_verbosity < 2) return;
  (std::cerr << ... << args) << '\n';
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path, 1, e.what());
  }
}

template <class Json = json>
void write_json_file(const fs::path& path, const Json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

/// Flag values, then the --config file on top. Keys the subcommand does not
/// know are rejected.
template <class Opts>
Opts resolve(const Opts& flags, const std::string& config_path, const std::string& command, config_json& resolved) {
  resolved = flags;
  if (!config_path.empty()) {
    const config_json file = config_json::parse(read_json_file(config_path).dump());
    if (!file.is_object()) throw ConfigError(config_path + ": config must be a JSON object");
    for (const auto& [key, value] : file.items()) {
      if (!resolved.contains(key)) throw ConfigError(config_path + ": unknown key '" + key + "' for " + command);
    }
    resolved.merge_patch(file);
  }
  Opts out;
  try {
    out = resolved.template get<Opts>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(config_path + ": " + e.what());
  }
  resolved = config_json{{"command", command}, {"options", config_json(out)}};
  return out;
}

std::optional<Partition> partition_option(const std::string& s) {
  if (s == "all") return std::nullopt;
  auto p = partition_from_string(s);
  if (!p) throw ConfigError("unknown partition '" + s + "' (training|validation|test|all)");
  return p;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.front() != '#') out.push_back(line);
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string part; std::getline(in, part, sep);) out.push_back(part);
  return out;
}

// ---- gen-synthetic ------------------------------------------------------------

struct GenOpts {
  std::size_t recipes = 500;
  std::size_t categories = 10;
  std::size_t feature_dim = 64;
  std::size_t latent_dim = 16;
  std::size_t min_images = 1;
  std::size_t max_images = 2;
  double noise = 0.1;
  std::uint64_t seed = kDefaultSeed;
  std::string out_dir = "synthetic";
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GenOpts, recipes, categories, feature_dim, latent_dim, min_images,
                                                max_images, noise, seed, out_dir)

void run_gen(const GenOpts& o, const config_json& resolved) {
  const auto syn = synthetic::generate_synthetic({.recipes = o.recipes, .categories = o.categories,
                                                  .feature_dim = o.feature_dim, .latent_dim = o.latent_dim,
                                                  .min_images = o.min_images, .max_images = o.max_images,
                                                  .noise = o.noise, .seed = o.seed});
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  corpus_io::save_corpus(syn.corpus, (dir / "layer1.jsonl").string(), (dir / "layer2.jsonl").string());
  auto truth = open_out(dir / "categories.tsv");
  truth << "recipe_id\tcategory\tname\n";
  for (std::size_t r = 0; r < syn.corpus.recipes().size(); ++r) {
    const std::size_t c = syn.true_category[r];
    truth << syn.corpus.recipes()[r].id << '\t' << c << '\t' << syn.category_names[c] << '\n';
  }
  write_json_file(dir / "config.json", resolved);
  info("wrote ", syn.corpus.recipes().size(), " recipes and ", syn.corpus.images().size(), " images to ", dir.string());
}

// ---- ingest -------------------------------------------------------------------

struct IngestOpts {
  std::string layer1;
  std::string layer2;
  std::string out_dir = "ingested";
  std::string layer2_format = "jsonl";
  bool repartition = false;
  double training = 0.7;
  double validation = 0.15;
  double test = 0.15;
  std::uint64_t seed = kDefaultSeed;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(IngestOpts, layer1, layer2, out_dir, layer2_format, repartition,
                                                training, validation, test, seed)

void run_ingest(const IngestOpts& o, const config_json& resolved) {
  if (o.layer2_format != "jsonl" && o.layer2_format != "bin") throw ConfigError("layer2 format must be jsonl or bin");
  Corpus corpus = corpus_io::load_corpus(o.layer1, o.layer2);
  if (o.repartition) assign_partitions(corpus, {o.training, o.validation, o.test}, o.seed);
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  corpus_io::save_corpus(corpus, (dir / "layer1.jsonl").string(), (dir / ("layer2." + o.layer2_format)).string());
  json summary;
  summary["recipes"] = corpus.recipes().size();
  summary["images"] = corpus.images().size();
  summary["feature_dim"] = corpus.feature_dim();
  std::array<std::size_t, kPartitionCount> per{};
  for (const auto& r : corpus.recipes()) ++per[static_cast<std::size_t>(r.partition)];
  for (std::size_t k = 0; k < kPartitionCount; ++k) summary["partitions"][std::string(to_string(static_cast<Partition>(k)))] = per[k];
  write_json_file(dir / "ingest.json", summary);
  write_json_file(dir / "config.json", resolved);
  info("ingested ", corpus.recipes().size(), " recipes, ", corpus.images().size(), " images");
}

// ---- dedup --------------------------------------------------------------------

struct DedupOpts {
  std::string layer1;
  std::string layer2;
  std::string out_dir = "dedup";
  bool exact = true;
  double near_threshold = 0.1;
  double cross_threshold = 0.1;
  bool normalize = true;
  std::uint64_t seed = kDefaultSeed;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(DedupOpts, layer1, layer2, out_dir, exact, near_threshold,
                                                cross_threshold, normalize, seed)

void run_dedup(const DedupOpts& o, const config_json& resolved) {
  const Corpus corpus = corpus_io::load_corpus(o.layer1, o.layer2);
  const auto res = dedup_images(corpus, {.exact = o.exact, .near_threshold = o.near_threshold,
                                         .cross_partition_threshold = o.cross_threshold, .normalize = o.normalize});
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  corpus_io::save_layer2_file((dir / "layer2.jsonl").string(), res.kept);
  write_json_file(dir / "dedup_report.json", to_json(res.report));
  write_json_file(dir / "config.json", resolved);
  info("kept ", res.kept.size(), " images, removed ", res.report.removed_count());
}

// ---- nutrition ----------------------------------------------------------------

struct NutritionOpts {
  std::string recipes;
  std::string table;
  std::string lexicon;
  std::string conversions;
  std::string thresholds;
  std::string out = "nutrition/layer1.jsonl";
  std::uint64_t seed = kDefaultSeed;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(NutritionOpts, recipes, table, lexicon, conversions, thresholds, out,
                                                seed)

void run_nutrition(const NutritionOpts& o, const config_json& resolved) {
  auto plain_json = [](const std::string& path) { return nlohmann::json::parse(read_json_file(path).dump()); };
  const auto table = nutrition::NutrientTable::read_tsv_file(o.table);
  const auto lexicon = o.lexicon.empty() ? nutrition::IngredientLexicon::starter()
                                         : nutrition::IngredientLexicon::from_json(plain_json(o.lexicon));
  const auto conv = o.conversions.empty() ? nutrition::UnitConversions::defaults()
                                          : nutrition::UnitConversions::from_json(plain_json(o.conversions));
  nutrition::NutritionContext ctx{.table = &table, .conversions = &conv, .lexicon = &lexicon};
  if (!o.thresholds.empty()) ctx.thresholds = nutrition::LightThresholds::from_json(plain_json(o.thresholds));

  Corpus corpus(corpus_io::load_layer1_file(o.recipes), {});
  std::size_t complete = 0;
  std::map<std::string, std::size_t> reasons;
  for (std::size_t r = 0; r < corpus.recipes().size(); ++r) {
    auto outcome = nutrition::compute_nutrition(corpus.recipes()[r], ctx);
    if (auto* rec = std::get_if<nutrition::NutritionRecord>(&outcome)) {
      corpus.set_nutrition(r, *rec);
      ++complete;
    } else {
      const auto& why = std::get<nutrition::Incomplete>(outcome);
      corpus.set_nutrition(r, std::nullopt);
      ++reasons[why.reason.substr(0, why.reason.find(':'))];
      debug(corpus.recipes()[r].id, ": ingredient ", why.ingredient, ": ", why.reason);
    }
  }
  const fs::path out(o.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  corpus_io::save_layer1_file(out.string(), corpus.recipes());
  json summary{{"recipes", corpus.recipes().size()}, {"complete", complete}, {"incomplete_reasons", reasons}};
  write_json_file(out.string() + ".summary.json", summary);
  write_json_file(out.string() + ".config.json", resolved);
  info(complete, " of ", corpus.recipes().size(), " recipes have complete nutrition");
}

// ---- stats --------------------------------------------------------------------

struct StatsOpts {
  std::string layer1;
  std::string layer2;
  std::string out = "stats.json";
  std::uint64_t seed = kDefaultSeed;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(StatsOpts, layer1, layer2, out, seed)

void run_stats(const StatsOpts& o, const config_json& resolved) {
  const Corpus corpus = corpus_io::load_corpus(o.layer1, o.layer2);
  const json j = to_json(corpus_stats(corpus));
  write_json_file(o.out, j);
  write_json_file(o.out + ".config.json", resolved);
  std::cout << j.dump(2) << '\n';
}

// ---- categories ---------------------------------------------------------------

struct CategoriesOpts {
  std::string layer1;
  std::string out = "categories.json";
  std::size_t top_bigrams = 2000;
  std::size_t min_count = 1;
  std::string seeds_file;
  std::string blocklist_file;
  std::uint64_t seed = kDefaultSeed;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(CategoriesOpts, layer1, out, top_bigrams, min_count, seeds_file,
                                                blocklist_file, seed)

retrieval::CategoryConfig category_config(std::size_t top_bigrams, std::size_t min_count, const std::string& seeds,
                                          const std::string& blocklist) {
  retrieval::CategoryConfig cfg;
  cfg.top_bigrams = top_bigrams;
  cfg.min_count = min_count;
  if (!seeds.empty()) cfg.seeds = read_lines(seeds);
  if (!blocklist.empty()) {
    for (auto& p : read_lines(blocklist)) cfg.blocklist.push_back(std::move(p));
  }
  return cfg;
}

void run_categories(const CategoriesOpts& o, const config_json& resolved) {
  const auto recipes = corpus_io::load_layer1_file(o.layer1);
  const auto a =
      retrieval::build_categories(recipes, category_config(o.top_bigrams, o.min_count, o.seeds_file, o.blocklist_file));
  save_categories(a.set, o.out);
  auto tsv = open_out(o.out + ".assignment.tsv");
  tsv << "recipe_id\tcategory\tname\n";
  for (std::size_t r = 0; r < recipes.size(); ++r) {
    tsv << recipes[r].id << '\t' << a.labels[r] << '\t' << a.set.names[a.labels[r]] << '\n';
  }
  write_json_file(o.out + ".config.json", resolved);
  info(a.set.size() - 1, " categories plus background, coverage ", a.coverage);
}

// ---- train-wordvec ------------------------------------------------------------

struct WordvecOpts {
  std::string layer1;
  std::string extractor;
  std::string out = "word_vectors.txt";
  std::size_t dim = 64;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  std::size_t min_count = 1;
  bool center = true;
  std::uint64_t seed = kDefaultSeed;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(WordvecOpts, layer1, extractor, out, dim, negatives, epochs,
                                                learning_rate, min_count, center, seed)

text::WordVectorConfig wordvec_config(const WordvecOpts& o) {
  return {.dim = o.dim, .negatives = o.negatives, .epochs = o.epochs, .learning_rate = o.learning_rate,
          .min_count = o.min_count, .center = o.center};
}

text::IngredientNameExtractor load_extractor(const std::string& prefix) {
  return prefix.empty() ? text::IngredientNameExtractor{} : text::IngredientNameExtractor::load(prefix);
}

void run_wordvec(const WordvecOpts& o, const config_json& resolved) {
  const Corpus corpus(corpus_io::load_layer1_file(o.layer1), {});
  const auto vectors = fit_word_vectors(corpus, load_extractor(o.extractor), wordvec_config(o), o.seed);
  const fs::path out(o.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  vectors.save_file(o.out);
  write_json_file(o.out + ".config.json", resolved);
  info(vectors.vocabulary.size(), " ingredient vectors of dim ", vectors.dim());
}

// ---- train-skip ---------------------------------------------------------------

struct SkipOpts {
  std::string layer1;
  std::string out = "skip";
  std::size_t embed_dim = 32;
  std::size_t dim = 64;
  std::size_t epochs = 5;
  double learning_rate = 5e-3;
  std::size_t batch_size = 8;
  std::size_t max_tokens = 30;
  std::size_t min_count = 1;
  bool predict_previous = false;
  std::uint64_t seed = kDefaultSeed;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SkipOpts, layer1, out, embed_dim, dim, epochs, learning_rate,
                                                batch_size, max_tokens, min_count, predict_previous, seed)

text::SkipInstructionsConfig skip_config(const SkipOpts& o) {
  return {.embed_dim = o.embed_dim, .dim = o.dim, .epochs = o.epochs, .learning_rate = o.learning_rate,
          .batch_size = o.batch_size, .max_tokens = o.max_tokens, .min_count = o.min_count,
          .predict_previous = o.predict_previous};
}

void run_skip(const SkipOpts& o, const config_json& resolved) {
  const Corpus corpus(corpus_io::load_layer1_file(o.layer1), {});
  text::SkipInstructionsReport report;
  const auto enc = fit_skip_instructions(corpus, skip_config(o), o.seed, &report);
  const fs::path out(o.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  enc.save(o.out);
  write_json_file(o.out + ".report.json",
                  {{"epoch_loss", report.epoch_loss}, {"skipped_empty", report.skipped_empty}, {"pairs", report.pairs}});
  write_json_file(o.out + ".config.json", resolved);
  info("skip-instructions encoder of dim ", enc.dim(), " trained on ", report.pairs, " pairs");
}

// ---- train-joint --------------------------------------------------------------

struct JointOpts {
  std::string layer1;
  std::string layer2;
  std::string model_dir = "model";
  std::string extractor;
  std::string word_vectors;
  std::string skip;
  std::string categories;
  WordvecOpts wordvec;
  SkipOpts skip_encoder;
  std::size_t top_bigrams = 2000;
  std::size_t category_min_count = 1;
  std::size_t ingredient_hidden = 64;
  std::size_t instruction_hidden = 64;
  std::size_t embed_dim = 128;
  double margin = 0.1;
  double lambda = 0.02;
  double positive_prob = 0.2;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::size_t first_stage = 1;
  std::size_t last_stage = 3;
  std::size_t patience = 3;
  std::size_t max_epochs = 20;
  std::size_t val_pool = 500;
  std::size_t val_repeats = 3;
  std::uint64_t seed = kDefaultSeed;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(JointOpts, layer1, layer2, model_dir, extractor, word_vectors, skip,
                                                categories, wordvec, skip_encoder, top_bigrams, category_min_count,
                                                ingredient_hidden, instruction_hidden, embed_dim, margin, lambda,
                                                positive_prob, batch_size, learning_rate, first_stage, last_stage,
                                                patience, max_epochs, val_pool, val_repeats, seed)

void run_joint(const JointOpts& o, const config_json& resolved) {
  const Corpus corpus = corpus_io::load_corpus(o.layer1, o.layer2);
  PipelineConfig cfg;
  cfg.seed = o.seed;
  cfg.word_vectors = wordvec_config(o.wordvec);
  cfg.skip = skip_config(o.skip_encoder);
  cfg.categories = category_config(o.top_bigrams, o.category_min_count, "", "");
  cfg.dims.ingredient_hidden = o.ingredient_hidden;
  cfg.dims.instruction_hidden = o.instruction_hidden;
  cfg.dims.embed_dim = o.embed_dim;
  cfg.train.loss = {.margin = o.margin, .lambda = o.lambda};
  cfg.train.positive_prob = o.positive_prob;
  cfg.train.batch_size = o.batch_size;
  cfg.train.optimizer.learning_rate = o.learning_rate;
  cfg.train.first_stage = o.first_stage;
  cfg.train.last_stage = o.last_stage;
  cfg.train.patience = o.patience;
  cfg.train.max_epochs_per_stage = o.max_epochs;
  cfg.train.val_pool = o.val_pool;
  cfg.train.val_repeats = o.val_repeats;

  joint::Featurizer pre;
  pre.extractor = load_extractor(o.extractor);
  if (!o.word_vectors.empty()) pre.word_vectors = text::IngredientVectors::load_file(o.word_vectors);
  if (!o.skip.empty()) pre.instructions = text::SkipInstructionsEncoder::load(o.skip);
  if (o.word_vectors.empty()) info("no --word-vectors given; training ingredient vectors");
  if (o.skip.empty()) info("no --skip given; training the instruction encoder");
  std::optional<retrieval::CategorySet> cats;
  if (!o.categories.empty()) cats = load_categories(o.categories);

  const fs::path dir(o.model_dir);
  fs::create_directories(dir);
  auto log = open_out(dir / "train_log.jsonl");
  auto sys = train_pipeline(corpus, cfg, std::move(pre), cats, [&](const joint::EpochRecord& e) {
    log << to_json(e).dump() << '\n';
    info("epoch ", e.epoch, " stage ", e.stage, " loss ", e.train_loss, " val MedR ", e.val_medr,
         e.event.empty() ? "" : " ", e.event);
  });
  save_system(sys, dir);
  write_json_file(dir / "train_summary.json", {{"initial_val_medr", sys.log.initial_medr},
                                               {"best_val_medr", sys.log.best_medr},
                                               {"best_val_r1", sys.log.best_r1},
                                               {"best_epoch", sys.log.best_epoch},
                                               {"epochs", sys.log.epochs.size()},
                                               {"classes", sys.categories.size()},
                                               {"validation_from_training", sys.log.validation_from_training}});
  write_json_file(dir / "config.json", resolved);
  info("best validation MedR ", sys.log.best_medr, "; model written to ", dir.string());
}

// ---- evaluate -----------------------------------------------------------------

struct EvalOpts {
  std::string layer1;
  std::string layer2;
  std::string model_dir = "model";
  std::string partition = "test";
  bool external = false;
  bool category_matched = false;
  std::size_t n = 1000;
  std::size_t repeats = 10;
  std::string direction = "im2recipe";
  std::string median = "lower";
  std::string out = "report.json";
  std::uint64_t seed = kDefaultSeed;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EvalOpts, layer1, layer2, model_dir, partition, external,
                                                category_matched, n, repeats, direction, median, out, seed)

void run_evaluate(const EvalOpts& o, const config_json& resolved) {
  const auto dir = retrieval::direction_from_string(o.direction);
  if (!dir) throw ConfigError("direction must be im2recipe or recipe2im");
  if (o.median != "lower" && o.median != "mean") throw ConfigError("median must be lower or mean");
  if (o.category_matched && !o.external) throw ConfigError("--category-matched needs --external");
  const retrieval::EvalConfig ec{.n = o.n, .repeats = o.repeats, .direction = *dir,
                                 .median = o.median == "lower" ? retrieval::MedianRule::kLower
                                                               : retrieval::MedianRule::kMean,
                                 .seed = o.seed};
  const Corpus corpus = corpus_io::load_corpus(o.layer1, o.layer2);
  auto sys = load_system(o.model_dir);
  const auto rep = o.external ? evaluate_external(sys.model, sys.featurizer, corpus, ec, o.category_matched,
                                                  &sys.categories)
                              : evaluate_system(sys.model, sys.featurizer, corpus, partition_option(o.partition), ec);
  if (rep.pool_shrunk) info("warning: pool shrunk from ", rep.requested_n, " to ", rep.n, " pairs");
  if (rep.zero_norm_warnings) info("warning: ", rep.zero_norm_warnings, " zero-norm embeddings ranked last");
  write_json_file(o.out, to_json(rep));
  auto tsv = open_out(o.out + ".tsv");
  retrieval::write_tsv(tsv, rep);
  write_json_file(o.out + ".config.json", resolved);
  std::cout << to_string(rep.direction) << " N=" << rep.n << " repeats=" << rep.repeats << " MedR=" << rep.mean_medr
            << " R@1=" << rep.mean_r1 << " R@5=" << rep.mean_r5 << " R@10=" << rep.mean_r10 << '\n';
}

// ---- analyze ------------------------------------------------------------------

struct AnalyzeOpts {
  std::string layer1;
  std::string layer2;
  std::string model_dir = "model";
  std::string partition = "test";
  std::string space = "recipe";
  std::vector<std::string> analogy;
  std::vector<std::string> interpolate;
  std::size_t steps = 5;
  std::vector<std::size_t> units;
  std::size_t k = 10;
  std::string out_dir = "analysis";
  std::uint64_t seed = kDefaultSeed;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AnalyzeOpts, layer1, layer2, model_dir, partition, space, analogy,
                                                interpolate, steps, units, k, out_dir, seed)

void run_analyze(const AnalyzeOpts& o, const config_json& resolved) {
  if (o.space != "recipe" && o.space != "image") throw ConfigError("space must be recipe or image");
  if (o.steps < 2 && !o.interpolate.empty()) throw ConfigError("--steps must be >= 2");
  const Corpus corpus = corpus_io::load_corpus(o.layer1, o.layer2);
  auto sys = load_system(o.model_dir);
  const auto part = partition_option(o.partition);
  const auto space = o.space == "recipe" ? analysis::Space::kRecipe : analysis::Space::kImage;
  const auto table = embedding_table(sys.model, sys.featurizer, corpus, part, space);

  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  auto out = open_out(dir / "neighbors.tsv");
  analysis::write_neighbors_header(out);
  for (const auto& arg : o.analogy) {
    const auto parts = split(arg, ',');
    if (parts.size() != 3) throw ConfigError("--analogy takes 'a,b,c', got '" + arg + "'");
    const auto res = analysis::analogy(table, analysis::concept_vector(table, parts[0]),
                                       analysis::concept_vector(table, parts[1]),
                                       analysis::concept_vector(table, parts[2]), o.k);
    const std::string query = parts[0] + " - " + parts[1] + " + " + parts[2] + " [" + std::to_string(res.excluded) +
                              " member items excluded]";
    analysis::write_neighbors_tsv(out, query, table, res.neighbors);
  }
  for (const auto& arg : o.interpolate) {
    const auto parts = split(arg, ',');
    if (parts.size() != 2) throw ConfigError("--interpolate takes 'a,b', got '" + arg + "'");
    const auto c1 = analysis::concept_vector(table, parts[0]);
    const auto c2 = analysis::concept_vector(table, parts[1]);
    for (std::size_t s = 0; s < o.steps; ++s) {
      const double x = static_cast<double>(s) / static_cast<double>(o.steps - 1);
      std::ostringstream query;
      query << x << " * " << parts[0] << " + " << 1.0 - x << " * " << parts[1];
      analysis::write_neighbors_tsv(out, query.str(), table, analysis::interpolate(table, c1, c2, x, o.k));
    }
  }
  if (!o.units.empty()) {
    const auto recipes = embedding_table(sys.model, sys.featurizer, corpus, part, analysis::Space::kRecipe);
    const auto images = embedding_table(sys.model, sys.featurizer, corpus, part, analysis::Space::kImage);
    auto units = open_out(dir / "units.tsv");
    for (std::size_t j : o.units) analysis::write_units_tsv(units, recipes, images, analysis::unit_report(recipes, images, j, o.k));
  }
  write_json_file(dir / "config.json", resolved);
  info("analysis written to ", dir.string());
}

// ---- wiring -------------------------------------------------------------------

struct Globals {
  std::string config;
  int verbose = 0;
  bool quiet = false;
};

template <class Opts>
CLI::App* subcommand(CLI::App& app, const char* name, const char* help, Opts& opts, Globals& g,
                     void (*run)(const Opts&, const config_json&)) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->add_option("--config", g.config, "JSON file whose keys override flags");
  sub->add_option("--seed", opts.seed, "Random seed")->capture_default_str();
  sub->final_callback([&opts, &g, name, run] {
    g_verbosity = g.quiet ? 0 : 1 + g.verbose;
    config_json resolved;
    const Opts o = resolve(opts, g.config, name, resolved);
    run(o, resolved);
  });
  return sub;
}

int main_impl(int argc, char** argv) {
  CLI::App app{"Recipe and image joint embedding toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_flag("-v,--verbose", g.verbose, "More log output (repeatable)");
  app.add_flag("-q,--quiet", g.quiet, "Errors only");

  GenOpts gen;
  auto* s = subcommand(app, "gen-synthetic", "Generate a synthetic aligned corpus", gen, g, run_gen);
  s->add_option("--recipes", gen.recipes)->capture_default_str();
  s->add_option("--categories", gen.categories)->capture_default_str();
  s->add_option("--feature-dim", gen.feature_dim)->capture_default_str();
  s->add_option("--latent-dim", gen.latent_dim)->capture_default_str();
  s->add_option("--min-images", gen.min_images)->capture_default_str();
  s->add_option("--max-images", gen.max_images)->capture_default_str();
  s->add_option("--noise", gen.noise)->capture_default_str();
  s->add_option("--out-dir", gen.out_dir)->capture_default_str();

  IngestOpts ing;
  s = subcommand(app, "ingest", "Validate a corpus and write it back normalized", ing, g, run_ingest);
  s->add_option("--layer1", ing.layer1)->required();
  s->add_option("--layer2", ing.layer2);
  s->add_option("--out-dir", ing.out_dir)->capture_default_str();
  s->add_option("--layer2-format", ing.layer2_format, "jsonl or bin")->capture_default_str();
  s->add_flag("--repartition", ing.repartition, "Reassign partitions by recipe");
  s->add_option("--training", ing.training)->capture_default_str();
  s->add_option("--validation", ing.validation)->capture_default_str();
  s->add_option("--test", ing.test)->capture_default_str();

  DedupOpts dd;
  s = subcommand(app, "dedup", "Remove exact and near-duplicate images", dd, g, run_dedup);
  s->add_option("--layer1", dd.layer1)->required();
  s->add_option("--layer2", dd.layer2)->required();
  s->add_option("--out-dir", dd.out_dir)->capture_default_str();
  s->add_option("--near-threshold", dd.near_threshold)->capture_default_str();
  s->add_option("--cross-threshold", dd.cross_threshold)->capture_default_str();
  s->add_flag("--exact,!--no-exact", dd.exact, "Collapse distance-0 duplicates");
  s->add_flag("--normalize,!--raw", dd.normalize, "Compare L2-normalized features");

  NutritionOpts nu;
  s = subcommand(app, "nutrition", "Compute nutrition records and traffic lights", nu, g, run_nutrition);
  s->add_option("--recipes", nu.recipes)->required();
  s->add_option("--table", nu.table, "Nutrient table TSV")->required();
  s->add_option("--lexicon", nu.lexicon, "Ingredient lexicon JSON");
  s->add_option("--conversions", nu.conversions, "Unit to gram JSON");
  s->add_option("--thresholds", nu.thresholds, "Traffic light thresholds JSON");
  s->add_option("--out", nu.out)->capture_default_str();

  StatsOpts st;
  s = subcommand(app, "stats", "Corpus statistics", st, g, run_stats);
  s->add_option("--layer1", st.layer1)->required();
  s->add_option("--layer2", st.layer2);
  s->add_option("--out", st.out)->capture_default_str();

  CategoriesOpts ca;
  s = subcommand(app, "categories", "Build title categories", ca, g, run_categories);
  s->add_option("--layer1", ca.layer1)->required();
  s->add_option("--out", ca.out)->capture_default_str();
  s->add_option("--top-bigrams", ca.top_bigrams)->capture_default_str();
  s->add_option("--min-count", ca.min_count)->capture_default_str();
  s->add_option("--seeds", ca.seeds_file, "Seed category names, one per line");
  s->add_option("--blocklist", ca.blocklist_file, "Extra bigram regexes, one per line");

  WordvecOpts wv;
  s = subcommand(app, "train-wordvec", "Train ingredient word vectors", wv, g, run_wordvec);
  s->add_option("--layer1", wv.layer1)->required();
  s->add_option("--extractor", wv.extractor, "Trained extractor prefix");
  s->add_option("--out", wv.out)->capture_default_str();
  s->add_option("--dim", wv.dim)->capture_default_str();
  s->add_option("--negatives", wv.negatives)->capture_default_str();
  s->add_option("--epochs", wv.epochs)->capture_default_str();
  s->add_option("--lr", wv.learning_rate)->capture_default_str();
  s->add_option("--min-count", wv.min_count)->capture_default_str();
  s->add_flag("--center,!--no-center", wv.center, "Subtract the mean vector");

  SkipOpts sk;
  s = subcommand(app, "train-skip", "Train the instruction encoder", sk, g, run_skip);
  s->add_option("--layer1", sk.layer1)->required();
  s->add_option("--out", sk.out, "Output prefix")->capture_default_str();
  s->add_option("--embed-dim", sk.embed_dim)->capture_default_str();
  s->add_option("--dim", sk.dim)->capture_default_str();
  s->add_option("--epochs", sk.epochs)->capture_default_str();
  s->add_option("--lr", sk.learning_rate)->capture_default_str();
  s->add_option("--batch-size", sk.batch_size)->capture_default_str();
  s->add_option("--max-tokens", sk.max_tokens)->capture_default_str();
  s->add_option("--min-count", sk.min_count)->capture_default_str();
  s->add_flag("--predict-previous", sk.predict_previous, "Also decode the previous instruction");

  JointOpts jo;
  s = subcommand(app, "train-joint", "Train the joint embedding (fits missing prerequisites)", jo, g, run_joint);
  s->add_option("--layer1", jo.layer1)->required();
  s->add_option("--layer2", jo.layer2)->required();
  s->add_option("--model-dir", jo.model_dir)->capture_default_str();
  s->add_option("--extractor", jo.extractor, "Trained extractor prefix");
  s->add_option("--word-vectors", jo.word_vectors, "Pretrained ingredient vectors");
  s->add_option("--skip", jo.skip, "Pretrained instruction encoder prefix");
  s->add_option("--categories", jo.categories, "Category set JSON");
  s->add_option("--wordvec-dim", jo.wordvec.dim)->capture_default_str();
  s->add_option("--wordvec-epochs", jo.wordvec.epochs)->capture_default_str();
  s->add_option("--skip-dim", jo.skip_encoder.dim)->capture_default_str();
  s->add_option("--skip-epochs", jo.skip_encoder.epochs)->capture_default_str();
  s->add_option("--top-bigrams", jo.top_bigrams)->capture_default_str();
  s->add_option("--ingredient-hidden", jo.ingredient_hidden)->capture_default_str();
  s->add_option("--instruction-hidden", jo.instruction_hidden)->capture_default_str();
  s->add_option("--embed-dim", jo.embed_dim)->capture_default_str();
  s->add_option("--margin", jo.margin)->capture_default_str();
  s->add_option("--lambda", jo.lambda)->capture_default_str();
  s->add_option("--positive-prob", jo.positive_prob)->capture_default_str();
  s->add_option("--batch-size", jo.batch_size)->capture_default_str();
  s->add_option("--lr", jo.learning_rate)->capture_default_str();
  s->add_option("--first-stage", jo.first_stage)->capture_default_str();
  s->add_option("--last-stage", jo.last_stage)->capture_default_str();
  s->add_option("--patience", jo.patience)->capture_default_str();
  s->add_option("--max-epochs", jo.max_epochs, "Per stage")->capture_default_str();
  s->add_option("--val-pool", jo.val_pool)->capture_default_str();
  s->add_option("--val-repeats", jo.val_repeats)->capture_default_str();

  EvalOpts ev;
  s = subcommand(app, "evaluate", "Run the MedR and R@K protocol", ev, g, run_evaluate);
  s->add_option("--layer1", ev.layer1)->required();
  s->add_option("--layer2", ev.layer2)->required();
  s->add_option("--model-dir", ev.model_dir)->capture_default_str();
  s->add_option("--partition", ev.partition, "training|validation|test|all")->capture_default_str();
  s->add_flag("--external", ev.external, "Treat the corpus as external data");
  s->add_flag("--category-matched", ev.category_matched, "At most one pair per category (external only)");
  s->add_option("--n", ev.n)->capture_default_str();
  s->add_option("--repeats", ev.repeats)->capture_default_str();
  s->add_option("--direction", ev.direction, "im2recipe or recipe2im")->capture_default_str();
  s->add_option("--median", ev.median, "lower or mean")->capture_default_str();
  s->add_option("--out", ev.out)->capture_default_str();

  AnalyzeOpts an;
  s = subcommand(app, "analyze", "Analogy, interpolation and unit activation reports", an, g, run_analyze);
  s->add_option("--layer1", an.layer1)->required();
  s->add_option("--layer2", an.layer2)->required();
  s->add_option("--model-dir", an.model_dir)->capture_default_str();
  s->add_option("--partition", an.partition)->capture_default_str();
  s->add_option("--space", an.space, "recipe or image")->capture_default_str();
  s->add_option("--analogy", an.analogy, "'a,b,c' for a - b + c (repeatable)");
  s->add_option("--interpolate", an.interpolate, "'a,b' (repeatable)");
  s->add_option("--steps", an.steps)->capture_default_str();
  s->add_option("--unit", an.units, "Embedding unit index (repeatable)");
  s->add_option("--k", an.k)->capture_default_str();
  s->add_option("--out-dir", an.out_dir)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return 0;
}

}  // namespace
}  // namespace im2recipe::cli

int main(int argc, char** argv) {
  try {
    return im2recipe::cli::main_impl(argc, argv);
  } catch (const im2recipe::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 3;
  } catch (const im2recipe::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
