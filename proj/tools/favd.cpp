// favd: corpus validation, caption metrics, ablations and the toy AVLFormer.
//
// Exit codes: 0 success, 2 validation failures or malformed inputs,
// 3 configuration error, 1 anything else.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "favd/favd.hpp"

namespace fs = std::filesystem;
using namespace favd;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitConfig = 3;

void write_text(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
}

Lang lang_arg(const std::string& s) {
  auto l = parse_lang(s);
  if (!l) throw ConfigError("unknown language '" + s + "' (expected en or zh)");
  return *l;
}

nlohmann::json read_json_file(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

struct ValidateArgs {
  std::string annotations;
  std::string lang;
  std::string rules;
  bool json = false;
};

int run_validate(const ValidateArgs& a) {
  const auto records = parse_annotations(a.annotations);
  const ValidationRules rules = a.rules.empty() ? ValidationRules{} : load_rules(a.rules);
  std::optional<Lang> only;
  if (!a.lang.empty()) only = lang_arg(a.lang);
  std::size_t failures = 0;
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : records) {
    const auto rep = validate_record(r, rules, only);
    for (const auto& v : rep.violations) {
      ++failures;
      if (a.json) {
        out.push_back({{"video_id", r.video_id}, {"rule", v.rule_id}, {"message", v.message}});
      } else {
        std::cout << r.video_id << "\t" << v.rule_id << "\t" << v.message << "\n";
      }
    }
  }
  if (a.json) std::cout << out.dump(2) << "\n";
  std::cerr << records.size() << " records, " << failures << " violations\n";
  return failures ? kExitValidation : 0;
}

struct StatsArgs {
  std::string annotations;
  std::string lang = "en";
  std::string out;
  std::size_t top = 50;
};

int run_stats(const StatsArgs& a) {
  const auto records = parse_annotations(a.annotations);
  LexiconTagger tagger;
  const auto st = compute_stats(records, lang_arg(a.lang), tagger);
  auto j = to_json(st, a.top);
  j["lang"] = a.lang;
  j["tagger"] = tagger.name();
  write_text(a.out, j.dump(2) + "\n");
  return 0;
}

struct SplitArgs {
  std::string annotations;
  std::vector<std::size_t> sizes;
  std::uint64_t seed = 0;
  std::string out_dir;
};

int run_split(const SplitArgs& a) {
  const auto records = parse_annotations(a.annotations);
  SplitSpec spec;
  spec.seed = a.seed;
  if (!a.sizes.empty()) {
    if (a.sizes.size() < 3 || a.sizes.size() > 4) throw ConfigError("--sizes takes train,val,test[,withheld]");
    spec.sizes = SplitSizes{a.sizes[0], a.sizes[1], a.sizes[2], a.sizes.size() == 4 ? a.sizes[3] : 0};
  }
  const auto parts = split_dataset(records, spec);
  fs::create_directories(a.out_dir);
  for (const auto& [s, recs] : parts) {
    if (recs.empty()) continue;
    write_text((fs::path(a.out_dir) / (std::string(to_string(s)) + ".json")).string(), serialize_annotations(recs));
    std::cerr << to_string(s) << ": " << recs.size() << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string refs;
  std::string preds;
  std::string lang = "en";
  std::string metrics = "bleu1,bleu4,rougeL,cider";
  std::string embedder;
  std::string media;
  std::string external;
  std::string out;
  std::string markdown;
  std::string label = "model";
  std::string timestamp;
  std::string recipe = "pos_pairs";
  std::uint64_t seed = 0;
};

int run_eval(const EvalArgs& a, bool ablate) {
  EvalConfig cfg;
  cfg.lang = lang_arg(a.lang);
  cfg.metrics = parse_metric_list(a.metrics);
  cfg.workers = worker_count_from_env();
  cfg.timestamp = a.timestamp;
  cfg.seed = a.seed;
  const auto recipe = parse_recipe(a.recipe);

  const auto refs = parse_annotations(a.refs);
  const auto preds = load_predictions(a.preds);
  std::unique_ptr<Embedder> embedder;
  if (std::any_of(cfg.metrics.begin(), cfg.metrics.end(), needs_embedder)) {
    embedder = EmbedderRegistry::instance().make(resolve_embedder_spec(a.embedder));
  }
  std::optional<MediaMap> media;
  if (!a.media.empty()) media = load_media(a.media);
  std::optional<ExternalScores> external;
  if (!a.external.empty()) external = load_external_scores(a.external);
  LexiconNounExtractor extractor;

  EvalInputs in{&refs, &preds, embedder.get(), &extractor, media ? &*media : nullptr,
                external ? &*external : nullptr};
  const auto report = ablate ? run_ablation(recipe, in, cfg) : evaluate(in, cfg);
  write_text(a.out, dump_report(report));
  if (!a.markdown.empty()) write_text(a.markdown, emit_markdown({{a.label, report}}));
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  if (!report.missing_predictions.empty()) {
    std::cerr << report.missing_predictions.size() << " reference clips have no prediction\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::string data;
  std::string out;
  std::string mask_type;
  std::optional<double> lambda;
  std::string split = "train";
  std::string loss_log;
};

std::pair<avl::ModelConfig, avl::TrainConfig> load_train_config(const std::string& path) {
  if (path.empty()) return {};
  const auto j = read_json_file(path);
  return {avl::model_config_from_json(j.value("model", nlohmann::json::object())),
          avl::train_config_from_json(j.value("train", nlohmann::json::object()))};
}

// DIR/annotations.json, features in DIR/features (toy features fill gaps).
int run_train(const TrainArgs& a) {
  auto [model_cfg, train_cfg] = load_train_config(a.config);
  if (!a.mask_type.empty()) model_cfg.mask_type = avl::parse_mask_type(a.mask_type);
  if (a.lambda) model_cfg.lambda = *a.lambda;
  model_cfg.check();

  const fs::path dir(a.data);
  auto records = parse_annotations((dir / "annotations.json").string());
  if (a.split != "all") {
    const auto s = parse_split(a.split);
    if (!s) throw ConfigError("unknown split '" + a.split + "'");
    std::erase_if(records, [&](const AnnotationRecord& r) { return r.split && *r.split != *s; });
  }
  const auto ds = avl::build_dataset(records, model_cfg, dir / "features");
  std::cerr << ds.examples.size() << " examples, vocabulary " << ds.vocab.size() << "\n";

  const auto result = avl::train_loop(ds.examples, model_cfg, ds.vocab, train_cfg, [&](const avl::Checkpoint& ck) {
    avl::save_checkpoint(a.out + ".step" + std::to_string(ck.step), ck);
  });
  avl::save_checkpoint(a.out, result.checkpoint);

  std::string log = "step,total,mlm,alm\n";
  for (std::size_t i = 0; i < result.losses.size(); ++i) {
    const auto& l = result.losses[i];
    log += std::to_string(i + 1) + "," + std::to_string(l.total) + "," + std::to_string(l.mlm) + "," +
           std::to_string(l.alm) + "\n";
  }
  if (!a.loss_log.empty()) write_text(a.loss_log, log);
  if (!result.losses.empty()) std::cerr << "final loss " << result.losses.back().total << "\n";
  if (result.diverged) {
    std::cerr << "training diverged: " << result.divergence_reason << "; kept step " << result.checkpoint.step
              << "\n";
    return 1;
  }
  return 0;
}

struct InferArgs {
  std::string ckpt;
  std::string features;
  std::string out;
  std::string annotations;
  int max_len = 300;
};

int run_infer(const InferArgs& a) {
  const avl::Generator gen(avl::load_checkpoint(a.ckpt));
  std::vector<std::string> ids;
  if (!a.annotations.empty()) {
    for (const auto& r : parse_annotations(a.annotations)) ids.push_back(r.video_id);
  } else {
    for (const auto& e : fs::directory_iterator(a.features)) {
      if (e.path().extension() == avl::kFeatureExtension) ids.push_back(e.path().stem().string());
    }
    std::sort(ids.begin(), ids.end());
  }
  if (ids.empty()) throw EmptyInputError("no clips to describe");
  std::vector<PredictionRecord> preds;
  for (const auto& id : ids) {
    const auto f = avl::features_for(id, a.features, gen.model().config(), !a.annotations.empty());
    preds.push_back({id, gen.generate(f, a.max_len).text});
  }
  write_text(a.out, serialize_predictions(preds));
  return 0;
}

struct ToyArgs {
  std::string annotations;
  std::string config;
  std::string out_dir;
};

int run_toy_features(const ToyArgs& a) {
  const auto cfg = load_train_config(a.config).first;
  fs::create_directories(a.out_dir);
  for (const auto& r : parse_annotations(a.annotations)) {
    avl::save_features(avl::feature_path(a.out_dir, r.video_id).string(), avl::toy_features(r.video_id, cfg));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FAVD toolkit: corpus checks, caption metrics, AVLFormer baseline"};
  app.require_subcommand(1);

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Check annotation records against the corpus rules");
  validate->add_option("--annotations", va.annotations)->required();
  validate->add_option("--lang", va.lang, "Restrict language-specific rules to en or zh");
  validate->add_option("--rules", va.rules, "Rule override JSON");
  validate->add_flag("--json", va.json, "Print violations as JSON");

  StatsArgs sa;
  auto* stats = app.add_subcommand("stats", "Corpus statistics for one language");
  stats->add_option("--annotations", sa.annotations)->required();
  stats->add_option("--lang", sa.lang);
  stats->add_option("--out", sa.out);
  stats->add_option("--top", sa.top, "Number of frequent words to list");

  SplitArgs spa;
  auto* split = app.add_subcommand("split", "Partition records into train/val/test files");
  split->add_option("--annotations", spa.annotations)->required();
  split->add_option("--sizes", spa.sizes, "train,val,test[,withheld]")->delimiter(',');
  split->add_option("--seed", spa.seed);
  split->add_option("--out-dir", spa.out_dir)->required();

  EvalArgs ea;
  auto add_eval_options = [&](CLI::App* c) {
    c->add_option("--refs", ea.refs)->required();
    c->add_option("--preds", ea.preds)->required();
    c->add_option("--lang", ea.lang);
    c->add_option("--metrics", ea.metrics, "Comma list, or 'all'");
    c->add_option("--embedder", ea.embedder, "Embedder spec; FAVD_EMBEDDER otherwise");
    c->add_option("--media", ea.media, "Per-clip audio/frame signals");
    c->add_option("--external-scores", ea.external, "JSONL of precomputed per-clip scores");
    c->add_option("--out", ea.out);
    c->add_option("--markdown", ea.markdown);
    c->add_option("--label", ea.label, "Row label in the markdown table");
    c->add_option("--timestamp", ea.timestamp, "Fixed provenance timestamp");
  };
  auto* eval = app.add_subcommand("eval", "Score predictions against references");
  add_eval_options(eval);
  auto* ablate = app.add_subcommand("ablate", "Score predictions under a perturbation recipe");
  add_eval_options(ablate);
  ablate->add_option("--recipe", ea.recipe)->required();
  ablate->add_option("--seed", ea.seed);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train the toy AVLFormer");
  train->add_option("--config", ta.config, "JSON with 'model' and 'train' sections");
  train->add_option("--data", ta.data)->required();
  train->add_option("--out", ta.out)->required();
  train->add_option("--mask-type", ta.mask_type);
  train->add_option("--lambda", ta.lambda);
  train->add_option("--split", ta.split, "Records to use: train, val, test, withheld or all");
  train->add_option("--loss-log", ta.loss_log, "CSV of per-step losses");

  InferArgs ia;
  auto* infer = app.add_subcommand("infer", "Describe clips with a trained checkpoint");
  infer->add_option("--ckpt", ia.ckpt)->required();
  infer->add_option("--features", ia.features)->required();
  infer->add_option("--out", ia.out);
  infer->add_option("--annotations", ia.annotations, "Clip ids to describe; toy features fill gaps");
  infer->add_option("--max-len", ia.max_len);

  ToyArgs toa;
  auto* toy = app.add_subcommand("toy-features", "Write deterministic stand-in feature files");
  toy->add_option("--annotations", toa.annotations)->required();
  toy->add_option("--config", toa.config);
  toy->add_option("--out-dir", toa.out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*validate) return run_validate(va);
    if (*stats) return run_stats(sa);
    if (*split) return run_split(spa);
    if (*eval) return run_eval(ea, false);
    if (*ablate) return run_eval(ea, true);
    if (*train) return run_train(ta);
    if (*infer) return run_infer(ia);
    if (*toy) return run_toy_features(toa);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const VersionError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DuplicateIdError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IdMismatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
