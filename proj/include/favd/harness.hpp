#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "favd/audio_score.hpp"
#include "favd/corpus.hpp"
#include "favd/embedding.hpp"
#include "favd/entity_score.hpp"
#include "favd/error.hpp"
#include "favd/rng.hpp"
#include "favd/text.hpp"
#include "favd/text_metrics.hpp"

namespace favd {

inline constexpr std::string_view kToolVersion = "favd 0.1.0";

struct PredictionRecord {
  std::string video_id;
  std::string description;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

// One JSON object per line: {"video_id": ..., "description": ...}. Blank lines
// are skipped.
inline std::vector<PredictionRecord> parse_predictions_text(std::string_view content,
                                                            std::string_view source = "<predictions>") {
  std::vector<PredictionRecord> out;
  std::map<std::string, std::size_t> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    const auto line = text::trim(content.substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty()) {
      if (end == content.size()) break;
      continue;
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string(source) + ":" + std::to_string(line_no) + ": " + e.what(), line_no,
                       e.byte);
    }
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    if (!j.is_object()) throw SchemaError(where + ": expected an object", "");
    for (const char* key : {"video_id", "description"}) {
      if (!j.contains(key) || !j[key].is_string()) {
        throw SchemaError(where + ": field '" + key + "' must be a string", key);
      }
    }
    PredictionRecord p{j["video_id"].get<std::string>(), j["description"].get<std::string>()};
    if (auto [it, fresh] = seen.emplace(p.video_id, out.size()); !fresh) {
      throw DuplicateIdError(p.video_id, it->second, out.size());
    }
    out.push_back(std::move(p));
    if (end == content.size()) break;
  }
  return out;
}

inline std::vector<PredictionRecord> load_predictions(const std::string& path) {
  return parse_predictions_text(read_file(path), path);
}

inline std::string serialize_predictions(const std::vector<PredictionRecord>& preds) {
  std::string out;
  for (const auto& p : preds) {
    out += nlohmann::json{{"video_id", p.video_id}, {"description", p.description}}.dump();
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Media

struct ClipMedia {
  MediaSignal audio;
  std::vector<MediaSignal> frames;
};

using MediaMap = std::map<std::string, ClipMedia>;

namespace detail {

inline MediaSignal parse_signal(const nlohmann::json& j, const std::string& where) {
  MediaSignal s;
  if (!j.is_object()) throw SchemaError(where + ": expected an object", where);
  if (auto it = j.find("data"); it != j.end()) {
    try {
      s.data = it->get<std::vector<float>>();
    } catch (const nlohmann::json::exception&) {
      throw SchemaError(where + ".data: expected a list of numbers", "data");
    }
  }
  if (auto it = j.find("label"); it != j.end()) {
    if (!it->is_string()) throw SchemaError(where + ".label: expected a string", "label");
    s.label = it->get<std::string>();
  }
  if (s.data.empty() && s.label.empty()) throw SchemaError(where + ": needs data or label", where);
  return s;
}

inline nlohmann::json signal_json(const MediaSignal& s) {
  nlohmann::json j = nlohmann::json::object();
  if (!s.data.empty()) j["data"] = s.data;
  if (!s.label.empty()) j["label"] = s.label;
  return j;
}

}  // namespace detail

// {"clips": {"<video_id>": {"audio": SIGNAL, "frames": [SIGNAL, ...]}}} where
// SIGNAL is {"data": [floats], "label": "surrogate text"}.
inline MediaMap parse_media_text(std::string_view content, std::string_view source = "<media>") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(content);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string(source) + ": " + e.what(), 0, e.byte);
  }
  if (!j.is_object() || !j.contains("clips") || !j["clips"].is_object()) {
    throw SchemaError(std::string(source) + ": expected {\"clips\": {...}}", "clips");
  }
  MediaMap out;
  for (const auto& [id, clip] : j["clips"].items()) {
    const std::string where = std::string(source) + ":" + id;
    if (!clip.is_object() || !clip.contains("audio") || !clip.contains("frames") ||
        !clip["frames"].is_array()) {
      throw SchemaError(where + ": needs 'audio' and a 'frames' list", id);
    }
    ClipMedia m;
    m.audio = detail::parse_signal(clip["audio"], where + ".audio");
    for (std::size_t i = 0; i < clip["frames"].size(); ++i) {
      m.frames.push_back(detail::parse_signal(clip["frames"][i], where + ".frames[" + std::to_string(i) + "]"));
    }
    if (m.frames.empty()) throw SchemaError(where + ": no frames", id);
    out.emplace(id, std::move(m));
  }
  return out;
}

inline MediaMap load_media(const std::string& path) { return parse_media_text(read_file(path), path); }

inline std::string serialize_media(const MediaMap& media) {
  nlohmann::json clips = nlohmann::json::object();
  for (const auto& [id, m] : media) {
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& f : m.frames) frames.push_back(detail::signal_json(f));
    clips[id] = {{"audio", detail::signal_json(m.audio)}, {"frames", frames}};
  }
  return nlohmann::json{{"clips", clips}}.dump() + "\n";
}

// ---------------------------------------------------------------------------
// External per-clip scores, e.g. METEOR from an outside tool.

using ExternalScores = std::map<std::string, std::map<std::string, double>>;

// JSONL: {"video_id": ..., "<metric>": number, ...}
inline ExternalScores parse_external_scores_text(std::string_view content,
                                                 std::string_view source = "<external>") {
  ExternalScores out;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(where + ": " + e.what(), line_no, e.byte);
    }
    if (!j.is_object() || !j.contains("video_id") || !j["video_id"].is_string()) {
      throw SchemaError(where + ": needs a string video_id", "video_id");
    }
    auto& row = out[j["video_id"].get<std::string>()];
    for (const auto& [k, v] : j.items()) {
      if (k == "video_id") continue;
      if (!v.is_number()) throw SchemaError(where + ": '" + k + "' must be a number", k);
      row[k] = v.get<double>();
    }
  }
  return out;
}

inline ExternalScores load_external_scores(const std::string& path) {
  return parse_external_scores_text(read_file(path), path);
}

// ---------------------------------------------------------------------------
// Metric selection

inline const std::vector<std::string>& builtin_metrics() {
  static const std::vector<std::string> names = {
      "bleu1", "bleu2",          "bleu3",        "bleu4",          "rougeL", "cider",
      "clipscore", "clipscore32", "refclipscore", "refclipscore32", "entity", "audio"};
  return names;
}

// Metrics supplied only through external score files.
inline const std::vector<std::string>& external_metrics() {
  static const std::vector<std::string> names = {"meteor"};
  return names;
}

inline bool needs_embedder(const std::string& m) {
  return m.starts_with("clipscore") || m.starts_with("refclipscore") || m == "entity" || m == "audio";
}

inline bool needs_media(const std::string& m) {
  return m.starts_with("clipscore") || m.starts_with("refclipscore") || m == "audio";
}

// Comma-separated list; "all" expands to every built-in metric. Order is
// normalized and duplicates dropped.
inline std::vector<std::string> parse_metric_list(std::string_view spec) {
  std::set<std::string> chosen;
  std::size_t start = 0;
  while (start <= spec.size()) {
    auto end = spec.find(',', start);
    if (end == std::string_view::npos) end = spec.size();
    const std::string name(text::trim(spec.substr(start, end - start)));
    start = end + 1;
    if (name.empty()) continue;
    if (name == "all") {
      chosen.insert(builtin_metrics().begin(), builtin_metrics().end());
      continue;
    }
    const auto& b = builtin_metrics();
    const auto& e = external_metrics();
    if (std::find(b.begin(), b.end(), name) == b.end() && std::find(e.begin(), e.end(), name) == e.end()) {
      throw ConfigError("unknown metric '" + name + "'");
    }
    chosen.insert(name);
  }
  if (chosen.empty()) throw ConfigError("no metrics selected");
  return {chosen.begin(), chosen.end()};
}

// ---------------------------------------------------------------------------
// Reports

struct MetricReport {
  std::map<std::string, std::map<std::string, double>> per_clip;
  std::map<std::string, double> aggregate;
  nlohmann::json provenance = nlohmann::json::object();
  std::vector<std::string> warnings;
  std::vector<std::string> missing_predictions;  // reference ids with no prediction

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

inline nlohmann::json to_json(const MetricReport& r) {
  nlohmann::json j;
  j["per_clip"] = r.per_clip;
  j["aggregate"] = r.aggregate;
  j["provenance"] = r.provenance;
  j["warnings"] = r.warnings;
  j["missing_predictions"] = r.missing_predictions;
  return j;
}

inline MetricReport report_from_json(const nlohmann::json& j) {
  MetricReport r;
  try {
    r.per_clip = j.at("per_clip").get<decltype(r.per_clip)>();
    r.aggregate = j.at("aggregate").get<decltype(r.aggregate)>();
    r.provenance = j.at("provenance");
    r.warnings = j.value("warnings", std::vector<std::string>{});
    r.missing_predictions = j.value("missing_predictions", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("report: ") + e.what(), "report");
  }
  return r;
}

// Keys come out sorted (nlohmann objects are ordered maps), so equal reports
// serialize to equal bytes.
inline std::string dump_report(const MetricReport& r) { return to_json(r).dump(2) + "\n"; }

struct MarkdownColumn {
  std::string header;
  std::string metric;
  double scale;
};

// Conventional metrics are shown x100; EntityScore and AudioScore are stored
// x100 already.
inline const std::vector<MarkdownColumn>& markdown_columns() {
  static const std::vector<MarkdownColumn> cols = {
      {"B@1", "bleu1", 100.0},         {"B@4", "bleu4", 100.0},          {"Meteor(ext)", "meteor", 100.0},
      {"CIDEr", "cider", 100.0},       {"Clipscore", "clipscore", 100.0}, {"EntityScore", "entity", 1.0},
      {"AudioScore", "audio_top1", 1.0}};
  return cols;
}

inline std::string emit_markdown(const std::vector<std::pair<std::string, MetricReport>>& rows) {
  std::string out = "| Method |";
  std::string rule = "|---|";
  for (const auto& c : markdown_columns()) {
    out += " " + c.header + " |";
    rule += "---:|";
  }
  out += "\n" + rule + "\n";
  for (const auto& [label, rep] : rows) {
    out += "| " + label + " |";
    for (const auto& c : markdown_columns()) {
      auto it = rep.aggregate.find(c.metric);
      if (it == rep.aggregate.end()) {
        out += " - |";
      } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", it->second * c.scale);
        out += std::string(" ") + buf + " |";
      }
    }
    out += "\n";
  }
  return out;
}

inline std::string emit_report(const MetricReport& r, std::string_view format, std::string_view label = "model") {
  if (format == "json") return dump_report(r);
  if (format == "markdown" || format == "md") return emit_markdown({{std::string(label), r}});
  throw ConfigError("unknown report format '" + std::string(format) + "'");
}

// ---------------------------------------------------------------------------
// Worker pool

// FAVD_WORKERS, clamped to [1, 64]; 1 when unset or unparsable.
inline int worker_count_from_env() {
  const char* env = std::getenv("FAVD_WORKERS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) throw ConfigError("FAVD_WORKERS must be a positive integer");
  return static_cast<int>(std::min(v, 64L));
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. Results must be
// written to per-index slots; the first exception by index is rethrown.
template <typename F>
void parallel_for(std::size_t n, int workers, F&& fn) {
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  std::vector<std::exception_ptr> errors(n);
  auto run = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (threads == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, n); ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) run(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---------------------------------------------------------------------------
// Evaluation

struct EvalConfig {
  Lang lang = Lang::en;
  std::vector<std::string> metrics = {"bleu1", "bleu4", "rougeL", "cider"};
  int workers = 1;
  std::string timestamp;  // empty: current UTC time
  std::string recipe = "pos_pairs";
  std::uint64_t seed = 0;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct EvalInputs {
  const std::vector<AnnotationRecord>* refs = nullptr;
  const std::vector<PredictionRecord>* preds = nullptr;
  const Embedder* embedder = nullptr;
  const NounExtractor* extractor = nullptr;
  const MediaMap* media = nullptr;
  const ExternalScores* external = nullptr;
};

namespace detail {

struct ClipResult {
  std::map<std::string, double> values;
  std::vector<std::string> warnings;
};

inline bool wants(const std::vector<std::string>& metrics, std::string_view m) {
  return std::find(metrics.begin(), metrics.end(), m) != metrics.end();
}

}  // namespace detail

// Scores every prediction against the reference paragraph of the same clip.
// Aggregates are per-clip means, except BLEU which uses the pooled corpus
// formula. CIDEr document frequencies come from all references in the
// chosen language, so a clip's CIDEr does not depend on which other clips
// are predicted.
inline MetricReport evaluate(const EvalInputs& in, const EvalConfig& cfg) {
  if (!in.refs || !in.preds) throw ConfigError("evaluate: references and predictions are required");
  const auto& metrics = cfg.metrics;
  for (const auto& m : metrics) {
    if (needs_embedder(m) && !in.embedder) throw ConfigError("metric '" + m + "' needs an embedder");
    if (needs_media(m) && !in.media) throw ConfigError("metric '" + m + "' needs a media file");
    if (m == "entity" && !in.extractor) throw ConfigError("metric 'entity' needs a noun extractor");
    if (std::find(external_metrics().begin(), external_metrics().end(), m) != external_metrics().end() &&
        !in.external) {
      throw ConfigError("metric '" + m + "' is external; pass a score file");
    }
  }

  std::map<std::string, const AnnotationRecord*> ref_by_id;
  for (const auto& r : *in.refs) {
    if (r.block(cfg.lang)) ref_by_id.emplace(r.video_id, &r);
  }
  std::vector<std::string> unmatched;
  std::vector<const PredictionRecord*> preds;
  for (const auto& p : *in.preds) {
    if (!ref_by_id.contains(p.video_id)) {
      unmatched.push_back(p.video_id);
    } else {
      preds.push_back(&p);
    }
  }
  std::sort(unmatched.begin(), unmatched.end());
  if (!unmatched.empty()) throw IdMismatchError(unmatched);
  std::sort(preds.begin(), preds.end(),
            [](const auto* a, const auto* b) { return a->video_id < b->video_id; });
  if (preds.empty()) throw EmptyInputError("evaluate: no predictions");

  MetricReport report;
  {
    std::set<std::string> predicted;
    for (const auto* p : preds) predicted.insert(p->video_id);
    for (const auto& [id, _] : ref_by_id) {
      if (!predicted.contains(id)) report.missing_predictions.push_back(id);
    }
  }

  const text::TokenizeOptions tok_opt{.lang = cfg.lang, .keep_punctuation = false};
  std::optional<CiderScorer> cider;
  if (detail::wants(metrics, "cider")) {
    std::vector<std::vector<Tokens>> docs;
    for (const auto& [_, r] : ref_by_id) docs.push_back({text::tokenize(r->block(cfg.lang)->paragraph(), tok_opt)});
    cider.emplace(docs);
    if (cider->degenerate()) report.warnings.push_back("cider: all reference documents are identical");
  }

  const bool serial_embedder = in.embedder && !in.embedder->concurrent_safe();
  const int workers = serial_embedder ? 1 : std::max(1, cfg.workers);
  std::vector<detail::ClipResult> results(preds.size());
  std::vector<Tokens> pred_tokens(preds.size());
  std::vector<std::vector<Tokens>> ref_tokens(preds.size());

  parallel_for(preds.size(), workers, [&](std::size_t i) {
    const auto& p = *preds[i];
    const auto& ref = *ref_by_id.at(p.video_id)->block(cfg.lang);
    const std::string ref_text = ref.paragraph();
    auto& res = results[i];
    pred_tokens[i] = text::tokenize(p.description, tok_opt);
    ref_tokens[i] = {text::tokenize(ref_text, tok_opt)};
    const auto& pt = pred_tokens[i];

    for (int n = 1; n <= 4; ++n) {
      const std::string name = "bleu" + std::to_string(n);
      if (!detail::wants(metrics, name)) continue;
      if (pt.empty()) {
        res.values[name] = 0.0;
        res.warnings.push_back(p.video_id + ": empty prediction, " + name + " = 0");
      } else {
        res.values[name] = bleu(pt, ref_tokens[i], n);
      }
    }
    if (detail::wants(metrics, "rougeL")) res.values["rougeL"] = rouge_l(pt, ref_tokens[i].front());
    if (cider) res.values["cider"] = cider->score(pt, ref_tokens[i]);

    const ClipMedia* media = nullptr;
    if (in.media) {
      auto it = in.media->find(p.video_id);
      if (it != in.media->end()) media = &it->second;
    }
    for (const auto& [name, frames, use_ref] :
         {std::tuple{"clipscore", 1, false}, std::tuple{"clipscore32", 32, false},
          std::tuple{"refclipscore", 1, true}, std::tuple{"refclipscore32", 32, true}}) {
      if (!detail::wants(metrics, name)) continue;
      if (!media) {
        res.warnings.push_back(p.video_id + ": no media, " + name + " skipped");
        continue;
      }
      const auto r = clip_score(media->frames, p.description, in.embedder,
                                {.w = 2.5, .frames = frames, .use_reference = use_ref}, {ref_text});
      res.values[name] = use_ref ? *r.ref_score : r.score;
    }

    if (detail::wants(metrics, "entity")) {
      const auto pe = extract_entities(p.description, *in.extractor, p.video_id + "/prediction");
      const auto re = extract_entities(ref_text, *in.extractor, p.video_id + "/reference");
      if (re.empty()) {
        res.warnings.push_back(p.video_id + ": reference has no entities, entity skipped");
      } else {
        const auto es = entity_score(pe, re, *in.embedder);
        if (es.empty_prediction) res.warnings.push_back(p.video_id + ": prediction has no entities, entity = 0");
        res.values["entity"] = 100.0 * es.score;
      }
    }

    if (detail::wants(metrics, "audio")) {
      if (!media) {
        res.warnings.push_back(p.video_id + ": no media, audio skipped");
      } else if (text::split_sentences(p.description).empty()) {
        res.warnings.push_back(p.video_id + ": empty prediction, audio skipped");
      } else {
        const auto as = audio_score_topk(media->audio, media->frames, p.description, *in.embedder);
        res.values["audio_top1"] = 100.0 * as.top1;
        res.values["audio_top2"] = 100.0 * as.top2;
      }
    }

    if (in.external) {
      auto it = in.external->find(p.video_id);
      for (const auto& m : external_metrics()) {
        if (!detail::wants(metrics, m)) continue;
        if (it == in.external->end() || !it->second.contains(m)) {
          res.warnings.push_back(p.video_id + ": no external " + m + " score");
        } else {
          res.values[m] = it->second.at(m);
        }
      }
    }
  });

  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    report.per_clip[preds[i]->video_id] = results[i].values;
    for (const auto& [k, v] : results[i].values) {
      auto& s = sums[k];
      s.first += v;
      ++s.second;
    }
    report.warnings.insert(report.warnings.end(), results[i].warnings.begin(), results[i].warnings.end());
  }
  for (const auto& [k, s] : sums) report.aggregate[k] = s.first / static_cast<double>(s.second);
  for (int n = 1; n <= 4; ++n) {
    const std::string name = "bleu" + std::to_string(n);
    if (detail::wants(metrics, name)) report.aggregate[name] = corpus_bleu(pred_tokens, ref_tokens, n);
  }

  nlohmann::json key = {{"lang", std::string(to_string(cfg.lang))},
                        {"metrics", metrics},
                        {"embedder", in.embedder ? in.embedder->name() : "none"},
                        {"tagger", in.extractor ? in.extractor->name() : "none"},
                        {"recipe", cfg.recipe},
                        {"seed", cfg.seed}};
  report.provenance = key;
  report.provenance["config_hash"] = hex64(fnv1a64(key.dump()));
  report.provenance["timestamp"] = cfg.timestamp.empty() ? utc_timestamp() : cfg.timestamp;
  report.provenance["tool"] = kToolVersion;
  return report;
}

// ---------------------------------------------------------------------------
// Ablation recipes

enum class AblationRecipe {
  pos_pairs,
  neg_pairs,
  video_random_audio,
  random_video_audio,
  audio_pair_type_I,
  audio_pair_type_II,
  audio_pair_type_III,
  audio_pair_type_IV,
};

inline const std::vector<std::pair<AblationRecipe, std::string_view>>& recipe_names() {
  static const std::vector<std::pair<AblationRecipe, std::string_view>> names = {
      {AblationRecipe::pos_pairs, "pos_pairs"},
      {AblationRecipe::neg_pairs, "neg_pairs"},
      {AblationRecipe::video_random_audio, "video_random_audio"},
      {AblationRecipe::random_video_audio, "random_video_audio"},
      {AblationRecipe::audio_pair_type_I, "audio_pair_type_I"},
      {AblationRecipe::audio_pair_type_II, "audio_pair_type_II"},
      {AblationRecipe::audio_pair_type_III, "audio_pair_type_III"},
      {AblationRecipe::audio_pair_type_IV, "audio_pair_type_IV"},
  };
  return names;
}

inline std::string_view to_string(AblationRecipe r) {
  for (const auto& [k, v] : recipe_names()) {
    if (k == r) return v;
  }
  return "?";
}

inline AblationRecipe parse_recipe(std::string_view s) {
  for (const auto& [k, v] : recipe_names()) {
    if (v == s) return k;
  }
  throw ConfigError("unknown ablation recipe '" + std::string(s) + "'");
}

inline constexpr std::size_t kRandomSignalLength = 64;
inline constexpr float kFixedSignalValue = 1e-3f;

namespace detail {

// Fresh signal with the same length as `like` (kRandomSignalLength when it
// only had a label) and no label, filled by `gen`.
template <typename G>
MediaSignal synthetic_signal(const MediaSignal& like, G&& gen) {
  MediaSignal s;
  s.data.resize(like.data.empty() ? kRandomSignalLength : like.data.size());
  for (auto& x : s.data) x = static_cast<float>(gen());
  return s;
}

// Seeded permutation with no fixed points.
inline std::vector<std::size_t> derangement(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::size_t> target(n);
  for (std::size_t i = 0; i < n; ++i) target[order[i]] = order[(i + 1) % n];
  return target;
}

}  // namespace detail

// Pure transform of the media inputs. Random draws are seeded by `seed` and
// visit clips in id order.
inline MediaMap apply_recipe(AblationRecipe recipe, const MediaMap& media, std::uint64_t seed) {
  MediaMap out = media;
  Rng rng(seed);
  std::vector<std::string> ids;
  for (const auto& [id, _] : media) ids.push_back(id);
  auto shuffle_audio = [&] {
    if (ids.size() < 2) throw ConfigError("audio shuffling needs at least two clips");
    const auto target = detail::derangement(ids.size(), rng);
    for (std::size_t i = 0; i < ids.size(); ++i) out[ids[i]].audio = media.at(ids[target[i]]).audio;
  };
  switch (recipe) {
    case AblationRecipe::pos_pairs:
    case AblationRecipe::audio_pair_type_I:
      break;
    case AblationRecipe::neg_pairs:
    case AblationRecipe::audio_pair_type_II:
      shuffle_audio();
      break;
    case AblationRecipe::video_random_audio:
      for (const auto& id : ids) out[id].audio = detail::synthetic_signal(media.at(id).audio, [&] { return rng.normal(); });
      break;
    case AblationRecipe::random_video_audio:
      for (const auto& id : ids) {
        for (auto& f : out[id].frames) f = detail::synthetic_signal(f, [&] { return rng.normal(); });
      }
      break;
    case AblationRecipe::audio_pair_type_III:
      for (const auto& id : ids) {
        out[id].audio = detail::synthetic_signal(media.at(id).audio, [&] { return rng.uniform(-1.0, 1.0); });
      }
      break;
    case AblationRecipe::audio_pair_type_IV:
      for (const auto& id : ids) {
        out[id].audio = detail::synthetic_signal(media.at(id).audio, [] { return kFixedSignalValue; });
      }
      break;
  }
  return out;
}

inline MetricReport run_ablation(AblationRecipe recipe, const EvalInputs& in, EvalConfig cfg) {
  const bool touches_media = recipe != AblationRecipe::pos_pairs && recipe != AblationRecipe::audio_pair_type_I;
  if (touches_media && !in.media) {
    throw ConfigError("recipe '" + std::string(to_string(recipe)) + "' needs a media file");
  }
  cfg.recipe = std::string(to_string(recipe));
  if (!in.media) return evaluate(in, cfg);
  const MediaMap transformed = apply_recipe(recipe, *in.media, cfg.seed);
  EvalInputs local = in;
  local.media = &transformed;
  return evaluate(local, cfg);
}

}  // namespace favd
