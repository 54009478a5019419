#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "favd/avlformer/features.hpp"
#include "favd/avlformer/training.hpp"
#include "favd/avlformer/vocab.hpp"
#include "favd/corpus.hpp"

namespace favd::avl {

inline constexpr std::string_view kFeatureExtension = ".feat";

// Training target for a clip: its full paragraph in the given language.
inline std::vector<std::string> target_tokens(const AnnotationRecord& r, Lang lang = Lang::en) {
  const auto* b = r.block(lang);
  if (!b) throw SchemaError("record '" + r.video_id + "' has no " + std::string(to_string(lang)) + " block", std::string(to_string(lang)));
  return model_tokens(b->paragraph(), lang);
}

inline std::filesystem::path feature_path(const std::filesystem::path& dir, const std::string& video_id) {
  return dir / (video_id + std::string(kFeatureExtension));
}

// Features from `dir/<video_id>.feat` when present, toy features otherwise.
inline ModalityFeatures features_for(const std::string& video_id, const std::filesystem::path& dir,
                                     const ModelConfig& cfg, bool allow_toy = true) {
  const auto path = feature_path(dir, video_id);
  if (!dir.empty() && std::filesystem::exists(path)) {
    auto f = load_features(path.string(), video_id);
    f.check(cfg);
    return f;
  }
  if (!allow_toy) throw Error("no feature file for '" + video_id + "' in " + dir.string());
  return toy_features(video_id, cfg);
}

struct Dataset {
  Vocabulary vocab;
  std::vector<Example> examples;
};

inline Dataset build_dataset(const std::vector<AnnotationRecord>& records, const ModelConfig& cfg,
                             const std::filesystem::path& feature_dir, Lang lang = Lang::en,
                             std::size_t min_count = 1) {
  std::vector<std::vector<std::string>> tokenized;
  std::vector<const AnnotationRecord*> kept;
  for (const auto& r : records) {
    if (!r.blocks.contains(lang)) continue;
    tokenized.push_back(target_tokens(r, lang));
    kept.push_back(&r);
  }
  Dataset ds{build_vocab(tokenized, min_count), {}};
  for (std::size_t i = 0; i < kept.size(); ++i) {
    Example ex;
    ex.video_id = kept[i]->video_id;
    ex.ids = encode(ds.vocab, tokenized[i], cfg.n_text);
    ex.features = features_for(ex.video_id, feature_dir, cfg);
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

}  // namespace favd::avl
