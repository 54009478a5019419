#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "favd/error.hpp"

namespace favd::avl {

// Cross-modal visibility configurations. Type I is the default.
enum class MaskType { I = 1, II, III, IV, V };

inline std::string_view to_string(MaskType t) {
  switch (t) {
    case MaskType::I: return "I";
    case MaskType::II: return "II";
    case MaskType::III: return "III";
    case MaskType::IV: return "IV";
    case MaskType::V: return "V";
  }
  return "?";
}

inline MaskType parse_mask_type(std::string_view s) {
  for (auto t : {MaskType::I, MaskType::II, MaskType::III, MaskType::IV, MaskType::V}) {
    if (to_string(t) == s) return t;
  }
  throw ConfigError("unknown mask type '" + std::string(s) + "' (expected I..V)");
}

struct ModelConfig {
  int d_model = 64;
  int layers = 2;
  int heads = 4;
  int n_text = 32;    // text positions, BOS/EOS/PAD included
  int n_vision = 6;   // vision tokens
  int n_audio = 4;    // audio tokens
  int d_vision_in = 16;
  int d_audio_in = 16;
  int d_text_in = 32;
  double mask_prob = 0.25;
  double lambda = 0.9;
  MaskType mask_type = MaskType::I;
  int vocab_size = 0;
  std::uint64_t seed = 0;
  // Learned absolute position embeddings per segment. Modality-type
  // embeddings are always on.
  bool position_embeddings = true;
  double init_std = 0.02;

  int seq_len() const { return n_text + n_vision + n_audio; }
  int head_dim() const { return d_model / heads; }

  void check() const {
    auto fail = [](const std::string& m) { throw ConfigError("model config: " + m); };
    if (d_model <= 0 || layers <= 0 || heads <= 0) fail("d_model, layers and heads must be positive");
    if (d_model % heads != 0) fail("d_model must be divisible by heads");
    if (n_text < 2 || n_vision < 0 || n_audio < 0) fail("bad segment lengths");
    if (d_vision_in <= 0 || d_audio_in <= 0 || d_text_in <= 0) fail("input dims must be positive");
    if (!(mask_prob >= 0.0 && mask_prob < 1.0)) fail("mask_prob must be in [0, 1)");
    if (!(lambda >= 0.0 && lambda <= 1.0)) fail("lambda must be in [0, 1]");
    if (vocab_size < 0) fail("vocab_size must be non-negative");
  }

  // Full-size geometry of the reference model.
  static ModelConfig full_scale() {
    ModelConfig c;
    c.d_model = 768;
    c.layers = 12;
    c.heads = 12;
    c.n_text = 300;
    c.n_vision = 784;
    c.n_audio = 473;
    c.d_vision_in = 512;
    c.d_audio_in = 768;
    c.d_text_in = 768;
    return c;
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct TrainConfig {
  int steps = 500;
  int batch_size = 8;
  double peak_lr = 1e-4;
  double warmup_fraction = 0.1;
  int checkpoint_every = 100;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

inline nlohmann::json to_json(const ModelConfig& c) {
  return {{"d_model", c.d_model},         {"layers", c.layers},
          {"heads", c.heads},             {"n_text", c.n_text},
          {"n_vision", c.n_vision},       {"n_audio", c.n_audio},
          {"d_vision_in", c.d_vision_in}, {"d_audio_in", c.d_audio_in},
          {"d_text_in", c.d_text_in},     {"mask_prob", c.mask_prob},
          {"lambda", c.lambda},           {"mask_type", std::string(to_string(c.mask_type))},
          {"vocab_size", c.vocab_size},   {"seed", c.seed},
          {"position_embeddings", c.position_embeddings}, {"init_std", c.init_std}};
}

inline nlohmann::json to_json(const TrainConfig& c) {
  return {{"steps", c.steps},
          {"batch_size", c.batch_size},
          {"peak_lr", c.peak_lr},
          {"warmup_fraction", c.warmup_fraction},
          {"checkpoint_every", c.checkpoint_every},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_eps", c.adam_eps},
          {"seed", c.seed}};
}

namespace detail {
template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
  }
}
}  // namespace detail

// Missing keys keep their defaults.
inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  detail::read_opt(j, "d_model", c.d_model);
  detail::read_opt(j, "layers", c.layers);
  detail::read_opt(j, "heads", c.heads);
  detail::read_opt(j, "n_text", c.n_text);
  detail::read_opt(j, "n_vision", c.n_vision);
  detail::read_opt(j, "n_audio", c.n_audio);
  detail::read_opt(j, "d_vision_in", c.d_vision_in);
  detail::read_opt(j, "d_audio_in", c.d_audio_in);
  detail::read_opt(j, "d_text_in", c.d_text_in);
  detail::read_opt(j, "mask_prob", c.mask_prob);
  detail::read_opt(j, "lambda", c.lambda);
  if (auto it = j.find("mask_type"); it != j.end()) {
    c.mask_type = parse_mask_type(it->get<std::string>());
  }
  detail::read_opt(j, "vocab_size", c.vocab_size);
  detail::read_opt(j, "seed", c.seed);
  detail::read_opt(j, "position_embeddings", c.position_embeddings);
  detail::read_opt(j, "init_std", c.init_std);
  return c;
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  detail::read_opt(j, "steps", c.steps);
  detail::read_opt(j, "batch_size", c.batch_size);
  detail::read_opt(j, "peak_lr", c.peak_lr);
  detail::read_opt(j, "warmup_fraction", c.warmup_fraction);
  detail::read_opt(j, "checkpoint_every", c.checkpoint_every);
  detail::read_opt(j, "adam_beta1", c.adam_beta1);
  detail::read_opt(j, "adam_beta2", c.adam_beta2);
  detail::read_opt(j, "adam_eps", c.adam_eps);
  detail::read_opt(j, "seed", c.seed);
  return c;
}

}  // namespace favd::avl
