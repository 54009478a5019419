#pragma once

// Shared helpers for the model tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "favd/avlformer/dataset.hpp"
#include "favd/avlformer/model.hpp"
#include "favd/avlformer/training.hpp"
#include "favd/corpus.hpp"
#include "favd/rng.hpp"
#include "test_support.hpp"

namespace testing_support {

using namespace favd;
using namespace favd::avl;

// Small enough for finite differences.
inline ModelConfig grad_config() {
  ModelConfig c;
  c.d_model = 8;
  c.layers = 2;
  c.heads = 2;
  c.n_text = 6;
  c.n_vision = 3;
  c.n_audio = 2;
  c.d_vision_in = 4;
  c.d_audio_in = 3;
  c.d_text_in = 5;
  c.vocab_size = 9;
  c.seed = 3;
  c.init_std = 0.5;
  return c;
}

inline Example random_example(const ModelConfig& c, Rng& rng, const std::string& id) {
  Example ex;
  ex.video_id = id;
  ex.features = toy_features(id, c);
  ex.ids.assign(static_cast<std::size_t>(c.n_text), Vocabulary::kPad);
  ex.ids[0] = Vocabulary::kBos;
  const int len = c.n_text - 2;
  for (int i = 1; i <= len; ++i) {
    ex.ids[static_cast<std::size_t>(i)] = Vocabulary::kSpecialCount +
        static_cast<int>(rng.below(static_cast<std::uint64_t>(c.vocab_size - Vocabulary::kSpecialCount)));
  }
  ex.ids[static_cast<std::size_t>(len + 1)] = Vocabulary::kEos;
  return ex;
}

struct GradCheck {
  std::size_t checked = 0;
  double worst = 0.0;
  std::string worst_name;
};

inline constexpr double kGradStep = 1e-5;
inline constexpr double kGradFloor = 1e-6;

// Central differences on `per_tensor` random entries of every tensor.
// rel = |analytic - numeric| / max(|analytic|, |numeric|, floor).
inline GradCheck gradient_check(Model& model, const std::vector<const Example*>& batch,
                                const std::vector<MlmMasking>& masking, double lambda, int per_tensor,
                                std::uint64_t seed) {
  const auto mask = model.default_mask();
  Params grads = model.params().zeros_like();
  combined_loss(model, batch, masking, lambda, mask, &grads);

  std::vector<std::pair<std::string, Mat*>> tensors;
  model.params().for_each([&](const std::string& n, Mat& m) { tensors.emplace_back(n, &m); });
  std::vector<const Mat*> gtensors;
  grads.for_each([&](const std::string&, const Mat& m) { gtensors.push_back(&m); });

  Rng rng(seed);
  GradCheck out;
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    Mat& m = *tensors[t].second;
    const int picks = std::min<int>(per_tensor, static_cast<int>(m.size()));
    for (int k = 0; k < picks; ++k) {
      const auto idx = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(m.size())));
      double& w = m.data()[idx];
      const double orig = w;
      w = orig + kGradStep;
      const double up = combined_loss(model, batch, masking, lambda, mask).total;
      w = orig - kGradStep;
      const double down = combined_loss(model, batch, masking, lambda, mask).total;
      w = orig;
      const double numeric = (up - down) / (2 * kGradStep);
      const double analytic = gtensors[t]->data()[idx];
      const double rel =
          std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), kGradFloor});
      ++out.checked;
      if (rel > out.worst) {
        out.worst = rel;
        out.worst_name = tensors[t].first + "[" + std::to_string(idx) + "]";
      }
    }
  }
  return out;
}

// The eight-clip overfit fixture with the default toy geometry.
inline Dataset overfit_dataset(const ModelConfig& c) {
  const auto recs = parse_annotations(data_path("overfit8.json"));
  return build_dataset(recs, c, {});
}

}  // namespace testing_support
