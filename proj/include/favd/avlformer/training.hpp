#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "favd/avlformer/container.hpp"
#include "favd/avlformer/features.hpp"
#include "favd/avlformer/model.hpp"
#include "favd/avlformer/vocab.hpp"
#include "favd/error.hpp"
#include "favd/rng.hpp"

namespace favd::avl {

inline constexpr int kIgnoreLabel = -1;

struct Example {
  std::string video_id;
  std::vector<int> ids;  // encoded, length n_text
  ModalityFeatures features;
};

struct MlmMasking {
  std::vector<int> masked_ids;
  std::vector<int> labels;  // original id at masked positions, kIgnoreLabel elsewhere

  std::size_t masked_count() const {
    return static_cast<std::size_t>(
        std::count_if(labels.begin(), labels.end(), [](int l) { return l != kIgnoreLabel; }));
  }
};

// BOS, EOS and PAD are never candidates.
inline bool mlm_eligible(int id) {
  return id != Vocabulary::kBos && id != Vocabulary::kEos && id != Vocabulary::kPad;
}

inline MlmMasking apply_mlm_masking(const std::vector<int>& ids, double mask_prob, Rng& rng) {
  MlmMasking m{ids, std::vector<int>(ids.size(), kIgnoreLabel)};
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!mlm_eligible(ids[i])) continue;
    if (rng.bernoulli(mask_prob)) {
      m.masked_ids[i] = Vocabulary::kMask;
      m.labels[i] = ids[i];
    }
  }
  return m;
}

struct LossBreakdown {
  double mlm = 0.0;
  double alm = 0.0;
  double total = 0.0;
  bool mlm_empty = false;  // no masked position in the batch, mlm forced to 0
};

inline double combine(double lambda, double mlm, double alm) {
  return lambda * mlm + (1.0 - lambda) * alm;
}

namespace detail {

// Sum of cross-entropies over labelled rows; writes softmax - onehot into
// `dlogits` scaled by `weight` when requested.
inline double cross_entropy(const Mat& logits, const std::vector<int>& targets, double weight,
                            Mat* dlogits) {
  double sum = 0.0;
  if (dlogits) dlogits->setZero(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const int t = targets[static_cast<std::size_t>(i)];
    if (t == kIgnoreLabel) continue;
    const double mx = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - mx).exp();
    const double z = e.sum();
    sum += std::log(z) + mx - logits(i, t);
    if (dlogits) {
      dlogits->row(i) = e / z * weight;
      (*dlogits)(i, t) -= weight;
    }
  }
  return sum;
}

inline std::vector<int> alm_targets(const std::vector<int>& ids) {
  std::vector<int> t(ids.size(), kIgnoreLabel);
  for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
    if (ids[i + 1] != Vocabulary::kPad) t[i] = ids[i + 1];
  }
  return t;
}

}  // namespace detail

// Token-mean losses over the whole batch. The MLM term comes from a forward
// pass on the masked ids, the ALM term from a pass on the clean ids; both use
// the same attention mask. Gradients of `total` are accumulated into `grads`
// when it is given.
inline LossBreakdown combined_loss(const Model& model, const std::vector<const Example*>& batch,
                                   const std::vector<MlmMasking>& masking, double lambda,
                                   const AttentionMask& mask, Params* grads = nullptr) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must be in [0, 1]");
  if (masking.size() != batch.size()) throw ConfigError("combined_loss: masking/batch size mismatch");
  std::size_t n_mlm = 0;
  std::size_t n_alm = 0;
  std::vector<std::vector<int>> alm(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    n_mlm += masking[b].masked_count();
    alm[b] = detail::alm_targets(batch[b]->ids);
    n_alm += static_cast<std::size_t>(
        std::count_if(alm[b].begin(), alm[b].end(), [](int t) { return t != kIgnoreLabel; }));
  }
  if (n_alm == 0) throw EmptyInputError("combined_loss: batch has no language-model targets");

  const double w_mlm = n_mlm ? lambda / static_cast<double>(n_mlm) : 0.0;
  const double w_alm = (1.0 - lambda) / static_cast<double>(n_alm);
  double mlm_sum = 0.0;
  double alm_sum = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Example& ex = *batch[b];
    ex.features.check(model.config());
    if (n_mlm > 0 && masking[b].masked_count() > 0) {
      ForwardCache cache;
      ModelInput in{&masking[b].masked_ids, &ex.features};
      const auto out = model.forward(in, mask, grads ? &cache : nullptr);
      Mat d;
      mlm_sum += detail::cross_entropy(out.logits, masking[b].labels, w_mlm, grads ? &d : nullptr);
      if (grads && w_mlm != 0.0) model.backward(in, cache, d, *grads);
    }
    ForwardCache cache;
    ModelInput in{&ex.ids, &ex.features};
    const auto out = model.forward(in, mask, grads ? &cache : nullptr);
    Mat d;
    alm_sum += detail::cross_entropy(out.logits, alm[b], w_alm, grads ? &d : nullptr);
    if (grads && w_alm != 0.0) model.backward(in, cache, d, *grads);
  }

  LossBreakdown r;
  r.mlm_empty = n_mlm == 0;
  r.mlm = n_mlm ? mlm_sum / static_cast<double>(n_mlm) : 0.0;
  r.alm = alm_sum / static_cast<double>(n_alm);
  r.total = combine(lambda, r.mlm, r.alm);
  return r;
}

// Linear warm-up over the first warmup_fraction of steps, then linear decay
// to zero at the last step. `step` counts from 0.
inline double learning_rate(const TrainConfig& c, int step) {
  const int warm = std::max(1, static_cast<int>(std::ceil(c.warmup_fraction * c.steps)));
  if (step < warm) return c.peak_lr * static_cast<double>(step + 1) / warm;
  const int rest = std::max(1, c.steps - warm);
  return c.peak_lr * std::max(0.0, static_cast<double>(c.steps - step) / rest);
}

class Adam {
 public:
  Adam(const Params& like, const TrainConfig& c)
      : m_(like.zeros_like()), v_(like.zeros_like()), b1_(c.adam_beta1), b2_(c.adam_beta2), eps_(c.adam_eps) {}

  void step(Params& p, const Params& g, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, t_);
    const double c2 = 1.0 - std::pow(b2_, t_);
    std::vector<Mat*> ps, ms, vs;
    std::vector<const Mat*> gs;
    p.for_each([&](const std::string&, Mat& x) { ps.push_back(&x); });
    m_.for_each([&](const std::string&, Mat& x) { ms.push_back(&x); });
    v_.for_each([&](const std::string&, Mat& x) { vs.push_back(&x); });
    g.for_each([&](const std::string&, const Mat& x) { gs.push_back(&x); });
    for (std::size_t i = 0; i < ps.size(); ++i) {
      *ms[i] = b1_ * *ms[i] + (1.0 - b1_) * *gs[i];
      *vs[i] = b2_ * *vs[i] + (1.0 - b2_) * gs[i]->cwiseProduct(*gs[i]);
      *ps[i] -= (lr * (ms[i]->array() / c1) / ((vs[i]->array() / c2).sqrt() + eps_)).matrix();
    }
  }

  int steps_taken() const { return t_; }

 private:
  Params m_, v_;
  double b1_, b2_, eps_;
  int t_ = 0;
};

inline constexpr std::string_view kCheckpointFormat = "favd-avlformer-1";

struct Checkpoint {
  ModelConfig config;
  Vocabulary vocab;
  Params params;
  int step = 0;
};

inline Container to_container(const Checkpoint& ck) {
  Container c;
  ck.params.for_each([&](const std::string& name, const Mat& m) { c.arrays.push_back(to_array(name, m)); });
  c.meta["format"] = kCheckpointFormat;
  c.meta["config"] = to_json(ck.config);
  c.meta["vocab"] = ck.vocab.words();
  c.meta["step"] = ck.step;
  return c;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  write_container(path, to_container(ck));
}

// Parameters are stored as float32, so a reload is exact only up to that
// rounding.
inline Checkpoint from_container(const Container& c) {
  const auto fmt = c.meta.value("format", std::string{});
  if (fmt != kCheckpointFormat) {
    throw VersionError("checkpoint format '" + fmt + "' is not '" + std::string(kCheckpointFormat) + "'");
  }
  Checkpoint ck;
  try {
    ck.config = model_config_from_json(c.meta.at("config"));
    ck.vocab = Vocabulary(c.meta.at("vocab").get<std::vector<std::string>>());
    ck.step = c.meta.value("step", 0);
  } catch (const nlohmann::json::exception& e) {
    throw VersionError(std::string("checkpoint metadata unreadable: ") + e.what());
  }
  if (ck.config.vocab_size != ck.vocab.size()) {
    throw VersionError("checkpoint vocabulary has " + std::to_string(ck.vocab.size()) +
                       " tokens, config says " + std::to_string(ck.config.vocab_size));
  }
  ck.params = init_params(ck.config);
  ck.params.for_each([&](const std::string& name, Mat& m) {
    const auto* a = c.find(name);
    if (!a) throw VersionError("checkpoint lacks tensor '" + name + "'");
    Mat loaded = to_matrix(*a);
    if (loaded.rows() != m.rows() || loaded.cols() != m.cols()) {
      throw VersionError("checkpoint tensor '" + name + "' has an incompatible shape");
    }
    m = std::move(loaded);
  });
  return ck;
}

inline Checkpoint load_checkpoint(const std::string& path) { return from_container(read_container(path)); }

struct TrainResult {
  Checkpoint checkpoint;  // last good parameters
  std::vector<LossBreakdown> losses;
  bool diverged = false;
  std::string divergence_reason;
};

using CheckpointHook = std::function<void(const Checkpoint&)>;

// Batches are drawn in a seeded order: the dataset is reshuffled at each
// epoch boundary and consumed in slices of batch_size.
inline TrainResult train_loop(const std::vector<Example>& data, const ModelConfig& model_cfg,
                              const Vocabulary& vocab, const TrainConfig& tc,
                              const CheckpointHook& on_checkpoint = {}) {
  if (data.empty()) throw EmptyInputError("train_loop: empty dataset");
  if (tc.steps <= 0 || tc.batch_size <= 0) throw ConfigError("train config: steps and batch_size must be positive");
  ModelConfig cfg = model_cfg;
  cfg.vocab_size = vocab.size();
  Model model = Model::create(cfg);
  const AttentionMask mask = model.default_mask();
  Adam adam(model.params(), tc);
  Rng order_rng(tc.seed);
  Rng mask_rng(tc.seed ^ 0x9E3779B97F4A7C15ull);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();

  TrainResult result;
  result.checkpoint = {cfg, vocab, model.params(), 0};
  for (int step = 0; step < tc.steps; ++step) {
    std::vector<const Example*> batch;
    std::vector<MlmMasking> masking;
    for (int b = 0; b < tc.batch_size && b < static_cast<int>(data.size()); ++b) {
      if (cursor == order.size()) {
        order_rng.shuffle(std::span<std::size_t>(order));
        cursor = 0;
      }
      batch.push_back(&data[order[cursor++]]);
      masking.push_back(apply_mlm_masking(batch.back()->ids, cfg.mask_prob, mask_rng));
    }
    Params grads = model.params().zeros_like();
    LossBreakdown loss;
    try {
      loss = combined_loss(model, batch, masking, cfg.lambda, mask, &grads);
    } catch (const NumericError& e) {
      result.diverged = true;
      result.divergence_reason = e.what();
      break;
    }
    if (!std::isfinite(loss.total)) {
      result.diverged = true;
      result.divergence_reason = "loss is not finite at step " + std::to_string(step);
      break;
    }
    result.losses.push_back(loss);
    adam.step(model.params(), grads, learning_rate(tc, step));
    bool finite = true;
    model.params().for_each([&](const std::string&, const Mat& m) { finite = finite && m.allFinite(); });
    if (!finite) {
      result.diverged = true;
      result.divergence_reason = "parameters are not finite after step " + std::to_string(step);
      break;
    }
    result.checkpoint.params = model.params();
    result.checkpoint.step = step + 1;
    if (on_checkpoint && tc.checkpoint_every > 0 && (step + 1) % tc.checkpoint_every == 0) {
      on_checkpoint(result.checkpoint);
    }
  }
  return result;
}

}  // namespace favd::avl
