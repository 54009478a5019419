#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "favd/avlformer/config.hpp"
#include "favd/avlformer/features.hpp"
#include "favd/avlformer/mask.hpp"
#include "favd/error.hpp"
#include "favd/rng.hpp"

namespace favd::avl {

using Mat = Eigen::MatrixXd;
using RowVec = Eigen::RowVectorXd;

struct LayerParams {
  Mat ln1_g, ln1_b;
  Mat wq, bq, wk, bk, wv, bv, wo, bo;
  Mat ln2_g, ln2_b;
  Mat w1, b1, w2, b2;

  template <typename Self, typename F>
  static void visit(Self& self, const std::string& prefix, F&& f) {
    f(prefix + "ln1_g", self.ln1_g);
    f(prefix + "ln1_b", self.ln1_b);
    f(prefix + "wq", self.wq);
    f(prefix + "bq", self.bq);
    f(prefix + "wk", self.wk);
    f(prefix + "bk", self.bk);
    f(prefix + "wv", self.wv);
    f(prefix + "bv", self.bv);
    f(prefix + "wo", self.wo);
    f(prefix + "bo", self.bo);
    f(prefix + "ln2_g", self.ln2_g);
    f(prefix + "ln2_b", self.ln2_b);
    f(prefix + "w1", self.w1);
    f(prefix + "b1", self.b1);
    f(prefix + "w2", self.w2);
    f(prefix + "b2", self.b2);
  }
};

// All trainable tensors. Row-vector convention: y = x W + b, biases are 1 x n.
struct Params {
  Mat word_emb;                // vocab x d_text_in
  Mat proj_t_w, proj_t_b;      // d_text_in x d
  Mat proj_v_w, proj_v_b;      // d_vision_in x d
  Mat proj_a_w, proj_a_b;      // d_audio_in x d
  Mat pos_t, pos_v, pos_a;     // segment length x d
  Mat type_emb;                // 3 x d
  std::vector<LayerParams> layers;
  Mat lnf_g, lnf_b;
  Mat head_w, head_b;          // d x vocab

  // Visits every tensor in a fixed order with a stable name.
  template <typename F>
  void for_each(F&& f) {
    visit_impl(*this, std::forward<F>(f));
  }
  template <typename F>
  void for_each(F&& f) const {
    visit_impl(*this, std::forward<F>(f));
  }

  // Same shapes, all zeros.
  Params zeros_like() const {
    Params z = *this;
    z.for_each([](const std::string&, Mat& m) { m.setZero(); });
    return z;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for_each([&](const std::string&, const Mat& m) { n += static_cast<std::size_t>(m.size()); });
    return n;
  }

 private:
  template <typename Self, typename F>
  static void visit_impl(Self& self, F&& f) {
    f("word_emb", self.word_emb);
    f("proj_t_w", self.proj_t_w);
    f("proj_t_b", self.proj_t_b);
    f("proj_v_w", self.proj_v_w);
    f("proj_v_b", self.proj_v_b);
    f("proj_a_w", self.proj_a_w);
    f("proj_a_b", self.proj_a_b);
    f("pos_t", self.pos_t);
    f("pos_v", self.pos_v);
    f("pos_a", self.pos_a);
    f("type_emb", self.type_emb);
    for (std::size_t l = 0; l < self.layers.size(); ++l) {
      LayerParams::visit(self.layers[l], "layer" + std::to_string(l) + ".", f);
    }
    f("lnf_g", self.lnf_g);
    f("lnf_b", self.lnf_b);
    f("head_w", self.head_w);
    f("head_b", self.head_b);
  }
};

inline Params init_params(const ModelConfig& cfg) {
  cfg.check();
  if (cfg.vocab_size <= 0) throw ConfigError("model config: vocab_size must be set");
  Rng rng(cfg.seed);
  const double sd = cfg.init_std;
  auto normal = [&](int r, int c) {
    Mat m(r, c);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = sd * rng.normal();
    }
    return m;
  };
  const int d = cfg.d_model;
  Params p;
  p.word_emb = normal(cfg.vocab_size, cfg.d_text_in);
  p.proj_t_w = normal(cfg.d_text_in, d);
  p.proj_t_b = Mat::Zero(1, d);
  p.proj_v_w = normal(cfg.d_vision_in, d);
  p.proj_v_b = Mat::Zero(1, d);
  p.proj_a_w = normal(cfg.d_audio_in, d);
  p.proj_a_b = Mat::Zero(1, d);
  p.pos_t = normal(cfg.n_text, d);
  p.pos_v = normal(cfg.n_vision, d);
  p.pos_a = normal(cfg.n_audio, d);
  p.type_emb = normal(3, d);
  for (int l = 0; l < cfg.layers; ++l) {
    LayerParams lp;
    lp.ln1_g = Mat::Ones(1, d);
    lp.ln1_b = Mat::Zero(1, d);
    lp.wq = normal(d, d);
    lp.bq = Mat::Zero(1, d);
    lp.wk = normal(d, d);
    lp.bk = Mat::Zero(1, d);
    lp.wv = normal(d, d);
    lp.bv = Mat::Zero(1, d);
    lp.wo = normal(d, d);
    lp.bo = Mat::Zero(1, d);
    lp.ln2_g = Mat::Ones(1, d);
    lp.ln2_b = Mat::Zero(1, d);
    lp.w1 = normal(d, 4 * d);
    lp.b1 = Mat::Zero(1, 4 * d);
    lp.w2 = normal(4 * d, d);
    lp.b2 = Mat::Zero(1, d);
    p.layers.push_back(std::move(lp));
  }
  p.lnf_g = Mat::Ones(1, d);
  p.lnf_b = Mat::Zero(1, d);
  p.head_w = normal(d, cfg.vocab_size);
  p.head_b = Mat::Zero(1, cfg.vocab_size);
  return p;
}

namespace ops {

inline constexpr double kLayerNormEps = 1e-5;

struct LayerNormCache {
  Mat xhat;
  Eigen::VectorXd inv_std;
};

inline Mat layer_norm(const Mat& x, const Mat& g, const Mat& b, LayerNormCache* cache) {
  const auto n = static_cast<double>(x.cols());
  Eigen::VectorXd mean = x.rowwise().sum() / n;
  Mat centered = x.colwise() - mean;
  Eigen::VectorXd var = centered.array().square().rowwise().sum() / n;
  Eigen::VectorXd inv = (var.array() + kLayerNormEps).rsqrt();
  Mat xhat = centered.array().colwise() * inv.array();
  Mat y = (xhat.array().rowwise() * g.row(0).array()).rowwise() + b.row(0).array();
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv);
  }
  return y;
}

// Returns dL/dx; accumulates dL/dg and dL/db.
inline Mat layer_norm_backward(const Mat& dy, const LayerNormCache& c, const Mat& g, Mat& dg,
                               Mat& db) {
  const auto n = static_cast<double>(dy.cols());
  dg += (dy.array() * c.xhat.array()).colwise().sum().matrix();
  db += dy.colwise().sum();
  Mat dxhat = dy.array().rowwise() * g.row(0).array();
  Eigen::VectorXd m1 = dxhat.rowwise().sum() / n;
  Eigen::VectorXd m2 = (dxhat.array() * c.xhat.array()).rowwise().sum() / n;
  Mat dx = (dxhat.colwise() - m1) - (c.xhat.array().colwise() * m2.array()).matrix();
  return dx.array().colwise() * c.inv_std.array();
}

inline double gelu(double u) { return 0.5 * u * (1.0 + std::erf(u / std::numbers::sqrt2)); }

inline double gelu_grad(double u) {
  const double cdf = 0.5 * (1.0 + std::erf(u / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * u * u) * 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
  return cdf + u * pdf;
}

inline Mat affine(const Mat& x, const Mat& w, const Mat& b) {
  Mat y = x * w;
  y.rowwise() += b.row(0);
  return y;
}

// Row softmax over visible keys; masked entries get exactly zero weight and
// a row with no visible key is all zeros.
inline Mat masked_softmax(const Mat& scores, const AttentionMask& mask) {
  const auto n = scores.rows();
  Mat p = Mat::Zero(n, scores.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      if (mask.visible(static_cast<int>(i), static_cast<int>(j))) mx = std::max(mx, scores(i, j));
    }
    if (mx == -std::numeric_limits<double>::infinity()) continue;
    double sum = 0.0;
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      if (mask.visible(static_cast<int>(i), static_cast<int>(j))) {
        p(i, j) = std::exp(scores(i, j) - mx);
        sum += p(i, j);
      }
    }
    p.row(i) /= sum;
  }
  return p;
}

}  // namespace ops

// Inputs of one forward pass. text_ids has exactly n_text entries.
struct ModelInput {
  const std::vector<int>* text_ids = nullptr;
  const ModalityFeatures* features = nullptr;
};

struct LayerCache {
  Mat x_in;
  ops::LayerNormCache ln1;
  Mat h1, q, k, v;
  std::vector<Mat> probs;  // per head, seq x seq
  Mat attn;                // concatenated head outputs
  Mat x_mid;
  ops::LayerNormCache ln2;
  Mat h2, u, g;
};

struct ForwardCache {
  Mat text_in;  // word embeddings of the text ids
  std::vector<LayerCache> layers;
  ops::LayerNormCache lnf;
  Mat final_norm;
};

struct ForwardResult {
  Mat hidden;  // seq x d, output of the last block (before the final norm)
  Mat logits;  // n_text x vocab
};

class Model {
 public:
  Model(ModelConfig cfg, Params params)
      : cfg_(std::move(cfg)), params_(std::move(params)), layout_(ModalityTokenLayout::of(cfg_)) {
    cfg_.check();
  }

  static Model create(const ModelConfig& cfg) { return Model(cfg, init_params(cfg)); }

  const ModelConfig& config() const { return cfg_; }
  const Params& params() const { return params_; }
  Params& params() { return params_; }
  const ModalityTokenLayout& layout() const { return layout_; }

  AttentionMask default_mask() const { return build_attention_mask(layout_, cfg_.mask_type); }

  // Affine projections of the three modalities into d_model, concatenated as
  // text, vision, audio. No position or type embeddings.
  Mat project_features(const Mat& vision, const Mat& audio, const Mat& text_embeddings) const {
    check_shape(text_embeddings, cfg_.n_text, cfg_.d_text_in, "text");
    check_shape(vision, cfg_.n_vision, cfg_.d_vision_in, "vision");
    check_shape(audio, cfg_.n_audio, cfg_.d_audio_in, "audio");
    Mat out(cfg_.seq_len(), cfg_.d_model);
    out.middleRows(layout_.span(Modality::text).begin, cfg_.n_text) =
        ops::affine(text_embeddings, params_.proj_t_w, params_.proj_t_b);
    out.middleRows(layout_.span(Modality::vision).begin, cfg_.n_vision) =
        ops::affine(vision, params_.proj_v_w, params_.proj_v_b);
    out.middleRows(layout_.span(Modality::audio).begin, cfg_.n_audio) =
        ops::affine(audio, params_.proj_a_w, params_.proj_a_b);
    return out;
  }

  Mat text_embeddings(const std::vector<int>& ids) const {
    if (static_cast<int>(ids.size()) != cfg_.n_text) {
      throw ShapeError("text has " + std::to_string(ids.size()) + " ids, expected " +
                           std::to_string(cfg_.n_text),
                       "text");
    }
    Mat t(cfg_.n_text, cfg_.d_text_in);
    for (int i = 0; i < cfg_.n_text; ++i) {
      const int id = ids[static_cast<std::size_t>(i)];
      if (id < 0 || id >= cfg_.vocab_size) {
        throw ShapeError("token id " + std::to_string(id) + " out of vocabulary", "text");
      }
      t.row(i) = params_.word_emb.row(id);
    }
    return t;
  }

  ForwardResult forward(const ModelInput& in, const AttentionMask& mask,
                        ForwardCache* cache = nullptr) const {
    if (!in.text_ids || !in.features) throw ConfigError("forward: missing input");
    if (mask.size() != cfg_.seq_len()) {
      throw ShapeError("mask is " + std::to_string(mask.size()) + " wide, sequence is " +
                           std::to_string(cfg_.seq_len()),
                       "mask");
    }
    Mat text_in = text_embeddings(*in.text_ids);
    Mat x = project_features(in.features->vision, in.features->audio, text_in);
    add_embeddings(x);
    if (!x.allFinite()) throw NumericError("non-finite token embeddings", -1);
    if (cache) {
      cache->text_in = std::move(text_in);
      cache->layers.assign(static_cast<std::size_t>(cfg_.layers), {});
    }

    const int dh = cfg_.head_dim();
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    for (int l = 0; l < cfg_.layers; ++l) {
      const auto& lp = params_.layers[static_cast<std::size_t>(l)];
      LayerCache local;
      LayerCache& c = cache ? cache->layers[static_cast<std::size_t>(l)] : local;
      c.x_in = x;
      c.h1 = ops::layer_norm(x, lp.ln1_g, lp.ln1_b, &c.ln1);
      c.q = ops::affine(c.h1, lp.wq, lp.bq);
      c.k = ops::affine(c.h1, lp.wk, lp.bk);
      c.v = ops::affine(c.h1, lp.wv, lp.bv);
      c.attn.resize(x.rows(), cfg_.d_model);
      c.probs.resize(static_cast<std::size_t>(cfg_.heads));
      for (int h = 0; h < cfg_.heads; ++h) {
        const Mat scores = c.q.middleCols(h * dh, dh) * c.k.middleCols(h * dh, dh).transpose() * scale;
        c.probs[static_cast<std::size_t>(h)] = ops::masked_softmax(scores, mask);
        c.attn.middleCols(h * dh, dh) = c.probs[static_cast<std::size_t>(h)] * c.v.middleCols(h * dh, dh);
      }
      c.x_mid = x + ops::affine(c.attn, lp.wo, lp.bo);
      c.h2 = ops::layer_norm(c.x_mid, lp.ln2_g, lp.ln2_b, &c.ln2);
      c.u = ops::affine(c.h2, lp.w1, lp.b1);
      c.g = c.u.unaryExpr([](double v) { return ops::gelu(v); });
      x = c.x_mid + ops::affine(c.g, lp.w2, lp.b2);
      if (!x.allFinite()) throw NumericError("non-finite activations in layer " + std::to_string(l), l);
    }

    ForwardResult out;
    out.hidden = x;
    ops::LayerNormCache lnf_local;
    Mat normed = ops::layer_norm(x.topRows(cfg_.n_text), params_.lnf_g, params_.lnf_b,
                                 cache ? &cache->lnf : &lnf_local);
    out.logits = ops::affine(normed, params_.head_w, params_.head_b);
    if (!out.logits.allFinite()) throw NumericError("non-finite logits", -1);
    if (cache) cache->final_norm = std::move(normed);
    return out;
  }

  // Accumulates parameter gradients for upstream dL/dlogits into `grads`.
  void backward(const ModelInput& in, const ForwardCache& c, const Mat& dlogits,
                Params& grads) const {
    const auto& p = params_;
    const int d = cfg_.d_model;
    const int n = cfg_.seq_len();
    const int dh = cfg_.head_dim();
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    grads.head_w += c.final_norm.transpose() * dlogits;
    grads.head_b += dlogits.colwise().sum();
    Mat dnorm = dlogits * p.head_w.transpose();
    Mat dx = Mat::Zero(n, d);
    dx.topRows(cfg_.n_text) = ops::layer_norm_backward(dnorm, c.lnf, p.lnf_g, grads.lnf_g, grads.lnf_b);

    for (int l = cfg_.layers - 1; l >= 0; --l) {
      const auto& lp = p.layers[static_cast<std::size_t>(l)];
      auto& gl = grads.layers[static_cast<std::size_t>(l)];
      const auto& lc = c.layers[static_cast<std::size_t>(l)];

      // x_out = x_mid + gelu(h2 w1 + b1) w2 + b2
      gl.w2 += lc.g.transpose() * dx;
      gl.b2 += dx.colwise().sum();
      Mat dg = dx * lp.w2.transpose();
      Mat du = dg.array() * lc.u.unaryExpr([](double v) { return ops::gelu_grad(v); }).array();
      gl.w1 += lc.h2.transpose() * du;
      gl.b1 += du.colwise().sum();
      Mat dh2 = du * lp.w1.transpose();
      Mat dx_mid = dx + ops::layer_norm_backward(dh2, lc.ln2, lp.ln2_g, gl.ln2_g, gl.ln2_b);

      // x_mid = x_in + attn wo + bo
      gl.wo += lc.attn.transpose() * dx_mid;
      gl.bo += dx_mid.colwise().sum();
      Mat dattn = dx_mid * lp.wo.transpose();
      Mat dq(n, d), dk(n, d), dv(n, d);
      for (int h = 0; h < cfg_.heads; ++h) {
        const Mat& P = lc.probs[static_cast<std::size_t>(h)];
        const auto dO = dattn.middleCols(h * dh, dh);
        Mat dP = dO * lc.v.middleCols(h * dh, dh).transpose();
        dv.middleCols(h * dh, dh) = P.transpose() * dO;
        Eigen::VectorXd rowdot = (dP.array() * P.array()).rowwise().sum();
        Mat dS = P.array() * (dP.colwise() - rowdot).array();
        dq.middleCols(h * dh, dh) = dS * lc.k.middleCols(h * dh, dh) * scale;
        dk.middleCols(h * dh, dh) = dS.transpose() * lc.q.middleCols(h * dh, dh) * scale;
      }
      gl.wq += lc.h1.transpose() * dq;
      gl.bq += dq.colwise().sum();
      gl.wk += lc.h1.transpose() * dk;
      gl.bk += dk.colwise().sum();
      gl.wv += lc.h1.transpose() * dv;
      gl.bv += dv.colwise().sum();
      Mat dh1 = dq * lp.wq.transpose() + dk * lp.wk.transpose() + dv * lp.wv.transpose();
      dx = dx_mid + ops::layer_norm_backward(dh1, lc.ln1, lp.ln1_g, gl.ln1_g, gl.ln1_b);
    }

    // Embedding layer.
    const auto& ts = layout_.span(Modality::text);
    const auto& vs = layout_.span(Modality::vision);
    const auto& as = layout_.span(Modality::audio);
    const Mat dxt = dx.middleRows(ts.begin, ts.size());
    const Mat dxv = dx.middleRows(vs.begin, vs.size());
    const Mat dxa = dx.middleRows(as.begin, as.size());
    grads.proj_t_w += c.text_in.transpose() * dxt;
    grads.proj_t_b += dxt.colwise().sum();
    grads.proj_v_w += in.features->vision.transpose() * dxv;
    grads.proj_v_b += dxv.colwise().sum();
    grads.proj_a_w += in.features->audio.transpose() * dxa;
    grads.proj_a_b += dxa.colwise().sum();
    if (cfg_.position_embeddings) {
      grads.pos_t += dxt;
      grads.pos_v += dxv;
      grads.pos_a += dxa;
    }
    grads.type_emb.row(0) += dxt.colwise().sum();
    if (vs.size() > 0) grads.type_emb.row(1) += dxv.colwise().sum();
    if (as.size() > 0) grads.type_emb.row(2) += dxa.colwise().sum();
    const Mat dtext = dxt * p.proj_t_w.transpose();
    for (int i = 0; i < cfg_.n_text; ++i) {
      grads.word_emb.row((*in.text_ids)[static_cast<std::size_t>(i)]) += dtext.row(i);
    }
  }

 private:
  static void check_shape(const Mat& m, int rows, int cols, const char* modality) {
    if (m.rows() != rows || m.cols() != cols) {
      throw ShapeError(std::string(modality) + " input is " + std::to_string(m.rows()) + "x" +
                           std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
                           std::to_string(cols),
                       modality);
    }
  }

  void add_embeddings(Mat& x) const {
    const auto& ts = layout_.span(Modality::text);
    const auto& vs = layout_.span(Modality::vision);
    const auto& as = layout_.span(Modality::audio);
    if (cfg_.position_embeddings) {
      x.middleRows(ts.begin, ts.size()) += params_.pos_t;
      x.middleRows(vs.begin, vs.size()) += params_.pos_v;
      x.middleRows(as.begin, as.size()) += params_.pos_a;
    }
    x.middleRows(ts.begin, ts.size()).rowwise() += params_.type_emb.row(0);
    x.middleRows(vs.begin, vs.size()).rowwise() += params_.type_emb.row(1);
    x.middleRows(as.begin, as.size()).rowwise() += params_.type_emb.row(2);
  }

  ModelConfig cfg_;
  Params params_;
  ModalityTokenLayout layout_;
};

}  // namespace favd::avl
