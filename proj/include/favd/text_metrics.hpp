#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "favd/embedding.hpp"
#include "favd/entity_score.hpp"
#include "favd/error.hpp"

namespace favd {

using Tokens = std::vector<std::string>;

// Counts of every n-gram of one order.
struct NGramProfile {
  int n = 1;
  std::map<Tokens, int> counts;

  static NGramProfile of(const Tokens& tokens, int n) {
    NGramProfile p;
    p.n = n;
    if (tokens.size() < static_cast<std::size_t>(n)) return p;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
      ++p.counts[Tokens(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                        tokens.begin() + static_cast<std::ptrdiff_t>(i) + n)];
    }
    return p;
  }

  int total() const {
    int t = 0;
    for (const auto& [_, c] : counts) t += c;
    return t;
  }
};

// ---------------------------------------------------------------------------
// BLEU

// Sufficient statistics for BLEU up to order 4; additive over segments.
struct BleuStats {
  std::array<double, 4> matches{};
  std::array<double, 4> totals{};
  double hyp_len = 0.0;
  double ref_len = 0.0;

  BleuStats& operator+=(const BleuStats& o) {
    for (int k = 0; k < 4; ++k) {
      matches[k] += o.matches[k];
      totals[k] += o.totals[k];
    }
    hyp_len += o.hyp_len;
    ref_len += o.ref_len;
    return *this;
  }
};

// Clipped n-gram matches against the per-n-gram maximum over references; the
// reference length is the closest one (ties to the shorter).
inline BleuStats bleu_stats(const Tokens& pred, const std::vector<Tokens>& refs) {
  if (refs.empty()) throw ConfigError("bleu: no references");
  BleuStats st;
  st.hyp_len = static_cast<double>(pred.size());
  std::size_t best = refs.front().size();
  for (const auto& r : refs) {
    const auto d = [&](std::size_t len) {
      return len > pred.size() ? len - pred.size() : pred.size() - len;
    };
    if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) best = r.size();
  }
  st.ref_len = static_cast<double>(best);
  for (int n = 1; n <= 4; ++n) {
    const auto hyp = NGramProfile::of(pred, n);
    std::map<Tokens, int> max_ref;
    for (const auto& r : refs) {
      for (const auto& [g, c] : NGramProfile::of(r, n).counts) {
        auto& m = max_ref[g];
        m = std::max(m, c);
      }
    }
    double match = 0.0;
    for (const auto& [g, c] : hyp.counts) {
      auto it = max_ref.find(g);
      if (it != max_ref.end()) match += std::min(c, it->second);
    }
    st.matches[n - 1] = match;
    st.totals[n - 1] = hyp.total();
  }
  return st;
}

inline double brevity_penalty(double hyp_len, double ref_len) {
  if (hyp_len <= 0.0) return 0.0;
  return hyp_len < ref_len ? std::exp(1.0 - ref_len / hyp_len) : 1.0;
}

inline constexpr double kBleuEpsilon = 1e-9;

// Geometric mean of modified precisions 1..n times the brevity penalty.
// Smoothed: a zero numerator is replaced by kBleuEpsilon (sentence level).
// Unsmoothed: any zero precision makes the score 0 (corpus level).
inline double bleu_from_stats(const BleuStats& st, int n, bool smooth) {
  if (n < 1 || n > 4) throw ConfigError("bleu: order must be in 1..4");
  double log_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    double m = st.matches[k];
    const double t = std::max(st.totals[k], 1.0);
    if (m == 0.0) {
      if (!smooth) return 0.0;
      m = kBleuEpsilon;
    }
    log_sum += std::log(m / t);
  }
  return brevity_penalty(st.hyp_len, st.ref_len) * std::exp(log_sum / n);
}

// Sentence-level BLEU-n with uniform weights.
inline double bleu(const Tokens& pred, const std::vector<Tokens>& refs, int n) {
  if (pred.empty()) throw ConfigError("bleu: empty prediction");
  return bleu_from_stats(bleu_stats(pred, refs), n, /*smooth=*/true);
}

// Corpus BLEU-n: statistics pooled over all segments before the geometric mean.
inline double corpus_bleu(const std::vector<Tokens>& preds,
                          const std::vector<std::vector<Tokens>>& refs, int n) {
  if (preds.size() != refs.size()) throw ConfigError("corpus_bleu: size mismatch");
  if (preds.empty()) throw EmptyInputError("corpus_bleu: no segments");
  BleuStats total;
  for (std::size_t i = 0; i < preds.size(); ++i) total += bleu_stats(preds[i], refs[i]);
  return bleu_from_stats(total, n, /*smooth=*/false);
}

// ---------------------------------------------------------------------------
// ROUGE-L

inline std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// beta > 1 weights recall; 1.2 is the captioning-toolkit convention.
inline constexpr double kRougeBeta = 1.2;

// LCS F-measure (1 + b^2) P R / (R + b^2 P).
inline double rouge_l(const Tokens& pred, const Tokens& ref, double beta = kRougeBeta) {
  if (pred.empty() || ref.empty()) throw ConfigError("rouge_l: empty input");
  const auto lcs = static_cast<double>(lcs_length(pred, ref));
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(pred.size());
  const double r = lcs / static_cast<double>(ref.size());
  const double b2 = beta * beta;
  return (1.0 + b2) * p * r / (r + b2 * p);
}

// ---------------------------------------------------------------------------
// CIDEr

// TF-IDF n-gram cosine (n = 1..4) averaged over orders and references, scaled
// by 10. Document frequencies come from the reference sets (one document per
// clip) and are frozen at construction.
class CiderScorer {
 public:
  explicit CiderScorer(const std::vector<std::vector<Tokens>>& refs_per_clip)
      : refs_(refs_per_clip) {
    if (refs_.size() < 2) throw ConfigError("cider: need at least two reference documents");
    for (const auto& refs : refs_) {
      std::map<Tokens, bool> in_doc;
      for (const auto& r : refs) {
        for (int n = 1; n <= 4; ++n) {
          for (const auto& [g, _] : NGramProfile::of(r, n).counts) in_doc[g] = true;
        }
      }
      for (const auto& [g, _] : in_doc) ++df_[g];
    }
    log_docs_ = std::log(static_cast<double>(refs_.size()));
    degenerate_ = std::all_of(refs_.begin(), refs_.end(),
                              [&](const auto& r) { return r == refs_.front(); });
  }

  // Every document identical: all idf weights vanish and scores are 0.
  bool degenerate() const { return degenerate_; }
  std::size_t documents() const { return refs_.size(); }

  double score(const Tokens& pred, std::size_t clip) const { return score(pred, refs_.at(clip)); }

  double score(const Tokens& pred, const std::vector<Tokens>& refs) const {
    if (refs.empty()) throw ConfigError("cider: no references");
    double total = 0.0;
    for (int n = 1; n <= 4; ++n) {
      const auto vp = tfidf(pred, n);
      double per_n = 0.0;
      for (const auto& r : refs) per_n += cosine_sparse(vp, tfidf(r, n));
      total += per_n / static_cast<double>(refs.size());
    }
    return 10.0 * total / 4.0;
  }

 private:
  using Sparse = std::map<Tokens, double>;

  Sparse tfidf(const Tokens& t, int n) const {
    Sparse v;
    for (const auto& [g, c] : NGramProfile::of(t, n).counts) {
      auto it = df_.find(g);
      const double df = it == df_.end() ? 1.0 : static_cast<double>(it->second);
      v[g] = static_cast<double>(c) * (log_docs_ - std::log(df));
    }
    return v;
  }

  static double cosine_sparse(const Sparse& a, const Sparse& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [g, x] : a) {
      na += x * x;
      if (auto it = b.find(g); it != b.end()) dot += x * it->second;
    }
    for (const auto& [_, y] : b) nb += y * y;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
  }

  std::vector<std::vector<Tokens>> refs_;
  std::map<Tokens, int> df_;
  double log_docs_ = 0.0;
  bool degenerate_ = false;
};

// ---------------------------------------------------------------------------
// CLIPScore

struct ClipScoreConfig {
  double w = 2.5;
  int frames = 1;  // 1 or 32
  bool use_reference = false;

  void check() const {
    if (!(w > 0.0)) throw ConfigError("clipscore: w must be positive");
    if (frames != 1 && frames != 32) throw ConfigError("clipscore: frames must be 1 or 32");
  }
};

struct ClipScoreResult {
  double score = 0.0;
  // Harmonic mean with the best text-reference similarity; set when requested.
  std::optional<double> ref_score;
};

// Per frame w * max(cos(image, text), 0), averaged over the first cfg.frames
// frames (all of them if fewer are available).
inline ClipScoreResult clip_score(const std::vector<MediaSignal>& frames, std::string_view caption,
                                  const Embedder* embedder, const ClipScoreConfig& cfg = {},
                                  const std::vector<std::string>& refs = {}) {
  cfg.check();
  if (!embedder) throw ConfigError("clipscore: no embedder configured");
  if (frames.empty()) throw EmptyInputError("clipscore: no frames");
  const auto et = embedder->embed_text(caption);
  const auto used = std::min<std::size_t>(frames.size(), static_cast<std::size_t>(cfg.frames));
  double sum = 0.0;
  for (std::size_t i = 0; i < used; ++i) {
    sum += cfg.w * std::max(cosine(embedder->embed_image(frames[i]), et), 0.0);
  }
  ClipScoreResult res;
  res.score = sum / static_cast<double>(used);
  if (cfg.use_reference) {
    if (refs.empty()) throw ConfigError("clipscore: reference variant needs references");
    double best = -1.0;
    for (const auto& r : refs) best = std::max(best, cosine(et, embedder->embed_text(r)));
    res.ref_score = harmonic_mean(res.score, std::max(best, 0.0));
  }
  return res;
}

}  // namespace favd
