#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "favd/embedding.hpp"
#include "favd/error.hpp"
#include "favd/text.hpp"

namespace favd {

// f(x) = a * exp(-b * exp(-c * x)). The defaults pin f(1) = 1 and f(0) = 0.5.
struct GompertzParams {
  double a = std::exp(0.69 * std::exp(-10.0));
  double b = 0.693;
  double c = 10.0;
};

inline double gompertz(double x, const GompertzParams& p = {}) {
  return p.a * std::exp(-p.b * std::exp(-p.c * x));
}

struct AudioScoreResult {
  // Mixed audio-text / audio-visual agreement in [0, 1].
  double s = 0.0;
  // gompertz(s) of the last-sentence selection (equal to top1).
  double score = 0.0;
  double top1 = 0.0;
  double top2 = 0.0;
};

// s = (cos(e_a, e_t) / 2 + cos(e_a, e_v) / 2 + 1) / 2, score = f(s).
inline AudioScoreResult audio_score(const EmbeddingVector& e_a, const EmbeddingVector& e_v,
                                    const EmbeddingVector& e_t, const GompertzParams& params = {}) {
  if (e_a.dim() != e_v.dim() || e_a.dim() != e_t.dim()) {
    throw ConfigError("audio_score: embedding dimensions differ (" + std::to_string(e_a.dim()) +
                      ", " + std::to_string(e_v.dim()) + ", " + std::to_string(e_t.dim()) + ")");
  }
  if (e_a.is_zero() || e_v.is_zero() || e_t.is_zero()) {
    throw DegenerateEmbeddingError("audio_score: zero embedding");
  }
  AudioScoreResult r;
  r.s = (0.5 * cosine(e_a, e_t) + 0.5 * cosine(e_a, e_v) + 1.0) * 0.5;
  r.score = gompertz(r.s, params);
  r.top1 = r.score;
  r.top2 = r.score;
  return r;
}

// Last k (1 or 2) sentences of a description, in order.
inline std::vector<std::string> select_audio_sentences(std::string_view description, int k) {
  if (k != 1 && k != 2) throw ConfigError("select_audio_sentences: k must be 1 or 2");
  auto sentences = text::split_sentences(description);
  if (sentences.empty()) throw EmptyInputError("select_audio_sentences: empty description");
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), sentences.size());
  return {sentences.end() - static_cast<std::ptrdiff_t>(take), sentences.end()};
}

// Top-1 scores the last sentence; Top-2 keeps the better of the last sentence
// and the last two sentences joined. The visual embedding is the renormalized
// mean of the per-frame embeddings.
inline AudioScoreResult audio_score_topk(const MediaSignal& audio,
                                         const std::vector<MediaSignal>& frames,
                                         std::string_view description, const Embedder& embedder,
                                         const GompertzParams& params = {}) {
  if (frames.empty()) throw EmptyInputError("audio_score_topk: no frames");
  const EmbeddingVector e_a = embedder.embed_audio(audio);
  std::vector<EmbeddingVector> per_frame;
  per_frame.reserve(frames.size());
  for (const auto& f : frames) per_frame.push_back(embedder.embed_image(f));
  const EmbeddingVector e_v = mean_pool(per_frame);

  const auto last1 = select_audio_sentences(description, 1);
  const auto last2 = select_audio_sentences(description, 2);
  AudioScoreResult r = audio_score(e_a, e_v, embedder.embed_text(last1.front()), params);
  r.top1 = r.score;
  r.top2 = r.score;
  if (last2.size() == 2) {
    const auto two = audio_score(e_a, e_v, embedder.embed_text(text::join(last2, " ")), params);
    r.top2 = std::max(r.top1, two.score);
  }
  return r;
}

}  // namespace favd
