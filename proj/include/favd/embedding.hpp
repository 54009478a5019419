#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "favd/error.hpp"
#include "favd/rng.hpp"
#include "favd/text.hpp"

namespace favd {

// Dense embedding. Values are kept in double so metric oracles can be matched
// to 1e-9; plugin boundaries hand over float32 and widen on entry.
struct EmbeddingVector {
  std::vector<double> values;

  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> v) : values(std::move(v)) {}
  static EmbeddingVector from_float(const std::vector<float>& v) {
    return EmbeddingVector(std::vector<double>(v.begin(), v.end()));
  }

  std::size_t dim() const { return values.size(); }

  double norm() const {
    double s = 0.0;
    for (double x : values) s += x * x;
    return std::sqrt(s);
  }

  bool is_zero() const {
    for (double x : values) {
      if (x != 0.0) return false;
    }
    return true;
  }

  bool is_finite() const {
    for (double x : values) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  }
};

inline double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw ConfigError("embedding dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                      std::to_string(b.dim()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a.values[i] * b.values[i];
  return s;
}

// Unit-norm copy; the zero vector is returned unchanged.
inline EmbeddingVector normalized(EmbeddingVector v) {
  const double n = v.norm();
  if (n > 0.0) {
    for (double& x : v.values) x /= n;
  }
  return v;
}

inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw DegenerateEmbeddingError("cosine of a zero vector");
  if (a.values == b.values) return 1.0;
  const double c = dot(a, b) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

// Mean of the inputs, renormalized.
inline EmbeddingVector mean_pool(const std::vector<EmbeddingVector>& vs) {
  if (vs.empty()) throw EmptyInputError("mean_pool of no embeddings");
  EmbeddingVector out(std::vector<double>(vs.front().dim(), 0.0));
  for (const auto& v : vs) {
    if (v.dim() != out.dim()) throw ConfigError("mean_pool: dimension mismatch");
    for (std::size_t i = 0; i < v.dim(); ++i) out.values[i] += v.values[i];
  }
  for (double& x : out.values) x /= static_cast<double>(vs.size());
  return normalized(std::move(out));
}

// Feature-hashing text embedder: every lowercased token adds one to
// coordinate fnv1a64(token) mod dim; the count vector is L2-normalized.
// Empty text maps to the first basis vector.
inline EmbeddingVector hash_embed(std::string_view s, std::size_t dim) {
  if (dim < 2) throw ConfigError("hash_embed: dim must be at least 2");
  EmbeddingVector v(std::vector<double>(dim, 0.0));
  const auto tokens = text::tokenize(s);
  if (tokens.empty()) {
    v.values[0] = 1.0;
    return v;
  }
  for (const auto& t : tokens) v.values[fnv1a64(t) % dim] += 1.0;
  return normalized(std::move(v));
}

// Audio waveform or video frame as seen by the embedders. `data` carries raw
// samples/pixels/features; `label` is an optional surrogate description used
// by desk-scale embedders that cannot interpret raw signals.
struct MediaSignal {
  std::vector<float> data;
  std::string label;
};

// Embedding provider for the three modalities. All outputs of one provider
// share dim(). Providers that are not safe for concurrent calls report
// concurrent_safe() == false and the harness serializes them.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual bool concurrent_safe() const { return true; }
  virtual EmbeddingVector embed_text(std::string_view text) const = 0;
  virtual EmbeddingVector embed_audio(const MediaSignal& audio) const = 0;
  virtual EmbeddingVector embed_image(const MediaSignal& frame) const = 0;
};

// Deterministic built-in provider. Text goes through hash_embed. A media
// signal with a label is embedded as that label's text; otherwise its data is
// pushed through a fixed Gaussian random projection (seeded by modality and
// input index) and normalized.
class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dim = 512) : dim_(dim) {
    if (dim < 2) throw ConfigError("hash embedder: dim must be at least 2");
  }

  std::string name() const override { return "hash:" + std::to_string(dim_); }
  std::size_t dim() const override { return dim_; }

  EmbeddingVector embed_text(std::string_view t) const override { return hash_embed(t, dim_); }
  EmbeddingVector embed_audio(const MediaSignal& a) const override { return embed_media(a, 0xA0D10); }
  EmbeddingVector embed_image(const MediaSignal& f) const override { return embed_media(f, 0x1A6E); }

 private:
  EmbeddingVector embed_media(const MediaSignal& m, std::uint64_t salt) const {
    if (!m.label.empty()) return hash_embed(m.label, dim_);
    EmbeddingVector v(std::vector<double>(dim_, 0.0));
    for (std::size_t i = 0; i < m.data.size(); ++i) {
      if (m.data[i] == 0.0f) continue;
      Rng row(salt * 0x9E3779B97F4A7C15ULL + i);
      for (std::size_t j = 0; j < dim_; ++j) v.values[j] += m.data[i] * row.normal();
    }
    return normalized(std::move(v));
  }

  std::size_t dim_;
};

// Named embedder providers. "hash" and "hash:<dim>" are built in; more can be
// registered at startup.
class EmbedderRegistry {
 public:
  using Factory = std::function<std::unique_ptr<Embedder>(std::string_view arg)>;

  static EmbedderRegistry& instance() {
    static EmbedderRegistry registry;
    return registry;
  }

  void add(std::string name, Factory f) { factories_[std::move(name)] = std::move(f); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : factories_) out.push_back(k);
    return out;
  }

  // `spec` is NAME or NAME:ARG.
  std::unique_ptr<Embedder> make(std::string_view spec) const {
    const auto colon = spec.find(':');
    const std::string name(spec.substr(0, colon));
    const std::string_view arg = colon == std::string_view::npos ? "" : spec.substr(colon + 1);
    auto it = factories_.find(name);
    if (it == factories_.end()) throw ConfigError("unknown embedder '" + name + "'");
    return it->second(arg);
  }

 private:
  EmbedderRegistry() {
    add("hash", [](std::string_view arg) {
      std::size_t dim = 512;
      if (!arg.empty()) {
        try {
          dim = std::stoul(std::string(arg));
        } catch (const std::exception&) {
          throw ConfigError("hash embedder: bad dimension '" + std::string(arg) + "'");
        }
      }
      return std::make_unique<HashEmbedder>(dim);
    });
  }

  std::map<std::string, Factory> factories_;
};

// CLI flag wins over FAVD_EMBEDDER; "hash" otherwise.
inline std::string resolve_embedder_spec(std::string_view cli_value) {
  if (!cli_value.empty()) return std::string(cli_value);
  if (const char* env = std::getenv("FAVD_EMBEDDER"); env && *env) return env;
  return "hash";
}

}  // namespace favd
