#pragma once

#include <algorithm>
#include <concepts>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "favd/embedding.hpp"
#include "favd/error.hpp"
#include "favd/lexicon.hpp"
#include "favd/text.hpp"

namespace favd {

// Lowercased, deduplicated nouns in order of first occurrence.
struct EntitySet {
  std::vector<std::string> entities;
  std::string source_text;

  std::size_t size() const { return entities.size(); }
  bool empty() const { return entities.empty(); }
  bool contains(std::string_view e) const {
    return std::find(entities.begin(), entities.end(), e) != entities.end();
  }
  // Text handed to the embedder: entities joined with ", " in set order.
  std::string joined() const { return text::join(entities, ", "); }
};

// Returns the nouns of a text in reading order (duplicates allowed; casing
// is normalized by extract_entities).
class NounExtractor {
 public:
  virtual ~NounExtractor() = default;
  virtual std::string name() const = 0;
  virtual std::vector<std::string> nouns(std::string_view text) const = 0;
};

class LexiconNounExtractor final : public NounExtractor {
 public:
  std::string name() const override { return "lexicon-nouns-v1"; }
  std::vector<std::string> nouns(std::string_view s) const override {
    std::vector<std::string> out;
    for (auto& tok : text::tokenize(s)) {
      if (tagger_.is_noun(tok)) out.push_back(std::move(tok));
    }
    return out;
  }

 private:
  LexiconTagger tagger_;
};

template <typename E>
concept TextEmbedder = requires(const E& e, std::string_view s) {
  { e.embed_text(s) } -> std::convertible_to<EmbeddingVector>;
};

inline EntitySet extract_entities(std::string_view s, const NounExtractor& extractor,
                                  std::string_view text_id = "") {
  std::vector<std::string> raw;
  try {
    raw = extractor.nouns(s);
  } catch (const std::exception& e) {
    throw ExtractionError(std::string(text_id), e.what());
  }
  EntitySet out;
  out.source_text = std::string(s);
  std::unordered_set<std::string> seen;
  for (const auto& n : raw) {
    auto lower = text::to_lower_ascii(text::trim(n));
    if (lower.empty()) continue;
    if (seen.insert(lower).second) out.entities.push_back(std::move(lower));
  }
  return out;
}

// Fraction of reference entities that appear verbatim in the prediction.
inline double entity_recall(const EntitySet& p, const EntitySet& r) {
  if (r.empty()) throw UndefinedReferenceError("entity recall: reference entity set is empty");
  std::size_t hit = 0;
  for (const auto& e : r.entities) {
    if (p.contains(e)) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(r.size());
}

// Semantic closeness of the two entity sets, (cos + 1) / 2 in [0, 1].
template <TextEmbedder E>
double entity_comprehensiveness(const EntitySet& p, const EntitySet& r, const E& embedder) {
  if (p.empty()) throw UndefinedReferenceError("entity comprehensiveness: prediction is empty");
  if (r.empty()) throw UndefinedReferenceError("entity comprehensiveness: reference is empty");
  const EmbeddingVector ep = embedder.embed_text(p.joined());
  const EmbeddingVector er = embedder.embed_text(r.joined());
  return (cosine(ep, er) + 1.0) / 2.0;
}

struct EntityScoreResult {
  double recall = 0.0;
  double comprehensiveness = 0.0;
  double score = 0.0;
  // Prediction had no entities: comprehensiveness undefined, score forced to 0.
  bool empty_prediction = false;
};

inline double harmonic_mean(double a, double b) { return a + b > 0.0 ? 2.0 * a * b / (a + b) : 0.0; }

template <TextEmbedder E>
EntityScoreResult entity_score(const EntitySet& p, const EntitySet& r, const E& embedder) {
  EntityScoreResult res;
  res.recall = entity_recall(p, r);
  if (p.empty()) {
    res.empty_prediction = true;
    return res;
  }
  res.comprehensiveness = entity_comprehensiveness(p, r, embedder);
  res.score = harmonic_mean(res.recall, res.comprehensiveness);
  return res;
}

}  // namespace favd
