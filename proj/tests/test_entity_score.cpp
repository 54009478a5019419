#include <gtest/gtest.h>

#include "favd/entity_score.hpp"
#include "oracle_values.hpp"

using namespace favd;

namespace {

EntitySet set_of(const auto& words) {
  EntitySet s;
  for (std::string_view w : words) {
    if (!w.empty()) s.entities.emplace_back(w);
  }
  return s;
}

}  // namespace

TEST(EntityScore, MatchesOracleCases) {
  HashEmbedder e(512);
  for (const auto& c : oracle::kEntityCases) {
    const auto r = entity_score(set_of(c.pred), set_of(c.ref), e);
    EXPECT_NEAR(r.recall, c.recall, 1e-12);
    EXPECT_NEAR(r.comprehensiveness, c.comprehensiveness, 1e-12);
    EXPECT_NEAR(r.score, c.score, 1e-12);
  }
}

TEST(EntityScore, IdentityIsOneAndDisjointRecallIsZero) {
  HashEmbedder e(512);
  const auto s = set_of(std::vector<std::string>{"dog", "ball", "grass"});
  EXPECT_EQ(entity_score(s, s, e).score, 1.0);
  const auto other = set_of(std::vector<std::string>{"cat"});
  EXPECT_EQ(entity_score(other, s, e).score, 0.0);
}

TEST(EntityScore, EmptyReferenceIsUndefinedEmptyPredictionIsZero) {
  HashEmbedder e(512);
  const auto r = set_of(std::vector<std::string>{"dog"});
  EXPECT_THROW(entity_score(r, EntitySet{}, e), UndefinedReferenceError);
  const auto res = entity_score(EntitySet{}, r, e);
  EXPECT_TRUE(res.empty_prediction);
  EXPECT_EQ(res.score, 0.0);
}

TEST(ExtractEntities, NounsDedupedInOrder) {
  LexiconNounExtractor x;
  const auto s = extract_entities("A Dog chases two dogs and a red ball on the grass.", x);
  EXPECT_EQ(s.entities, (std::vector<std::string>{"dog", "dogs", "ball", "grass"}));
  EXPECT_EQ(s.joined(), "dog, dogs, ball, grass");
}

TEST(ExtractEntities, FailuresCarryTheTextId) {
  struct Broken final : NounExtractor {
    std::string name() const override { return "broken"; }
    std::vector<std::string> nouns(std::string_view) const override { throw std::runtime_error("boom"); }
  };
  try {
    extract_entities("x", Broken{}, "clip7");
    FAIL();
  } catch (const ExtractionError& e) {
    EXPECT_EQ(e.text_id(), "clip7");
  }
}
