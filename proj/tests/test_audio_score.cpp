#include <gtest/gtest.h>

#include "favd/audio_score.hpp"
#include "oracle_values.hpp"

using namespace favd;

TEST(Gompertz, MatchesHighPrecisionOracle) {
  EXPECT_NEAR(GompertzParams{}.a, oracle::kGompertzA, 1e-15);
  EXPECT_NEAR(gompertz(0.0), oracle::kGompertz0, 1e-14);
  EXPECT_NEAR(gompertz(1.0), oracle::kGompertz1, 1e-14);
  EXPECT_NEAR(gompertz(0.5), oracle::kGompertzHalf, 1e-14);
  EXPECT_NEAR(gompertz(0.1), oracle::kGompertzTenth, 1e-14);
  EXPECT_NEAR(gompertz(1.0), 1.0, 1e-4);
  EXPECT_NEAR(gompertz(0.0), 0.5, 1e-3);
}

TEST(Gompertz, MonotoneOnUnitInterval) {
  double prev = gompertz(0.0);
  for (int i = 1; i <= 100; ++i) {
    const double v = gompertz(i / 100.0);
    ASSERT_GT(v, prev);
    prev = v;
  }
}

TEST(AudioScore, HandBuiltCosines) {
  // e_a = x axis; e_t at cos 0.3; e_v at cos -0.2.
  const EmbeddingVector ea(std::vector<double>{1.0, 0.0, 0.0});
  const EmbeddingVector et(std::vector<double>{0.3, std::sqrt(1 - 0.09), 0.0});
  const EmbeddingVector ev(std::vector<double>{-0.2, 0.0, std::sqrt(1 - 0.04)});
  const auto r = audio_score(ea, ev, et);
  EXPECT_NEAR(r.s, oracle::kAudioExampleS, 1e-15);
  EXPECT_NEAR(r.score, oracle::kAudioExampleScore, 1e-14);
}

TEST(AudioScore, AllAlignedIsOne) {
  const EmbeddingVector v(std::vector<double>{0.6, 0.8});
  const auto r = audio_score(v, v, v);
  EXPECT_EQ(r.s, 1.0);
  EXPECT_NEAR(r.score, 1.0, 1e-6);
}

TEST(AudioScore, ErrorsOnDegenerateOrMismatched) {
  const EmbeddingVector v(std::vector<double>{1.0, 0.0});
  EXPECT_THROW(audio_score(v, v, EmbeddingVector(std::vector<double>{0.0, 0.0})), DegenerateEmbeddingError);
  EXPECT_THROW(audio_score(v, v, EmbeddingVector(std::vector<double>{1.0, 0.0, 0.0})), ConfigError);
}

TEST(SelectAudioSentences, LastOneOrTwo) {
  const std::string d = "A man sings. The stage is bright. A guitar plays loudly.";
  EXPECT_EQ(select_audio_sentences(d, 1), (std::vector<std::string>{"A guitar plays loudly."}));
  EXPECT_EQ(select_audio_sentences(d, 2),
            (std::vector<std::string>{"The stage is bright.", "A guitar plays loudly."}));
  EXPECT_EQ(select_audio_sentences("Only one.", 2).size(), 1u);
  EXPECT_THROW(select_audio_sentences(d, 3), ConfigError);
  EXPECT_THROW(select_audio_sentences("", 1), EmptyInputError);
}

TEST(AudioScoreTopK, TopTwoNeverBelowTopOne) {
  HashEmbedder e(256);
  const MediaSignal audio{{}, "a guitar plays loudly"};
  const std::vector<MediaSignal> frames = {{{}, "a man sings on a stage"}, {{}, "the stage is bright"}};
  const auto r = audio_score_topk(audio, frames, "A man sings. The stage is bright. A guitar plays loudly.", e);
  EXPECT_GE(r.top2, r.top1);
  EXPECT_EQ(r.score, r.top1);
  const auto mismatch = audio_score_topk(audio, frames, "A man sings. A dog barks at a cat.", e);
  EXPECT_LT(mismatch.top1, r.top1);
}
