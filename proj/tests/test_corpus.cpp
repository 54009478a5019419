#include <gtest/gtest.h>

#include "favd/corpus.hpp"
#include "favd/lexicon.hpp"
#include "oracle_values.hpp"
#include "test_support.hpp"

using namespace favd;

namespace {

AnnotationRecord make_record(std::size_t visual, std::size_t audio) {
  AnnotationRecord r;
  r.video_id = "v";
  r.duration_s = 10;
  DescriptionBlock b;
  b.summary = "A man plays a guitar.";
  for (std::size_t i = 0; i < visual; ++i) b.visual.push_back("The stage is bright.");
  for (std::size_t i = 0; i < audio; ++i) b.audio.push_back("The guitar is loud.");
  r.blocks[Lang::en] = b;
  return r;
}

}  // namespace

TEST(ParseAnnotations, FixtureCountsAndSplits) {
  const auto recs = parse_annotations(data_path("fixture12.json"));
  ASSERT_EQ(recs.size(), oracle::kFixtureRecords);
  std::map<Split, std::size_t> counts;
  for (const auto& r : recs) counts[*r.split]++;
  EXPECT_EQ(counts[Split::train], oracle::kFixtureTrain);
  EXPECT_EQ(counts[Split::val], oracle::kFixtureVal);
  EXPECT_EQ(counts[Split::test], oracle::kFixtureTest);
  EXPECT_EQ(recs.front().video_id, "vid_001");
  EXPECT_TRUE(recs.front().block(Lang::zh));
}

TEST(ParseAnnotations, SingleEntryAndUnknownFields) {
  const auto recs = parse_annotations_text(R"([{"video_id":"a","duration_s":5,"extra":1,
    "annotations":{"en":{"summary":"S.","visual":[],"audio":[]}}}])");
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_FALSE(recs[0].split);
}

TEST(ParseAnnotations, DuplicateIdListsBothIndices) {
  const std::string doc = R"([
    {"video_id":"vid_001","duration_s":5,"annotations":{"en":{"summary":"S.","visual":[],"audio":[]}}},
    {"video_id":"vid_002","duration_s":5,"annotations":{"en":{"summary":"S.","visual":[],"audio":[]}}},
    {"video_id":"vid_001","duration_s":5,"annotations":{"en":{"summary":"S.","visual":[],"audio":[]}}}])";
  try {
    parse_annotations_text(doc);
    FAIL() << "expected DuplicateIdError";
  } catch (const DuplicateIdError& e) {
    EXPECT_EQ(e.id(), "vid_001");
    EXPECT_EQ(e.first_index(), 0u);
    EXPECT_EQ(e.second_index(), 2u);
  }
}

TEST(ParseAnnotations, MalformedJsonReportsLine) {
  try {
    parse_annotations_text("[\n{\"video_id\": \"a\",\n  oops}\n]");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ParseAnnotations, MissingFieldNamesIt) {
  try {
    parse_annotations_text(R"([{"video_id":"a","annotations":{"en":{"summary":"S.","visual":[],"audio":[]}}}])");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.field(), "duration_s");
  }
}

TEST(ParseAnnotations, RoundTrip) {
  const auto recs = parse_annotations(data_path("fixture12.json"));
  EXPECT_EQ(parse_annotations_text(serialize_annotations(recs)), recs);
}

TEST(Validate, BoundaryRecordIsClean) {
  EXPECT_TRUE(validate_record(make_record(4, 1)).ok());
}

TEST(Validate, EachRuleFires) {
  EXPECT_TRUE(validate_record(make_record(3, 1)).has(rule::kMinVisual));
  EXPECT_TRUE(validate_record(make_record(4, 0)).has(rule::kMinAudio));
  auto r = make_record(4, 1);
  r.blocks[Lang::en].audio[0] = "Maybe a bird sings.";
  EXPECT_TRUE(validate_record(r).has(rule::kSpeculative));
  r = make_record(4, 1);
  r.blocks[Lang::en].summary = "One. Two.";
  EXPECT_TRUE(validate_record(r).has(rule::kSummarySentences));
  r = make_record(4, 1);
  r.duration_s = 6;
  EXPECT_TRUE(validate_record(r).has(rule::kDuration));
  r = make_record(4, 1);
  DescriptionBlock zh{"男人在舞台上弹吉他。", {"舞台上的灯光很亮。", "舞台上的灯光很亮。", "舞台上的灯光很亮。"}, {"吉他的声音很响亮。"}, Lang::zh};
  r.blocks[Lang::zh] = zh;
  EXPECT_TRUE(validate_record(r).has(rule::kBlockMismatch));
}

TEST(Validate, ZhCharacterRuleIsStrict) {
  auto r = make_record(4, 1);
  DescriptionBlock zh{"男人在弹吉他。", {"灯光很亮很亮。", "灯光很亮很亮。", "灯光很亮很亮。", "灯光很亮很亮。"}, {"五个字五个。"}, Lang::zh};
  r.blocks[Lang::zh] = zh;
  const auto rep = validate_record(r);
  ASSERT_TRUE(rep.has(rule::kZhMinChars));
  ASSERT_EQ(rep.violations.size(), 1u);  // only the five-character sentence
  EXPECT_TRUE(validate_record(r, {}, Lang::en).ok());
}

TEST(Validate, AdversarialFixtureOnePerRecord) {
  const auto recs = parse_annotations(data_path("adversarial6.json"));
  const std::vector<std::string_view> expected = {rule::kMinVisual, rule::kMinAudio,   rule::kSummarySentences,
                                                  rule::kZhMinChars, rule::kSpeculative, rule::kDuration};
  ASSERT_EQ(recs.size(), expected.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto rep = validate_record(recs[i]);
    ASSERT_EQ(rep.violations.size(), 1u) << recs[i].video_id;
    EXPECT_EQ(rep.violations[0].rule_id, expected[i]);
  }
  for (const auto& r : parse_annotations(data_path("fixture12.json"))) {
    EXPECT_TRUE(validate_record(r).ok()) << r.video_id;
  }
}

TEST(Validate, RulesFileOverrides) {
  const auto rules = parse_rules_text(R"({"min_visual": 3, "disabled": ["DURATION"], "speculative": {"en": ["likely"]}})");
  auto r = make_record(3, 1);
  r.duration_s = 7;
  r.blocks[Lang::en].audio[0] = "Likely a bird sings.";
  const auto rep = validate_record(r, rules);
  ASSERT_EQ(rep.violations.size(), 1u);
  EXPECT_EQ(rep.violations[0].rule_id, rule::kSpeculative);
}

TEST(Stats, HandCountedSingleRecord) {
  AnnotationRecord r;
  r.video_id = "x";
  r.duration_s = 5;
  r.blocks[Lang::en] = {"a big dog.", {"tree.", "grass.", "sky.", "sun."}, {"bark."}, Lang::en};
  const auto st = compute_stats({r}, Lang::en, LexiconTagger{});
  EXPECT_DOUBLE_EQ(st.avg_sentences, 6.0);
  EXPECT_DOUBLE_EQ(st.avg_words, 8.0);
  EXPECT_DOUBLE_EQ(st.adj_percent, 100.0 / 8.0);
  EXPECT_DOUBLE_EQ(st.noun_percent, 600.0 / 8.0);
}

TEST(Stats, FixtureMatchesOracle) {
  const auto recs = parse_annotations(data_path("fixture12.json"));
  LexiconTagger tagger;
  const auto en = compute_stats(recs, Lang::en, tagger);
  EXPECT_EQ(en.clip_count, oracle::kEnClips);
  EXPECT_NEAR(en.avg_sentences, oracle::kEnAvgSentences, 1e-12);
  EXPECT_NEAR(en.avg_words, oracle::kEnAvgWords, 1e-12);
  EXPECT_EQ(en.vocabulary_size, oracle::kEnVocabulary);
  EXPECT_EQ(en.word_frequency.front().first, oracle::kEnTopWord);
  EXPECT_EQ(en.word_frequency.front().second, oracle::kEnTopCount);
  for (std::size_t i = 1; i < en.word_frequency.size(); ++i) {
    EXPECT_GE(en.word_frequency[i - 1].second, en.word_frequency[i].second);
  }
  for (double p : {en.adj_percent, en.noun_percent, en.prep_percent}) {
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 100.0);
  }
  const auto zh = compute_stats(recs, Lang::zh, tagger);
  EXPECT_EQ(zh.clip_count, oracle::kZhClips);
  EXPECT_NEAR(zh.avg_sentences, oracle::kZhAvgSentences, 1e-12);
  EXPECT_NEAR(zh.avg_words, oracle::kZhAvgWords, 1e-12);
  EXPECT_EQ(zh.vocabulary_size, oracle::kZhVocabulary);
  EXPECT_EQ(zh.word_frequency.front().first, oracle::kZhTopWord);
}

TEST(Stats, EmptyInputThrows) {
  EXPECT_THROW(compute_stats({}, Lang::en, LexiconTagger{}), EmptyInputError);
}

TEST(Split, EmbeddedSplitsHonored) {
  const auto recs = parse_annotations(data_path("fixture12.json"));
  const auto parts = split_dataset(recs, {});
  EXPECT_EQ(parts.at(Split::train).size(), 8u);
  EXPECT_EQ(parts.at(Split::val).size(), 2u);
  EXPECT_EQ(parts.at(Split::test).size(), 2u);
}

TEST(Split, SeededSizesAreDeterministic) {
  auto recs = parse_annotations(data_path("fixture12.json"));
  for (auto& r : recs) r.split.reset();
  const SplitSpec spec{SplitSizes{8, 2, 2, 0}, 17};
  const auto a = split_dataset(recs, spec);
  const auto b = split_dataset(recs, spec);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.at(Split::train).size(), 8u);
  EXPECT_EQ(a.at(Split::test).size(), 2u);
  EXPECT_THROW(split_dataset(recs, {SplitSizes{10, 2, 2, 0}, 1}), SizeError);
}

TEST(Split, SingleRecordToTrain) {
  auto r = make_record(4, 1);
  const auto parts = split_dataset({r}, {SplitSizes{1, 0, 0, 0}, 0});
  EXPECT_EQ(parts.at(Split::train).size(), 1u);
}

TEST(Lexicon, PluralsAndPrecedence) {
  LexiconTagger t;
  EXPECT_EQ(t.tag("dogs"), PosTag::noun);
  EXPECT_EQ(t.tag("bushes"), PosTag::other);
  EXPECT_EQ(t.tag("glasses"), PosTag::noun);
  EXPECT_EQ(t.tag("on"), PosTag::prep);
  EXPECT_EQ(t.tag("light"), PosTag::adj);
  EXPECT_EQ(t.tag("zzz"), PosTag::other);
}
