#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "favd/error.hpp"
#include "favd/lexicon.hpp"
#include "favd/rng.hpp"
#include "favd/text.hpp"

namespace favd {

enum class Split { train, val, test, withheld };

inline constexpr std::array kAllSplits = {Split::train, Split::val, Split::test, Split::withheld};

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    case Split::withheld: return "withheld";
  }
  return "?";
}

inline std::optional<Split> parse_split(std::string_view s) {
  for (auto split : kAllSplits) {
    if (to_string(split) == s) return split;
  }
  return std::nullopt;
}

inline std::optional<Lang> parse_lang(std::string_view s) {
  if (s == "en") return Lang::en;
  if (s == "zh") return Lang::zh;
  return std::nullopt;
}

// One language's description of a clip: an overview sentence, visual details,
// then audio details.
struct DescriptionBlock {
  std::string summary;
  std::vector<std::string> visual;
  std::vector<std::string> audio;
  Lang lang = Lang::en;

  std::size_t sentence_count() const { return 1 + visual.size() + audio.size(); }

  // Full paragraph in annotation order.
  std::string paragraph() const {
    std::vector<std::string> parts;
    parts.reserve(sentence_count());
    parts.push_back(summary);
    parts.insert(parts.end(), visual.begin(), visual.end());
    parts.insert(parts.end(), audio.begin(), audio.end());
    return text::join(parts, lang == Lang::zh ? "" : " ");
  }

  friend bool operator==(const DescriptionBlock&, const DescriptionBlock&) = default;
};

struct AnnotationRecord {
  std::string video_id;
  int duration_s = 0;
  std::optional<Split> split;
  std::map<Lang, DescriptionBlock> blocks;

  const DescriptionBlock* block(Lang lang) const {
    auto it = blocks.find(lang);
    return it == blocks.end() ? nullptr : &it->second;
  }

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_and_column(std::string_view content,
                                                           std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < content.size(); ++i) {
    if (content[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline const nlohmann::json& require(const nlohmann::json& obj, const std::string& key,
                                     const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw SchemaError(where + ": missing required field '" + key + "'", key);
  }
  return *it;
}

inline std::string require_string(const nlohmann::json& obj, const std::string& key,
                                  const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_string()) throw SchemaError(where + ": field '" + key + "' must be a string", key);
  return v.get<std::string>();
}

inline std::vector<std::string> require_string_list(const nlohmann::json& obj,
                                                    const std::string& key,
                                                    const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_array()) throw SchemaError(where + ": field '" + key + "' must be an array", key);
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) {
      throw SchemaError(where + ": field '" + key + "' must contain only strings", key);
    }
    out.push_back(e.get<std::string>());
  }
  return out;
}

inline DescriptionBlock parse_block(const nlohmann::json& j, Lang lang, const std::string& where) {
  if (!j.is_object()) {
    throw SchemaError(where + ": must be an object", std::string(to_string(lang)));
  }
  DescriptionBlock b;
  b.lang = lang;
  b.summary = require_string(j, "summary", where);
  b.visual = require_string_list(j, "visual", where);
  b.audio = require_string_list(j, "audio", where);
  return b;
}

}  // namespace detail

// Parses the annotation JSON array. Unknown fields are ignored and entry order
// is preserved. `source` names the input in error messages.
inline std::vector<AnnotationRecord> parse_annotations_text(std::string_view content,
                                                            const std::string& source = "<input>") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(content);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    auto [line, col] = detail::line_and_column(content, byte);
    throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                         ": malformed JSON (" + e.what() + ")",
                     line, byte);
  }
  if (!doc.is_array()) throw SchemaError(source + ": top level must be an array", "");

  std::vector<AnnotationRecord> records;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& e = doc[i];
    const std::string where = source + "[" + std::to_string(i) + "]";
    if (!e.is_object()) throw SchemaError(where + ": entry must be an object", "");
    AnnotationRecord r;
    r.video_id = detail::require_string(e, "video_id", where);
    const auto& dur = detail::require(e, "duration_s", where);
    if (!dur.is_number_integer()) {
      throw SchemaError(where + ": field 'duration_s' must be an integer", "duration_s");
    }
    r.duration_s = dur.get<int>();
    if (auto it = e.find("split"); it != e.end() && !it->is_null()) {
      if (!it->is_string()) throw SchemaError(where + ": field 'split' must be a string", "split");
      r.split = parse_split(it->get<std::string>());
      if (!r.split) {
        throw SchemaError(where + ": unknown split '" + it->get<std::string>() + "'", "split");
      }
    }
    const auto& ann = detail::require(e, "annotations", where);
    if (!ann.is_object()) {
      throw SchemaError(where + ": field 'annotations' must be an object", "annotations");
    }
    r.blocks[Lang::en] = detail::parse_block(detail::require(ann, "en", where + ".annotations"),
                                             Lang::en, where + ".annotations.en");
    if (auto it = ann.find("zh"); it != ann.end() && !it->is_null()) {
      r.blocks[Lang::zh] = detail::parse_block(*it, Lang::zh, where + ".annotations.zh");
    }
    if (auto [it, inserted] = seen.emplace(r.video_id, i); !inserted) {
      throw DuplicateIdError(r.video_id, it->second, i);
    }
    records.push_back(std::move(r));
  }
  return records;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<AnnotationRecord> parse_annotations(const std::string& path) {
  return parse_annotations_text(read_file(path), path);
}

inline nlohmann::json to_json(const AnnotationRecord& r) {
  nlohmann::json ann = nlohmann::json::object();
  for (const auto& [lang, b] : r.blocks) {
    ann[std::string(to_string(lang))] = {
        {"summary", b.summary}, {"visual", b.visual}, {"audio", b.audio}};
  }
  nlohmann::json j = {{"video_id", r.video_id}, {"duration_s", r.duration_s}, {"annotations", ann}};
  if (r.split) j["split"] = std::string(to_string(*r.split));
  return j;
}

inline std::string serialize_annotations(const std::vector<AnnotationRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) arr.push_back(to_json(r));
  return arr.dump(2);
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::string rule_id;
  std::string message;
  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::string video_id;
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(std::string_view rule_id) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const Violation& v) { return v.rule_id == rule_id; });
  }
  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

namespace rule {
inline constexpr std::string_view kMinVisual = "MIN_VISUAL";
inline constexpr std::string_view kMinAudio = "MIN_AUDIO";
inline constexpr std::string_view kSummarySentences = "SUMMARY_SENTENCES";
inline constexpr std::string_view kZhMinChars = "ZH_MIN_CHARS";
inline constexpr std::string_view kSpeculative = "SPECULATIVE";
inline constexpr std::string_view kDuration = "DURATION";
inline constexpr std::string_view kBlockMismatch = "BLOCK_MISMATCH";
}  // namespace rule

struct ValidationRules {
  std::size_t min_visual = 4;
  std::size_t min_audio = 1;
  // zh sentences must be longer than this many characters.
  std::size_t zh_min_exclusive = 5;
  std::set<int> allowed_durations = {5, 10};
  std::map<Lang, std::vector<std::string>> speculative = {
      {Lang::en, {"maybe", "perhaps", "possibly", "probably"}},
      {Lang::zh, {"可能", "也许", "或许", "大概"}},
  };
  std::set<std::string> disabled;

  bool enabled(std::string_view id) const { return !disabled.contains(std::string(id)); }
};

// Rules file: every key optional, defaults as in ValidationRules.
// {"min_visual": 4, "min_audio": 1, "zh_min_exclusive": 5, "allowed_durations": [5, 10],
//  "speculative": {"en": [...], "zh": [...]}, "disabled": ["DURATION"]}
inline ValidationRules parse_rules_text(std::string_view content) {
  ValidationRules rules;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(content);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed rules JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("rules must be a JSON object", "");
  try {
    if (j.contains("min_visual")) rules.min_visual = j["min_visual"].get<std::size_t>();
    if (j.contains("min_audio")) rules.min_audio = j["min_audio"].get<std::size_t>();
    if (j.contains("zh_min_exclusive")) {
      rules.zh_min_exclusive = j["zh_min_exclusive"].get<std::size_t>();
    }
    if (j.contains("allowed_durations")) {
      rules.allowed_durations = j["allowed_durations"].get<std::set<int>>();
    }
    if (j.contains("speculative")) {
      for (const auto& [k, v] : j["speculative"].items()) {
        auto lang = parse_lang(k);
        if (!lang) throw SchemaError("unknown language '" + k + "' in rules", "speculative");
        rules.speculative[*lang] = v.get<std::vector<std::string>>();
      }
    }
    if (j.contains("disabled")) rules.disabled = j["disabled"].get<std::set<std::string>>();
  } catch (const nlohmann::json::type_error& e) {
    throw SchemaError(std::string("rules: ") + e.what(), "");
  }
  return rules;
}

inline ValidationRules load_rules(const std::string& path) {
  return parse_rules_text(read_file(path));
}

namespace detail {

inline void check_block(const DescriptionBlock& b, const ValidationRules& rules,
                        std::vector<Violation>& out) {
  const std::string tag = "[" + std::string(to_string(b.lang)) + "] ";
  if (rules.enabled(rule::kMinVisual) && b.visual.size() < rules.min_visual) {
    out.push_back({std::string(rule::kMinVisual),
                   tag + std::to_string(b.visual.size()) + " visual sentences, need at least " +
                       std::to_string(rules.min_visual)});
  }
  if (rules.enabled(rule::kMinAudio) && b.audio.size() < rules.min_audio) {
    out.push_back({std::string(rule::kMinAudio),
                   tag + std::to_string(b.audio.size()) + " audio sentences, need at least " +
                       std::to_string(rules.min_audio)});
  }
  if (rules.enabled(rule::kSummarySentences)) {
    const auto n = text::split_sentences(b.summary).size();
    if (n != 1) {
      out.push_back({std::string(rule::kSummarySentences),
                     tag + "summary has " + std::to_string(n) + " sentences, need exactly 1"});
    }
  }

  std::vector<std::string> sentences{b.summary};
  sentences.insert(sentences.end(), b.visual.begin(), b.visual.end());
  sentences.insert(sentences.end(), b.audio.begin(), b.audio.end());

  if (b.lang == Lang::zh && rules.enabled(rule::kZhMinChars)) {
    for (const auto& s : sentences) {
      const auto n = text::count_letters(s);
      if (n <= rules.zh_min_exclusive) {
        out.push_back({std::string(rule::kZhMinChars),
                       tag + "sentence '" + s + "' has " + std::to_string(n) +
                           " characters, need more than " +
                           std::to_string(rules.zh_min_exclusive)});
      }
    }
  }

  if (rules.enabled(rule::kSpeculative)) {
    auto it = rules.speculative.find(b.lang);
    if (it != rules.speculative.end() && !it->second.empty()) {
      for (const auto& s : sentences) {
        if (b.lang == Lang::en) {
          const auto tokens = text::tokenize(s);
          for (const auto& word : it->second) {
            if (std::find(tokens.begin(), tokens.end(), text::to_lower_ascii(word)) !=
                tokens.end()) {
              out.push_back({std::string(rule::kSpeculative),
                             tag + "speculative word '" + word + "' in '" + s + "'"});
            }
          }
        } else {
          for (const auto& word : it->second) {
            if (s.find(word) != std::string::npos) {
              out.push_back({std::string(rule::kSpeculative),
                             tag + "speculative word '" + word + "' in '" + s + "'"});
            }
          }
        }
      }
    }
  }
}

}  // namespace detail

// Checks one record against the annotation rules. Pure: violations are data.
// When `only` is set, language-specific rules run for that block alone.
inline ValidationReport validate_record(const AnnotationRecord& record,
                                        const ValidationRules& rules = {},
                                        std::optional<Lang> only = std::nullopt) {
  ValidationReport report{record.video_id, {}};
  if (rules.enabled(rule::kDuration) && !rules.allowed_durations.contains(record.duration_s)) {
    report.violations.push_back({std::string(rule::kDuration),
                                 "duration " + std::to_string(record.duration_s) +
                                     "s not in the allowed set"});
  }
  for (const auto& [lang, block] : record.blocks) {
    if (only && *only != lang) continue;
    detail::check_block(block, rules, report.violations);
  }
  const auto* en = record.block(Lang::en);
  const auto* zh = record.block(Lang::zh);
  if (rules.enabled(rule::kBlockMismatch) && en && zh &&
      (en->visual.size() != zh->visual.size() || en->audio.size() != zh->audio.size())) {
    report.violations.push_back(
        {std::string(rule::kBlockMismatch),
         "en has " + std::to_string(en->visual.size()) + " visual / " +
             std::to_string(en->audio.size()) + " audio, zh has " +
             std::to_string(zh->visual.size()) + " / " + std::to_string(zh->audio.size())});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Statistics

struct CorpusStats {
  std::size_t clip_count = 0;
  double avg_sentences = 0.0;
  double avg_words = 0.0;
  std::size_t vocabulary_size = 0;
  // Percent of all tokens tagged adj / noun / prep.
  double adj_percent = 0.0;
  double noun_percent = 0.0;
  double prep_percent = 0.0;
  // Sorted by count (descending), ties by token.
  std::vector<std::pair<std::string, std::size_t>> word_frequency;
};

// Records without a block in `lang` are skipped.
inline CorpusStats compute_stats(const std::vector<AnnotationRecord>& records, Lang lang,
                                 const PosTagger& tagger) {
  CorpusStats st;
  std::map<std::string, std::size_t> freq;
  std::size_t sentences = 0;
  std::size_t tokens = 0;
  std::array<std::size_t, 4> tags{};
  for (const auto& r : records) {
    const auto* b = r.block(lang);
    if (!b) continue;
    ++st.clip_count;
    sentences += b->sentence_count();
    for (const auto& tok : text::tokenize(b->paragraph(), {.lang = lang})) {
      ++tokens;
      ++freq[tok];
      ++tags[static_cast<std::size_t>(tagger.tag(tok))];
    }
  }
  if (st.clip_count == 0) {
    throw EmptyInputError("compute_stats: no records with a '" + std::string(to_string(lang)) +
                          "' block");
  }
  const auto n = static_cast<double>(st.clip_count);
  st.avg_sentences = static_cast<double>(sentences) / n;
  st.avg_words = static_cast<double>(tokens) / n;
  st.vocabulary_size = freq.size();
  if (tokens > 0) {
    const auto pct = [&](PosTag t) {
      return 100.0 * static_cast<double>(tags[static_cast<std::size_t>(t)]) /
             static_cast<double>(tokens);
    };
    st.adj_percent = pct(PosTag::adj);
    st.noun_percent = pct(PosTag::noun);
    st.prep_percent = pct(PosTag::prep);
  }
  st.word_frequency.assign(freq.begin(), freq.end());
  std::stable_sort(st.word_frequency.begin(), st.word_frequency.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return st;
}

inline nlohmann::json to_json(const CorpusStats& st, std::size_t top_words = 50) {
  nlohmann::json freq = nlohmann::json::array();
  for (std::size_t i = 0; i < st.word_frequency.size() && i < top_words; ++i) {
    freq.push_back({st.word_frequency[i].first, st.word_frequency[i].second});
  }
  return {{"clip_count", st.clip_count},
          {"avg_sentences", st.avg_sentences},
          {"avg_words", st.avg_words},
          {"vocabulary_size", st.vocabulary_size},
          {"pos_percentages",
           {{"adj", st.adj_percent}, {"noun", st.noun_percent}, {"prep", st.prep_percent}}},
          {"word_frequency", freq}};
}

// ---------------------------------------------------------------------------
// Splitting

struct SplitSizes {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
  std::size_t withheld = 0;

  std::size_t total() const { return train + val + test + withheld; }
  std::size_t of(Split s) const {
    switch (s) {
      case Split::train: return train;
      case Split::val: return val;
      case Split::test: return test;
      case Split::withheld: return withheld;
    }
    return 0;
  }
};

// No sizes means "use the splits embedded in the records".
struct SplitSpec {
  std::optional<SplitSizes> sizes;
  std::uint64_t seed = 0;
};

using SplitMap = std::map<Split, std::vector<AnnotationRecord>>;

// Deterministic partition. With sizes, records that already carry a split are
// pinned to it and the rest are shuffled (seeded) into the remaining quotas;
// records beyond the total are left out.
inline SplitMap split_dataset(const std::vector<AnnotationRecord>& records, const SplitSpec& spec) {
  SplitMap out;
  for (auto s : kAllSplits) out[s];

  if (!spec.sizes) {
    for (const auto& r : records) {
      if (!r.split) throw SizeError("record '" + r.video_id + "' carries no embedded split");
      out[*r.split].push_back(r);
    }
    return out;
  }

  const auto& sizes = *spec.sizes;
  if (sizes.total() > records.size()) {
    throw SizeError("split sizes sum to " + std::to_string(sizes.total()) + " but only " +
                    std::to_string(records.size()) + " records are available");
  }
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split) {
      auto& bucket = out[*records[i].split];
      if (bucket.size() >= sizes.of(*records[i].split)) {
        throw SizeError("embedded '" + std::string(to_string(*records[i].split)) +
                        "' records exceed the requested size");
      }
      bucket.push_back(records[i]);
    } else {
      free.push_back(i);
    }
  }
  Rng rng(spec.seed);
  rng.shuffle(std::span<std::size_t>(free));
  std::size_t next = 0;
  for (auto s : kAllSplits) {
    auto& bucket = out[s];
    while (bucket.size() < sizes.of(s)) {
      if (next >= free.size()) throw SizeError("not enough unassigned records to fill the splits");
      bucket.push_back(records[free[next++]]);
      bucket.back().split = s;
    }
  }
  return out;
}

}  // namespace favd
