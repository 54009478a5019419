#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "favd/error.hpp"
#include "favd/text.hpp"

namespace favd::avl {

// Token ids are dense in [0, size()). The five specials take ids 0..4.
class Vocabulary {
 public:
  static constexpr int kBos = 0;
  static constexpr int kEos = 1;
  static constexpr int kMask = 2;
  static constexpr int kPad = 3;
  static constexpr int kUnk = 4;
  static constexpr int kSpecialCount = 5;

  Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

  // `words` excludes the specials; ids follow their order.
  explicit Vocabulary(const std::vector<std::string>& words) {
    for (const char* s : {"[BOS]", "[EOS]", "[MASK]", "[PAD]", "[UNK]"}) append(s);
    for (const auto& w : words) {
      if (ids_.contains(w)) throw ConfigError("vocabulary: duplicate token '" + w + "'");
      append(w);
    }
  }

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  int id(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? kUnk : it->second;
  }
  bool contains(const std::string& token) const { return ids_.contains(token); }

  static bool is_special(int id) { return id >= 0 && id < kSpecialCount; }

  // Words after the specials, in id order.
  std::vector<std::string> words() const { return {tokens_.begin() + kSpecialCount, tokens_.end()}; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  void append(const std::string& t) {
    ids_.emplace(t, static_cast<int>(tokens_.size()));
    tokens_.push_back(t);
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

// Tokenization used by the language model: lowercased words plus punctuation
// marks, so generated paragraphs keep their sentence boundaries.
inline std::vector<std::string> model_tokens(std::string_view s, Lang lang = Lang::en) {
  return text::tokenize(s, {.lang = lang, .keep_punctuation = true});
}

// Specials first, then tokens by descending count, ties in lexicographic
// order. Tokens seen fewer than min_count times are left to [UNK].
inline Vocabulary build_vocab(const std::vector<std::vector<std::string>>& tokenized,
                              std::size_t min_count = 1) {
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& seq : tokenized) {
    for (const auto& t : seq) {
      ++counts[t];
      ++total;
    }
  }
  if (total == 0) throw EmptyInputError("build_vocab: empty corpus");
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> words;
  for (const auto& [w, c] : ranked) {
    if (c >= min_count) words.push_back(w);
  }
  return Vocabulary(words);
}

// [BOS] tokens [EOS] padded with [PAD] to exactly `length`. Overlong input
// keeps its first length - 2 tokens.
inline std::vector<int> encode(const Vocabulary& vocab, const std::vector<std::string>& tokens,
                               int length) {
  std::vector<int> ids(static_cast<std::size_t>(length), Vocabulary::kPad);
  ids[0] = Vocabulary::kBos;
  const auto keep = std::min<std::size_t>(tokens.size(), static_cast<std::size_t>(length - 2));
  for (std::size_t i = 0; i < keep; ++i) ids[i + 1] = vocab.id(tokens[i]);
  ids[keep + 1] = Vocabulary::kEos;
  return ids;
}

// Tokens up to the first [EOS]/[PAD]; [BOS] and [MASK] are dropped.
inline std::vector<std::string> decode(const Vocabulary& vocab, const std::vector<int>& ids) {
  std::vector<std::string> out;
  for (int id : ids) {
    if (id == Vocabulary::kEos || id == Vocabulary::kPad) break;
    if (id == Vocabulary::kBos || id == Vocabulary::kMask) continue;
    out.push_back(vocab.token(id));
  }
  return out;
}

}  // namespace favd::avl
