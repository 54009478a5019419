#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace favd {

enum class Lang { en, zh };

inline std::string_view to_string(Lang lang) { return lang == Lang::en ? "en" : "zh"; }

namespace text {

// One decoded code point plus the byte range it occupies.
struct CodePoint {
  char32_t value;
  std::size_t offset;
  std::size_t length;
};

// Lenient UTF-8 decoder: invalid bytes decode to themselves (one byte each).
inline std::vector<CodePoint> decode_utf8(std::string_view s) {
  std::vector<CodePoint> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = b0;
    if (b0 >= 0xF0 && b0 < 0xF8) {
      len = 4;
      cp = b0 & 0x07;
    } else if (b0 >= 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if (b0 >= 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    }
    bool ok = len == 1 || i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    if (!ok) {
      len = 1;
      cp = b0;
    }
    out.push_back({cp, i, len});
    i += len;
  }
  return out;
}

inline bool is_space(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' ||
         c == 0x3000 || c == 0x00A0;
}

inline bool is_ascii_alnum(char32_t c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

inline bool is_punct(char32_t c) {
  if (c < 0x80) return !is_ascii_alnum(c) && !is_space(c) && c > 0x20 && c != 0x7F;
  return (c >= 0x3000 && c <= 0x303F) ||                  // CJK symbols and punctuation
         (c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) ||
         (c >= 0xFF3B && c <= 0xFF40) || (c >= 0xFF5B && c <= 0xFF65) ||
         (c >= 0x2010 && c <= 0x2027) ||                  // dashes, quotes, ellipsis
         c == 0x00B7 || c == 0x00AB || c == 0x00BB;
}

// Sentence terminals. ASCII terminals end a sentence only before whitespace or
// end of text; full-width terminals always do (zh text carries no spaces).
inline bool is_ascii_terminal(char32_t c) { return c == '.' || c == '!' || c == '?'; }
inline bool is_wide_terminal(char32_t c) { return c == 0x3002 || c == 0xFF01 || c == 0xFF1F; }
inline bool is_terminal(char32_t c) { return is_ascii_terminal(c) || is_wide_terminal(c); }

inline std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// Splits text into sentences, each keeping its terminal punctuation. A run of
// terminals ("?!", "...") stays with the sentence it closes. Trailing text
// without a terminal forms a final sentence.
inline std::vector<std::string> split_sentences(std::string_view s) {
  std::vector<std::string> out;
  const auto cps = decode_utf8(s);
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    auto piece = trim(s.substr(start, end - start));
    if (!piece.empty()) out.emplace_back(piece);
    start = end;
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (!is_terminal(cps[i].value)) continue;
    std::size_t j = i;
    while (j + 1 < cps.size() && is_terminal(cps[j + 1].value)) ++j;
    const bool at_end = j + 1 == cps.size();
    const bool wide = is_wide_terminal(cps[j].value);
    if (wide || at_end || is_space(cps[j + 1].value)) {
      flush(cps[j].offset + cps[j].length);
    }
    i = j;
  }
  flush(s.size());
  return out;
}

struct TokenizeOptions {
  Lang lang = Lang::en;
  // Emit punctuation marks as single-character tokens instead of dropping
  // them. Metric and corpus statistics use the default (dropped); the
  // language model keeps them so generated text can be re-segmented.
  bool keep_punctuation = false;
};

// Lowercasing tokenizer shared by corpus statistics and every text metric.
// en: maximal runs of word characters (ASCII alnum and non-ASCII letters),
// with an apostrophe or hyphen kept when it sits between word characters.
// zh: every non-ASCII letter is its own token; ASCII alnum runs stay whole.
inline std::vector<std::string> tokenize(std::string_view s, TokenizeOptions opt = {}) {
  std::vector<std::string> out;
  const auto cps = decode_utf8(s);
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(to_lower_ascii(current));
    current.clear();
  };
  auto is_word = [&](std::size_t i) {
    const char32_t c = cps[i].value;
    if (is_ascii_alnum(c)) return true;
    return c >= 0x80 && !is_punct(c) && !is_space(c);
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t c = cps[i].value;
    const auto piece = s.substr(cps[i].offset, cps[i].length);
    if (is_word(i)) {
      if (opt.lang == Lang::zh && c >= 0x80) {
        flush();
        out.emplace_back(piece);
      } else {
        current += piece;
      }
      continue;
    }
    const bool joiner = (c == '\'' || c == '-') && !current.empty() && i + 1 < cps.size() &&
                        is_word(i + 1) && cps[i + 1].value < 0x80;
    if (joiner) {
      current += piece;
      continue;
    }
    flush();
    if (opt.keep_punctuation && is_punct(c)) out.emplace_back(piece);
  }
  flush();
  return out;
}

// Joins model tokens back into text: words separated by a space, closing
// punctuation attached to the preceding word.
inline std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    const auto cps = decode_utf8(t);
    const bool closing = cps.size() == 1 && is_punct(cps[0].value) && cps[0].value != '(' &&
                         cps[0].value != '"' && cps[0].value != '\'';
    if (!out.empty() && !closing) out += ' ';
    out += t;
  }
  return out;
}

// Number of non-space, non-punctuation code points.
inline std::size_t count_letters(std::string_view s) {
  std::size_t n = 0;
  for (const auto& cp : decode_utf8(s)) {
    if (!is_space(cp.value) && !is_punct(cp.value)) ++n;
  }
  return n;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace text
}  // namespace favd
