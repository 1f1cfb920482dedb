#include "hdb/text.hpp"

#include <unordered_set>

namespace hdb {

namespace {

inline bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Number of bytes in the UTF-8 sequence led by c; malformed leads count as 1
// so iteration always makes progress.
inline size_t seq_len(unsigned char c) {
  if (c < 0x80) return 1;
  if ((c & 0xe0) == 0xc0) return 2;
  if ((c & 0xf0) == 0xe0) return 3;
  if ((c & 0xf8) == 0xf0) return 4;
  return 1;
}

}  // namespace

std::string normalize(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  size_t i = 0;
  while (i < raw.size()) {
    unsigned char c = static_cast<unsigned char>(raw[i]);
    if (is_space(c)) {
      if (!out.empty()) pending_space = true;
      i++;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    if (c >= 'A' && c <= 'Z') {
      out.push_back(char(c + 32));
      i++;
    } else if (c == 0xc3 && i + 1 < raw.size()) {
      // Latin-1 supplement: U+00C0..U+00DE lowercase by +0x20, except the
      // multiplication sign U+00D7 which has no case.
      unsigned char c2 = static_cast<unsigned char>(raw[i + 1]);
      out.push_back(char(c));
      if (c2 >= 0x80 && c2 <= 0x9e && c2 != 0x97) {
        out.push_back(char(c2 + 0x20));
      } else {
        out.push_back(char(c2));
      }
      i += 2;
    } else {
      size_t len = seq_len(c);
      if (i + len > raw.size()) len = 1;
      out.append(raw.substr(i, len));
      i += len;
    }
  }
  return out;
}

namespace {

std::vector<std::string> dedupe(std::vector<std::string>&& tokens) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(tokens.size());
  std::vector<std::string> out;
  // Views point into out's elements; the reserve keeps them stable.
  out.reserve(tokens.size());
  for (auto& t : tokens) {
    if (seen.contains(t)) continue;
    out.push_back(std::move(t));
    seen.insert(out.back());
  }
  return out;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t sp = text.find(' ', pos);
    if (sp == std::string_view::npos) sp = text.size();
    if (sp > pos) words.emplace_back(text.substr(pos, sp - pos));
    pos = sp + 1;
  }
  return words;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view normalized, const Tokenizer& t) {
  uint32_t n = t.n < 1 ? 1 : t.n;
  std::vector<std::string> raw;
  switch (t.kind) {
    case TokenizerKind::Word:
      raw = split_words(normalized);
      break;
    case TokenizerKind::WordNgram: {
      std::vector<std::string> words = split_words(normalized);
      if (words.size() >= n) {
        for (size_t i = 0; i + n <= words.size(); i++) {
          std::string gram = words[i];
          for (size_t k = 1; k < n; k++) {
            gram.push_back(' ');
            gram.append(words[i + k]);
          }
          raw.push_back(std::move(gram));
        }
      }
      break;
    }
    case TokenizerKind::CharQgram: {
      // Code-point boundaries, so multi-byte characters never get split.
      std::vector<size_t> bounds;
      size_t pos = 0;
      while (pos < normalized.size()) {
        bounds.push_back(pos);
        size_t len = seq_len(static_cast<unsigned char>(normalized[pos]));
        if (pos + len > normalized.size()) len = 1;
        pos += len;
      }
      bounds.push_back(normalized.size());
      if (bounds.size() > n) {
        for (size_t i = 0; i + n < bounds.size(); i++) {
          raw.emplace_back(normalized.substr(bounds[i], bounds[i + n] - bounds[i]));
        }
      }
      break;
    }
  }
  return dedupe(std::move(raw));
}

}  // namespace hdb
