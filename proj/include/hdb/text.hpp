#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hdb {

/// Lowercases, collapses interior whitespace runs to single spaces and strips
/// leading/trailing whitespace. Lowercasing covers ASCII plus the Latin-1
/// supplement range of UTF-8; other scripts pass through unchanged.
std::string normalize(std::string_view raw);

enum class TokenizerKind { Word, WordNgram, CharQgram };

/// n is the gram size for WordNgram and CharQgram; ignored for Word.
struct Tokenizer {
  TokenizerKind kind = TokenizerKind::Word;
  uint32_t n = 1;
};

/// Tokenizes already-normalized text. Word splits on spaces; WordNgram emits
/// each run of n consecutive words joined by single spaces; CharQgram emits
/// each window of n consecutive code points (spaces included). Inputs shorter
/// than the gram size yield no tokens. The result is duplicate-free, in
/// first-seen order.
std::vector<std::string> tokenize(std::string_view normalized, const Tokenizer& t);

}  // namespace hdb
