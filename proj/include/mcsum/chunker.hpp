#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mcsum/error.hpp"

namespace mcsum {

struct ByteSpan {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive

  friend bool operator==(const ByteSpan&, const ByteSpan&) = default;
};

struct TokenSequence {
  std::vector<std::string> tokens;
  std::vector<ByteSpan> offsets;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
};

struct Chunk {
  std::size_t index = 0;
  std::size_t token_start = 0;
  std::size_t token_count = 0;
  ByteSpan byte_span;
  std::string text;
};

struct ChunkerConfig {
  std::size_t chunk_size = 500;
  std::size_t overlap = 20;

  void validate() const {
    if (chunk_size == 0 || overlap >= chunk_size) {
      throw Error(ErrorKind::kContract,
                  "chunker config requires 0 <= overlap < chunk_size (got chunk_size=" +
                      std::to_string(chunk_size) + ", overlap=" + std::to_string(overlap) + ")");
    }
  }
  std::size_t stride() const noexcept { return chunk_size - overlap; }
};

namespace detail {

enum class CharClass { kSpace, kWord, kPunct };

struct DecodedChar {
  char32_t code = 0;
  std::size_t length = 1;
  bool valid = true;
};

inline DecodedChar decode_utf8(std::string_view text, std::size_t pos) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  if (lead < 0x80) return {lead, 1, true};

  std::size_t length = 0;
  char32_t code = 0;
  if ((lead & 0xE0) == 0xC0) {
    length = 2;
    code = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    length = 3;
    code = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    length = 4;
    code = lead & 0x07;
  } else {
    return {lead, 1, false};
  }
  if (pos + length > text.size()) return {lead, 1, false};
  for (std::size_t i = 1; i < length; ++i) {
    const auto cont = static_cast<unsigned char>(text[pos + i]);
    if ((cont & 0xC0) != 0x80) return {lead, 1, false};
    code = (code << 6) | (cont & 0x3F);
  }
  return {code, length, true};
}

inline bool in_range(char32_t c, char32_t lo, char32_t hi) { return c >= lo && c <= hi; }

// Letters and digits of every script count as word characters; the
// non-ASCII ranges below are the punctuation and symbol blocks, everything
// else outside ASCII is treated as part of a word.
inline CharClass classify(char32_t c) {
  if (c < 0x80) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
      return CharClass::kSpace;
    }
    if ((c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) {
      return CharClass::kWord;
    }
    if (c < 0x20 || c == 0x7F) return CharClass::kSpace;
    return CharClass::kPunct;
  }
  if (c == 0x85 || c == 0xA0 || c == 0x1680 || in_range(c, 0x2000, 0x200B) || c == 0x2028 ||
      c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000 || c == 0xFEFF) {
    return CharClass::kSpace;
  }
  if (in_range(c, 0x80, 0x9F)) return CharClass::kSpace;
  if (in_range(c, 0xA1, 0xBF) || c == 0xD7 || c == 0xF7 || in_range(c, 0x2010, 0x2027) ||
      in_range(c, 0x2030, 0x205E) || in_range(c, 0x2190, 0x2BFF) || in_range(c, 0x3001, 0x3003) ||
      in_range(c, 0x3008, 0x3011) || in_range(c, 0x3014, 0x301F) || in_range(c, 0xFE10, 0xFE1F) ||
      in_range(c, 0xFE30, 0xFE4F) || in_range(c, 0xFF01, 0xFF0F) || in_range(c, 0xFF1A, 0xFF20) ||
      in_range(c, 0xFF3B, 0xFF40) || in_range(c, 0xFF5B, 0xFF65) || in_range(c, 0x1F000, 0x1FAFF)) {
    return CharClass::kPunct;
  }
  return CharClass::kWord;
}

}  // namespace detail

/// Word-level tokenizer. Maximal runs of letters/digits form one token, every
/// punctuation character is a token of its own, whitespace only separates.
/// Offsets are byte offsets into `text`. Malformed UTF-8 bytes are emitted as
/// single-byte punctuation tokens.
inline TokenSequence tokenize(std::string_view text) {
  TokenSequence seq;
  std::size_t pos = 0;
  std::size_t word_start = 0;
  bool in_word = false;

  auto flush_word = [&](std::size_t end) {
    if (in_word) {
      seq.tokens.emplace_back(text.substr(word_start, end - word_start));
      seq.offsets.push_back({word_start, end});
      in_word = false;
    }
  };

  while (pos < text.size()) {
    const auto ch = detail::decode_utf8(text, pos);
    const auto cls = ch.valid ? detail::classify(ch.code) : detail::CharClass::kPunct;
    switch (cls) {
      case detail::CharClass::kWord:
        if (!in_word) {
          in_word = true;
          word_start = pos;
        }
        break;
      case detail::CharClass::kSpace:
        flush_word(pos);
        break;
      case detail::CharClass::kPunct:
        flush_word(pos);
        seq.tokens.emplace_back(text.substr(pos, ch.length));
        seq.offsets.push_back({pos, pos + ch.length});
        break;
    }
    pos += ch.length;
  }
  flush_word(pos);
  return seq;
}

/// Token ranges [start, start + count) of each chunk for a document of
/// `total_tokens` tokens. Chunk i starts at i * stride; the last chunk is
/// the first one that reaches the end of the document and may be short.
inline std::vector<std::pair<std::size_t, std::size_t>> chunk_ranges(std::size_t total_tokens,
                                                                     const ChunkerConfig& cfg) {
  cfg.validate();
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  if (total_tokens == 0) return ranges;
  for (std::size_t start = 0;; start += cfg.stride()) {
    const std::size_t end = std::min(start + cfg.chunk_size, total_tokens);
    ranges.emplace_back(start, end - start);
    if (end == total_tokens) break;
  }
  return ranges;
}

inline std::vector<Chunk> chunk_tokens(std::string_view text, const TokenSequence& seq,
                                       const ChunkerConfig& cfg) {
  std::vector<Chunk> chunks;
  for (const auto& [start, count] : chunk_ranges(seq.size(), cfg)) {
    Chunk chunk;
    chunk.index = chunks.size();
    chunk.token_start = start;
    chunk.token_count = count;
    chunk.byte_span = {seq.offsets[start].start, seq.offsets[start + count - 1].end};
    chunk.text = std::string(text.substr(chunk.byte_span.start,
                                         chunk.byte_span.end - chunk.byte_span.start));
    chunks.push_back(std::move(chunk));
  }
  return chunks;
}

inline std::vector<Chunk> chunk_document(std::string_view text, const ChunkerConfig& cfg = {}) {
  cfg.validate();
  return chunk_tokens(text, tokenize(text), cfg);
}

}  // namespace mcsum
