// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace vocabxfer::utf8 {

// Length in bytes of the code point starting at text[pos]. Malformed or
// truncated sequences count as a single byte.
std::size_t SequenceLength(std::string_view text, std::size_t pos);

// Splits text into code points (each returned as its UTF-8 bytes).
std::vector<std::string_view> SplitCodePoints(std::string_view text);

std::size_t CountCodePoints(std::string_view text);

// Calls fn(word) for every maximal run of non-whitespace. Whitespace is the
// ASCII set plus the Unicode White_Space code points.
template <typename Fn>
void ForEachWord(std::string_view text, Fn&& fn);

// Byte length of the whitespace code point at text[pos], or 0 if the code
// point is not whitespace.
std::size_t WhitespaceLength(std::string_view text, std::size_t pos);

template <typename Fn>
void ForEachWord(std::string_view text, Fn&& fn) {
  std::size_t pos = 0;
  std::size_t start = std::string_view::npos;
  while (pos < text.size()) {
    const std::size_t ws = WhitespaceLength(text, pos);
    if (ws > 0) {
      if (start != std::string_view::npos) {
        fn(text.substr(start, pos - start));
        start = std::string_view::npos;
      }
      pos += ws;
      continue;
    }
    if (start == std::string_view::npos) start = pos;
    pos += SequenceLength(text, pos);
  }
  if (start != std::string_view::npos) fn(text.substr(start));
}

}  // namespace vocabxfer::utf8
