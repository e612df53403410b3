// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

#include "vocabxfer/utf8.hpp"

#include <cstdint>

namespace vocabxfer::utf8 {
namespace {

bool IsContinuationByte(unsigned char c) { return (c & 0xC0) == 0x80; }

char32_t DecodeAt(std::string_view text, std::size_t pos, std::size_t len) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  if (len == 1) return lead;
  char32_t cp = lead & (0xFF >> (len + 1));
  for (std::size_t i = 1; i < len; ++i) {
    cp = (cp << 6) | (static_cast<unsigned char>(text[pos + i]) & 0x3F);
  }
  return cp;
}

bool IsUnicodeSpace(char32_t cp) {
  switch (cp) {
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

}  // namespace

std::size_t SequenceLength(std::string_view text, std::size_t pos) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  std::size_t len = 1;
  if (lead >= 0xF0 && lead <= 0xF4) {
    len = 4;
  } else if (lead >= 0xE0) {
    len = lead <= 0xEF ? 3 : 1;
  } else if (lead >= 0xC2) {
    len = 2;
  }
  if (pos + len > text.size()) return 1;
  for (std::size_t i = 1; i < len; ++i) {
    if (!IsContinuationByte(static_cast<unsigned char>(text[pos + i]))) return 1;
  }
  return len;
}

std::vector<std::string_view> SplitCodePoints(std::string_view text) {
  std::vector<std::string_view> out;
  out.reserve(text.size());
  for (std::size_t pos = 0; pos < text.size();) {
    const std::size_t len = SequenceLength(text, pos);
    out.push_back(text.substr(pos, len));
    pos += len;
  }
  return out;
}

std::size_t CountCodePoints(std::string_view text) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < text.size(); pos += SequenceLength(text, pos)) ++n;
  return n;
}

std::size_t WhitespaceLength(std::string_view text, std::size_t pos) {
  const auto c = static_cast<unsigned char>(text[pos]);
  if (c < 0x80) {
    return (c == ' ' || (c >= 0x09 && c <= 0x0D)) ? 1 : 0;
  }
  const std::size_t len = SequenceLength(text, pos);
  if (len == 1) return 0;
  return IsUnicodeSpace(DecodeAt(text, pos, len)) ? len : 0;
}

}  // namespace vocabxfer::utf8
