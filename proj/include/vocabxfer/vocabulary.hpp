// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vocabxfer {

using TokenId = std::uint32_t;

inline constexpr std::string_view kDefaultMarker = "##";

struct Token {
  std::string surface;
  bool is_continuation = false;
  // Length of the marker prefix carried by `surface` (0 for word-initial).
  std::uint32_t marker_length = 0;

  std::string_view normalized() const {
    return std::string_view(surface).substr(marker_length);
  }

  friend bool operator==(const Token&, const Token&) = default;
};

// True for reserved names such as "[UNK]", "[PAD]", "[MASK]" or "[unused7]".
bool IsBracketedSpecial(std::string_view surface);

// An ordered token list. Ids are positions in the list; specials are inferred
// from bracketed surfaces, so they survive a save/load round trip.
class Vocabulary {
 public:
  // Validates every invariant (unique surfaces, marker normalization, at least
  // one non-special token). Throws Error(kValidation) naming the first
  // offending entry by its zero-based index.
  static Vocabulary FromSurfaces(std::vector<std::string> surfaces,
                                 std::string marker = std::string(kDefaultMarker));

  std::size_t size() const { return tokens_.size(); }
  const Token& token(TokenId id) const { return tokens_.at(id); }
  const std::vector<Token>& tokens() const { return tokens_; }
  const std::string& marker() const { return marker_; }

  std::optional<TokenId> find(std::string_view surface) const;
  // Lookup by marker-stripped surface and continuation flag.
  std::optional<TokenId> find(std::string_view normalized, bool continuation) const;

  bool is_special(TokenId id) const;
  const std::vector<TokenId>& specials() const { return specials_; }
  std::optional<TokenId> unknown_id() const;

  std::string surface_with_marker(std::string_view normalized, bool continuation) const;

  // Canonical file bytes: one surface per line, LF-terminated.
  std::string Serialize() const;
  // SHA-256 of Serialize().
  std::string Digest() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.marker_ == b.marker_ && a.tokens_ == b.tokens_ && a.specials_ == b.specials_;
  }

 private:
  std::string marker_;
  std::vector<Token> tokens_;
  std::vector<TokenId> specials_;
  std::vector<bool> special_flags_;
  std::unordered_map<std::string, TokenId> by_surface_;
};

// Line format: one surface per line, id = zero-based line index. A trailing
// CR is stripped so CRLF files load; an empty line is rejected.
Vocabulary ParseVocabulary(std::string_view text,
                           std::string marker = std::string(kDefaultMarker));
Vocabulary LoadVocabulary(const std::filesystem::path& path,
                          std::string marker = std::string(kDefaultMarker));
void SaveVocabulary(const Vocabulary& vocab, const std::filesystem::path& path);

}  // namespace vocabxfer
