// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

#include "vocabxfer/vocabulary.hpp"

#include <algorithm>

#include "vocabxfer/error.hpp"
#include "vocabxfer/file_io.hpp"

namespace vocabxfer {

bool IsBracketedSpecial(std::string_view surface) {
  if (surface.size() < 3 || surface.front() != '[' || surface.back() != ']') return false;
  return std::all_of(surface.begin() + 1, surface.end() - 1, [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
           c == '_';
  });
}

Vocabulary Vocabulary::FromSurfaces(std::vector<std::string> surfaces, std::string marker) {
  if (marker.empty()) throw Error(ErrorKind::kValidation, "continuation marker is empty");
  if (surfaces.empty()) throw Error(ErrorKind::kValidation, "vocabulary is empty");

  Vocabulary vocab;
  vocab.marker_ = std::move(marker);
  vocab.tokens_.reserve(surfaces.size());
  vocab.special_flags_.assign(surfaces.size(), false);
  vocab.by_surface_.reserve(surfaces.size());
  const std::string_view m = vocab.marker_;

  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    std::string& s = surfaces[i];
    auto fail = [&](const std::string& why) {
      throw Error(ErrorKind::kValidation,
                  "token " + std::to_string(i) + " (line " + std::to_string(i + 1) +
                      ") \"" + s + "\": " + why);
    };
    if (s.empty()) fail("empty surface");
    if (s.find('\n') != std::string::npos) fail("surface contains a newline");

    Token token;
    if (IsBracketedSpecial(s)) {
      vocab.special_flags_[i] = true;
      vocab.specials_.push_back(static_cast<TokenId>(i));
    } else if (std::string_view(s).substr(0, m.size()) == m) {
      if (s.size() == m.size()) fail("surface equals the continuation marker");
      if (std::string_view(s).substr(m.size(), m.size()) == m) {
        fail("surface carries the continuation marker twice");
      }
      token.is_continuation = true;
      token.marker_length = static_cast<std::uint32_t>(m.size());
    }
    token.surface = std::move(s);
    if (!vocab.by_surface_.emplace(token.surface, static_cast<TokenId>(i)).second) {
      throw Error(ErrorKind::kValidation, "duplicate token \"" + token.surface +
                                              "\" at line " + std::to_string(i + 1));
    }
    vocab.tokens_.push_back(std::move(token));
  }
  if (vocab.specials_.size() == vocab.tokens_.size()) {
    throw Error(ErrorKind::kValidation, "vocabulary has no non-special tokens");
  }
  return vocab;
}

std::optional<TokenId> Vocabulary::find(std::string_view surface) const {
  auto it = by_surface_.find(std::string(surface));
  if (it == by_surface_.end()) return std::nullopt;
  return it->second;
}

std::optional<TokenId> Vocabulary::find(std::string_view normalized, bool continuation) const {
  return find(surface_with_marker(normalized, continuation));
}

std::string Vocabulary::surface_with_marker(std::string_view normalized,
                                            bool continuation) const {
  std::string s;
  if (continuation) {
    s.reserve(marker_.size() + normalized.size());
    s = marker_;
  }
  s.append(normalized);
  return s;
}

bool Vocabulary::is_special(TokenId id) const {
  return id < special_flags_.size() && special_flags_[id];
}

std::optional<TokenId> Vocabulary::unknown_id() const {
  auto id = find("[UNK]");
  if (id && is_special(*id)) return id;
  return std::nullopt;
}

std::string Vocabulary::Serialize() const {
  std::size_t bytes = 0;
  for (const Token& t : tokens_) bytes += t.surface.size() + 1;
  std::string out;
  out.reserve(bytes);
  for (const Token& t : tokens_) {
    out += t.surface;
    out += '\n';
  }
  return out;
}

std::string Vocabulary::Digest() const { return Sha256Hex(Serialize()); }

Vocabulary ParseVocabulary(std::string_view text, std::string marker) {
  if (text.empty()) throw Error(ErrorKind::kValidation, "vocabulary file is empty");
  std::vector<std::string> lines;
  std::unordered_map<std::string_view, std::size_t> first_seen;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::size_t line_no = lines.size() + 1;
    if (line.empty()) {
      throw Error(ErrorKind::kValidation, "line " + std::to_string(line_no) + ": empty token");
    }
    auto [it, inserted] = first_seen.emplace(line, line_no);
    if (!inserted) {
      throw Error(ErrorKind::kValidation,
                  "line " + std::to_string(line_no) + ": duplicate token \"" +
                      std::string(line) + "\" (first on line " + std::to_string(it->second) +
                      ")");
    }
    lines.emplace_back(line);
    pos = end + 1;
  }
  return Vocabulary::FromSurfaces(std::move(lines), std::move(marker));
}

Vocabulary LoadVocabulary(const std::filesystem::path& path, std::string marker) {
  try {
    return ParseVocabulary(ReadFile(path), std::move(marker));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void SaveVocabulary(const Vocabulary& vocab, const std::filesystem::path& path) {
  if (vocab.size() == 0) throw Error(ErrorKind::kValidation, "cannot save an empty vocabulary");
  WriteFileAtomic(path, vocab.Serialize());
}

}  // namespace vocabxfer
