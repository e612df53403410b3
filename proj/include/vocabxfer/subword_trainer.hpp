// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vocabxfer/vocabulary.hpp"

namespace vocabxfer {

// A merge joins two adjacent pieces regardless of where they sit in the word;
// `left` and `right` are marker-stripped. The merged piece becomes a
// word-initial token when it starts a word and a continuation token otherwise.
struct MergeRule {
  std::string left;
  std::string right;
  std::string result;
  std::uint32_t rank = 0;

  friend bool operator==(const MergeRule&, const MergeRule&) = default;
};

struct TrainerConfig {
  std::size_t target_size = 8000;
  std::string marker = std::string(kDefaultMarker);
  std::vector<std::string> specials = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};
  std::uint64_t min_pair_frequency = 2;
  std::size_t max_token_length = 64;  // code points
  bool lowercase = false;             // ASCII only
};

struct TrainResult {
  Vocabulary vocab;
  std::vector<MergeRule> merges;
  std::vector<std::string> warnings;
};

// Word -> occurrence count, accumulated from whitespace-delimited text.
class WordCounts {
 public:
  explicit WordCounts(bool lowercase = false) : lowercase_(lowercase) {}

  void AddText(std::string_view text);
  void AddStream(std::istream& in);
  void Merge(const WordCounts& other);

  const std::unordered_map<std::string, std::uint64_t>& counts() const { return counts_; }
  std::uint64_t total_words() const { return total_; }
  bool empty() const { return total_ == 0; }

 private:
  bool lowercase_;
  std::unordered_map<std::string, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

// Frequency-greedy pair merging. Specials come first, then the observed base
// alphabet (sorted by surface bytes), then merge results in rank order. Ties
// between equally frequent pairs go to the lexicographically smaller
// (left, right).
TrainResult TrainVocabulary(const WordCounts& words, const TrainerConfig& config);
TrainResult TrainVocabulary(std::istream& corpus, const TrainerConfig& config);

// Applies merges to single words. Pieces are only merged when the resulting
// surface (with its positional marker) is in the vocabulary, so every emitted
// id is valid; characters missing from the vocabulary become the unknown id.
class MergeTokenizer {
 public:
  MergeTokenizer(const Vocabulary& vocab, std::vector<MergeRule> merges);

  std::vector<TokenId> Tokenize(std::string_view word) const;

  const Vocabulary& vocab() const { return *vocab_; }

 private:
  const Vocabulary* vocab_;
  std::vector<MergeRule> merges_;
  std::unordered_map<std::string, std::uint32_t> ranks_;  // "left right" -> rank
  TokenId unknown_;
};

std::vector<TokenId> ApplyMerges(std::string_view word, const std::vector<MergeRule>& merges,
                                 const Vocabulary& vocab);

// One rule per line: "left right", rank = line index. A marker on `right` is
// accepted on load and stripped.
std::string SerializeMerges(const std::vector<MergeRule>& merges);
std::vector<MergeRule> ParseMerges(std::string_view text,
                                   std::string_view marker = kDefaultMarker);
std::vector<MergeRule> LoadMerges(const std::filesystem::path& path,
                                  std::string_view marker = kDefaultMarker);
void SaveMerges(const std::vector<MergeRule>& merges, const std::filesystem::path& path);

}  // namespace vocabxfer
