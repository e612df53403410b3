// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vocabxfer/subword_trainer.hpp"
#include "vocabxfer/token_trie.hpp"
#include "vocabxfer/transfer.hpp"
#include "vocabxfer/vocabulary.hpp"

namespace vocabxfer {

// Tokenizes single words with merges when any are given, otherwise by
// greedy longest-match-first over the vocabulary (WordPiece style) so plain
// vocab.txt files work without a merge list. Unmatched code points become
// [UNK] one at a time.
class CorpusTokenizer {
 public:
  // Throws Error(kValidation) if the vocabulary has no [UNK] token.
  CorpusTokenizer(const Vocabulary& vocab, std::vector<MergeRule> merges);

  std::vector<TokenId> Tokenize(std::string_view word) const;

  const Vocabulary& vocab() const { return *vocab_; }
  TokenId unknown_id() const { return unknown_; }
  bool uses_merges() const { return merges_.has_value(); }

 private:
  const Vocabulary* vocab_;
  TokenId unknown_;
  std::optional<MergeTokenizer> merges_;
  std::optional<TokenTrie> trie_;
};

struct CorpusStats {
  std::uint64_t word_count = 0;
  std::uint64_t token_count = 0;
  std::uint64_t unknown_count = 0;
  double fertility = 0.0;     // token_count / word_count
  double unknown_rate = 0.0;  // unknown_count / token_count
  double coverage = 0.0;      // share of non-special tokens seen at least once
  std::map<TokenId, std::uint64_t> token_frequency;  // excludes unknowns

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

CorpusStats ComputeStats(const WordCounts& words, const CorpusTokenizer& tokenizer);
CorpusStats TokenizeCorpus(std::istream& corpus, const Vocabulary& vocab,
                           const std::vector<MergeRule>& merges, bool lowercase = false);

struct TokenGain {
  std::string token;
  std::uint64_t old_count = 0;
  std::uint64_t new_count = 0;

  friend bool operator==(const TokenGain&, const TokenGain&) = default;
};

struct DriftReport {
  double old_fertility = 0.0;
  double new_fertility = 0.0;
  double ratio = 0.0;  // new_fertility / old_fertility
  double unknown_rate_old = 0.0;
  double unknown_rate_new = 0.0;
  std::vector<TokenGain> top_gainers;

  std::uint64_t word_count = 0;
  std::uint64_t old_token_count = 0;
  std::uint64_t new_token_count = 0;
  double coverage_old = 0.0;
  double coverage_new = 0.0;
  PlanSummary transfer;  // counts for an averaged plan over this pair
  std::vector<std::string> warnings;
};

struct DriftOptions {
  std::size_t top_k = 20;
  bool lowercase = false;
};

DriftReport CompareVocabularies(const WordCounts& words, const CorpusTokenizer& old_tok,
                                const CorpusTokenizer& new_tok, const DriftOptions& options = {},
                                const PlanSummary* transfer = nullptr);
DriftReport CompareVocabularies(std::istream& corpus, const CorpusTokenizer& old_tok,
                                const CorpusTokenizer& new_tok,
                                const DriftOptions& options = {});

// Fixed leading fields: old_fertility, new_fertility, ratio, unknown_rate_old,
// unknown_rate_new, top_gainers; extra detail follows.
nlohmann::ordered_json DriftReportToJson(const DriftReport& report);
std::string SerializeDriftReport(const DriftReport& report);

}  // namespace vocabxfer
