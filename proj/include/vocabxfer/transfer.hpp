// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vocabxfer/token_trie.hpp"
#include "vocabxfer/vocabulary.hpp"

namespace vocabxfer {

// Old-vocabulary ids whose marker-stripped surfaces concatenate to the target.
// Segment 0 shares the target's continuation status; the rest are
// continuation tokens.
struct Partition {
  std::vector<TokenId> segments;

  friend bool operator==(const Partition&, const Partition&) = default;
};

enum class InitKind { kMatched, kAveraged, kFallback };
enum class TransferMode { kMatched, kAveraged };

std::string_view InitKindName(InitKind kind);
std::string_view TransferModeName(TransferMode mode);
TransferMode ParseTransferMode(std::string_view name);

struct InitDirective {
  InitKind kind = InitKind::kFallback;
  std::vector<TokenId> sources;

  friend bool operator==(const InitDirective&, const InitDirective&) = default;
};

struct TransferPlan {
  TransferMode mode = TransferMode::kMatched;
  std::string old_vocab_sha256;
  std::string new_vocab_sha256;
  std::vector<std::string> tokens;  // new-vocabulary surfaces, id order
  std::vector<InitDirective> directives;

  friend bool operator==(const TransferPlan&, const TransferPlan&) = default;
};

// Index-aligned with new_vocab: the old id with a byte-equal surface, if any.
// Throws Error(kValidation) when the vocabularies use different markers.
std::vector<std::optional<TokenId>> MatchTokens(const Vocabulary& new_vocab,
                                                const Vocabulary& old_vocab);

// Minimal-segment partition of `target` into old tokens. Among minimal
// partitions the one with the longest single segment wins; remaining ties go
// to the lexicographically greatest sequence of segment lengths (leftmost
// longest). Returns nullopt when no partition exists.
std::optional<Partition> MinPartition(std::string_view normalized, bool continuation,
                                      const TokenTrie& old_trie);
std::optional<Partition> MinPartition(const Token& target, const TokenTrie& old_trie);

TransferPlan BuildTransferPlan(const Vocabulary& new_vocab, const Vocabulary& old_vocab,
                               TransferMode mode);
TransferPlan BuildTransferPlan(const Vocabulary& new_vocab, const Vocabulary& old_vocab,
                               const TokenTrie& old_trie, TransferMode mode);

struct PlanSummary {
  std::size_t matched = 0;
  std::size_t averaged = 0;
  std::size_t fallback = 0;
  std::map<std::size_t, std::size_t> partition_lengths;  // segments -> count

  std::size_t total() const { return matched + averaged + fallback; }
  friend bool operator==(const PlanSummary&, const PlanSummary&) = default;
};

PlanSummary SummarizePlan(const TransferPlan& plan);

// Checks the directive invariants (cardinalities, mode consistency, sizes).
void ValidatePlan(const TransferPlan& plan);

std::string SerializePlan(const TransferPlan& plan);
TransferPlan ParsePlan(std::string_view text);
TransferPlan LoadPlan(const std::filesystem::path& path);
void SavePlan(const TransferPlan& plan, const std::filesystem::path& path);

}  // namespace vocabxfer
