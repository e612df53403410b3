// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

#include "vocabxfer/corpus_stats.hpp"

#include <algorithm>

#include "vocabxfer/error.hpp"
#include "vocabxfer/utf8.hpp"

namespace vocabxfer {

CorpusTokenizer::CorpusTokenizer(const Vocabulary& vocab, std::vector<MergeRule> merges)
    : vocab_(&vocab) {
  auto unk = vocab.unknown_id();
  if (!unk) throw Error(ErrorKind::kValidation, "vocabulary has no [UNK] token");
  unknown_ = *unk;
  if (merges.empty()) {
    trie_.emplace(vocab);
  } else {
    merges_.emplace(vocab, std::move(merges));
  }
}

std::vector<TokenId> CorpusTokenizer::Tokenize(std::string_view word) const {
  if (merges_) return merges_->Tokenize(word);
  std::vector<TokenId> ids;
  std::size_t pos = 0;
  while (pos < word.size()) {
    const auto match = trie_->LongestPrefix(word.substr(pos), pos > 0);
    if (match) {
      ids.push_back(match->second);
      pos += match->first;
    } else {
      ids.push_back(unknown_);
      pos += utf8::SequenceLength(word, pos);
    }
  }
  return ids;
}

CorpusStats ComputeStats(const WordCounts& words, const CorpusTokenizer& tokenizer) {
  if (words.empty()) throw Error(ErrorKind::kValidation, "corpus contains no words");
  CorpusStats stats;
  stats.word_count = words.total_words();
  for (const auto& [word, count] : words.counts()) {
    for (TokenId id : tokenizer.Tokenize(word)) {
      stats.token_count += count;
      if (id == tokenizer.unknown_id()) {
        stats.unknown_count += count;
      } else {
        stats.token_frequency[id] += count;
      }
    }
  }
  const Vocabulary& vocab = tokenizer.vocab();
  const std::size_t regular = vocab.size() - vocab.specials().size();
  std::size_t used = 0;
  for (const auto& [id, count] : stats.token_frequency) used += vocab.is_special(id) ? 0 : 1;
  stats.fertility = static_cast<double>(stats.token_count) / static_cast<double>(stats.word_count);
  stats.unknown_rate =
      static_cast<double>(stats.unknown_count) / static_cast<double>(stats.token_count);
  stats.coverage = static_cast<double>(used) / static_cast<double>(regular);
  return stats;
}

CorpusStats TokenizeCorpus(std::istream& corpus, const Vocabulary& vocab,
                           const std::vector<MergeRule>& merges, bool lowercase) {
  WordCounts words(lowercase);
  words.AddStream(corpus);
  return ComputeStats(words, CorpusTokenizer(vocab, merges));
}

DriftReport CompareVocabularies(const WordCounts& words, const CorpusTokenizer& old_tok,
                                const CorpusTokenizer& new_tok, const DriftOptions& options,
                                const PlanSummary* transfer) {
  const CorpusStats old_stats = ComputeStats(words, old_tok);
  const CorpusStats new_stats = ComputeStats(words, new_tok);
  const Vocabulary& old_vocab = old_tok.vocab();
  const Vocabulary& new_vocab = new_tok.vocab();

  DriftReport report;
  report.old_fertility = old_stats.fertility;
  report.new_fertility = new_stats.fertility;
  report.ratio = new_stats.fertility / old_stats.fertility;
  report.unknown_rate_old = old_stats.unknown_rate;
  report.unknown_rate_new = new_stats.unknown_rate;
  report.word_count = words.total_words();
  report.old_token_count = old_stats.token_count;
  report.new_token_count = new_stats.token_count;
  report.coverage_old = old_stats.coverage;
  report.coverage_new = new_stats.coverage;

  struct Candidate {
    TokenId id;
    std::uint64_t old_count;
    std::uint64_t new_count;
  };
  std::vector<Candidate> candidates;
  for (const auto& [id, new_count] : new_stats.token_frequency) {
    std::uint64_t old_count = 0;
    if (auto old_id = old_vocab.find(new_vocab.token(id).surface)) {
      auto it = old_stats.token_frequency.find(*old_id);
      if (it != old_stats.token_frequency.end()) old_count = it->second;
    }
    if (new_count > old_count) candidates.push_back({id, old_count, new_count});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    const std::uint64_t ga = a.new_count - a.old_count;
    const std::uint64_t gb = b.new_count - b.old_count;
    if (ga != gb) return ga > gb;
    return a.id < b.id;
  });
  if (candidates.size() > options.top_k) candidates.resize(options.top_k);
  for (const Candidate& c : candidates) {
    report.top_gainers.push_back({new_vocab.token(c.id).surface, c.old_count, c.new_count});
  }

  report.transfer = transfer ? *transfer
                             : SummarizePlan(BuildTransferPlan(new_vocab, old_vocab,
                                                               TransferMode::kAveraged));

  if (report.unknown_rate_old == 1.0) {
    report.warnings.push_back("old tokenizer maps every token of the corpus to [UNK]");
  }
  if (report.unknown_rate_new == 1.0) {
    report.warnings.push_back("new tokenizer maps every token of the corpus to [UNK]");
  }
  return report;
}

DriftReport CompareVocabularies(std::istream& corpus, const CorpusTokenizer& old_tok,
                                const CorpusTokenizer& new_tok, const DriftOptions& options) {
  WordCounts words(options.lowercase);
  words.AddStream(corpus);
  return CompareVocabularies(words, old_tok, new_tok, options);
}

nlohmann::ordered_json DriftReportToJson(const DriftReport& report) {
  nlohmann::ordered_json j;
  j["old_fertility"] = report.old_fertility;
  j["new_fertility"] = report.new_fertility;
  j["ratio"] = report.ratio;
  j["unknown_rate_old"] = report.unknown_rate_old;
  j["unknown_rate_new"] = report.unknown_rate_new;
  j["top_gainers"] = nlohmann::ordered_json::array();
  for (const TokenGain& g : report.top_gainers) {
    nlohmann::ordered_json entry;
    entry["token"] = g.token;
    entry["old_count"] = g.old_count;
    entry["new_count"] = g.new_count;
    j["top_gainers"].push_back(std::move(entry));
  }
  j["word_count"] = report.word_count;
  j["old_token_count"] = report.old_token_count;
  j["new_token_count"] = report.new_token_count;
  j["coverage_old"] = report.coverage_old;
  j["coverage_new"] = report.coverage_new;
  nlohmann::ordered_json transfer;
  transfer["matched"] = report.transfer.matched;
  transfer["averaged"] = report.transfer.averaged;
  transfer["fallback"] = report.transfer.fallback;
  nlohmann::ordered_json lengths = nlohmann::ordered_json::object();
  for (const auto& [len, count] : report.transfer.partition_lengths) {
    lengths[std::to_string(len)] = count;
  }
  transfer["partition_lengths"] = std::move(lengths);
  j["transfer"] = std::move(transfer);
  j["warnings"] = report.warnings;
  return j;
}

std::string SerializeDriftReport(const DriftReport& report) {
  return DriftReportToJson(report).dump(2, ' ', false,
                                        nlohmann::json::error_handler_t::replace) +
         "\n";
}

}  // namespace vocabxfer
