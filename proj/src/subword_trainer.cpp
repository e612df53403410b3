// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

#include "vocabxfer/subword_trainer.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <set>
#include <unordered_set>

#include "vocabxfer/error.hpp"
#include "vocabxfer/file_io.hpp"
#include "vocabxfer/utf8.hpp"

namespace vocabxfer {
namespace {

using SymbolId = std::uint32_t;

std::uint64_t PairKey(SymbolId a, SymbolId b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}
SymbolId PairLeft(std::uint64_t key) { return static_cast<SymbolId>(key >> 32); }
SymbolId PairRight(std::uint64_t key) { return static_cast<SymbolId>(key & 0xFFFFFFFFu); }

void ValidateConfig(const TrainerConfig& config) {
  if (config.marker.empty()) throw Error(ErrorKind::kValidation, "marker must be non-empty");
  if (config.max_token_length < 2) {
    throw Error(ErrorKind::kValidation, "max_token_length must be at least 2");
  }
  if (config.min_pair_frequency < 1) {
    throw Error(ErrorKind::kValidation, "min_pair_frequency must be at least 1");
  }
  std::set<std::string_view> seen;
  for (const std::string& s : config.specials) {
    if (!IsBracketedSpecial(s)) {
      throw Error(ErrorKind::kValidation,
                  "special token \"" + s + "\" must be a bracketed name like [UNK]");
    }
    if (!seen.insert(s).second) {
      throw Error(ErrorKind::kValidation, "special token \"" + s + "\" listed twice");
    }
  }
}

class PairMerger {
 public:
  PairMerger(const WordCounts& words, const TrainerConfig& config)
      : config_(config), heap_(HeapLess{this}) {
    std::vector<std::pair<std::string_view, std::uint64_t>> sorted;
    sorted.reserve(words.counts().size());
    for (const auto& [w, c] : words.counts()) sorted.emplace_back(w, c);
    std::sort(sorted.begin(), sorted.end());

    words_.reserve(sorted.size());
    for (const auto& [w, c] : sorted) {
      Word word{{}, c};
      for (std::string_view cp : utf8::SplitCodePoints(w)) word.symbols.push_back(Intern(cp));
      words_.push_back(std::move(word));
    }
    stamp_.assign(words_.size(), std::numeric_limits<std::size_t>::max());

    for (std::uint32_t w = 0; w < words_.size(); ++w) AddPairs(w, nullptr);
    for (const auto& [key, count] : pair_count_) Push(key);
  }

  // Base alphabet: every code point variant observed in the corpus.
  std::vector<std::string> Alphabet() const {
    std::set<std::string> surfaces;
    for (const Word& word : words_) {
      for (std::size_t i = 0; i < word.symbols.size(); ++i) {
        const std::string& s = symbols_[word.symbols[i]];
        if (ValidVariant(s)) surfaces.insert(WithMarker(s, i > 0));
      }
    }
    return {surfaces.begin(), surfaces.end()};
  }

  struct Step {
    MergeRule rule;
    std::uint64_t initial_occurrences = 0;
    std::uint64_t continuation_occurrences = 0;
  };

  // Executes the next admissible merge, or returns false when no pair reaches
  // min_pair_frequency.
  bool Next(Step& step) {
    while (!heap_.empty()) {
      const HeapEntry top = heap_.top();
      heap_.pop();
      auto it = pair_count_.find(top.key);
      if (it == pair_count_.end() || it->second != top.count) continue;  // stale
      if (top.count < config_.min_pair_frequency) return false;
      const std::string& left = symbols_[PairLeft(top.key)];
      const std::string& right = symbols_[PairRight(top.key)];
      std::string result = left + right;
      if (!ValidVariant(result) || IsBracketedSpecial(result) ||
          utf8::CountCodePoints(result) > config_.max_token_length) {
        banned_.insert(top.key);
        continue;
      }
      step.rule = MergeRule{left, right, result, rank_++};
      step.initial_occurrences = 0;
      step.continuation_occurrences = 0;
      Apply(top.key, Intern(result), step);
      return true;
    }
    return false;
  }

  std::string WithMarker(std::string_view normalized, bool continuation) const {
    return continuation ? config_.marker + std::string(normalized) : std::string(normalized);
  }

  bool ValidVariant(std::string_view normalized) const {
    return !normalized.empty() &&
           normalized.substr(0, config_.marker.size()) != config_.marker;
  }

 private:
  struct Word {
    std::vector<SymbolId> symbols;
    std::uint64_t count;
  };
  struct HeapEntry {
    std::uint64_t count;
    std::uint64_t key;
  };
  struct HeapLess {
    const PairMerger* self;
    // priority_queue pops the greatest element: highest count, then the
    // lexicographically smallest (left, right).
    bool operator()(const HeapEntry& a, const HeapEntry& b) const {
      if (a.count != b.count) return a.count < b.count;
      const auto& s = self->symbols_;
      const std::string& al = s[PairLeft(a.key)];
      const std::string& bl = s[PairLeft(b.key)];
      if (al != bl) return al > bl;
      return s[PairRight(a.key)] > s[PairRight(b.key)];
    }
  };

  SymbolId Intern(std::string_view s) {
    auto [it, inserted] = symbol_ids_.emplace(std::string(s), symbols_.size());
    if (inserted) symbols_.push_back(it->first);
    return it->second;
  }

  void Push(std::uint64_t key) {
    if (banned_.count(key)) return;
    auto it = pair_count_.find(key);
    if (it != pair_count_.end() && it->second > 0) heap_.push(HeapEntry{it->second, key});
  }

  void AddPairs(std::uint32_t w, std::unordered_set<std::uint64_t>* touched) {
    const Word& word = words_[w];
    for (std::size_t i = 0; i + 1 < word.symbols.size(); ++i) {
      const std::uint64_t key = PairKey(word.symbols[i], word.symbols[i + 1]);
      pair_count_[key] += word.count;
      auto& list = pair_words_[key];
      if (list.empty() || list.back() != w) list.push_back(w);
      if (touched) touched->insert(key);
    }
  }

  void RemovePairs(std::uint32_t w, std::unordered_set<std::uint64_t>& touched) {
    const Word& word = words_[w];
    for (std::size_t i = 0; i + 1 < word.symbols.size(); ++i) {
      const std::uint64_t key = PairKey(word.symbols[i], word.symbols[i + 1]);
      auto it = pair_count_.find(key);
      it->second -= word.count;
      if (it->second == 0) pair_count_.erase(it);
      touched.insert(key);
    }
  }

  void Apply(std::uint64_t key, SymbolId merged, Step& step) {
    const SymbolId a = PairLeft(key);
    const SymbolId b = PairRight(key);
    std::vector<std::uint32_t> affected = std::move(pair_words_[key]);
    pair_words_.erase(key);
    std::unordered_set<std::uint64_t> touched;
    const std::size_t stamp = step.rule.rank;
    for (std::uint32_t w : affected) {
      if (stamp_[w] == stamp) continue;
      stamp_[w] = stamp;
      Word& word = words_[w];
      bool present = false;
      for (std::size_t i = 0; i + 1 < word.symbols.size(); ++i) {
        if (word.symbols[i] == a && word.symbols[i + 1] == b) {
          present = true;
          break;
        }
      }
      if (!present) continue;
      RemovePairs(w, touched);
      std::vector<SymbolId> out;
      out.reserve(word.symbols.size());
      for (std::size_t i = 0; i < word.symbols.size();) {
        if (i + 1 < word.symbols.size() && word.symbols[i] == a && word.symbols[i + 1] == b) {
          (out.empty() ? step.initial_occurrences : step.continuation_occurrences) +=
              word.count;
          out.push_back(merged);
          i += 2;
        } else {
          out.push_back(word.symbols[i]);
          ++i;
        }
      }
      word.symbols = std::move(out);
      AddPairs(w, &touched);
    }
    // Deterministic heap contents regardless of hash-set iteration order.
    std::vector<std::uint64_t> keys(touched.begin(), touched.end());
    std::sort(keys.begin(), keys.end());
    for (std::uint64_t k : keys) Push(k);
  }

  const TrainerConfig& config_;
  std::vector<Word> words_;
  std::vector<std::size_t> stamp_;
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, SymbolId> symbol_ids_;
  std::unordered_map<std::uint64_t, std::uint64_t> pair_count_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> pair_words_;
  std::unordered_set<std::uint64_t> banned_;
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapLess> heap_;
  std::uint32_t rank_ = 0;
};

void AsciiLower(std::string& s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
}

}  // namespace

void WordCounts::AddText(std::string_view text) {
  utf8::ForEachWord(text, [&](std::string_view word) {
    std::string w(word);
    if (lowercase_) AsciiLower(w);
    ++counts_[std::move(w)];
    ++total_;
  });
}

void WordCounts::AddStream(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) AddText(line);
}

void WordCounts::Merge(const WordCounts& other) {
  for (const auto& [w, c] : other.counts_) counts_[w] += c;
  total_ += other.total_;
}

TrainResult TrainVocabulary(const WordCounts& words, const TrainerConfig& config) {
  ValidateConfig(config);
  if (words.empty()) throw Error(ErrorKind::kValidation, "corpus contains no words");

  PairMerger merger(words, config);
  std::vector<std::string> surfaces = config.specials;
  std::unordered_set<std::string> present(surfaces.begin(), surfaces.end());
  for (std::string& s : merger.Alphabet()) {
    present.insert(s);
    surfaces.push_back(std::move(s));
  }

  TrainResult result{Vocabulary(), {}, {}};
  if (surfaces.size() > config.target_size) {
    result.warnings.push_back("target size " + std::to_string(config.target_size) +
                              " is below specials + base alphabet (" +
                              std::to_string(surfaces.size()) + "); no merges learned");
  }

  PairMerger::Step step;
  while (surfaces.size() < config.target_size && merger.Next(step)) {
    const std::string& merged = step.rule.result;
    result.merges.push_back(step.rule);
    for (bool continuation : {false, true}) {
      const std::uint64_t occurrences =
          continuation ? step.continuation_occurrences : step.initial_occurrences;
      if (occurrences == 0 || surfaces.size() >= config.target_size) continue;
      std::string surface = merger.WithMarker(merged, continuation);
      if (present.insert(surface).second) surfaces.push_back(std::move(surface));
    }
  }
  if (surfaces.size() < config.target_size) {
    result.warnings.push_back("target size " + std::to_string(config.target_size) +
                              " unreachable; vocabulary has " +
                              std::to_string(surfaces.size()) + " tokens");
  }
  result.vocab = Vocabulary::FromSurfaces(std::move(surfaces), config.marker);
  return result;
}

TrainResult TrainVocabulary(std::istream& corpus, const TrainerConfig& config) {
  WordCounts words(config.lowercase);
  words.AddStream(corpus);
  return TrainVocabulary(words, config);
}

MergeTokenizer::MergeTokenizer(const Vocabulary& vocab, std::vector<MergeRule> merges)
    : vocab_(&vocab), merges_(std::move(merges)) {
  ranks_.reserve(merges_.size());
  for (const MergeRule& m : merges_) ranks_.emplace(m.left + ' ' + m.right, m.rank);
  auto unk = vocab.unknown_id();
  unknown_ = unk ? *unk : ~TokenId{0};
}

std::vector<TokenId> MergeTokenizer::Tokenize(std::string_view word) const {
  std::vector<std::string> pieces;
  for (std::string_view cp : utf8::SplitCodePoints(word)) pieces.emplace_back(cp);

  auto in_vocab = [&](const std::string& piece, bool continuation) {
    auto id = vocab_->find(piece, continuation);
    return id && !vocab_->is_special(*id);
  };
  auto mergeable = [&](std::size_t i) { return in_vocab(pieces[i] + pieces[i + 1], i > 0); };
  std::string key;
  while (pieces.size() > 1) {
    std::uint32_t best_rank = std::numeric_limits<std::uint32_t>::max();
    std::size_t best = 0;
    for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
      key.assign(pieces[i]).append(1, ' ').append(pieces[i + 1]);
      auto it = ranks_.find(key);
      if (it == ranks_.end() || it->second >= best_rank || !mergeable(i)) continue;
      best_rank = it->second;
      best = i;
    }
    if (best_rank == std::numeric_limits<std::uint32_t>::max()) break;

    const std::string left = pieces[best];
    const std::string right = pieces[best + 1];
    std::vector<std::string> out;
    out.reserve(pieces.size());
    for (std::size_t i = 0; i < pieces.size();) {
      if (i + 1 < pieces.size() && pieces[i] == left && pieces[i + 1] == right &&
          in_vocab(left + right, !out.empty())) {
        out.push_back(left + right);
        i += 2;
      } else {
        out.push_back(std::move(pieces[i]));
        ++i;
      }
    }
    pieces = std::move(out);
  }

  std::vector<TokenId> ids;
  ids.reserve(pieces.size());
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    auto id = vocab_->find(pieces[i], i > 0);
    if (id && !vocab_->is_special(*id)) {
      ids.push_back(*id);
    } else if (unknown_ != ~TokenId{0}) {
      ids.push_back(unknown_);
    } else {
      throw Error(ErrorKind::kValidation,
                  "vocabulary has no [UNK] token for unknown piece \"" + pieces[i] + "\"");
    }
  }
  return ids;
}

std::vector<TokenId> ApplyMerges(std::string_view word, const std::vector<MergeRule>& merges,
                                 const Vocabulary& vocab) {
  return MergeTokenizer(vocab, merges).Tokenize(word);
}

std::string SerializeMerges(const std::vector<MergeRule>& merges) {
  std::string out;
  for (const MergeRule& m : merges) {
    out += m.left;
    out += ' ';
    out += m.right;
    out += '\n';
  }
  return out;
}

std::vector<MergeRule> ParseMerges(std::string_view text, std::string_view marker) {
  std::vector<MergeRule> merges;
  auto strip = [&](std::string_view s) {
    return s.substr(0, marker.size()) == marker ? s.substr(marker.size()) : s;
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::size_t space = line.find(' ');
    const std::string where = "merges line " + std::to_string(merges.size() + 1);
    if (space == std::string_view::npos || space == 0 || space + 1 >= line.size() ||
        line.find(' ', space + 1) != std::string_view::npos) {
      throw Error(ErrorKind::kValidation, where + ": expected \"left right\"");
    }
    std::string left(strip(line.substr(0, space)));
    std::string right(strip(line.substr(space + 1)));
    if (left.empty() || right.empty()) {
      throw Error(ErrorKind::kValidation, where + ": empty piece");
    }
    std::string result = left + right;
    merges.push_back(MergeRule{std::move(left), std::move(right), std::move(result),
                               static_cast<std::uint32_t>(merges.size())});
    pos = end + 1;
  }
  return merges;
}

std::vector<MergeRule> LoadMerges(const std::filesystem::path& path, std::string_view marker) {
  try {
    return ParseMerges(ReadFile(path), marker);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void SaveMerges(const std::vector<MergeRule>& merges, const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeMerges(merges));
}

}  // namespace vocabxfer
