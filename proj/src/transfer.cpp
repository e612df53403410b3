// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

#include "vocabxfer/transfer.hpp"

#include <algorithm>
#include <array>
#include <limits>

#include "json.hpp"

#include "vocabxfer/error.hpp"
#include "vocabxfer/file_io.hpp"

namespace vocabxfer {
namespace {

constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max() / 4;

struct Edge {
  std::size_t length;
  TokenId id;
};

}  // namespace

std::string_view InitKindName(InitKind kind) {
  switch (kind) {
    case InitKind::kMatched: return "matched";
    case InitKind::kAveraged: return "averaged";
    case InitKind::kFallback: return "fallback";
  }
  return "unknown";
}

std::string_view TransferModeName(TransferMode mode) {
  return mode == TransferMode::kMatched ? "matched" : "averaged";
}

TransferMode ParseTransferMode(std::string_view name) {
  if (name == "matched") return TransferMode::kMatched;
  if (name == "averaged") return TransferMode::kAveraged;
  throw Error(ErrorKind::kValidation,
              "unknown transfer mode \"" + std::string(name) + "\" (matched|averaged)");
}

std::vector<std::optional<TokenId>> MatchTokens(const Vocabulary& new_vocab,
                                                const Vocabulary& old_vocab) {
  if (new_vocab.marker() != old_vocab.marker()) {
    throw Error(ErrorKind::kValidation, "continuation markers differ: new \"" +
                                            new_vocab.marker() + "\" vs old \"" +
                                            old_vocab.marker() + "\"");
  }
  std::vector<std::optional<TokenId>> matches(new_vocab.size());
  for (TokenId id = 0; id < new_vocab.size(); ++id) {
    matches[id] = old_vocab.find(new_vocab.token(id).surface);
  }
  return matches;
}

std::optional<Partition> MinPartition(std::string_view s, bool continuation,
                                      const TokenTrie& trie) {
  const std::size_t n = s.size();
  if (n == 0) return std::nullopt;

  std::vector<std::vector<Edge>> edges(n);
  for (std::size_t i = 0; i < n; ++i) {
    trie.ForEachPrefix(s.substr(i), i == 0 ? continuation : true,
                       [&](std::size_t len, TokenId id) { edges[i].push_back({len, id}); });
  }

  // Fewest segments covering s[0, j) and s[i, n).
  std::vector<std::size_t> prefix(n + 1, kInf), suffix(n + 1, kInf);
  prefix[0] = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (prefix[i] == kInf) continue;
    for (const Edge& e : edges[i]) prefix[i + e.length] = std::min(prefix[i + e.length], prefix[i] + 1);
  }
  suffix[n] = 0;
  for (std::size_t i = n; i-- > 0;) {
    for (const Edge& e : edges[i]) suffix[i] = std::min(suffix[i], suffix[i + e.length] + 1);
  }
  const std::size_t best_count = suffix[0];
  if (best_count == kInf) return std::nullopt;

  // Longest segment appearing in any minimal partition.
  std::size_t longest = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (prefix[i] == kInf) continue;
    for (const Edge& e : edges[i]) {
      if (prefix[i] + 1 + suffix[i + e.length] == best_count) longest = std::max(longest, e.length);
    }
  }

  // remaining[i][need]: fewest segments covering s[i, n), where need = 1
  // demands that a segment of length `longest` still appears.
  std::vector<std::array<std::size_t, 2>> remaining(n + 1, {kInf, kInf});
  remaining[n][0] = 0;
  for (std::size_t i = n; i-- > 0;) {
    for (const Edge& e : edges[i]) {
      for (int need = 0; need < 2; ++need) {
        const int next_need = (need && e.length != longest) ? 1 : 0;
        const std::size_t rest = remaining[i + e.length][next_need];
        if (rest != kInf) remaining[i][need] = std::min(remaining[i][need], rest + 1);
      }
    }
  }

  // Greedy longest-first walk along feasible optimal completions yields the
  // lexicographically greatest length sequence.
  Partition partition;
  std::size_t pos = 0;
  int need = 1;
  while (pos < n) {
    const std::size_t used = partition.segments.size();
    bool advanced = false;
    for (auto it = edges[pos].rbegin(); it != edges[pos].rend(); ++it) {
      const int next_need = (need && it->length != longest) ? 1 : 0;
      const std::size_t rest = remaining[pos + it->length][next_need];
      if (rest != kInf && used + 1 + rest == best_count) {
        partition.segments.push_back(it->id);
        pos += it->length;
        need = next_need;
        advanced = true;
        break;
      }
    }
    if (!advanced) return std::nullopt;  // unreachable when best_count is finite
  }
  return partition;
}

std::optional<Partition> MinPartition(const Token& target, const TokenTrie& old_trie) {
  return MinPartition(target.normalized(), target.is_continuation, old_trie);
}

TransferPlan BuildTransferPlan(const Vocabulary& new_vocab, const Vocabulary& old_vocab,
                               TransferMode mode) {
  const TokenTrie trie(old_vocab);
  return BuildTransferPlan(new_vocab, old_vocab, trie, mode);
}

TransferPlan BuildTransferPlan(const Vocabulary& new_vocab, const Vocabulary& old_vocab,
                               const TokenTrie& old_trie, TransferMode mode) {
  const auto matches = MatchTokens(new_vocab, old_vocab);
  TransferPlan plan;
  plan.mode = mode;
  plan.old_vocab_sha256 = old_vocab.Digest();
  plan.new_vocab_sha256 = new_vocab.Digest();
  plan.tokens.reserve(new_vocab.size());
  plan.directives.resize(new_vocab.size());
  for (TokenId id = 0; id < new_vocab.size(); ++id) {
    plan.tokens.push_back(new_vocab.token(id).surface);
    InitDirective& d = plan.directives[id];
    if (matches[id]) {
      d.kind = InitKind::kMatched;
      d.sources = {*matches[id]};
    } else if (mode == TransferMode::kAveraged && !new_vocab.is_special(id)) {
      if (auto partition = MinPartition(new_vocab.token(id), old_trie)) {
        d.kind = InitKind::kAveraged;
        d.sources = std::move(partition->segments);
      }
    }
  }
  return plan;
}

PlanSummary SummarizePlan(const TransferPlan& plan) {
  PlanSummary summary;
  for (const InitDirective& d : plan.directives) {
    switch (d.kind) {
      case InitKind::kMatched: ++summary.matched; break;
      case InitKind::kAveraged:
        ++summary.averaged;
        ++summary.partition_lengths[d.sources.size()];
        break;
      case InitKind::kFallback: ++summary.fallback; break;
    }
  }
  return summary;
}

void ValidatePlan(const TransferPlan& plan) {
  if (plan.tokens.size() != plan.directives.size()) {
    throw Error(ErrorKind::kValidation, "plan token list and directive list differ in length");
  }
  for (std::size_t i = 0; i < plan.directives.size(); ++i) {
    const InitDirective& d = plan.directives[i];
    const std::string where = "directive " + std::to_string(i) + ": ";
    switch (d.kind) {
      case InitKind::kMatched:
        if (d.sources.size() != 1) {
          throw Error(ErrorKind::kValidation, where + "matched needs exactly one source");
        }
        break;
      case InitKind::kAveraged:
        if (plan.mode == TransferMode::kMatched) {
          throw Error(ErrorKind::kValidation, where + "averaged directive in a matched plan");
        }
        if (d.sources.empty()) {
          throw Error(ErrorKind::kValidation, where + "averaged needs at least one source");
        }
        break;
      case InitKind::kFallback:
        if (!d.sources.empty()) {
          throw Error(ErrorKind::kValidation, where + "fallback takes no sources");
        }
        break;
    }
  }
}

std::string SerializePlan(const TransferPlan& plan) {
  using nlohmann::ordered_json;
  auto dump = [](const ordered_json& j) {
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  };
  std::string out = "{\n";
  out += "  \"mode\": " + dump(std::string(TransferModeName(plan.mode))) + ",\n";
  out += "  \"old_vocab_sha256\": " + dump(plan.old_vocab_sha256) + ",\n";
  out += "  \"new_vocab_sha256\": " + dump(plan.new_vocab_sha256) + ",\n";
  out += "  \"directives\": [";
  for (std::size_t i = 0; i < plan.directives.size(); ++i) {
    ordered_json d;
    d["token"] = plan.tokens[i];
    d["kind"] = InitKindName(plan.directives[i].kind);
    d["sources"] = plan.directives[i].sources;
    out += i == 0 ? "\n    " : ",\n    ";
    out += dump(d);
  }
  out += plan.directives.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

TransferPlan ParsePlan(std::string_view text) {
  TransferPlan plan;
  try {
    const auto j = nlohmann::json::parse(text);
    plan.mode = ParseTransferMode(j.at("mode").get<std::string>());
    plan.old_vocab_sha256 = j.at("old_vocab_sha256").get<std::string>();
    plan.new_vocab_sha256 = j.at("new_vocab_sha256").get<std::string>();
    for (const auto& d : j.at("directives")) {
      plan.tokens.push_back(d.at("token").get<std::string>());
      const auto kind = d.at("kind").get<std::string>();
      InitDirective directive;
      if (kind == "matched") {
        directive.kind = InitKind::kMatched;
      } else if (kind == "averaged") {
        directive.kind = InitKind::kAveraged;
      } else if (kind == "fallback") {
        directive.kind = InitKind::kFallback;
      } else {
        throw Error(ErrorKind::kValidation, "unknown directive kind \"" + kind + "\"");
      }
      directive.sources = d.at("sources").get<std::vector<TokenId>>();
      plan.directives.push_back(std::move(directive));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kValidation, std::string("malformed plan: ") + e.what());
  }
  ValidatePlan(plan);
  return plan;
}

TransferPlan LoadPlan(const std::filesystem::path& path) {
  try {
    return ParsePlan(ReadFile(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void SavePlan(const TransferPlan& plan, const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializePlan(plan));
}

}  // namespace vocabxfer
