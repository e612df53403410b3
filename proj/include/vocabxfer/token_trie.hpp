// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "vocabxfer/vocabulary.hpp"

namespace vocabxfer {

// Immutable byte trie over the marker-stripped surfaces of a vocabulary's
// non-special tokens, with separate roots for word-initial and continuation
// tokens. Safe for concurrent reads.
class TokenTrie {
 public:
  explicit TokenTrie(const Vocabulary& vocab);

  std::optional<TokenId> Lookup(std::string_view normalized, bool continuation) const;

  // Invokes fn(length, id) for every token whose normalized surface is a
  // prefix of `text`, in increasing length order.
  template <typename Fn>
  void ForEachPrefix(std::string_view text, bool continuation, Fn&& fn) const;

  // Longest token that is a prefix of `text`: (byte length, id).
  std::optional<std::pair<std::size_t, TokenId>> LongestPrefix(std::string_view text,
                                                               bool continuation) const;

  std::size_t node_count() const { return nodes_.size(); }

 private:
  static constexpr TokenId kNoToken = ~TokenId{0};
  static constexpr std::uint32_t kNoNode = ~std::uint32_t{0};

  struct Node {
    std::uint32_t first_edge = 0;
    std::uint32_t edge_count = 0;
    TokenId token = kNoToken;
  };
  struct Edge {
    unsigned char label;
    std::uint32_t target;
  };

  std::uint32_t Child(std::uint32_t node, unsigned char label) const;

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::uint32_t roots_[2] = {0, 0};  // [initial, continuation]
};

template <typename Fn>
void TokenTrie::ForEachPrefix(std::string_view text, bool continuation, Fn&& fn) const {
  std::uint32_t node = roots_[continuation ? 1 : 0];
  for (std::size_t i = 0; i < text.size(); ++i) {
    node = Child(node, static_cast<unsigned char>(text[i]));
    if (node == kNoNode) return;
    if (nodes_[node].token != kNoToken) fn(i + 1, nodes_[node].token);
  }
}

}  // namespace vocabxfer
