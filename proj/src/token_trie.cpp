// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

#include "vocabxfer/token_trie.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace vocabxfer {
namespace {

struct BuildNode {
  std::map<unsigned char, std::uint32_t> children;
  TokenId token;
};

}  // namespace

TokenTrie::TokenTrie(const Vocabulary& vocab) {
  std::vector<BuildNode> build(2, BuildNode{{}, kNoToken});
  for (TokenId id = 0; id < vocab.size(); ++id) {
    if (vocab.is_special(id)) continue;
    const Token& token = vocab.token(id);
    std::uint32_t node = token.is_continuation ? 1 : 0;
    for (char c : token.normalized()) {
      const auto label = static_cast<unsigned char>(c);
      auto it = build[node].children.find(label);
      if (it == build[node].children.end()) {
        const auto next = static_cast<std::uint32_t>(build.size());
        build[node].children.emplace(label, next);
        build.push_back(BuildNode{{}, kNoToken});
        node = next;
      } else {
        node = it->second;
      }
    }
    build[node].token = id;
  }

  // Flatten breadth-first so each node's edges are contiguous and sorted.
  std::vector<std::uint32_t> remap(build.size(), kNoNode);
  std::deque<std::uint32_t> queue{0, 1};
  remap[0] = 0;
  remap[1] = 1;
  nodes_.resize(build.size());
  std::uint32_t next_index = 2;
  while (!queue.empty()) {
    const std::uint32_t old_index = queue.front();
    queue.pop_front();
    Node& node = nodes_[remap[old_index]];
    node.token = build[old_index].token;
    node.first_edge = static_cast<std::uint32_t>(edges_.size());
    node.edge_count = static_cast<std::uint32_t>(build[old_index].children.size());
    for (const auto& [label, child] : build[old_index].children) {
      remap[child] = next_index++;
      edges_.push_back(Edge{label, remap[child]});
      queue.push_back(child);
    }
  }
  roots_[0] = 0;
  roots_[1] = 1;
}

std::uint32_t TokenTrie::Child(std::uint32_t node, unsigned char label) const {
  const Node& n = nodes_[node];
  const auto begin = edges_.begin() + n.first_edge;
  const auto end = begin + n.edge_count;
  auto it = std::lower_bound(begin, end, label,
                             [](const Edge& e, unsigned char l) { return e.label < l; });
  if (it == end || it->label != label) return kNoNode;
  return it->target;
}

std::optional<TokenId> TokenTrie::Lookup(std::string_view normalized, bool continuation) const {
  std::uint32_t node = roots_[continuation ? 1 : 0];
  for (char c : normalized) {
    node = Child(node, static_cast<unsigned char>(c));
    if (node == kNoNode) return std::nullopt;
  }
  if (normalized.empty() || nodes_[node].token == kNoToken) return std::nullopt;
  return nodes_[node].token;
}

std::optional<std::pair<std::size_t, TokenId>> TokenTrie::LongestPrefix(
    std::string_view text, bool continuation) const {
  std::optional<std::pair<std::size_t, TokenId>> best;
  ForEachPrefix(text, continuation,
                [&](std::size_t len, TokenId id) { best.emplace(len, id); });
  return best;
}

}  // namespace vocabxfer
