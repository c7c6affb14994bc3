#pragma once

// Structural, id-independent hashing of game trees.  Two trees hash equal iff
// they have the same shape, transition probabilities and payoffs, regardless
// of node names.  Used to detect repeated subgames and to check that the
// filtration approximation is consistent (equal futures give equal trees).

#include <cstdint>
#include <string>
#include <vector>

#include "stopgame/tree.hpp"

namespace stopgame {

inline std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

template <class S>
std::string canonical_tree_description(const GameTree<S>& t, int v) {
  if (t.is_leaf(v)) return "L";
  const auto& nd = t.node(v);
  std::string s = "I[";
  for (int q = 0; q < 3; ++q)
    for (int i = 0; i < 2; ++i) s += scalar_traits<S>::to_string(nd.payoff.value[q][i]) + ",";
  s += "](";
  std::vector<std::string> kids;
  for (std::size_t c = 0; c < nd.children.size(); ++c)
    kids.push_back(scalar_traits<S>::to_string(nd.child_prob[c]) + ":" +
                   canonical_tree_description(t, nd.children[c]));
  std::sort(kids.begin(), kids.end());
  for (const auto& k : kids) s += k + ";";
  return s + ")";
}

template <class S>
std::uint64_t tree_hash(const GameTree<S>& t) {
  return fnv1a("K" + std::to_string(t.granularity()) + "|" +
               canonical_tree_description(t, t.root()));
}

}  // namespace stopgame
