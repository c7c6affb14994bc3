#pragma once

// Heavy nodes and orthogonal strategy sequences.  A node is delta-heavy for a
// profile when the round terminates with probability at least delta given
// that the branch passes through the node.  A sequence of profiles is
// delta-orthogonal when each profile continues on (strongly: on and below)
// the delta-heavy nodes of the union of its predecessors.

#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "stopgame/tree.hpp"
#include "stopgame/tree_stats.hpp"

namespace stopgame {

template <class S>
struct HeavySet {
  S delta{0};
  std::set<int> nodes;
};

// P(round terminates | branch passes s), for every node, computed exactly:
// 1 - (continuation product above s) * (expected continuation below s).
template <class S>
std::vector<S> conditional_termination(const GameTree<S>& t, const StationaryProfile<S>& prof) {
  require_profile_domain(t, prof);
  std::vector<S> down(t.node_count(), S(1));
  const auto& order = t.topological_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    if (t.is_leaf(v)) continue;
    const auto& nd = t.node(v);
    S kids(0);
    for (std::size_t c = 0; c < nd.children.size(); ++c)
      kids += nd.child_prob[c] * down[static_cast<std::size_t>(nd.children[c])];
    down[static_cast<std::size_t>(v)] =
        (S(1) - prof.p1.at(v)) * (S(1) - prof.p2.at(v)) * kids;
  }
  std::vector<S> up(t.node_count(), S(1));
  std::vector<S> cond(t.node_count(), S(0));
  for (int v : order) {
    int p = t.parent(v);
    if (p >= 0)
      up[static_cast<std::size_t>(v)] = up[static_cast<std::size_t>(p)] *
                                        (S(1) - prof.p1.at(p)) * (S(1) - prof.p2.at(p));
    cond[static_cast<std::size_t>(v)] =
        S(1) - up[static_cast<std::size_t>(v)] * down[static_cast<std::size_t>(v)];
  }
  return cond;
}

template <class S>
HeavySet<S> heavy_nodes(const GameTree<S>& t, const StationaryProfile<S>& prof, const S& delta) {
  if (delta <= S(0) || delta > S(1))
    throw std::invalid_argument("heavy-node threshold must lie in (0,1]");
  HeavySet<S> out;
  out.delta = delta;
  auto cond = conditional_termination(t, prof);
  for (int v : t.internal_nodes())
    if (cond[static_cast<std::size_t>(v)] >= delta) out.nodes.insert(v);
  return out;
}

struct OrthogonalityWitness {
  std::size_t k = 0;  // index of the offending successor profile
  int node = -1;
};

struct OrthogonalityVerdict {
  bool ok = true;
  std::optional<OrthogonalityWitness> witness;
};

template <class S>
OrthogonalityVerdict check_orthogonality(const GameTree<S>& t,
                                         const std::vector<StationaryProfile<S>>& seq,
                                         const S& delta, bool strong) {
  if (seq.empty()) throw std::invalid_argument("empty profile sequence");
  for (const auto& p : seq) require_profile_domain(t, p);
  std::vector<StationaryProfile<S>> prefix;
  for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
    prefix.push_back(seq[k]);
    HeavySet<S> heavy = heavy_nodes(t, profile_union(t, prefix), delta);
    const auto& next = seq[k + 1];
    for (int s : heavy.nodes) {
      std::vector<int> to_check{s};
      if (strong) {
        // every descendant of s as well
        for (int v : t.topological_order())
          if (v != s && t.is_ancestor(s, v)) to_check.push_back(v);
      }
      for (int v : to_check)
        if (t.is_internal(v) && (next.p1.at(v) != S(0) || next.p2.at(v) != S(0)))
          return {false, OrthogonalityWitness{k + 1, v}};
    }
  }
  return {true, {}};
}

// Split a pure once-per-branch strategy of one player across an orthogonal
// opponent sequence: each stop node goes to the greatest index k such that
// the node is not eps-heavy for the union of the first k-1 opponent parts.
// The union of the output equals xbar and the paired sequence is
// eps-orthogonal.
template <class S>
std::vector<StationaryStrategy<S>> split_pure_against(const GameTree<S>& t,
                                                      const StationaryStrategy<S>& xbar,
                                                      const std::vector<StationaryStrategy<S>>& ys,
                                                      const S& eps, int player = 1) {
  require_strategy_domain(t, xbar);
  if (ys.empty()) throw std::invalid_argument("empty opponent sequence");
  if (!xbar.is_pure()) throw std::invalid_argument("strategy to split must be pure");
  for (int v : t.internal_nodes())
    if (xbar.at(v) == S(1)) {
      int p = t.parent(v);
      while (p >= 0) {
        if (t.is_internal(p) && xbar.at(p) == S(1))
          throw std::invalid_argument("strategy stops twice on one branch at node " +
                                      t.node(v).id + " below " + t.node(p).id);
        p = t.parent(p);
      }
    }
  auto with_player = [&](const StationaryStrategy<S>& y) {
    return player == 1 ? StationaryProfile<S>{StationaryStrategy<S>::never(t), y}
                       : StationaryProfile<S>{y, StationaryStrategy<S>::never(t)};
  };
  {
    std::vector<StationaryProfile<S>> solo;
    for (const auto& y : ys) solo.push_back(with_player(y));
    auto verdict = check_orthogonality(t, solo, eps * eps, /*strong=*/true);
    if (!verdict.ok)
      throw std::invalid_argument(
          "opponent sequence is not eps^2-strongly orthogonal (witness part " +
          std::to_string(verdict.witness->k) + ", node " +
          t.node(verdict.witness->node).id + ")");
  }
  // heavy sets of the opponent prefixes, reused for every stop node
  std::vector<std::set<int>> heavy_prefix(ys.size());  // prefix of length k
  {
    std::vector<StationaryProfile<S>> prefix;
    for (std::size_t k = 1; k < ys.size(); ++k) {
      prefix.push_back(with_player(ys[k - 1]));
      heavy_prefix[k] = heavy_nodes(t, profile_union(t, prefix), eps).nodes;
    }
  }
  std::vector<StationaryStrategy<S>> parts(ys.size(), StationaryStrategy<S>::never(t));
  for (int v : t.internal_nodes()) {
    if (xbar.at(v) != S(1)) continue;
    std::size_t pick = 0;
    for (std::size_t k = ys.size(); k >= 1; --k) {
      if (!heavy_prefix[k - 1].count(v)) {
        pick = k - 1;
        break;
      }
    }
    parts[pick].at(v) = S(1);
  }
  return parts;
}

}  // namespace stopgame
