#pragma once

// Single-round statistics of a stationary profile: termination probability
// pi, expected round payoff rho, and the repeated-game payoff gamma = rho/pi
// with the convention 0/0 = 0 (a game that never terminates pays nothing).

#include <set>
#include <stdexcept>
#include <vector>

#include "stopgame/tree.hpp"

namespace stopgame {

template <class S>
struct RoundStats {
  S pi{0};
  S rho[2]{S(0), S(0)};
  S gamma[2]{S(0), S(0)};
};

// Exact bottom-up recursion.  At an internal node with stop probabilities
// (x, y): mass x(1-y) terminates via player 1 alone, (1-x)y via player 2
// alone, xy via both, and (1-x)(1-y) flows to the children.
template <class S>
RoundStats<S> round_stats(const GameTree<S>& t, const StationaryProfile<S>& prof) {
  require_profile_domain(t, prof);
  std::vector<S> pi(t.node_count(), S(0));
  std::vector<S> rho1(t.node_count(), S(0));
  std::vector<S> rho2(t.node_count(), S(0));
  const auto& order = t.topological_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    if (t.is_leaf(v)) continue;
    const auto& nd = t.node(v);
    const S& x = prof.p1.at(v);
    const S& y = prof.p2.at(v);
    S p_solo1 = x * (S(1) - y);
    S p_solo2 = (S(1) - x) * y;
    S p_both = x * y;
    S p_cont = (S(1) - x) * (S(1) - y);
    S pv = p_solo1 + p_solo2 + p_both;
    S r1 = p_solo1 * nd.payoff(StopSet::P1, 1) + p_solo2 * nd.payoff(StopSet::P2, 1) +
           p_both * nd.payoff(StopSet::Both, 1);
    S r2 = p_solo1 * nd.payoff(StopSet::P1, 2) + p_solo2 * nd.payoff(StopSet::P2, 2) +
           p_both * nd.payoff(StopSet::Both, 2);
    for (std::size_t c = 0; c < nd.children.size(); ++c) {
      int w = nd.children[c];
      pv += p_cont * nd.child_prob[c] * pi[static_cast<std::size_t>(w)];
      r1 += p_cont * nd.child_prob[c] * rho1[static_cast<std::size_t>(w)];
      r2 += p_cont * nd.child_prob[c] * rho2[static_cast<std::size_t>(w)];
    }
    pi[static_cast<std::size_t>(v)] = pv;
    rho1[static_cast<std::size_t>(v)] = r1;
    rho2[static_cast<std::size_t>(v)] = r2;
  }
  RoundStats<S> out;
  std::size_t r = static_cast<std::size_t>(t.root());
  out.pi = pi[r];
  out.rho[0] = rho1[r];
  out.rho[1] = rho2[r];
  if (out.pi != S(0)) {
    out.gamma[0] = out.rho[0] / out.pi;
    out.gamma[1] = out.rho[1] / out.pi;
  }
  return out;
}

// Pointwise union: the combined strategy continues at s only if every
// component continues there.  x(s) = 1 - prod_k (1 - x_k(s)).
template <class S>
StationaryStrategy<S> strategy_union(const GameTree<S>& t,
                                     const std::vector<StationaryStrategy<S>>& parts) {
  if (parts.empty()) return StationaryStrategy<S>::never(t);
  for (const auto& s : parts) require_strategy_domain(t, s);
  StationaryStrategy<S> out = StationaryStrategy<S>::never(t);
  for (int v : t.internal_nodes()) {
    S cont(1);
    for (const auto& s : parts) cont *= S(1) - s.at(v);
    out.at(v) = S(1) - cont;
  }
  return out;
}

template <class S>
StationaryProfile<S> profile_union(const GameTree<S>& t,
                                   const std::vector<StationaryProfile<S>>& parts) {
  std::vector<StationaryStrategy<S>> xs, ys;
  xs.reserve(parts.size());
  ys.reserve(parts.size());
  for (const auto& p : parts) {
    xs.push_back(p.p1);
    ys.push_back(p.p2);
  }
  return {strategy_union(t, xs), strategy_union(t, ys)};
}

// Probability that, with nobody stopping, the round visits an internal node
// where the given player's solo-stop payoff to themselves equals `level`.
template <class S>
S solo_payoff_visit_prob(const GameTree<S>& t, int player, const S& level) {
  std::set<int> d;
  StopSet q = player == 1 ? StopSet::P1 : StopSet::P2;
  for (int v : t.internal_nodes())
    if (t.node(v).payoff(q, player) == level) d.insert(v);
  return branch_prob(t, d);
}

// Checks the payoff-shape conditions used by the coloring machinery against
// fixed per-player peaks (R1, R2): solo payoffs never exceed the player's
// peak, and a node where a player attains their peak pays the opponent
// strictly less than the opponent's peak.
template <class S>
std::vector<std::string> peak_condition_issues(const GameTree<S>& t, const S rbar[2]) {
  std::vector<std::string> issues;
  for (int v : t.internal_nodes()) {
    const auto& nd = t.node(v);
    if (nd.payoff(StopSet::P1, 1) > rbar[0])
      issues.push_back("node " + nd.id + ": player 1 solo payoff exceeds the peak");
    if (nd.payoff(StopSet::P2, 2) > rbar[1])
      issues.push_back("node " + nd.id + ": player 2 solo payoff exceeds the peak");
    if (nd.payoff(StopSet::P1, 1) == rbar[0] && !(nd.payoff(StopSet::P1, 2) < rbar[1]))
      issues.push_back("node " + nd.id +
                       ": player 1 attains the peak without penalizing player 2");
    if (nd.payoff(StopSet::P2, 2) == rbar[1] && !(nd.payoff(StopSet::P2, 1) < rbar[0]))
      issues.push_back("node " + nd.id +
                       ": player 2 attains the peak without penalizing player 1");
  }
  return issues;
}

// Highest solo-stop payoff the player can reach anywhere in the tree.
template <class S>
S solo_payoff_peak(const GameTree<S>& t, int player) {
  StopSet q = player == 1 ? StopSet::P1 : StopSet::P2;
  bool first = true;
  S best(0);
  for (int v : t.internal_nodes()) {
    const S& val = t.node(v).payoff(q, player);
    if (first || val > best) {
      best = val;
      first = false;
    }
  }
  return best;
}

}  // namespace stopgame
