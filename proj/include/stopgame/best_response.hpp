#pragma once

// Best response against a fixed stationary opponent strategy.  With the
// opponent frozen the repeated tree game is a Markov decision process with
// restart at the root; it always has a pure optimal strategy whose stop set
// is an antichain (stopping at a node makes its descendants unreachable).
//
// Two solvers are provided:
//   - Exact: enumerate all pure antichain stop sets over reachable internal
//     nodes and evaluate each exactly.  Intended for small trees.
//   - FixedPoint: the root value of one-round backward induction with leaf
//     continuation v is monotone in v with slope <= 1; its crossing with the
//     identity is located by bisection and the extracted policy is then
//     polished by exact policy iteration.

#include <optional>
#include <stdexcept>
#include <vector>

#include "stopgame/tree.hpp"
#include "stopgame/tree_stats.hpp"

namespace stopgame {

template <class S>
struct BestResponseResult {
  S value{0};
  StationaryStrategy<S> strategy;  // pure, stop set an antichain
};

enum class BrMethod { Auto, Exact, FixedPoint };

namespace detail {

// Keep only stops at reachable nodes that have no stopping ancestor.
template <class S>
void antichain_normalize(const GameTree<S>& t, StationaryStrategy<S>& s) {
  std::vector<char> blocked(t.node_count(), 0);
  for (int v : t.topological_order()) {
    std::size_t i = static_cast<std::size_t>(v);
    int p = t.parent(v);
    if (p >= 0) {
      std::size_t pi = static_cast<std::size_t>(p);
      if (blocked[pi] || s.stop[pi] == S(1)) blocked[i] = 1;
    }
    if (t.reach_prob(v) == S(0)) blocked[i] = 1;
    if (blocked[i] || t.is_leaf(v)) s.stop[i] = S(0);
  }
}

// One-round backward induction for `player` against `opponent`, with value
// `cont` at the leaves.  Returns the root value; optionally extracts the
// argmax pure policy (stop only where strictly better: continue on ties).
template <class S>
S one_round_value(const GameTree<S>& t, const StationaryStrategy<S>& opponent, int player,
                  const S& cont, StationaryStrategy<S>* policy_out) {
  std::vector<S> val(t.node_count(), cont);
  if (policy_out) *policy_out = StationaryStrategy<S>::never(t);
  const auto& order = t.topological_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    if (t.is_leaf(v)) continue;
    const auto& nd = t.node(v);
    const S& o = opponent.at(v);
    StopSet own = player == 1 ? StopSet::P1 : StopSet::P2;
    StopSet other = player == 1 ? StopSet::P2 : StopSet::P1;
    S stop_val = (S(1) - o) * nd.payoff(own, player) + o * nd.payoff(StopSet::Both, player);
    S down(0);
    for (std::size_t c = 0; c < nd.children.size(); ++c)
      down += nd.child_prob[c] * val[static_cast<std::size_t>(nd.children[c])];
    S cont_val = o * nd.payoff(other, player) + (S(1) - o) * down;
    if (stop_val > cont_val) {
      val[static_cast<std::size_t>(v)] = stop_val;
      if (policy_out) policy_out->at(v) = S(1);
    } else {
      val[static_cast<std::size_t>(v)] = cont_val;
    }
  }
  return val[static_cast<std::size_t>(t.root())];
}

template <class S>
S evaluate_against(const GameTree<S>& t, const StationaryStrategy<S>& own,
                   const StationaryStrategy<S>& opponent, int player) {
  StationaryProfile<S> prof =
      player == 1 ? StationaryProfile<S>{own, opponent} : StationaryProfile<S>{opponent, own};
  return round_stats(t, prof).gamma[player - 1];
}

template <class S>
BestResponseResult<S> best_response_exact(const GameTree<S>& t,
                                          const StationaryStrategy<S>& opponent, int player) {
  // DFS preorder over reachable internal nodes; stopping at a node skips its
  // whole preorder block.
  std::vector<int> pre;
  std::vector<int> skip;  // index just past the node's subtree block
  {
    std::vector<int> subtree_end(t.node_count(), 0);
    std::vector<std::pair<int, bool>> st;
    st.emplace_back(t.root(), false);
    while (!st.empty()) {
      auto [v, done] = st.back();
      st.pop_back();
      if (done) {
        subtree_end[static_cast<std::size_t>(v)] = static_cast<int>(pre.size());
        continue;
      }
      if (t.is_leaf(v) || t.reach_prob(v) == S(0)) {
        subtree_end[static_cast<std::size_t>(v)] = static_cast<int>(pre.size());
        continue;
      }
      pre.push_back(v);
      st.emplace_back(v, true);
      const auto& ch = t.node(v).children;
      for (auto it = ch.rbegin(); it != ch.rend(); ++it) st.emplace_back(*it, false);
    }
    skip.resize(pre.size());
    for (std::size_t i = 0; i < pre.size(); ++i)
      skip[i] = subtree_end[static_cast<std::size_t>(pre[i])];
  }

  BestResponseResult<S> best;
  best.strategy = StationaryStrategy<S>::never(t);
  best.value = evaluate_against(t, best.strategy, opponent, player);

  std::vector<int> chosen;
  // Backtracking over positions; "continue" explored first so that on exact
  // value ties the incumbent (fewer stops, earlier in order) is kept.
  auto evaluate_current = [&]() {
    StationaryStrategy<S> s = StationaryStrategy<S>::never(t);
    for (int v : chosen) s.at(v) = S(1);
    S val = evaluate_against(t, s, opponent, player);
    if (val > best.value) {
      best.value = val;
      best.strategy = s;
    }
  };
  // iterative enumeration: state = (position, decision stack)
  struct Step { std::size_t pos; bool stopped; };
  std::vector<Step> trail;
  std::size_t pos = 0;
  while (true) {
    if (pos >= pre.size()) {
      if (!chosen.empty()) evaluate_current();
      // backtrack to the last "continue" decision and flip it to "stop"
      while (!trail.empty() && trail.back().stopped) {
        chosen.pop_back();
        trail.pop_back();
      }
      if (trail.empty()) break;
      Step s = trail.back();
      trail.pop_back();
      chosen.push_back(pre[s.pos]);
      trail.push_back({s.pos, true});
      pos = static_cast<std::size_t>(skip[s.pos]);
      continue;
    }
    trail.push_back({pos, false});
    pos += 1;
  }
  antichain_normalize(t, best.strategy);
  return best;
}

template <class S>
BestResponseResult<S> best_response_fixed_point(const GameTree<S>& t,
                                                const StationaryStrategy<S>& opponent,
                                                int player) {
  S bound(1);
  for (int v : t.internal_nodes())
    for (int q = 0; q < 3; ++q)
      for (int i = 0; i < 2; ++i) {
        S a = abs_val<S>(t.node(v).payoff.value[q][i]);
        if (a > bound) bound = a;
      }
  S lo = -bound, hi = bound;
  // T(v) - v is weakly decreasing; keep T(lo) >= lo and T(hi) <= hi.
  for (int iter = 0; iter < 64; ++iter) {
    S mid = (lo + hi) / S(2);
    S tv = one_round_value<S>(t, opponent, player, mid, nullptr);
    if (tv > mid)
      lo = mid;
    else
      hi = mid;
    if constexpr (!scalar_traits<S>::exact) {
      if (hi - lo <= S(1e-12)) break;
    }
  }
  S v0 = (lo + hi) / S(2);

  // Polish: extract the argmax policy, evaluate it exactly, and iterate
  // (Howard improvement; strict improvement only, so it terminates).  The
  // never-stop value seeds a second pass: on flat fixed-point regions the
  // tie-breaking at v0 extracts the all-continue policy, while improvement
  // from below climbs to the best terminating strategy.
  BestResponseResult<S> best;
  best.strategy = StationaryStrategy<S>::never(t);
  best.value = evaluate_against(t, best.strategy, opponent, player);
  for (S probe : {v0, best.value}) {
    for (int round = 0; round < 64; ++round) {
      StationaryStrategy<S> pol = StationaryStrategy<S>::never(t);
      one_round_value<S>(t, opponent, player, probe, &pol);
      antichain_normalize(t, pol);
      S val = evaluate_against(t, pol, opponent, player);
      if (val > best.value) {
        best.value = val;
        best.strategy = pol;
      }
      if (!(val > probe)) break;
      probe = val;
    }
  }
  return best;
}

}  // namespace detail

template <class S>
BestResponseResult<S> best_response(const GameTree<S>& t, const StationaryStrategy<S>& opponent,
                                    int player, BrMethod method = BrMethod::Auto,
                                    std::size_t exact_cap = 20) {
  if (player != 1 && player != 2) throw std::invalid_argument("player must be 1 or 2");
  require_strategy_domain(t, opponent);
  if (t.is_trivial()) return {S(0), StationaryStrategy<S>::never(t)};
  if (method == BrMethod::Auto)
    method = t.internal_nodes().size() <= exact_cap ? BrMethod::Exact : BrMethod::FixedPoint;
  return method == BrMethod::Exact ? detail::best_response_exact(t, opponent, player)
                                   : detail::best_response_fixed_point(t, opponent, player);
}

template <class S>
struct EquilibriumCertificate {
  RoundStats<S> stats;
  S br_value[2]{S(0), S(0)};
  S gain[2]{S(0), S(0)};  // best-response value minus achieved payoff
  S eps{0};
  bool is_equilibrium = false;
};

// Certify whether prof is an eps-equilibrium: no unilateral stationary
// deviation gains more than eps.
template <class S>
EquilibriumCertificate<S> check_equilibrium(const GameTree<S>& t,
                                            const StationaryProfile<S>& prof, const S& eps,
                                            BrMethod method = BrMethod::Auto,
                                            std::size_t exact_cap = 20) {
  EquilibriumCertificate<S> cert;
  cert.eps = eps;
  cert.stats = round_stats(t, prof);
  cert.br_value[0] = best_response(t, prof.p2, 1, method, exact_cap).value;
  cert.br_value[1] = best_response(t, prof.p1, 2, method, exact_cap).value;
  cert.gain[0] = cert.br_value[0] - cert.stats.gamma[0];
  cert.gain[1] = cert.br_value[1] - cert.stats.gamma[1];
  cert.is_equilibrium = approx_le<S>(cert.gain[0], eps) && approx_le<S>(cert.gain[1], eps);
  return cert;
}

}  // namespace stopgame
