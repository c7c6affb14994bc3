#pragma once

// The simultaneous-copies model: n profiles play independent stop lotteries
// on one shared branch.  The union profile terminates when the first copy
// does.  All moments of N (the number of terminating copies) are computed by
// exact joint enumeration: condition on the branch, where the copies are
// independent, and accumulate the count distribution.

#include <string>
#include <vector>

#include "stopgame/heavy.hpp"
#include "stopgame/tree.hpp"
#include "stopgame/tree_stats.hpp"

namespace stopgame {

template <class S>
struct CheckedInequality {
  std::string name;
  S lhs{0};
  S rhs{0};
  bool holds = false;
};

template <class S>
struct UnionBoundsReport {
  bool orthogonal = true;
  std::optional<OrthogonalityWitness> witness;
  std::vector<S> pi_k;
  std::vector<S> rho1_k, rho2_k;
  std::vector<S> gamma1_k, gamma2_k;
  RoundStats<S> union_stats;
  S expected_n_geq2{0};        // E[N 1_{N>=2}]
  S expected_n_plus1_geq2{0};  // E[(N+1) 1_{N>=2}]
  std::vector<S> overlap_k;    // P(t_k < inf and some earlier copy stopped)
  std::vector<CheckedInequality<S>> inequalities;
  bool all_hold() const {
    for (const auto& q : inequalities)
      if (!q.holds) return false;
    return true;
  }
};

namespace detail {

// root-to-leaf paths with their probabilities and internal nodes
template <class S>
struct Branch {
  S prob;
  std::vector<int> internals;
};

template <class S>
std::vector<Branch<S>> enumerate_branches(const GameTree<S>& t) {
  std::vector<Branch<S>> out;
  for (int leaf : t.leaves()) {
    Branch<S> b;
    b.prob = t.reach_prob(leaf);
    int v = t.parent(leaf);
    while (v >= 0) {
      b.internals.push_back(v);
      v = t.parent(v);
    }
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace detail

template <class S>
UnionBoundsReport<S> union_bounds(const GameTree<S>& t,
                                  const std::vector<StationaryProfile<S>>& seq, const S& delta) {
  UnionBoundsReport<S> rep;
  {
    auto verdict = check_orthogonality(t, seq, delta, /*strong=*/false);
    rep.orthogonal = verdict.ok;
    rep.witness = verdict.witness;
    if (!rep.orthogonal) return rep;
  }
  const std::size_t n = seq.size();
  for (const auto& p : seq) {
    auto st = round_stats(t, p);
    rep.pi_k.push_back(st.pi);
    rep.rho1_k.push_back(st.rho[0]);
    rep.rho2_k.push_back(st.rho[1]);
    rep.gamma1_k.push_back(st.gamma[0]);
    rep.gamma2_k.push_back(st.gamma[1]);
  }
  rep.union_stats = round_stats(t, profile_union(t, seq));

  rep.overlap_k.assign(n, S(0));
  auto branches = detail::enumerate_branches(t);
  for (const auto& br : branches) {
    // per-copy termination probability along this branch
    std::vector<S> term(n, S(0));
    for (std::size_t k = 0; k < n; ++k) {
      S cont(1);
      for (int v : br.internals)
        cont *= (S(1) - seq[k].p1.at(v)) * (S(1) - seq[k].p2.at(v));
      term[k] = S(1) - cont;
    }
    // count distribution of N (independent Bernoulli given the branch)
    std::vector<S> dist(n + 1, S(0));
    dist[0] = S(1);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t m = k + 1; m-- > 0;) {
        dist[m + 1] += dist[m] * term[k];
        dist[m] *= S(1) - term[k];
      }
    for (std::size_t m = 2; m <= n; ++m) {
      rep.expected_n_geq2 += br.prob * scalar_traits<S>::from_int(static_cast<long long>(m)) * dist[m];
      rep.expected_n_plus1_geq2 +=
          br.prob * scalar_traits<S>::from_int(static_cast<long long>(m + 1)) * dist[m];
    }
    S earlier_none(1);
    for (std::size_t k = 0; k < n; ++k) {
      rep.overlap_k[k] += br.prob * term[k] * (S(1) - earlier_none);
      earlier_none *= S(1) - term[k];
    }
  }

  S sum_pi(0), sum_rho1(0), sum_rho2(0);
  for (std::size_t k = 0; k < n; ++k) {
    sum_pi += rep.pi_k[k];
    sum_rho1 += rep.rho1_k[k];
    sum_rho2 += rep.rho2_k[k];
  }
  const S& pi = rep.union_stats.pi;
  auto add = [&rep](std::string name, const S& lhs, const S& rhs) {
    rep.inequalities.push_back({std::move(name), lhs, rhs, approx_le<S>(lhs, rhs)});
  };

  add("sum pi_k - E[N 1(N>=2)] <= pi", sum_pi - rep.expected_n_geq2, pi);
  add("pi <= sum pi_k", pi, sum_pi);
  const S sums[2] = {sum_rho1, sum_rho2};
  for (int i = 0; i < 2; ++i) {
    std::string side = "rho" + std::to_string(i + 1);
    add("sum " + side + "_k - E[(N+1) 1(N>=2)] <= " + side,
        sums[i] - rep.expected_n_plus1_geq2, rep.union_stats.rho[i]);
    add(side + " <= sum " + side + "_k + E[(N+1) 1(N>=2)]", rep.union_stats.rho[i],
        sums[i] + rep.expected_n_plus1_geq2);
  }
  for (std::size_t k = 0; k < n; ++k)
    add("overlap_" + std::to_string(k) + " <= delta * pi_" + std::to_string(k),
        rep.overlap_k[k], delta * rep.pi_k[k]);
  add("E[(N+1) 1(N>=2)] <= 3 delta sum pi_k", rep.expected_n_plus1_geq2,
      S(3) * delta * sum_pi);
  add("(1 - 3 delta) sum pi_k <= pi", (S(1) - S(3) * delta) * sum_pi, pi);
  for (int i = 0; i < 2; ++i) {
    std::string side = "rho" + std::to_string(i + 1);
    add("sum " + side + "_k - 3 delta sum pi_k <= " + side, sums[i] - S(3) * delta * sum_pi,
        rep.union_stats.rho[i]);
    add(side + " <= sum " + side + "_k + 3 delta sum pi_k", rep.union_stats.rho[i],
        sums[i] + S(3) * delta * sum_pi);
    std::string g = "gamma" + std::to_string(i + 1);
    add("sum " + side + "_k - 6 delta sum pi_k <= " + g + " * sum pi_k",
        sums[i] - S(6) * delta * sum_pi, rep.union_stats.gamma[i] * sum_pi);
    add(g + " * sum pi_k <= sum " + side + "_k + 6 delta sum pi_k",
        rep.union_stats.gamma[i] * sum_pi, sums[i] + S(6) * delta * sum_pi);
    // bounds via the per-copy payoff range
    const auto& gk = i == 0 ? rep.gamma1_k : rep.gamma2_k;
    S lo = gk[0], hi = gk[0];
    for (const S& v : gk) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
    add("min_k " + g + "_k - 6 delta <= " + g, lo - S(6) * delta, rep.union_stats.gamma[i]);
    add(g + " <= max_k " + g + "_k + 6 delta", rep.union_stats.gamma[i], hi + S(6) * delta);
  }
  return rep;
}

}  // namespace stopgame
