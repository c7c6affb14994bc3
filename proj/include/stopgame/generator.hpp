#pragma once

// Seeded instance generators.  All draws go through one mt19937_64 stream so
// a fixed (spec, seed) pair always produces the same instance.

#include <cstdint>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "stopgame/tree.hpp"
#include "stopgame/tree_stats.hpp"
#include "stopgame/heavy.hpp"
#include "stopgame/filtration.hpp"

namespace stopgame {

struct TreeSpec {
  std::size_t internal_nodes = 4;
  std::size_t max_children = 3;
  int max_depth = 4;
  long long granularity = 2;
  // constraint flags
  bool solo_caps = false;       // player i's solo payoff never exceeds peak_i
  bool peak_penalty = false;    // attaining your peak leaves the opponent strictly short
  bool force_attainment = false;  // both peaks attained somewhere
  // peaks on the payoff grid; used only when solo_caps is set
  long long peak1_num = 1;
  long long peak2_num = 1;
};

template <class S>
struct GeneratedTree {
  GameTree<S> tree;
  S peak[2]{S(0), S(0)};
};

namespace detail {

inline long long rand_range(std::mt19937_64& rng, long long lo, long long hi) {
  return lo + static_cast<long long>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

// payoff grid value in [-K..K]/K, optionally capped / kept strictly below cap
template <class S>
S rand_payoff(std::mt19937_64& rng, long long k, long long max_num) {
  long long num = rand_range(rng, -k, max_num);
  return scalar_traits<S>::from_fraction(num, k);
}

}  // namespace detail

// Random game tree.  Transition probabilities are ratios of small integers so
// they parse and print exactly in rational mode.
template <class S>
GeneratedTree<S> generate_tree(const TreeSpec& spec, std::uint64_t seed) {
  if (spec.internal_nodes == 0) throw std::invalid_argument("need at least one internal node");
  const long long k = spec.granularity;
  if (k <= 0) throw std::invalid_argument("granularity must be positive");
  if (spec.peak_penalty && !spec.solo_caps)
    throw std::invalid_argument("peak_penalty requires solo_caps (no peak to penalize around)");
  if (spec.solo_caps && (spec.peak1_num <= -k || spec.peak2_num <= -k))
    throw std::invalid_argument("peaks at -1 leave no room below: raise peak or granularity");

  std::mt19937_64 rng(seed);
  std::vector<TreeNode<S>> nodes;
  struct Slot { int node; int depth; };
  std::vector<Slot> frontier;

  nodes.push_back({"n0", {}, {}, {}});
  frontier.push_back({0, 0});
  std::size_t internal_made = 0;
  std::vector<int> internal_ids;

  while (!frontier.empty()) {
    // pick the next slot; force expansion of the root, stop when the budget
    // is used up
    std::size_t pick = static_cast<std::size_t>(detail::rand_range(
        rng, 0, static_cast<long long>(frontier.size()) - 1));
    Slot slot = frontier[pick];
    frontier.erase(frontier.begin() + static_cast<long long>(pick));
    bool must_expand = slot.node == 0;
    bool may_expand = internal_made < spec.internal_nodes && slot.depth < spec.max_depth;
    if (!must_expand && (!may_expand || detail::rand_range(rng, 0, 2) == 0)) continue;  // leaf
    ++internal_made;
    internal_ids.push_back(slot.node);
    std::size_t n_children = static_cast<std::size_t>(
        detail::rand_range(rng, 1, static_cast<long long>(spec.max_children)));
    std::vector<long long> weights(n_children);
    long long total = 0;
    for (auto& w : weights) {
      w = detail::rand_range(rng, 1, 8);
      total += w;
    }
    for (std::size_t c = 0; c < n_children; ++c) {
      int id = static_cast<int>(nodes.size());
      nodes.push_back({"n" + std::to_string(id), {}, {}, {}});
      nodes[static_cast<std::size_t>(slot.node)].children.push_back(id);
      nodes[static_cast<std::size_t>(slot.node)].child_prob.push_back(
          scalar_traits<S>::from_fraction(weights[c], total));
      frontier.push_back({id, slot.depth + 1});
    }
  }

  GeneratedTree<S> out;
  out.peak[0] = scalar_traits<S>::from_fraction(spec.solo_caps ? spec.peak1_num : k, k);
  out.peak[1] = scalar_traits<S>::from_fraction(spec.solo_caps ? spec.peak2_num : k, k);

  for (int v : internal_ids) {
    Payoffs<S> p;
    for (int q = 0; q < 3; ++q)
      for (int i = 0; i < 2; ++i) p.value[q][i] = detail::rand_payoff<S>(rng, k, k);
    if (spec.solo_caps) {
      long long cap1 = spec.peak1_num, cap2 = spec.peak2_num;
      p(StopSet::P1, 1) = detail::rand_payoff<S>(rng, k, cap1);
      p(StopSet::P2, 2) = detail::rand_payoff<S>(rng, k, cap2);
      if (spec.peak_penalty) {
        if (p(StopSet::P1, 1) == out.peak[0])
          p(StopSet::P1, 2) = detail::rand_payoff<S>(rng, k, cap2 - 1);
        if (p(StopSet::P2, 2) == out.peak[1])
          p(StopSet::P2, 1) = detail::rand_payoff<S>(rng, k, cap1 - 1);
      }
    }
    nodes[static_cast<std::size_t>(v)].payoff = p;
  }

  if (spec.solo_caps && spec.force_attainment) {
    // plant each peak on a (distinct when possible) internal node
    int v1 = internal_ids[static_cast<std::size_t>(detail::rand_range(
        rng, 0, static_cast<long long>(internal_ids.size()) - 1))];
    int v2 = internal_ids[static_cast<std::size_t>(detail::rand_range(
        rng, 0, static_cast<long long>(internal_ids.size()) - 1))];
    auto& pay1 = nodes[static_cast<std::size_t>(v1)].payoff;
    pay1(StopSet::P1, 1) = out.peak[0];
    if (spec.peak_penalty)
      pay1(StopSet::P1, 2) = detail::rand_payoff<S>(rng, k, spec.peak2_num - 1);
    auto& pay2 = nodes[static_cast<std::size_t>(v2)].payoff;
    pay2(StopSet::P2, 2) = out.peak[1];
    if (spec.peak_penalty)
      pay2(StopSet::P2, 1) = detail::rand_payoff<S>(rng, k, spec.peak1_num - 1);
  }

  out.tree = GameTree<S>::from_nodes(std::move(nodes), 0, k);
  return out;
}

template <class S>
struct PlantedTree {
  GameTree<S> tree;
  S peak[2]{S(0), S(0)};
  std::vector<int> planted;  // nodes carrying a both-stop equilibrium at the peaks
};

// Random tree satisfying the peak conditions, with both-stop equilibria at
// the peak payoff pair planted on up to n_plants reachable internal nodes.
// At a planted node s, simultaneous stopping pays exactly (peak1, peak2) and
// each solo payoff at s is strictly below both that and the peaks, so
// "both stop at s, continue elsewhere" is an exact 0-equilibrium whose payoff
// lies in any bad rectangle containing the peaks.
template <class S>
PlantedTree<S> generate_planted_peak_tree(TreeSpec spec, std::size_t n_plants,
                                          std::uint64_t seed) {
  spec.solo_caps = true;
  spec.peak_penalty = true;
  if (spec.peak1_num <= 1 - spec.granularity) spec.peak1_num = spec.granularity;
  if (spec.peak2_num <= 1 - spec.granularity) spec.peak2_num = spec.granularity;
  auto g = generate_tree<S>(spec, seed);
  PlantedTree<S> out;
  out.peak[0] = g.peak[0];
  out.peak[1] = g.peak[1];
  const long long k = spec.granularity;

  std::vector<TreeNode<S>> nodes;
  for (std::size_t i = 0; i < g.tree.node_count(); ++i) nodes.push_back(g.tree.node(static_cast<int>(i)));
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<int> candidates;
  for (int v : g.tree.internal_nodes())
    if (g.tree.reach_prob(v) > S(0)) candidates.push_back(v);
  // prefer nodes on distinct branches so the planted equilibria stay
  // strongly orthogonal to one another
  std::vector<int> chosen;
  while (chosen.size() < n_plants && !candidates.empty()) {
    std::size_t pick = static_cast<std::size_t>(detail::rand_range(
        rng, 0, static_cast<long long>(candidates.size()) - 1));
    int v = candidates[pick];
    candidates.erase(candidates.begin() + static_cast<long long>(pick));
    bool related = false;
    for (int u : chosen)
      if (g.tree.is_ancestor(u, v) || g.tree.is_ancestor(v, u)) related = true;
    if (related) continue;
    chosen.push_back(v);
    auto& p = nodes[static_cast<std::size_t>(v)].payoff;
    p(StopSet::Both, 1) = out.peak[0];
    p(StopSet::Both, 2) = out.peak[1];
    p(StopSet::P1, 1) = detail::rand_payoff<S>(rng, k, spec.peak1_num - 1);
    p(StopSet::P1, 2) = detail::rand_payoff<S>(rng, k, spec.peak2_num - 1);
    p(StopSet::P2, 2) = detail::rand_payoff<S>(rng, k, spec.peak2_num - 1);
    p(StopSet::P2, 1) = detail::rand_payoff<S>(rng, k, spec.peak1_num - 1);
  }
  out.planted = chosen;
  out.tree = GameTree<S>::from_nodes(std::move(nodes), g.tree.root(), k);
  return out;
}

// Random delta-orthogonal sequence: each profile stops only on nodes that are
// still delta-light (strong: and have no delta-heavy ancestor) for the union
// of its predecessors, which makes the sequence orthogonal by construction.
template <class S>
std::vector<StationaryProfile<S>> generate_orthogonal_sequence(const GameTree<S>& t,
                                                               std::size_t length, const S& delta,
                                                               std::uint64_t seed,
                                                               bool strong = false) {
  std::mt19937_64 rng(seed);
  std::vector<StationaryProfile<S>> seq;
  for (std::size_t k = 0; k < length; ++k) {
    std::set<int> banned;
    if (!seq.empty()) {
      auto heavy = heavy_nodes(t, profile_union(t, seq), delta).nodes;
      for (int h : heavy) {
        banned.insert(h);
        if (strong)
          for (int v : t.topological_order())
            if (t.is_ancestor(h, v)) banned.insert(v);
      }
    }
    StationaryProfile<S> prof = StationaryProfile<S>::never(t);
    for (int v : t.internal_nodes()) {
      if (banned.count(v)) continue;
      if (detail::rand_range(rng, 0, 2) == 0)
        prof.p1.at(v) = scalar_traits<S>::from_fraction(detail::rand_range(rng, 0, 4), 16);
      if (detail::rand_range(rng, 0, 2) == 0)
        prof.p2.at(v) = scalar_traits<S>::from_fraction(detail::rand_range(rng, 0, 4), 16);
    }
    seq.push_back(std::move(prof));
  }
  return seq;
}

struct FiltrationSpec {
  std::size_t points = 8;
  int horizon = 4;
  int splits_per_stage = 2;  // atom-split attempts when refining each stage
  long long granularity = 2;
  bool solo_caps = false;
  long long peak1_num = 1;
  long long peak2_num = 1;
  int peak_density_pct = 0;  // chance per (stage, atom) of planting a peak solo payoff
};

template <class S>
FiltrationModel<S> generate_filtration_model(const FiltrationSpec& spec, std::uint64_t seed) {
  if (spec.points == 0 || spec.horizon < 1) throw std::invalid_argument("degenerate model size");
  std::mt19937_64 rng(seed);
  std::vector<S> prob(spec.points);
  long long total = 0;
  std::vector<long long> weights(spec.points);
  for (auto& w : weights) {
    w = detail::rand_range(rng, 1, 9);
    total += w;
  }
  for (std::size_t i = 0; i < spec.points; ++i)
    prob[i] = scalar_traits<S>::from_fraction(weights[i], total);

  std::vector<std::vector<std::vector<int>>> partitions;
  std::vector<std::vector<int>> current;
  {
    std::vector<int> all(spec.points);
    for (std::size_t i = 0; i < spec.points; ++i) all[i] = static_cast<int>(i);
    current.push_back(all);
  }
  partitions.push_back(current);
  for (int n = 1; n <= spec.horizon; ++n) {
    for (int attempt = 0; attempt < spec.splits_per_stage; ++attempt) {
      std::size_t pick = static_cast<std::size_t>(detail::rand_range(
          rng, 0, static_cast<long long>(current.size()) - 1));
      auto& atom = current[pick];
      if (atom.size() < 2) continue;
      std::size_t cut = static_cast<std::size_t>(detail::rand_range(
          rng, 1, static_cast<long long>(atom.size()) - 1));
      std::vector<int> left(atom.begin(), atom.begin() + static_cast<long long>(cut));
      std::vector<int> right(atom.begin() + static_cast<long long>(cut), atom.end());
      current[pick] = left;
      current.push_back(right);
    }
    std::sort(current.begin(), current.end());
    partitions.push_back(current);
  }
  return FiltrationModel<S>(std::move(prob), spec.horizon, std::move(partitions));
}

template <class S>
PayoffProcess<S> generate_payoff_process(const FiltrationModel<S>& m, const FiltrationSpec& spec,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0xa5a5a5a5ull);
  const long long k = spec.granularity;
  PayoffProcess<S> r;
  r.granularity = k;
  r.values.resize(static_cast<std::size_t>(m.horizon()));
  for (int n = 0; n < m.horizon(); ++n) {
    r.values[static_cast<std::size_t>(n)].resize(m.atom_count(n));
    for (std::size_t a = 0; a < m.atom_count(n); ++a) {
      Payoffs<S> p;
      for (int q = 0; q < 3; ++q)
        for (int i = 0; i < 2; ++i) p.value[q][i] = detail::rand_payoff<S>(rng, k, k);
      if (spec.solo_caps) {
        p(StopSet::P1, 1) = detail::rand_payoff<S>(rng, k, spec.peak1_num);
        p(StopSet::P2, 2) = detail::rand_payoff<S>(rng, k, spec.peak2_num);
        if (detail::rand_range(rng, 0, 99) < spec.peak_density_pct)
          p(StopSet::P1, 1) = scalar_traits<S>::from_fraction(spec.peak1_num, k);
        if (detail::rand_range(rng, 0, 99) < spec.peak_density_pct)
          p(StopSet::P2, 2) = scalar_traits<S>::from_fraction(spec.peak2_num, k);
      }
      r.values[static_cast<std::size_t>(n)][a] = p;
    }
  }
  return r;
}

template <class S>
AdaptedStrategy<S> generate_adapted_strategy(const FiltrationModel<S>& m, std::uint64_t seed,
                                             int density_pct = 50) {
  std::mt19937_64 rng(seed);
  auto s = AdaptedStrategy<S>::never(m);
  for (int n = 0; n < m.horizon(); ++n)
    for (std::size_t a = 0; a < m.atom_count(n); ++a)
      if (detail::rand_range(rng, 0, 99) < density_pct)
        s.at(n, static_cast<int>(a)) =
            scalar_traits<S>::from_fraction(detail::rand_range(rng, 0, 8), 8);
  return s;
}

// Random adapted stopping time with values in [min_stage, horizon].
template <class S>
StoppingTime generate_stopping_time(const FiltrationModel<S>& m, int min_stage,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  StoppingTime tau;
  tau.value.assign(m.point_count(), -1);
  // walk stage by stage; an undecided atom stops now with probability 1/3
  for (int n = min_stage; n <= m.horizon(); ++n) {
    for (std::size_t a = 0; a < m.atom_count(n); ++a) {
      const auto& pts = m.atom_points(n, static_cast<int>(a));
      if (tau.value[static_cast<std::size_t>(pts[0])] != -1) continue;
      bool stop_now = n == m.horizon() || detail::rand_range(rng, 0, 2) == 0;
      if (stop_now)
        for (int w : pts) tau.value[static_cast<std::size_t>(w)] = n;
    }
  }
  return tau;
}

// Random stationary profile with stop probabilities drawn from a small exact
// grid (multiples of 1/8), optionally sparse.
template <class S>
StationaryProfile<S> generate_profile(const GameTree<S>& t, std::uint64_t seed,
                                      int density_pct = 60) {
  std::mt19937_64 rng(seed);
  StationaryProfile<S> prof = StationaryProfile<S>::never(t);
  for (int v : t.internal_nodes()) {
    if (detail::rand_range(rng, 0, 99) < density_pct)
      prof.p1.at(v) = scalar_traits<S>::from_fraction(detail::rand_range(rng, 0, 8), 8);
    if (detail::rand_range(rng, 0, 99) < density_pct)
      prof.p2.at(v) = scalar_traits<S>::from_fraction(detail::rand_range(rng, 0, 8), 8);
  }
  return prof;
}

}  // namespace stopgame
