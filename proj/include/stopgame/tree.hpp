#pragma once

// Stopping games on finite trees.  A game tree has a set of nodes, a root,
// per-internal-node child transition distributions and a six-component
// terminal payoff matrix (who stops -> payoff per player).  Play proceeds in
// rounds: a round walks the tree from the root; at every internal node both
// players simultaneously choose stop/continue; if nobody stops, a child is
// drawn and the walk continues; reaching a leaf restarts the round at the
// root.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "stopgame/scalar.hpp"

namespace stopgame {

enum class StopSet { P1 = 0, P2 = 1, Both = 2 };

// Terminal payoffs at one node: value[q][i] pays player i when the set of
// stopping players is q.
template <class S>
struct Payoffs {
  S value[3][2]{};

  const S& operator()(StopSet q, int player) const {
    return value[static_cast<int>(q)][player - 1];
  }
  S& operator()(StopSet q, int player) {
    return value[static_cast<int>(q)][player - 1];
  }
  friend bool operator==(const Payoffs& a, const Payoffs& b) {
    for (int q = 0; q < 3; ++q)
      for (int i = 0; i < 2; ++i)
        if (a.value[q][i] != b.value[q][i]) return false;
    return true;
  }
};

template <class S>
struct TreeNode {
  std::string id;
  std::vector<int> children;   // empty for leaves
  std::vector<S> child_prob;   // aligned with children
  Payoffs<S> payoff;           // meaningful for internal nodes only
};

template <class S>
class GameTree {
 public:
  GameTree() = default;

  static GameTree from_nodes(std::vector<TreeNode<S>> nodes, int root, long long granularity) {
    GameTree t;
    t.nodes_ = std::move(nodes);
    t.root_ = root;
    t.granularity_ = granularity;
    t.index_ids();
    t.compute_layout();
    return t;
  }

  int root() const { return root_; }
  long long granularity() const { return granularity_; }
  std::size_t node_count() const { return nodes_.size(); }
  const TreeNode<S>& node(int v) const { return nodes_.at(static_cast<std::size_t>(v)); }
  bool is_leaf(int v) const { return node(v).children.empty(); }
  bool is_internal(int v) const { return !is_leaf(v); }
  // Only node is the root: no internal nodes, nothing can ever stop.
  bool is_trivial() const { return nodes_.size() == 1 || is_leaf(root_); }
  int depth(int v) const { return depth_.at(static_cast<std::size_t>(v)); }
  int parent(int v) const { return parent_.at(static_cast<std::size_t>(v)); }
  // Probability that the branch chosen by the transitions alone reaches v.
  const S& reach_prob(int v) const { return reach_.at(static_cast<std::size_t>(v)); }

  const std::vector<int>& internal_nodes() const { return internal_; }
  const std::vector<int>& leaves() const { return leaves_; }

  int find_node(const std::string& id) const {
    auto it = id_index_.find(id);
    return it == id_index_.end() ? -1 : it->second;
  }
  int require_node(const std::string& id) const {
    int v = find_node(id);
    if (v < 0) throw std::invalid_argument("unknown node id: " + id);
    return v;
  }

  bool is_ancestor(int anc, int v) const {
    while (v >= 0) {
      if (v == anc) return true;
      v = parent(v);
    }
    return false;
  }

  // Nodes listed parents-first (BFS order from the root).
  const std::vector<int>& topological_order() const { return topo_; }

 private:
  void index_ids() {
    id_index_.clear();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!id_index_.emplace(nodes_[i].id, static_cast<int>(i)).second)
        throw std::invalid_argument("duplicate node id: " + nodes_[i].id);
    }
  }

  void compute_layout() {
    const std::size_t n = nodes_.size();
    depth_.assign(n, -1);
    parent_.assign(n, -1);
    reach_.assign(n, S(0));
    topo_.clear();
    internal_.clear();
    leaves_.clear();
    if (root_ < 0 || static_cast<std::size_t>(root_) >= n)
      throw std::invalid_argument("root id out of range");
    std::vector<int> queue{root_};
    depth_[static_cast<std::size_t>(root_)] = 0;
    reach_[static_cast<std::size_t>(root_)] = S(1);
    while (!queue.empty()) {
      int v = queue.front();
      queue.erase(queue.begin());
      topo_.push_back(v);
      const auto& nd = nodes_[static_cast<std::size_t>(v)];
      if (nd.children.empty()) {
        leaves_.push_back(v);
        continue;
      }
      internal_.push_back(v);
      for (std::size_t c = 0; c < nd.children.size(); ++c) {
        int w = nd.children[c];
        if (w < 0 || static_cast<std::size_t>(w) >= n)
          throw std::invalid_argument("child index out of range at node " + nd.id);
        if (depth_[static_cast<std::size_t>(w)] != -1)
          throw std::invalid_argument("node visited twice (not a tree): " +
                                      nodes_[static_cast<std::size_t>(w)].id);
        depth_[static_cast<std::size_t>(w)] = depth_[static_cast<std::size_t>(v)] + 1;
        parent_[static_cast<std::size_t>(w)] = v;
        reach_[static_cast<std::size_t>(w)] =
            reach_[static_cast<std::size_t>(v)] * nd.child_prob[c];
        queue.push_back(w);
      }
    }
    if (topo_.size() != n)
      throw std::invalid_argument("tree has nodes unreachable from the root");
  }

  std::vector<TreeNode<S>> nodes_;
  int root_ = -1;
  long long granularity_ = 1;
  std::map<std::string, int> id_index_;
  std::vector<int> depth_;
  std::vector<int> parent_;
  std::vector<S> reach_;
  std::vector<int> topo_;
  std::vector<int> internal_;
  std::vector<int> leaves_;
};

struct ValidationReport {
  std::vector<std::string> issues;
  bool ok() const { return issues.empty(); }
};

namespace detail {

// Integral multiple of 1/K.  The classic punishment example uses payoffs
// beyond the unit square, so only quantization is enforced here; the
// covering machinery separately requires its peaks inside [-1,1].
template <class S>
bool on_payoff_grid(const S& v, long long k) {
  S scaled = v * scalar_traits<S>::from_int(k);
  double d = scalar_traits<S>::to_double(scaled);
  long long near = static_cast<long long>(std::llround(d));
  return approx_eq<S>(scaled, scalar_traits<S>::from_int(near));
}

}  // namespace detail

// Diagnostic check of the tree-game structural invariants plus the payoff
// quantization condition (all payoffs on the grid {0, +-1/K, ..., +-K/K}).
template <class S>
ValidationReport validate_tree(const GameTree<S>& t) {
  ValidationReport rep;
  if (t.granularity() <= 0) rep.issues.push_back("granularity K must be positive");
  if (t.is_trivial()) {
    rep.issues.push_back("root is a leaf: players can never stop (trivial tree)");
    return rep;
  }
  for (int v : t.internal_nodes()) {
    const auto& nd = t.node(v);
    if (nd.children.size() != nd.child_prob.size()) {
      rep.issues.push_back("node " + nd.id + ": children/probability size mismatch");
      continue;
    }
    S sum(0);
    for (const S& p : nd.child_prob) {
      if (p < S(0)) rep.issues.push_back("node " + nd.id + ": negative transition probability");
      sum += p;
    }
    if (!approx_eq<S>(sum, S(1)))
      rep.issues.push_back("node " + nd.id + ": transition probabilities sum to " +
                           scalar_traits<S>::to_string(sum) + ", expected 1");
    for (int q = 0; q < 3; ++q)
      for (int i = 0; i < 2; ++i)
        if (!detail::on_payoff_grid<S>(nd.payoff.value[q][i], t.granularity()))
          rep.issues.push_back("node " + nd.id + ": payoff " +
                               scalar_traits<S>::to_string(nd.payoff.value[q][i]) +
                               " is not on the 1/" + std::to_string(t.granularity()) +
                               " grid");
  }
  return rep;
}

// Per-internal-node stop probability.  Values are indexed by node and are
// only meaningful (and kept zero) at internal nodes.
template <class S>
struct StationaryStrategy {
  std::vector<S> stop;

  static StationaryStrategy never(const GameTree<S>& t) {
    return StationaryStrategy{std::vector<S>(t.node_count(), S(0))};
  }
  static StationaryStrategy always(const GameTree<S>& t) {
    StationaryStrategy s = never(t);
    for (int v : t.internal_nodes()) s.stop[static_cast<std::size_t>(v)] = S(1);
    return s;
  }
  static StationaryStrategy stop_at(const GameTree<S>& t, int node) {
    StationaryStrategy s = never(t);
    s.stop[static_cast<std::size_t>(node)] = S(1);
    return s;
  }

  const S& at(int v) const { return stop[static_cast<std::size_t>(v)]; }
  S& at(int v) { return stop[static_cast<std::size_t>(v)]; }

  bool is_pure() const {
    for (const S& v : stop)
      if (v != S(0) && v != S(1)) return false;
    return true;
  }
  friend bool operator==(const StationaryStrategy& a, const StationaryStrategy& b) {
    return a.stop == b.stop;
  }
};

template <class S>
struct StationaryProfile {
  StationaryStrategy<S> p1;
  StationaryStrategy<S> p2;

  static StationaryProfile never(const GameTree<S>& t) {
    return {StationaryStrategy<S>::never(t), StationaryStrategy<S>::never(t)};
  }
  const StationaryStrategy<S>& of(int player) const { return player == 1 ? p1 : p2; }
  StationaryStrategy<S>& of(int player) { return player == 1 ? p1 : p2; }
  friend bool operator==(const StationaryProfile& a, const StationaryProfile& b) {
    return a.p1 == b.p1 && a.p2 == b.p2;
  }
};

template <class S>
void require_strategy_domain(const GameTree<S>& t, const StationaryStrategy<S>& s) {
  if (s.stop.size() != t.node_count())
    throw std::invalid_argument("strategy domain does not match the tree");
  for (const S& v : s.stop)
    if (v < S(0) || v > S(1))
      throw std::invalid_argument("stop probability outside [0,1]");
}

template <class S>
void require_profile_domain(const GameTree<S>& t, const StationaryProfile<S>& p) {
  require_strategy_domain(t, p.p1);
  require_strategy_domain(t, p.p2);
}

// Probability, under the transitions alone, that the branch from the root to
// a leaf meets the set d.
template <class S>
S branch_prob(const GameTree<S>& t, const std::set<int>& d) {
  for (int v : d)
    if (v < 0 || static_cast<std::size_t>(v) >= t.node_count())
      throw std::invalid_argument("branch_prob: unknown node index");
  // hit(v) = P(branch through v meets d within the subtree of v)
  std::vector<S> hit(t.node_count(), S(0));
  const auto& order = t.topological_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    if (d.count(v)) {
      hit[static_cast<std::size_t>(v)] = S(1);
      continue;
    }
    const auto& nd = t.node(v);
    S acc(0);
    for (std::size_t c = 0; c < nd.children.size(); ++c)
      acc += nd.child_prob[c] * hit[static_cast<std::size_t>(nd.children[c])];
    hit[static_cast<std::size_t>(v)] = acc;
  }
  return hit[static_cast<std::size_t>(t.root())];
}

template <class S>
S branch_prob_ids(const GameTree<S>& t, const std::set<std::string>& ids) {
  std::set<int> d;
  for (const auto& id : ids) d.insert(t.require_node(id));
  return branch_prob(t, d);
}

// The subgame obtained by turning every node of d into a leaf and dropping
// all strict descendants.  Node ids are preserved.
template <class S>
GameTree<S> trim(const GameTree<S>& t, const std::set<int>& d) {
  for (int v : d) {
    if (v < 0 || static_cast<std::size_t>(v) >= t.node_count())
      throw std::invalid_argument("trim: unknown node index");
    if (t.is_leaf(v)) throw std::invalid_argument("trim: node " + t.node(v).id + " is a leaf");
  }
  // collect surviving nodes: stop descending below members of d
  std::vector<TreeNode<S>> kept;
  std::map<int, int> remap;
  std::vector<int> stack{t.root()};
  std::vector<int> order;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    order.push_back(v);
    if (!d.count(v))
      for (int w : t.node(v).children) stack.push_back(w);
  }
  std::sort(order.begin(), order.end());
  for (int v : order) {
    remap[v] = static_cast<int>(kept.size());
    TreeNode<S> nd = t.node(v);
    if (d.count(v)) {
      nd.children.clear();
      nd.child_prob.clear();
      nd.payoff = Payoffs<S>{};
    }
    kept.push_back(std::move(nd));
  }
  for (auto& nd : kept)
    for (auto& c : nd.children) c = remap.at(c);
  return GameTree<S>::from_nodes(std::move(kept), remap.at(t.root()), t.granularity());
}

// T' is a subgame of T: same root, a subset of nodes, and every internal node
// of T' keeps its children, transitions and payoffs from T.
template <class S>
bool is_subgame(const GameTree<S>& sub, const GameTree<S>& of) {
  if (sub.node(sub.root()).id != of.node(of.root()).id) return false;
  for (std::size_t i = 0; i < sub.node_count(); ++i) {
    const auto& nd = sub.node(static_cast<int>(i));
    int w = of.find_node(nd.id);
    if (w < 0) return false;
    if (nd.children.empty()) continue;
    const auto& other = of.node(w);
    if (nd.children.size() != other.children.size()) return false;
    for (std::size_t c = 0; c < nd.children.size(); ++c) {
      if (sub.node(nd.children[c]).id != of.node(other.children[c]).id) return false;
      if (nd.child_prob[c] != other.child_prob[c]) return false;
    }
    if (!(nd.payoff == other.payoff)) return false;
  }
  return true;
}

// Probability that the branch passes through a leaf of `inner` that is not a
// leaf of `outer`, i.e. exits `inner` strictly before exiting `outer`.
// Requires inner to be a subgame of outer and outer a subgame of t.
template <class S>
S leaf_passage_prob(const GameTree<S>& t, const GameTree<S>& inner, const GameTree<S>& outer) {
  if (!is_subgame(outer, t) || !is_subgame(inner, outer))
    throw std::invalid_argument("leaf_passage_prob: subgame relation violated");
  std::set<std::string> outer_leaves;
  for (int v : outer.leaves()) outer_leaves.insert(outer.node(v).id);
  std::set<int> d;
  for (int v : inner.leaves()) {
    const std::string& id = inner.node(v).id;
    if (!outer_leaves.count(id)) d.insert(t.require_node(id));
  }
  return branch_prob(t, d);
}

// Map a strategy on a subgame to the full tree, continuing (probability 0)
// everywhere outside the subgame's internal nodes.
template <class S>
StationaryStrategy<S> extend_by_zero(const GameTree<S>& sub, const StationaryStrategy<S>& s,
                                     const GameTree<S>& full) {
  StationaryStrategy<S> out = StationaryStrategy<S>::never(full);
  for (int v : sub.internal_nodes())
    out.at(full.require_node(sub.node(v).id)) = s.at(v);
  return out;
}

template <class S>
StationaryProfile<S> extend_by_zero(const GameTree<S>& sub, const StationaryProfile<S>& p,
                                    const GameTree<S>& full) {
  return {extend_by_zero(sub, p.p1, full), extend_by_zero(sub, p.p2, full)};
}

// Restrict a strategy on the full tree to a subgame.
template <class S>
StationaryStrategy<S> restrict_to(const GameTree<S>& full, const StationaryStrategy<S>& s,
                                  const GameTree<S>& sub) {
  StationaryStrategy<S> out = StationaryStrategy<S>::never(sub);
  for (int v : sub.internal_nodes())
    out.at(v) = s.at(full.require_node(sub.node(v).id));
  return out;
}

}  // namespace stopgame
