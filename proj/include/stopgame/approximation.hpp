#pragma once

// Quantized approximation of a filtration segment [n, tau] by a chain of
// finite partitions with quantized transition kernels, and the extraction of
// game trees from it.
//
// Backward pass: at the last stage, points are grouped by payoff signature;
// below that, dying points (tau = k) are grouped by payoff signature and live
// points additionally by the support and grid cell of their conditional
// kernel onto the stage-(k+1) groups.  The cell grid step at stage k is
// delta_k / (2c) with delta_k = eps^2 / 2^(k+2) and c the support size, so
// the renormalized cell center stays within delta_k/2 of every member in
// l1 norm.  Forward pass: upward intersections make the chain refining, and
// kernels lift unchanged onto the intersections.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "stopgame/filtration.hpp"
#include "stopgame/filtration_stats.hpp"
#include "stopgame/hash.hpp"
#include "stopgame/tree.hpp"

namespace stopgame {

template <class S>
struct ApproximationPair {
  int start = 0;   // segment start stage n
  int last = 0;    // M = max value of tau
  StoppingTime tau;
  S eps{0};        // the eps whose squares drive the per-stage budgets

  // level l = stage (start + l); atoms partition {tau >= stage}
  std::vector<std::vector<std::vector<int>>> atoms;
  // kernel[l][atom] = (child atom index at level l+1, probability); empty for
  // atoms with tau == stage (leaves)
  std::vector<std::vector<std::vector<std::pair<int, S>>>> kernel;

  int levels() const { return static_cast<int>(atoms.size()); }
  int stage_of_level(int l) const { return start + l; }
  int atom_at(int level, int point) const {
    const auto& part = atoms.at(static_cast<std::size_t>(level));
    for (std::size_t a = 0; a < part.size(); ++a)
      for (int w : part[a])
        if (w == point) return static_cast<int>(a);
    return -1;
  }

  S delta_at(int stage) const {
    S d = eps * eps;
    for (int i = 0; i < stage + 2; ++i) d = d / S(2);
    return d;
  }
  // Delta_n = sum_{k >= n} delta_k = eps^2 / 2^(n+1)
  S delta_tail(int stage) const {
    S d = eps * eps;
    for (int i = 0; i < stage + 1; ++i) d = d / S(2);
    return d;
  }
};

namespace detail {

template <class S>
std::string payoff_signature(const FiltrationModel<S>& m, const PayoffProcess<S>& r, int stage,
                             int point) {
  if (stage >= m.horizon()) return "end";
  const auto& p = r.at(stage, m.atom_of(stage, point));
  std::string s;
  for (int q = 0; q < 3; ++q)
    for (int i = 0; i < 2; ++i) s += scalar_traits<S>::to_string(p.value[q][i]) + ",";
  return s;
}

}  // namespace detail

template <class S>
ApproximationPair<S> build_delta_approximation(const FiltrationModel<S>& m,
                                               const PayoffProcess<S>& r, int n,
                                               const StoppingTime& tau, const S& eps) {
  require_adapted(m, tau, "segment end");
  if (eps <= S(0)) throw std::invalid_argument("approximation budget must be positive");
  for (std::size_t w = 0; w < m.point_count(); ++w)
    if (tau.value[w] < n)
      throw std::invalid_argument("segment end must be at least the start stage");

  ApproximationPair<S> ap;
  ap.start = n;
  ap.tau = tau;
  ap.last = tau.max_value();
  ap.eps = eps;
  const int levels = ap.last - n + 1;

  // ---- backward pass over model atoms ----
  // tilde[k - n] = group partition of {tau >= k}: each group is a list of
  // model stage-k atoms; tilde_q holds the quantized kernel per live group.
  std::vector<std::vector<std::vector<int>>> tilde(static_cast<std::size_t>(levels));
  std::vector<std::vector<std::map<int, S>>> tilde_q(static_cast<std::size_t>(levels));
  std::vector<std::vector<int>> group_of_point(static_cast<std::size_t>(levels));

  for (int k = ap.last; k >= n; --k) {
    int l = k - n;
    struct Group {
      std::vector<int> points;
      std::map<int, S> q;
    };
    std::map<std::string, Group> groups;
    std::set<int> seen_atoms;
    for (std::size_t w = 0; w < m.point_count(); ++w) {
      if (tau.value[w] < k) continue;
      int a = m.atom_of(k, static_cast<int>(w));
      if (!seen_atoms.insert(a).second) continue;
      const auto& pts = m.atom_points(k, a);
      bool dying = tau.value[w] == k;  // constant on the atom by adaptedness
      std::string key = detail::payoff_signature(m, r, k, static_cast<int>(w));
      std::map<int, S> cond;  // conditional mass on stage-(k+1) groups
      if (dying) {
        key = "D|" + key;
      } else {
        S atom_mass(0);
        for (int w2 : pts) atom_mass += m.point_prob(w2);
        for (int w2 : pts) {
          int g = group_of_point[static_cast<std::size_t>(l + 1)][static_cast<std::size_t>(w2)];
          cond[g] += m.point_prob(w2) / atom_mass;
        }
        // support + grid cell in the total order of stage-(k+1) groups
        S delta = ap.delta_at(k);
        S h = delta / (S(2) * scalar_traits<S>::from_int(static_cast<long long>(cond.size())));
        key = "L|" + key + "|";
        for (const auto& [g, v] : cond) {
          long long cell = static_cast<long long>(scalar_traits<S>::to_double(v / h));
          while (scalar_traits<S>::from_int(cell) * h > v) --cell;
          while (scalar_traits<S>::from_int(cell + 1) * h <= v) ++cell;
          key += std::to_string(g) + ":" + std::to_string(cell) + ";";
        }
      }
      auto& grp = groups[key];
      for (int w2 : pts) grp.points.push_back(w2);
      if (!dying && grp.q.empty()) {
        // renormalized cell center, support preserving
        S h = ap.delta_at(k) /
              (S(2) * scalar_traits<S>::from_int(static_cast<long long>(cond.size())));
        std::map<int, S> center;
        S total(0);
        for (const auto& [g, v] : cond) {
          long long cell = static_cast<long long>(scalar_traits<S>::to_double(v / h));
          while (scalar_traits<S>::from_int(cell) * h > v) --cell;
          while (scalar_traits<S>::from_int(cell + 1) * h <= v) ++cell;
          S c = (scalar_traits<S>::from_int(cell) + S(1) / S(2)) * h;
          center[g] = c;
          total += c;
        }
        for (auto& [g, c] : center) grp.q[g] = c / total;
      }
    }
    // canonical order: lexicographic over sorted point lists
    group_of_point[static_cast<std::size_t>(l)].assign(m.point_count(), -1);
    for (auto& [key, grp] : groups) {
      std::sort(grp.points.begin(), grp.points.end());
      tilde[static_cast<std::size_t>(l)].push_back(grp.points);
      tilde_q[static_cast<std::size_t>(l)].push_back(grp.q);
    }
    // sort groups canonically and rebuild indices
    std::vector<std::size_t> order(tilde[static_cast<std::size_t>(l)].size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return tilde[static_cast<std::size_t>(l)][a] < tilde[static_cast<std::size_t>(l)][b];
    });
    std::vector<std::vector<int>> sorted_atoms;
    std::vector<std::map<int, S>> sorted_q;
    for (std::size_t i : order) {
      sorted_atoms.push_back(tilde[static_cast<std::size_t>(l)][i]);
      sorted_q.push_back(tilde_q[static_cast<std::size_t>(l)][i]);
    }
    tilde[static_cast<std::size_t>(l)] = std::move(sorted_atoms);
    tilde_q[static_cast<std::size_t>(l)] = std::move(sorted_q);
    for (std::size_t g = 0; g < tilde[static_cast<std::size_t>(l)].size(); ++g)
      for (int w : tilde[static_cast<std::size_t>(l)][g])
        group_of_point[static_cast<std::size_t>(l)][static_cast<std::size_t>(w)] =
            static_cast<int>(g);
  }

  // ---- forward pass: upward intersections ----
  ap.atoms.resize(static_cast<std::size_t>(levels));
  ap.kernel.resize(static_cast<std::size_t>(levels));
  ap.atoms[0] = tilde[0];
  std::vector<int> containing_tilde;  // tilde group containing each level atom
  for (std::size_t g = 0; g < tilde[0].size(); ++g)
    containing_tilde.push_back(static_cast<int>(g));
  for (int l = 0; l + 1 < levels; ++l) {
    std::vector<std::vector<int>> next_atoms;
    std::vector<int> next_tilde;
    ap.kernel[static_cast<std::size_t>(l)].resize(ap.atoms[static_cast<std::size_t>(l)].size());
    // intersections, canonically ordered by construction order then sorted
    struct Child {
      std::vector<int> points;
      int parent;
      int tilde_group;
      S prob;
    };
    std::vector<Child> children;
    for (std::size_t a = 0; a < ap.atoms[static_cast<std::size_t>(l)].size(); ++a) {
      const auto& parent_points = ap.atoms[static_cast<std::size_t>(l)][a];
      int k = ap.stage_of_level(l);
      if (tau.value[static_cast<std::size_t>(parent_points[0])] == k) continue;  // leaf
      const auto& q = tilde_q[static_cast<std::size_t>(l)]
                             [static_cast<std::size_t>(containing_tilde[a])];
      for (const auto& [g, prob] : q) {
        std::vector<int> inter;
        for (int w : parent_points)
          if (group_of_point[static_cast<std::size_t>(l + 1)][static_cast<std::size_t>(w)] == g)
            inter.push_back(w);
        if (inter.empty()) continue;
        children.push_back({inter, static_cast<int>(a), g, prob});
      }
    }
    std::sort(children.begin(), children.end(),
              [](const Child& x, const Child& y) { return x.points < y.points; });
    for (const auto& ch : children) {
      int idx = static_cast<int>(next_atoms.size());
      next_atoms.push_back(ch.points);
      next_tilde.push_back(ch.tilde_group);
      ap.kernel[static_cast<std::size_t>(l)][static_cast<std::size_t>(ch.parent)].push_back(
          {idx, ch.prob});
    }
    ap.atoms[static_cast<std::size_t>(l + 1)] = std::move(next_atoms);
    containing_tilde = std::move(next_tilde);
  }
  ap.kernel[static_cast<std::size_t>(levels - 1)].resize(
      ap.atoms[static_cast<std::size_t>(levels - 1)].size());
  return ap;
}

// Structural check of the approximation-pair conditions against the exact
// model conditionals.
template <class S>
ValidationReport verify_delta_approximation(const FiltrationModel<S>& m, const PayoffProcess<S>& r,
                                            const ApproximationPair<S>& ap) {
  ValidationReport rep;
  auto issue = [&rep](const std::string& s) { rep.issues.push_back(s); };
  for (int l = 0; l < ap.levels(); ++l) {
    int k = ap.stage_of_level(l);
    std::set<int> covered;
    for (std::size_t a = 0; a < ap.atoms[static_cast<std::size_t>(l)].size(); ++a) {
      const auto& pts = ap.atoms[static_cast<std::size_t>(l)][a];
      // F_k-measurable: a union of model stage-k atoms
      std::set<int> model_atoms;
      for (int w : pts) model_atoms.insert(m.atom_of(k, w));
      std::size_t union_size = 0;
      for (int ma : model_atoms) union_size += m.atom_points(k, ma).size();
      if (union_size != pts.size())
        issue("atom not F_k-measurable at stage " + std::to_string(k));
      // payoff and tau measurability
      for (int w : pts) {
        covered.insert(w);
        if (ap.tau.value[static_cast<std::size_t>(w)] < k)
          issue("atom contains a point past its segment end at stage " + std::to_string(k));
        if (detail::payoff_signature(m, r, k, w) != detail::payoff_signature(m, r, k, pts[0]))
          issue("payoffs not measurable on an atom at stage " + std::to_string(k));
        if ((ap.tau.value[static_cast<std::size_t>(w)] == k) !=
            (ap.tau.value[static_cast<std::size_t>(pts[0])] == k))
          issue("segment end not measurable on an atom at stage " + std::to_string(k));
      }
      bool leaf = ap.tau.value[static_cast<std::size_t>(pts[0])] == k;
      const auto& kern = ap.kernel[static_cast<std::size_t>(l)][a];
      if (leaf) {
        if (!kern.empty()) issue("leaf atom with a kernel at stage " + std::to_string(k));
        continue;
      }
      if (l + 1 >= ap.levels()) {
        issue("live atom at the last level");
        continue;
      }
      // children partition the atom; kernel sums to 1; condition 6 strict
      std::set<int> child_points;
      S qsum(0);
      for (const auto& [child, prob] : kern) {
        qsum += prob;
        if (prob <= S(0)) issue("nonpositive kernel entry");
        for (int w : ap.atoms[static_cast<std::size_t>(l + 1)][static_cast<std::size_t>(child)]) {
          child_points.insert(w);
        }
      }
      if (!approx_eq<S>(qsum, S(1))) issue("kernel does not sum to 1");
      if (child_points.size() != pts.size())
        issue("children do not partition their parent at stage " + std::to_string(k));
      for (int w : pts)
        if (!child_points.count(w))
          issue("child atoms miss a parent point at stage " + std::to_string(k));
      // condition 6: per model atom inside, compare exact conditionals
      for (int ma : model_atoms) {
        S mass(0);
        for (int w : m.atom_points(k, ma)) mass += m.point_prob(w);
        S dist(0);
        for (const auto& [child, prob] : kern) {
          S exact(0);
          for (int w : ap.atoms[static_cast<std::size_t>(l + 1)][static_cast<std::size_t>(child)])
            if (m.atom_of(k, w) == ma) exact += m.point_prob(w);
          dist += abs_val<S>(exact / mass - prob);
        }
        if (!(dist < ap.delta_at(k)))
          issue("kernel deviates by at least delta_k at stage " + std::to_string(k));
      }
    }
    // the level partitions exactly {tau >= k}
    for (std::size_t w = 0; w < m.point_count(); ++w) {
      bool in = covered.count(static_cast<int>(w)) > 0;
      bool expected = ap.tau.value[w] >= k;
      if (in != expected) issue("level coverage mismatch at stage " + std::to_string(k));
    }
  }
  return rep;
}

template <class S>
struct ExtractedTree {
  GameTree<S> tree;
  int root_atom = 0;                                  // level-0 atom index
  std::vector<std::pair<int, int>> node_source;       // node -> (level, atom index)
};

// One game tree per level-0 atom: nodes are the contained atoms, leaves where
// the segment ends, transitions from the quantized kernels, payoffs from the
// process.
template <class S>
std::vector<ExtractedTree<S>> extract_trees(const FiltrationModel<S>& m, const PayoffProcess<S>& r,
                                            const ApproximationPair<S>& ap) {
  std::vector<ExtractedTree<S>> out;
  for (std::size_t root = 0; root < ap.atoms[0].size(); ++root) {
    ExtractedTree<S> ex;
    ex.root_atom = static_cast<int>(root);
    std::vector<TreeNode<S>> nodes;
    std::map<std::pair<int, int>, int> id_of;
    // BFS from the root atom
    std::vector<std::pair<int, int>> queue{{0, static_cast<int>(root)}};
    while (!queue.empty()) {
      auto [l, a] = queue.front();
      queue.erase(queue.begin());
      int id = static_cast<int>(nodes.size());
      id_of[{l, a}] = id;
      ex.node_source.push_back({l, a});
      TreeNode<S> nd;
      nd.id = "s" + std::to_string(ap.stage_of_level(l)) + "a" + std::to_string(a);
      int k = ap.stage_of_level(l);
      int w0 = ap.atoms[static_cast<std::size_t>(l)][static_cast<std::size_t>(a)][0];
      if (ap.tau.value[static_cast<std::size_t>(w0)] > k) {
        nd.payoff = r.at(k, m.atom_of(k, w0));
        for (const auto& [child, prob] : ap.kernel[static_cast<std::size_t>(l)]
                                                  [static_cast<std::size_t>(a)]) {
          nd.child_prob.push_back(prob);
          nd.children.push_back(-1);  // resolved below
          queue.push_back({l + 1, child});
        }
      }
      nodes.push_back(std::move(nd));
    }
    // resolve child ids
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      auto [l, a] = ex.node_source[i];
      const auto& kern = ap.kernel[static_cast<std::size_t>(l)][static_cast<std::size_t>(a)];
      for (std::size_t c = 0; c < kern.size(); ++c)
        nodes[i].children[c] = id_of.at({l + 1, kern[c].first});
    }
    ex.tree = GameTree<S>::from_nodes(std::move(nodes), 0, r.granularity);
    out.push_back(std::move(ex));
  }
  return out;
}

// Transport a stationary tree strategy back to an adapted strategy (zero off
// the tree's atoms).
template <class S>
AdaptedStrategy<S> lift_tree_strategy(const FiltrationModel<S>& m, const ApproximationPair<S>& ap,
                                      const ExtractedTree<S>& ex,
                                      const StationaryStrategy<S>& s) {
  AdaptedStrategy<S> out = AdaptedStrategy<S>::never(m);
  for (std::size_t node = 0; node < ex.tree.node_count(); ++node) {
    if (ex.tree.is_leaf(static_cast<int>(node))) continue;
    auto [l, a] = ex.node_source[node];
    int k = ap.stage_of_level(l);
    if (k >= m.horizon()) continue;
    std::set<int> model_atoms;
    for (int w : ap.atoms[static_cast<std::size_t>(l)][static_cast<std::size_t>(a)])
      model_atoms.insert(m.atom_of(k, w));
    for (int ma : model_atoms) out.at(k, ma) = s.at(static_cast<int>(node));
  }
  return out;
}

// Read an adapted strategy measurable on the approximation atoms into a tree
// strategy.
template <class S>
StationaryStrategy<S> project_to_tree(const FiltrationModel<S>& m, const ApproximationPair<S>& ap,
                                      const ExtractedTree<S>& ex, const AdaptedStrategy<S>& s) {
  StationaryStrategy<S> out = StationaryStrategy<S>::never(ex.tree);
  for (std::size_t node = 0; node < ex.tree.node_count(); ++node) {
    if (ex.tree.is_leaf(static_cast<int>(node))) continue;
    auto [l, a] = ex.node_source[node];
    int k = ap.stage_of_level(l);
    if (k >= m.horizon()) continue;
    int w0 = ap.atoms[static_cast<std::size_t>(l)][static_cast<std::size_t>(a)][0];
    out.at(static_cast<int>(node)) = s.at(k, m.atom_of(k, w0));
  }
  return out;
}

}  // namespace stopgame
