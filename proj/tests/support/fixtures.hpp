#pragma once

// Shared test fixtures: small hand-built trees and models used across suites.

#include <string>
#include <vector>

#include "stopgame/tree.hpp"

namespace fixtures {

using stopgame::GameTree;
using stopgame::Payoffs;
using stopgame::StopSet;
using stopgame::TreeNode;

template <class S>
stopgame::Payoffs<S> payoffs(double p1s1, double p1s2, double p2s1, double p2s2, double b1,
                             double b2) {
  stopgame::Payoffs<S> p;
  auto conv = [](double v) { return stopgame::scalar_traits<S>::parse(stopgame::double_to_string(v)); };
  p(StopSet::P1, 1) = conv(p1s1);
  p(StopSet::P1, 2) = conv(p1s2);
  p(StopSet::P2, 1) = conv(p2s1);
  p(StopSet::P2, 2) = conv(p2s2);
  p(StopSet::Both, 1) = conv(b1);
  p(StopSet::Both, 2) = conv(b2);
  return p;
}

// Root with a single leaf child: the smallest nontrivial game.
template <class S>
GameTree<S> one_node_tree(const stopgame::Payoffs<S>& p, long long k = 1) {
  std::vector<TreeNode<S>> nodes(2);
  nodes[0].id = "root";
  nodes[0].children = {1};
  nodes[0].child_prob = {S(1)};
  nodes[0].payoff = p;
  nodes[1].id = "leaf";
  return GameTree<S>::from_nodes(std::move(nodes), 0, k);
}

// The deterministic punishment game: solo stop by player 1 pays (-1, 2),
// solo stop by player 2 pays (-2, 1), a simultaneous stop pays (0, -3).
template <class S>
GameTree<S> punishment_tree() {
  return one_node_tree<S>(payoffs<S>(-1, 2, -2, 1, 0, -3), 3);
}

// Root -> {a, b} at probability 1/2 each; a and b are internal with one leaf
// child each.  Payoff matrices supplied per internal node (root, a, b).
template <class S>
GameTree<S> two_branch_tree(const stopgame::Payoffs<S>& at_root, const stopgame::Payoffs<S>& at_a,
                            const stopgame::Payoffs<S>& at_b, long long k = 2) {
  std::vector<TreeNode<S>> nodes(5);
  nodes[0].id = "root";
  nodes[0].children = {1, 2};
  nodes[0].child_prob = {S(1) / S(2), S(1) / S(2)};
  nodes[0].payoff = at_root;
  nodes[1].id = "a";
  nodes[1].children = {3};
  nodes[1].child_prob = {S(1)};
  nodes[1].payoff = at_a;
  nodes[2].id = "b";
  nodes[2].children = {4};
  nodes[2].child_prob = {S(1)};
  nodes[2].payoff = at_b;
  nodes[3].id = "la";
  nodes[4].id = "lb";
  return GameTree<S>::from_nodes(std::move(nodes), 0, k);
}

template <class S>
GameTree<S> all_ones_tree() {
  auto p = payoffs<S>(1, 1, 1, 1, 1, 1);
  return two_branch_tree<S>(p, p, p, 1);
}

}  // namespace fixtures
