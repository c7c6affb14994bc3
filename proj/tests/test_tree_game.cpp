#include <catch2/catch_amalgamated.hpp>

#include <future>

#include "stopgame/tree.hpp"
#include "stopgame/tree_stats.hpp"
#include "stopgame/best_response.hpp"
#include "stopgame/generator.hpp"
#include "support/fixtures.hpp"

using namespace stopgame;

TEST_CASE("validate_tree accepts a minimal well-formed tree") {
  auto t = fixtures::one_node_tree<double>(fixtures::payoffs<double>(1, 0, 0, 1, -1, -1));
  REQUIRE(validate_tree(t).ok());
}

TEST_CASE("validate_tree flags a transition vector that does not sum to 1") {
  std::vector<TreeNode<double>> nodes(3);
  nodes[0].id = "root";
  nodes[0].children = {1, 2};
  nodes[0].child_prob = {0.5, 0.4};
  nodes[0].payoff = fixtures::payoffs<double>(0, 0, 0, 0, 0, 0);
  nodes[1].id = "u";
  nodes[2].id = "v";
  auto t = GameTree<double>::from_nodes(std::move(nodes), 0, 1);
  auto rep = validate_tree(t);
  REQUIRE_FALSE(rep.ok());
  REQUIRE(rep.issues[0].find("root") != std::string::npos);
}

TEST_CASE("validate_tree flags payoffs off the 1/K grid") {
  auto t = fixtures::one_node_tree<double>(fixtures::payoffs<double>(0.3, 0, 0, 0, 0, 0), 2);
  auto rep = validate_tree(t);
  REQUIRE_FALSE(rep.ok());
  REQUIRE(rep.issues[0].find("0.3") != std::string::npos);
}

TEST_CASE("round_stats on the single-node mixed profile") {
  // R_{1}=(1,0), R_{2}=(0,1), R_{both}=(-1,-1), x=y=1/2.
  // Enumerating the four outcomes: stop mass 3/4, payoff-weighted mass
  // (1/4)*1 + (1/4)*0 + (1/4)*(-1) = 0 for player 1 and symmetrically 0.
  auto t = fixtures::one_node_tree<double>(fixtures::payoffs<double>(1, 0, 0, 1, -1, -1));
  StationaryProfile<double> prof = StationaryProfile<double>::never(t);
  prof.p1.at(0) = 0.5;
  prof.p2.at(0) = 0.5;
  auto st = round_stats(t, prof);
  REQUIRE(st.pi == Catch::Approx(0.75));
  REQUIRE(st.rho[0] == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(st.gamma[0] == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(st.gamma[1] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("round_stats with a deterministic solo stop") {
  auto t = fixtures::one_node_tree<double>(fixtures::payoffs<double>(1, 0, 0, 1, -1, -1));
  StationaryProfile<double> prof = StationaryProfile<double>::never(t);
  prof.p1.at(0) = 1.0;
  auto st = round_stats(t, prof);
  REQUIRE(st.pi == 1.0);
  REQUIRE(st.gamma[0] == 1.0);
  REQUIRE(st.gamma[1] == 0.0);
}

TEST_CASE("round_stats never-stop convention 0/0 = 0") {
  auto t = fixtures::punishment_tree<double>();
  auto st = round_stats(t, StationaryProfile<double>::never(t));
  REQUIRE(st.pi == 0.0);
  REQUIRE(st.gamma[0] == 0.0);
  REQUIRE(st.gamma[1] == 0.0);
}

TEST_CASE("branch_prob basics") {
  auto t = fixtures::two_branch_tree<double>(fixtures::payoffs<double>(0, 0, 0, 0, 0, 0),
                                             fixtures::payoffs<double>(0, 0, 0, 0, 0, 0),
                                             fixtures::payoffs<double>(0, 0, 0, 0, 0, 0));
  REQUIRE(branch_prob(t, {t.require_node("root")}) == 1.0);
  REQUIRE(branch_prob(t, {t.require_node("a")}) == 0.5);
  REQUIRE(branch_prob(t, {t.require_node("a"), t.require_node("b")}) == 1.0);
  REQUIRE_THROWS_AS(branch_prob(t, {99}), std::invalid_argument);
}

TEST_CASE("trim produces subgames") {
  auto z = fixtures::payoffs<double>(0, 0, 0, 0, 0, 0);
  auto t = fixtures::two_branch_tree<double>(z, z, z);
  SECTION("empty trim is the identity") {
    auto s = trim(t, {});
    REQUIRE(s.node_count() == t.node_count());
    REQUIRE(is_subgame(s, t));
  }
  SECTION("trimming an internal child makes it a leaf") {
    auto s = trim(t, {t.require_node("a")});
    REQUIRE(s.node_count() == 4);  // root, a (leaf now), b, lb
    REQUIRE(s.is_leaf(s.require_node("a")));
    REQUIRE(is_subgame(s, t));
  }
  SECTION("trimming all children of the root keeps them as leaves") {
    auto s = trim(t, {t.require_node("a"), t.require_node("b")});
    REQUIRE(s.node_count() == 3);
    REQUIRE(s.is_leaf(s.require_node("a")));
    REQUIRE(s.is_leaf(s.require_node("b")));
    REQUIRE_FALSE(s.is_trivial());
  }
  SECTION("trimming at the root produces the flagged trivial subgame") {
    auto s = trim(t, {t.require_node("root")});
    REQUIRE(s.node_count() == 1);
    REQUIRE(s.is_trivial());
  }
}

TEST_CASE("leaf_passage_prob") {
  auto z = fixtures::payoffs<double>(0, 0, 0, 0, 0, 0);
  auto t = fixtures::two_branch_tree<double>(z, z, z);
  SECTION("inner equal to outer gives 0") {
    auto outer = trim(t, {t.require_node("a")});
    REQUIRE(leaf_passage_prob(t, outer, outer) == 0.0);
  }
  SECTION("single trimmed child gives its branch probability") {
    auto inner = trim(t, {t.require_node("a")});
    REQUIRE(leaf_passage_prob(t, inner, t) == 0.5);
  }
  SECTION("trivial inner tree exits at the root on every branch") {
    auto inner = trim(t, {t.require_node("root")});
    REQUIRE(leaf_passage_prob(t, inner, t) == 1.0);
  }
  SECTION("violated subgame relation is rejected") {
    auto other = fixtures::one_node_tree<double>(z);
    REQUIRE_THROWS_AS(leaf_passage_prob(t, other, t), std::invalid_argument);
  }
}

TEST_CASE("strategy_union") {
  auto t = fixtures::punishment_tree<double>();
  StationaryStrategy<double> x1 = StationaryStrategy<double>::never(t);
  StationaryStrategy<double> x2 = x1;
  x1.at(0) = 0.5;
  x2.at(0) = 0.2;
  SECTION("singleton union is the identity") {
    REQUIRE(strategy_union(t, {x1}) == x1);
  }
  SECTION("two components combine multiplicatively") {
    REQUIRE(strategy_union(t, {x1, x2}).at(0) == Catch::Approx(0.6));
  }
  SECTION("a sure stop absorbs") {
    StationaryStrategy<double> sure = StationaryStrategy<double>::stop_at(t, 0);
    REQUIRE(strategy_union(t, {x1, sure}).at(0) == 1.0);
  }
  SECTION("commutative and associative on a random triple") {
    StationaryStrategy<double> x3 = StationaryStrategy<double>::never(t);
    x3.at(0) = 0.7;
    auto u1 = strategy_union(t, {x1, x2, x3});
    auto u2 = strategy_union(t, {strategy_union(t, {x3, x1}), x2});
    REQUIRE(u1.at(0) == Catch::Approx(u2.at(0)));
  }
}

TEST_CASE("solo payoff visit probability") {
  auto z = fixtures::payoffs<double>(0, 0, 0, 0, 0, 0);
  auto pa = fixtures::payoffs<double>(0.5, 0, 0, 0, 0, 0);
  auto t = fixtures::two_branch_tree<double>(z, pa, z);
  REQUIRE(solo_payoff_visit_prob(t, 1, 0.25) == 0.0);
  REQUIRE(solo_payoff_visit_prob(t, 1, 0.0) == 1.0);   // root attains 0
  REQUIRE(solo_payoff_visit_prob(t, 1, 0.5) == 0.5);   // only node a attains 0.5
  REQUIRE(solo_payoff_peak(t, 1) == 0.5);
}

TEST_CASE("round_stats identity pi*gamma = rho holds exactly in rational mode") {
  using R = Rational;
  auto t = fixtures::two_branch_tree<R>(fixtures::payoffs<R>(0.5, -0.5, 0, 1, -1, -1),
                                        fixtures::payoffs<R>(1, 0, 0, 1, 0.5, 0.5),
                                        fixtures::payoffs<R>(-1, 1, 0.5, -0.5, 0, 0));
  StationaryProfile<R> prof = StationaryProfile<R>::never(t);
  prof.p1.at(t.require_node("root")) = R(1, 3);
  prof.p2.at(t.require_node("a")) = R(2, 7);
  prof.p1.at(t.require_node("b")) = R(1, 2);
  auto st = round_stats(t, prof);
  REQUIRE(st.pi * st.gamma[0] == st.rho[0]);
  REQUIRE(st.pi * st.gamma[1] == st.rho[1]);
}

TEST_CASE("termination probability is monotone under strategy unions") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    TreeSpec spec;
    spec.internal_nodes = 5;
    auto g = generate_tree<double>(spec, seed + 40);
    auto x1 = generate_profile(g.tree, seed).p1;
    auto x2 = generate_profile(g.tree, seed + 1).p1;
    auto y = generate_profile(g.tree, seed + 2).p2;
    double single = round_stats(g.tree, {x1, y}).pi;
    double joined = round_stats(g.tree, {strategy_union(g.tree, {x1, x2}), y}).pi;
    REQUIRE(joined >= single - 1e-12);
  }
}

TEST_CASE("operations are safe to run concurrently on independent instances") {
  std::vector<std::future<double>> futures;
  for (std::uint64_t seed = 1; seed <= 8; ++seed)
    futures.push_back(std::async(std::launch::async, [seed] {
      TreeSpec spec;
      spec.internal_nodes = 6;
      auto g = generate_tree<double>(spec, seed);
      auto prof = generate_profile(g.tree, seed + 5);
      auto cert = check_equilibrium(g.tree, prof, 0.1);
      return cert.stats.pi + cert.br_value[0];
    }));
  std::vector<double> parallel;
  for (auto& f : futures) parallel.push_back(f.get());
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    TreeSpec spec;
    spec.internal_nodes = 6;
    auto g = generate_tree<double>(spec, seed);
    auto prof = generate_profile(g.tree, seed + 5);
    auto cert = check_equilibrium(g.tree, prof, 0.1);
    REQUIRE(parallel[seed - 1] == cert.stats.pi + cert.br_value[0]);
  }
}
