#include <catch2/catch_amalgamated.hpp>

#include "stopgame/equilibrium_search.hpp"
#include "stopgame/generator.hpp"
#include "support/fixtures.hpp"

using namespace stopgame;

TEST_CASE("search finds a punished equilibrium near (-1, 2)") {
  auto t = fixtures::punishment_tree<double>();
  auto res = find_stationary_equilibrium(t, 0.1);
  REQUIRE(res.found);
  REQUIRE(res.certificate.is_equilibrium);
  // All eps-equilibrium payoffs lie near the segment (-1 + y, 2 - 5 y).
  REQUIRE(std::abs(res.stats.gamma[0] - (-1.0)) < 0.1 + 1e-9);
  REQUIRE(std::abs(res.stats.gamma[1] - 2.0) < 0.5);
}

TEST_CASE("never-stop is found when all stop payoffs are nonpositive") {
  auto p = fixtures::payoffs<double>(-0.5, 0, 0, -1, -1, -0.5);
  auto t = fixtures::two_branch_tree<double>(p, p, p);
  auto res = find_stationary_equilibrium(t, 0.05);
  REQUIRE(res.found);
  REQUIRE(res.stats.pi == 0.0);
  REQUIRE(res.certificate.gain[0] <= 1e-9);
  REQUIRE(res.certificate.gain[1] <= 1e-9);
}

TEST_CASE("a target rectangle disjoint from achievable payoffs reports not-found") {
  auto t = fixtures::punishment_tree<double>();
  // On this one-node game every payoff pair has gamma1 <= 0.
  Rectangle<double> target{0.5, 0.5, 0.1};
  auto res = find_stationary_equilibrium(t, 0.1, std::optional<Rectangle<double>>(target));
  REQUIRE_FALSE(res.found);
  REQUIRE_FALSE(res.note.empty());
}

TEST_CASE("target rectangle is honored when achievable") {
  auto t = fixtures::all_ones_tree<double>();
  Rectangle<double> target{0.9, 0.9, 0.2};
  auto res = find_stationary_equilibrium(t, 0.1, std::optional<Rectangle<double>>(target));
  REQUIRE(res.found);
  REQUIRE(target.contains(res.stats.gamma[0], res.stats.gamma[1]));
}

TEST_CASE("search is deterministic per seed") {
  TreeSpec spec;
  spec.internal_nodes = 4;
  spec.granularity = 2;
  auto g = generate_tree<double>(spec, 99);
  EqSearchConfig cfg;
  cfg.seed = 7;
  auto a = find_stationary_equilibrium(g.tree, 0.1, {}, cfg);
  auto b = find_stationary_equilibrium(g.tree, 0.1, {}, cfg);
  REQUIRE(a.found == b.found);
  if (a.found) {
    REQUIRE(a.profile == b.profile);
  }
}
