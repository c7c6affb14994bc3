#include <catch2/catch_amalgamated.hpp>

#include "stopgame/best_response.hpp"
#include "stopgame/generator.hpp"
#include "support/fixtures.hpp"

using namespace stopgame;

TEST_CASE("never stopping beats a negative solo stop") {
  auto t = fixtures::punishment_tree<double>();
  auto br = best_response(t, StationaryStrategy<double>::never(t), 1);
  REQUIRE(br.value == 0.0);
  REQUIRE(br.strategy == StationaryStrategy<double>::never(t));
}

TEST_CASE("one-node closed-form best response against a mixed opponent") {
  // gamma1(x) = (0.5 x - 1) / (0.5 x + 0.5), increasing in x: optimum x = 1.
  auto t = fixtures::punishment_tree<double>();
  StationaryStrategy<double> y = StationaryStrategy<double>::never(t);
  y.at(t.require_node("root")) = 0.5;
  auto br = best_response(t, y, 1);
  REQUIRE(br.value == Catch::Approx(-0.5));
  REQUIRE(br.strategy.at(t.require_node("root")) == 1.0);
}

TEST_CASE("all stop payoffs negative and a silent opponent give value 0") {
  auto p = fixtures::payoffs<double>(-0.5, 0, 0, -1, -1, -0.5);
  auto t = fixtures::two_branch_tree<double>(p, p, p);
  for (int player : {1, 2}) {
    auto br = best_response(t, StationaryStrategy<double>::never(t), player);
    REQUIRE(br.value == 0.0);
    REQUIRE(br.strategy == StationaryStrategy<double>::never(t));
  }
}

TEST_CASE("returned strategy is pure with an antichain stop set") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    TreeSpec spec;
    spec.internal_nodes = 6;
    spec.granularity = 3;
    auto g = generate_tree<double>(spec, seed);
    auto opp = generate_profile(g.tree, seed + 1000).p2;
    auto br = best_response(g.tree, opp, 1);
    REQUIRE(br.strategy.is_pure());
    for (int v : g.tree.internal_nodes()) {
      if (br.strategy.at(v) != 1.0) continue;
      int p = g.tree.parent(v);
      while (p >= 0) {
        REQUIRE(br.strategy.at(p) == 0.0);
        p = g.tree.parent(p);
      }
    }
  }
}

TEST_CASE("fixed-point solver agrees with the antichain enumerator") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    TreeSpec spec;
    spec.internal_nodes = 3 + seed % 8;
    spec.max_depth = 4;
    spec.granularity = 1 + static_cast<long long>(seed % 4);
    auto g = generate_tree<double>(spec, seed);
    auto prof = generate_profile(g.tree, seed * 7 + 1);
    for (int player : {1, 2}) {
      const auto& opp = player == 1 ? prof.p2 : prof.p1;
      auto exact = best_response(g.tree, opp, player, BrMethod::Exact);
      auto fp = best_response(g.tree, opp, player, BrMethod::FixedPoint);
      INFO("seed " << seed << " player " << player);
      REQUIRE(std::abs(exact.value - fp.value) < 1e-6);
    }
  }
}

TEST_CASE("best response in rational mode is exact on the one-node game") {
  using R = Rational;
  auto t = fixtures::punishment_tree<R>();
  StationaryStrategy<R> y = StationaryStrategy<R>::never(t);
  y.at(0) = R(1, 2);
  auto br = best_response(t, y, 1, BrMethod::Exact);
  REQUIRE(br.value == R(-1, 2));
  auto fp = best_response(t, y, 1, BrMethod::FixedPoint);
  REQUIRE(fp.value == R(-1, 2));  // the policy polish lands on the exact value
}

TEST_CASE("check_equilibrium on the all-ones game") {
  // When every payoff equals 1, any profile that stops somewhere with
  // positive probability is a 0-equilibrium.
  auto t = fixtures::all_ones_tree<double>();
  StationaryProfile<double> prof = StationaryProfile<double>::never(t);
  prof.p1.at(t.require_node("a")) = 0.25;
  auto cert = check_equilibrium(t, prof, 0.0);
  REQUIRE(cert.is_equilibrium);
  REQUIRE(cert.stats.gamma[0] == Catch::Approx(1.0));
  REQUIRE(cert.stats.gamma[1] == Catch::Approx(1.0));
}

TEST_CASE("check_equilibrium certifies the punished profile") {
  auto t = fixtures::punishment_tree<double>();
  StationaryProfile<double> prof = StationaryProfile<double>::never(t);
  prof.p1.at(0) = 1.0;
  prof.p2.at(0) = 0.02;
  auto cert = check_equilibrium(t, prof, 0.1);
  REQUIRE(cert.is_equilibrium);
  REQUIRE(cert.stats.gamma[0] == Catch::Approx(-0.98));
  REQUIRE(cert.stats.gamma[1] == Catch::Approx(1.9));
  REQUIRE(cert.gain[0] == Catch::Approx(0.0).margin(1e-9));
  REQUIRE(cert.gain[1] == Catch::Approx(0.1));
}

TEST_CASE("check_equilibrium rejects the unpunished profile") {
  auto t = fixtures::punishment_tree<double>();
  StationaryProfile<double> prof = StationaryProfile<double>::never(t);
  prof.p1.at(0) = 1.0;
  auto cert = check_equilibrium(t, prof, 0.1);
  REQUIRE_FALSE(cert.is_equilibrium);
  REQUIRE(cert.gain[0] == Catch::Approx(1.0));  // never stopping recovers 0 over -1
}
