#include <catch2/catch_amalgamated.hpp>

#include "stopgame/generator.hpp"
#include "stopgame/json_io.hpp"
#include "support/fixtures.hpp"

using namespace stopgame;

TEST_CASE("tree serialization round-trips exactly in rational mode") {
  using R = Rational;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    TreeSpec spec;
    spec.internal_nodes = 5;
    spec.granularity = 3;
    auto g = generate_tree<R>(spec, seed);
    auto j = tree_to_json(g.tree);
    auto back = tree_from_json<R>(j);
    REQUIRE(back.node_count() == g.tree.node_count());
    REQUIRE(tree_to_json(back) == j);
    // structural equality beyond the serialization
    REQUIRE(is_subgame(back, g.tree));
    REQUIRE(is_subgame(g.tree, back));
  }
}

TEST_CASE("profile serialization round-trips") {
  using R = Rational;
  TreeSpec spec;
  spec.internal_nodes = 4;
  auto g = generate_tree<R>(spec, 3);
  auto prof = generate_profile(g.tree, 9);
  auto j = profile_to_json(g.tree, prof);
  auto back = profile_from_json<R>(g.tree, j);
  REQUIRE(back == prof);
}

TEST_CASE("filtration model serialization round-trips") {
  using R = Rational;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    FiltrationSpec spec;
    spec.points = 7;
    spec.horizon = 4;
    auto m = generate_filtration_model<R>(spec, seed);
    auto r = generate_payoff_process(m, spec, seed + 2);
    auto j = model_to_json(m, r);
    auto [m2, r2] = model_from_json<R>(j);
    REQUIRE(model_to_json(m2, r2) == j);
    auto s = generate_adapted_strategy(m, seed + 5);
    auto js = adapted_to_json(m, s);
    REQUIRE(adapted_from_json<R>(m2, js) == s);
  }
}

TEST_CASE("schema field is mandatory and checked") {
  Json j;
  j["k"] = 1;
  REQUIRE_THROWS_AS(tree_from_json<double>(j), std::invalid_argument);
  j["schema"] = "stopgame.profile/1";
  REQUIRE_THROWS_AS(tree_from_json<double>(j), std::invalid_argument);
}

TEST_CASE("decimal and fraction strings parse to the same rationals") {
  REQUIRE(parse_rational("0.25") == Rational(1, 4));
  REQUIRE(parse_rational("1/4") == Rational(1, 4));
  REQUIRE(parse_rational("-0.5") == Rational(-1, 2));
  REQUIRE(parse_rational("-3") == Rational(-3));
  REQUIRE(rational_to_string(Rational(1, 4)) == "0.25");
  REQUIRE(rational_to_string(Rational(1, 3)) == "1/3");
  REQUIRE(rational_to_string(Rational(-7, 2)) == "-3.5");
  REQUIRE(rational_to_string(Rational(2)) == "2");
  REQUIRE_THROWS_AS(parse_rational("abc"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
}

TEST_CASE("certificates serialize with all fields") {
  auto t = fixtures::punishment_tree<double>();
  StationaryProfile<double> prof = StationaryProfile<double>::never(t);
  prof.p1.at(0) = 1.0;
  prof.p2.at(0) = 0.02;
  auto cert = check_equilibrium(t, prof, 0.1);
  auto j = certificate_to_json(cert);
  REQUIRE(j.at("is_equilibrium").get<bool>());
  REQUIRE(j.at("gamma").size() == 2);
  REQUIRE(j.at("schema") == "stopgame.certificate/1");
}
