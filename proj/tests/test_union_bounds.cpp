#include <catch2/catch_amalgamated.hpp>

#include "stopgame/generator.hpp"
#include "stopgame/union_bounds.hpp"
#include "support/fixtures.hpp"

using namespace stopgame;

TEST_CASE("singleton sequence: no double terminations, union equals the copy") {
  auto t = fixtures::all_ones_tree<double>();
  auto prof = generate_profile(t, 5);
  auto rep = union_bounds(t, {prof}, 0.1);
  REQUIRE(rep.orthogonal);
  REQUIRE(rep.expected_n_geq2 == 0.0);
  REQUIRE(rep.union_stats.pi == Catch::Approx(rep.pi_k[0]));
  REQUIRE(rep.all_hold());
}

TEST_CASE("profiles stopping on disjoint branches add termination mass exactly") {
  auto z = fixtures::payoffs<double>(0, 0, 0, 0, 0, 0);
  auto t = fixtures::two_branch_tree<double>(z, z, z);
  StationaryProfile<double> on_a = StationaryProfile<double>::never(t);
  on_a.p1.at(t.require_node("a")) = 0.5;
  StationaryProfile<double> on_b = StationaryProfile<double>::never(t);
  on_b.p2.at(t.require_node("b")) = 0.5;
  auto rep = union_bounds(t, {on_a, on_b}, 0.3);
  REQUIRE(rep.orthogonal);
  REQUIRE(rep.expected_n_geq2 == 0.0);
  REQUIRE(rep.union_stats.pi == Catch::Approx(rep.pi_k[0] + rep.pi_k[1]));
  REQUIRE(rep.all_hold());
}

TEST_CASE("a non-orthogonal sequence is rejected with a witness") {
  auto t = fixtures::all_ones_tree<double>();
  StationaryProfile<double> heavy_prof{StationaryStrategy<double>::always(t),
                                       StationaryStrategy<double>::never(t)};
  StationaryProfile<double> offender = StationaryProfile<double>::never(t);
  offender.p2.at(t.require_node("root")) = 0.5;
  auto rep = union_bounds(t, {heavy_prof, offender}, 0.2);
  REQUIRE_FALSE(rep.orthogonal);
  REQUIRE(rep.witness.has_value());
  REQUIRE(rep.witness->k == 1);
}

TEST_CASE("union inequalities hold on random orthogonal sequences") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    TreeSpec spec;
    spec.internal_nodes = 4 + seed % 4;
    spec.max_depth = 3;
    auto g = generate_tree<double>(spec, seed + 300);
    double delta = seed % 2 == 0 ? 0.1 : 0.2;
    auto seq = generate_orthogonal_sequence<double>(g.tree, 3, delta, seed);
    auto verdict = check_orthogonality(g.tree, seq, delta, false);
    REQUIRE(verdict.ok);
    auto rep = union_bounds(g.tree, seq, delta);
    INFO("seed " << seed);
    for (const auto& q : rep.inequalities) {
      INFO(q.name << ": " << q.lhs << " vs " << q.rhs);
      REQUIRE(q.holds);
    }
  }
}

TEST_CASE("union inequalities are exact in rational mode") {
  using R = Rational;
  TreeSpec spec;
  spec.internal_nodes = 4;
  auto g = generate_tree<R>(spec, 17);
  auto seq = generate_orthogonal_sequence<R>(g.tree, 3, R(1, 10), 17);
  auto rep = union_bounds(g.tree, seq, R(1, 10));
  REQUIRE(rep.orthogonal);
  REQUIRE(rep.all_hold());
  // the copies-model union termination equals the union-profile recursion
  R direct = round_stats(g.tree, profile_union(g.tree, seq)).pi;
  REQUIRE(rep.union_stats.pi == direct);
}
