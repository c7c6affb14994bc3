#include <catch2/catch_amalgamated.hpp>

#include "stopgame/dp.hpp"
#include "stopgame/generator.hpp"
#include "stopgame/schedule.hpp"
#include "support/fixtures.hpp"

using namespace stopgame;

namespace {

template <class S>
FiltrationModel<S> deterministic_model(int horizon) {
  return FiltrationModel<S>({S(1)}, horizon,
                            std::vector<std::vector<std::vector<int>>>(
                                static_cast<std::size_t>(horizon) + 1, {{0}}));
}

template <class S>
PayoffProcess<S> constant_process(const FiltrationModel<S>& m, const Payoffs<S>& p, long long k) {
  PayoffProcess<S> r;
  r.granularity = k;
  r.values.resize(static_cast<std::size_t>(m.horizon()));
  for (int n = 0; n < m.horizon(); ++n)
    r.values[static_cast<std::size_t>(n)].assign(m.atom_count(n), p);
  return r;
}

// brute force over pure adapted deviations inside the window
template <class S>
S best_pure_deviation(const FiltrationModel<S>& m, const PayoffProcess<S>& r,
                      const AdaptedStrategy<S>& opponent, int player, const StoppingTime& t1,
                      const StoppingTime& t2) {
  std::vector<std::pair<int, int>> cells;
  for (int n = 0; n < m.horizon(); ++n)
    for (std::size_t a = 0; a < m.atom_count(n); ++a) {
      int w0 = m.atom_points(n, static_cast<int>(a))[0];
      if (t1.at(w0) <= n && n < t2.at(w0)) cells.push_back({n, static_cast<int>(a)});
    }
  REQUIRE(cells.size() <= 14);
  S best(0);
  bool first = true;
  for (std::size_t mask = 0; mask < (1ull << cells.size()); ++mask) {
    auto mine = AdaptedStrategy<S>::never(m);
    for (std::size_t c = 0; c < cells.size(); ++c)
      if (mask & (1ull << c)) mine.at(cells[c].first, cells[c].second) = S(1);
    const auto& x = player == 1 ? mine : opponent;
    const auto& y = player == 1 ? opponent : mine;
    S total(0);
    for (const auto& row : segment_stats(m, r, x, y, t1, t2))
      total += row.prob * row.stats.rho[player - 1];
    if (first || total > best) best = total;
    first = false;
  }
  return best;
}

}  // namespace

TEST_CASE("dp returns the continuation outside the window") {
  auto m = deterministic_model<double>(4);
  auto r = constant_process(m, fixtures::payoffs<double>(1, 1, 1, 1, 1, 1), 1);
  auto t = StoppingTime::constant(1, 2);
  auto dp = best_response_dp(m, r, AdaptedStrategy<double>::never(m), 1, t, t, {0.25});
  REQUIRE(dp.value_at_start[0] == 0.25);
}

TEST_CASE("dp prefers never stopping on all-negative stops") {
  auto m = deterministic_model<double>(5);
  auto r = constant_process(m, fixtures::payoffs<double>(-0.5, 0, 0, -0.5, -1, -1), 2);
  auto dp = best_deviation(m, r, AdaptedStrategy<double>::never(m), 1);
  REQUIRE(dp.expected_value == 0.0);
  for (int n = 0; n < m.horizon(); ++n) REQUIRE(dp.strategy.at(n, 0) == 0.0);
}

TEST_CASE("dp against a sure punisher co-stops when both-stop pays best") {
  // opponent stops surely from stage 3 on with the punishment payoffs;
  // backward induction: alpha(3) = max(R12 = 0, R2-solo = -2) = 0 by
  // co-stopping, and continuing beats the -1 solo stop before stage 3
  auto m = deterministic_model<double>(5);
  auto r = constant_process(m, fixtures::payoffs<double>(-1, 2, -2, 1, 0, -3), 3);
  auto y = AdaptedStrategy<double>::never(m);
  for (int n = 3; n < 5; ++n) y.at(n, 0) = 1.0;
  auto dp = best_deviation(m, r, y, 1);
  REQUIRE(dp.expected_value == Catch::Approx(0.0));
  REQUIRE(dp.strategy.at(3, 0) == 1.0);
  for (int n = 0; n < 3; ++n) REQUIRE(dp.strategy.at(n, 0) == 0.0);
}

TEST_CASE("dp cannot co-stop profitably against a mixing punisher") {
  // with a long eps-punishment tail the best reply tops out at the co-stop
  // value eps * 0 + (1 - eps) * (-1) = -(1 - eps)
  auto m = deterministic_model<double>(30);
  auto r = constant_process(m, fixtures::payoffs<double>(-1, 2, -2, 1, 0, -3), 3);
  auto y = AdaptedStrategy<double>::never(m);
  for (int n = 8; n < 30; ++n) y.at(n, 0) = 0.1;
  auto dp = best_deviation(m, r, y, 1);
  REQUIRE(dp.expected_value == Catch::Approx(-0.9));
}

TEST_CASE("dp matches brute force over pure adapted deviations") {
  using R = Rational;
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    FiltrationSpec spec;
    spec.points = 5;
    spec.horizon = 3;
    spec.splits_per_stage = 1;
    auto m = generate_filtration_model<R>(spec, seed);
    auto r = generate_payoff_process(m, spec, seed + 3);
    auto opp = generate_adapted_strategy(m, seed + 7, 60);
    auto t1 = StoppingTime::constant(m.point_count(), 0);
    auto t2 = StoppingTime::constant(m.point_count(), m.horizon());
    for (int player : {1, 2}) {
      auto dp = best_response_dp(m, r, opp, player, t1, t2,
                                 std::vector<R>(m.point_count(), R(0)));
      R oracle = best_pure_deviation(m, r, opp, player, t1, t2);
      INFO("seed " << seed << " player " << player);
      REQUIRE(dp.expected_value == oracle);
    }
  }
}

TEST_CASE("segment conditions hold for planted segment equilibria") {
  auto m = deterministic_model<double>(8);
  // both-stop payoff sits at the peaks; solo stops pay the peak to the
  // stopper and nothing to the opponent
  auto pay = fixtures::payoffs<double>(0.5, 0, 0, 0.5, 0.5, 0.5);
  auto r = constant_process(m, pay, 2);
  double a[2] = {0.5, 0.5};
  double rbar[2] = {0.5, 0.5};
  double eps = 0.1;
  SegmentSchedule<double> sched;
  sched.times = {StoppingTime::constant(1, 0), StoppingTime::constant(1, 4),
                 StoppingTime::constant(1, 8)};
  for (int k = 0; k < 2; ++k) {
    auto prof = AdaptedProfile<double>::never(m);
    prof.p1.at(4 * k, 0) = 1.0;
    prof.p2.at(4 * k, 0) = 1.0;
    sched.profiles.push_back(prof);
  }
  auto rep = check_segment_conditions(m, r, sched, a, eps, rbar, 1);
  for (const auto& row : rep.rows) {
    INFO(row.name << " margin " << row.margin);
    REQUIRE(row.holds);
  }
  auto res = concat_equilibrium(m, r, sched, a, eps, rbar);
  REQUIRE(res.horizon_index == 1);
  REQUIRE(res.gains_ok);
  REQUIRE(res.gamma[0] == Catch::Approx(0.5));
  // both players are near their peaks, so the punishment tail is armed
  REQUIRE(res.y.at(6, 0) == Catch::Approx(eps));
}

TEST_CASE("a schedule that never stops fails the termination condition") {
  auto m = deterministic_model<double>(4);
  auto r = constant_process(m, fixtures::payoffs<double>(0.5, 0, 0, 0.5, 0.5, 0.5), 2);
  double a[2] = {0.5, 0.5};
  double rbar[2] = {0.5, 0.5};
  SegmentSchedule<double> sched;
  sched.times = {StoppingTime::constant(1, 0), StoppingTime::constant(1, 4)};
  sched.profiles.push_back(AdaptedProfile<double>::never(m));
  auto rep = check_segment_conditions(m, r, sched, a, 0.1, rbar, 1);
  REQUIRE_FALSE(rep.all_ok());
  bool termination_failed = false;
  for (const auto& row : rep.rows)
    if (!row.holds && row.name == "termination-mass") termination_failed = true;
  REQUIRE(termination_failed);
  REQUIRE_THROWS_AS(concat_equilibrium(m, r, sched, a, 0.1, rbar), std::invalid_argument);
}
