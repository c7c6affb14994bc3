#pragma once

// Concatenation of per-segment profiles along an increasing sequence of
// stopping times.  The segment conditions certify, per segment and atom:
//   payoff floor    rho_i >= (a_i - eps) pi - Delta          (against a)
//   deviation caps  sup_dev [rho_i - (a_i + eps) pi] <= Delta
// and, truncated at a horizon index L:
//   termination     P(theta < tau_L) >= 1 - eps under the concatenation
//   punish masses   the same for (0, y) / (x, 0) when a_i sits below the
//                   corresponding peak by more than eps.
// When they hold, the concatenation plus an eps-probability punishment tail
// after tau_L is an 8 eps-equilibrium of the segment game.

#include <optional>
#include <string>
#include <vector>

#include "stopgame/dp.hpp"
#include "stopgame/filtration.hpp"
#include "stopgame/filtration_stats.hpp"

namespace stopgame {

template <class S>
struct SegmentSchedule {
  std::vector<StoppingTime> times;          // strictly increasing
  std::vector<AdaptedProfile<S>> profiles;  // profiles[k] plays on [times[k], times[k+1])
};

template <class S>
void validate_schedule(const FiltrationModel<S>& m, const SegmentSchedule<S>& sched) {
  if (sched.times.size() < 2) throw std::invalid_argument("schedule needs at least two times");
  if (sched.profiles.size() + 1 != sched.times.size())
    throw std::invalid_argument("schedule needs one profile per consecutive window");
  for (std::size_t k = 0; k < sched.times.size(); ++k)
    require_adapted(m, sched.times[k], "schedule time " + std::to_string(k));
  for (std::size_t k = 0; k + 1 < sched.times.size(); ++k)
    if (!strictly_before(sched.times[k], sched.times[k + 1]))
      throw std::invalid_argument("schedule times must increase strictly pointwise");
  for (const auto& p : sched.profiles) {
    require_strategy_shape(m, p.p1);
    require_strategy_shape(m, p.p2);
  }
}

// Stitch the first `upto` segment profiles into one profile on
// [times[0], times[upto]); zero elsewhere.
template <class S>
AdaptedProfile<S> concat_profiles(const FiltrationModel<S>& m, const SegmentSchedule<S>& sched,
                                  std::size_t upto) {
  AdaptedProfile<S> out = AdaptedProfile<S>::never(m);
  for (int n = 0; n < m.horizon(); ++n)
    for (std::size_t a = 0; a < m.atom_count(n); ++a) {
      int w0 = m.atom_points(n, static_cast<int>(a))[0];
      for (std::size_t k = 0; k < upto && k < sched.profiles.size(); ++k) {
        if (sched.times[k].at(w0) <= n && n < sched.times[k + 1].at(w0)) {
          out.p1.at(n, static_cast<int>(a)) = sched.profiles[k].p1.at(n, static_cast<int>(a));
          out.p2.at(n, static_cast<int>(a)) = sched.profiles[k].p2.at(n, static_cast<int>(a));
          break;
        }
      }
    }
  return out;
}

// P(no stop in [times[0], times[L]) ) under the profile.
template <class S>
S no_stop_probability(const FiltrationModel<S>& m, const AdaptedProfile<S>& prof,
                      const StoppingTime& from, const StoppingTime& to) {
  S total(0);
  for (std::size_t w = 0; w < m.point_count(); ++w) {
    S alive(1);
    for (int n = from.at(static_cast<int>(w));
         n < to.at(static_cast<int>(w)) && n < m.horizon(); ++n) {
      int a = m.atom_of(n, static_cast<int>(w));
      alive *= (S(1) - prof.p1.at(n, a)) * (S(1) - prof.p2.at(n, a));
    }
    total += m.point_prob(static_cast<int>(w)) * alive;
  }
  return total;
}

template <class S>
struct ConditionRow {
  std::string name;
  int segment = -1;
  TimeAtom where{-1, -1};
  S margin{0};  // nonnegative iff the condition holds
  bool holds = false;
};

template <class S>
struct SegmentConditionsReport {
  std::vector<ConditionRow<S>> rows;
  std::size_t horizon_index = 0;  // the L used for the truncated conditions
  bool all_ok() const {
    for (const auto& r : rows)
      if (!r.holds) return false;
    return true;
  }
  std::vector<std::string> failures() const {
    std::vector<std::string> out;
    for (const auto& r : rows)
      if (!r.holds) out.push_back(r.name);
    return out;
  }
};

template <class S>
SegmentConditionsReport<S> check_segment_conditions(
    const FiltrationModel<S>& m, const PayoffProcess<S>& r, const SegmentSchedule<S>& sched,
    const S a[2], const S& eps, const S rbar[2], std::size_t horizon_index) {
  validate_schedule(m, sched);
  if (horizon_index == 0 || horizon_index >= sched.times.size())
    throw std::invalid_argument("horizon index must point inside the schedule");
  SegmentConditionsReport<S> rep;
  rep.horizon_index = horizon_index;

  auto delta_at_stage = [&eps](int stage) {
    S d = eps * eps;
    for (int i = 0; i < stage + 1; ++i) d = d / S(2);
    return d;
  };

  for (std::size_t k = 0; k < sched.profiles.size(); ++k) {
    const auto& t1 = sched.times[k];
    const auto& t2 = sched.times[k + 1];
    const auto& prof = sched.profiles[k];
    auto rows = segment_stats(m, r, prof.p1, prof.p2, t1, t2);
    for (const auto& row : rows) {
      S delta = delta_at_stage(row.where.stage);
      for (int i = 0; i < 2; ++i) {
        S margin = row.stats.rho[i] - ((a[i] - eps) * row.stats.pi - delta);
        rep.rows.push_back({"payoff-floor p" + std::to_string(i + 1) + " segment " +
                                std::to_string(k),
                            static_cast<int>(k), row.where, margin,
                            approx_ge<S>(margin, S(0))});
      }
    }
    // deviation caps via the shifted-payoff recursion, one player at a time
    for (int player = 1; player <= 2; ++player) {
      const auto& opp = player == 1 ? prof.p2 : prof.p1;
      S cap = a[player - 1] + eps;
      auto shifted = [&r, cap, player](int stage, int atom, StopSet q) {
        return r.at(stage, atom)(q, player) - cap;
      };
      auto dp = best_response_dp<S>(m, OwnPayoff<S>(shifted), opp, player, t1, t2,
                                    std::vector<S>(m.point_count(), S(0)));
      for (const auto& ta : atoms_at(m, t1)) {
        int w0 = m.atom_points(ta.stage, ta.atom)[0];
        S margin = delta_at_stage(ta.stage) - dp.value_at_start[static_cast<std::size_t>(w0)];
        rep.rows.push_back({"deviation-cap p" + std::to_string(player) + " segment " +
                                std::to_string(k),
                            static_cast<int>(k), ta, margin, approx_ge<S>(margin, S(0))});
      }
    }
  }

  // truncated termination and punishment masses at the horizon index
  auto concat = concat_profiles(m, sched, horizon_index);
  const auto& t0 = sched.times.front();
  const auto& tL = sched.times[horizon_index];
  {
    S no_stop = no_stop_probability(m, concat, t0, tL);
    S margin = eps - no_stop;
    rep.rows.push_back({"termination-mass", -1, {-1, -1}, margin, approx_ge<S>(margin, S(0))});
  }
  if (a[0] < rbar[0] - eps) {
    AdaptedProfile<S> solo{AdaptedStrategy<S>::never(m), concat.p2};
    S margin = eps - no_stop_probability(m, solo, t0, tL);
    rep.rows.push_back(
        {"punish-mass against p1", -1, {-1, -1}, margin, approx_ge<S>(margin, S(0))});
  }
  if (a[1] < rbar[1] - eps) {
    AdaptedProfile<S> solo{concat.p1, AdaptedStrategy<S>::never(m)};
    S margin = eps - no_stop_probability(m, solo, t0, tL);
    rep.rows.push_back(
        {"punish-mass against p2", -1, {-1, -1}, margin, approx_ge<S>(margin, S(0))});
  }
  return rep;
}

template <class S>
struct ConcatResult {
  AdaptedStrategy<S> x;
  AdaptedStrategy<S> y;
  std::size_t horizon_index = 0;
  S gamma[2]{S(0), S(0)};
  S deviation_value[2]{S(0), S(0)};
  S gain[2]{S(0), S(0)};
  bool gains_ok = false;  // both gains <= 8 eps
  SegmentConditionsReport<S> conditions;
};

// Concatenate the segment profiles and append the punishment tail: after
// tau_L a player whose opponent sits within eps of their own peak stops with
// probability eps exactly at the stages where their solo payoff attains the
// peak.  Certifies the deviation gains of the result over the full horizon.
template <class S>
ConcatResult<S> concat_equilibrium(const FiltrationModel<S>& m, const PayoffProcess<S>& r,
                                   const SegmentSchedule<S>& sched, const S a[2], const S& eps,
                                   const S rbar[2]) {
  validate_schedule(m, sched);
  // smallest L whose truncated conditions pass; the last index otherwise
  std::size_t L = sched.times.size() - 1;
  SegmentConditionsReport<S> chosen;
  bool found = false;
  for (std::size_t cand = 1; cand < sched.times.size(); ++cand) {
    auto rep = check_segment_conditions(m, r, sched, a, eps, rbar, cand);
    if (rep.all_ok()) {
      L = cand;
      chosen = rep;
      found = true;
      break;
    }
    if (cand == sched.times.size() - 1 && !found) chosen = rep;
  }
  if (!found)
    throw std::invalid_argument("segment conditions fail at every horizon index: " +
                                (chosen.failures().empty() ? std::string("empty schedule")
                                                           : chosen.failures().front()));

  ConcatResult<S> out;
  out.horizon_index = L;
  out.conditions = chosen;
  auto concat_all = concat_profiles(m, sched, sched.profiles.size());
  out.x = concat_all.p1;
  out.y = concat_all.p2;
  const auto& tL = sched.times[L];
  for (int player = 1; player <= 2; ++player) {
    // the punisher of `player` is the opponent
    if (!(a[player - 1] >= rbar[player - 1] - eps)) continue;
    int punisher = 3 - player;
    StopSet solo = punisher == 1 ? StopSet::P1 : StopSet::P2;
    auto& strat = punisher == 1 ? out.x : out.y;
    for (int n = 0; n < m.horizon(); ++n)
      for (std::size_t atom = 0; atom < m.atom_count(n); ++atom) {
        int w0 = m.atom_points(n, static_cast<int>(atom))[0];
        if (n < tL.at(w0)) continue;
        strat.at(n, static_cast<int>(atom)) =
            r.at(n, static_cast<int>(atom))(solo, punisher) == rbar[punisher - 1] ? eps : S(0);
      }
  }

  auto [g1, g2] = game_payoff(m, r, out.x, out.y);
  out.gamma[0] = g1;
  out.gamma[1] = g2;
  out.deviation_value[0] = best_deviation(m, r, out.y, 1).expected_value;
  out.deviation_value[1] = best_deviation(m, r, out.x, 2).expected_value;
  out.gain[0] = out.deviation_value[0] - out.gamma[0];
  out.gain[1] = out.deviation_value[1] - out.gamma[1];
  out.gains_ok =
      approx_le<S>(out.gain[0], S(8) * eps) && approx_le<S>(out.gain[1], S(8) * eps);
  return out;
}

}  // namespace stopgame
