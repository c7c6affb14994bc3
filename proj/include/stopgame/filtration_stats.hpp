#pragma once

// Payoffs and segment statistics of behavior strategies on filtration models:
// the full-game expected payoff (expectation over sample points and stop
// lotteries) and the conditional one-segment statistics between two stopping
// times, per atom of the information available at the segment start.

#include <vector>

#include "stopgame/filtration.hpp"
#include "stopgame/tree_stats.hpp"

namespace stopgame {

// Expected payoff pair of (x, y) over stages [0, horizon); a play that never
// stops contributes 0.
template <class S>
std::pair<S, S> game_payoff(const FiltrationModel<S>& m, const PayoffProcess<S>& r,
                            const AdaptedStrategy<S>& x, const AdaptedStrategy<S>& y) {
  require_strategy_shape(m, x);
  require_strategy_shape(m, y);
  S total1(0), total2(0);
  for (std::size_t w = 0; w < m.point_count(); ++w) {
    S alive(1);
    for (int n = 0; n < m.horizon(); ++n) {
      int a = m.atom_of(n, static_cast<int>(w));
      const S& px = x.at(n, a);
      const S& py = y.at(n, a);
      const auto& pay = r.at(n, a);
      S w1 = px * (S(1) - py) * pay(StopSet::P1, 1) + (S(1) - px) * py * pay(StopSet::P2, 1) +
             px * py * pay(StopSet::Both, 1);
      S w2 = px * (S(1) - py) * pay(StopSet::P1, 2) + (S(1) - px) * py * pay(StopSet::P2, 2) +
             px * py * pay(StopSet::Both, 2);
      total1 += m.point_prob(static_cast<int>(w)) * alive * w1;
      total2 += m.point_prob(static_cast<int>(w)) * alive * w2;
      alive *= (S(1) - px) * (S(1) - py);
    }
  }
  return {total1, total2};
}

// One atom of the information at a stopping time: the stage the time takes on
// the atom and the atom's index in that stage's partition.
struct TimeAtom {
  int stage;
  int atom;
  friend bool operator==(const TimeAtom& a, const TimeAtom& b) {
    return a.stage == b.stage && a.atom == b.atom;
  }
  friend bool operator<(const TimeAtom& a, const TimeAtom& b) {
    return a.stage != b.stage ? a.stage < b.stage : a.atom < b.atom;
  }
};

template <class S>
std::vector<TimeAtom> atoms_at(const FiltrationModel<S>& m, const StoppingTime& t) {
  std::set<TimeAtom> out;
  for (std::size_t w = 0; w < m.point_count(); ++w) {
    int n = t.at(static_cast<int>(w));
    out.insert({n, m.atom_of(n, static_cast<int>(w))});
  }
  return std::vector<TimeAtom>(out.begin(), out.end());
}

template <class S>
struct SegmentAtomStats {
  TimeAtom where;
  S prob{0};  // probability of the atom
  RoundStats<S> stats;
};

// Conditional termination probability, payoff and their ratio for the
// segment [t1, t2), per atom of the partition at t1.  Strategies are read on
// [t1, t2) only.
template <class S>
std::vector<SegmentAtomStats<S>> segment_stats(const FiltrationModel<S>& m,
                                               const PayoffProcess<S>& r,
                                               const AdaptedStrategy<S>& x,
                                               const AdaptedStrategy<S>& y,
                                               const StoppingTime& t1, const StoppingTime& t2) {
  require_adapted(m, t1, "segment start");
  require_adapted(m, t2, "segment end");
  if (!pointwise_leq(t1, t2))
    throw std::invalid_argument("segment start must not exceed segment end");
  require_strategy_shape(m, x);
  require_strategy_shape(m, y);
  std::vector<SegmentAtomStats<S>> out;
  for (const TimeAtom& ta : atoms_at(m, t1)) {
    SegmentAtomStats<S> row;
    row.where = ta;
    S mass(0);
    S rho1(0), rho2(0), pi(0);
    for (int w : m.atom_points(ta.stage, ta.atom)) {
      if (t1.at(w) != ta.stage) continue;  // the atom belongs to a later start elsewhere
      mass += m.point_prob(w);
      S alive(1);
      for (int n = ta.stage; n < t2.at(w) && n < m.horizon(); ++n) {
        int a = m.atom_of(n, w);
        const S& px = x.at(n, a);
        const S& py = y.at(n, a);
        const auto& pay = r.at(n, a);
        S stop_mass = px * (S(1) - py) + (S(1) - px) * py + px * py;
        S w1 = px * (S(1) - py) * pay(StopSet::P1, 1) + (S(1) - px) * py * pay(StopSet::P2, 1) +
               px * py * pay(StopSet::Both, 1);
        S w2 = px * (S(1) - py) * pay(StopSet::P1, 2) + (S(1) - px) * py * pay(StopSet::P2, 2) +
               px * py * pay(StopSet::Both, 2);
        pi += m.point_prob(w) * alive * stop_mass;
        rho1 += m.point_prob(w) * alive * w1;
        rho2 += m.point_prob(w) * alive * w2;
        alive *= (S(1) - px) * (S(1) - py);
      }
    }
    row.prob = mass;
    if (mass != S(0)) {
      row.stats.pi = pi / mass;
      row.stats.rho[0] = rho1 / mass;
      row.stats.rho[1] = rho2 / mass;
      if (row.stats.pi != S(0)) {
        row.stats.gamma[0] = row.stats.rho[0] / row.stats.pi;
        row.stats.gamma[1] = row.stats.rho[1] / row.stats.pi;
      }
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace stopgame
