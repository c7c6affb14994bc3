#pragma once

// Classification of sample points by their tail stopping prospects.  The
// per-player peak is the maximum solo payoff over a tail window, the finite
// surrogate of a limit superior: payoffs take finitely many values, so the
// peak recurs through the tail and the window max approximates it.  Classes:
//   BothNonpositive  both peaks <= 0: never stopping is already optimal;
//   P1SoloGenerous   player 1 attains their peak at stages that pay player 2
//                    at least player 2's peak;
//   P2SoloGenerous   the mirror image;
//   Contested        neither: peak attainment always penalizes the opponent.
// The normalization pass makes labels and peaks measurable at the window
// start, caps solo payoffs by the peaks from a chosen stage onward, and
// enforces the penalty shape on contested atoms, reporting the probability
// mass on which payoffs or labels were modified.

#include <string>
#include <vector>

#include "stopgame/filtration.hpp"

namespace stopgame {

enum class StopClass { BothNonpositive, P1SoloGenerous, P2SoloGenerous, Contested };

inline const char* stop_class_name(StopClass c) {
  switch (c) {
    case StopClass::BothNonpositive: return "both-nonpositive";
    case StopClass::P1SoloGenerous: return "p1-solo-generous";
    case StopClass::P2SoloGenerous: return "p2-solo-generous";
    default: return "contested";
  }
}

template <class S>
struct PointClass {
  StopClass label = StopClass::BothNonpositive;
  S peak[2]{S(0), S(0)};
  int qualifying[2]{0, 0};  // tail stages attaining each peak
  bool fragile = false;     // a peak recurs fewer than min_occurrences times
};

template <class S>
std::vector<PointClass<S>> classify(const FiltrationModel<S>& m, const PayoffProcess<S>& r,
                                    int tail_from, int min_occurrences = 3) {
  if (tail_from < 0 || tail_from >= m.horizon())
    throw std::invalid_argument("tail window must start inside [0, horizon)");
  std::vector<PointClass<S>> out(m.point_count());
  for (std::size_t w = 0; w < m.point_count(); ++w) {
    PointClass<S>& pc = out[w];
    for (int i = 0; i < 2; ++i) {
      StopSet solo = i == 0 ? StopSet::P1 : StopSet::P2;
      bool first = true;
      for (int n = tail_from; n < m.horizon(); ++n) {
        const S& v = r.at(n, m.atom_of(n, static_cast<int>(w)))(solo, i + 1);
        if (first || v > pc.peak[i]) pc.peak[i] = v;
        first = false;
      }
      for (int n = tail_from; n < m.horizon(); ++n)
        if (r.at(n, m.atom_of(n, static_cast<int>(w)))(solo, i + 1) == pc.peak[i])
          ++pc.qualifying[i];
      if (pc.qualifying[i] < min_occurrences) pc.fragile = true;
    }
    auto cross_peak = [&](int i) {
      // best payoff to the opponent over the player's peak-attaining stages
      StopSet solo = i == 0 ? StopSet::P1 : StopSet::P2;
      bool first = true;
      S best(0);
      for (int n = tail_from; n < m.horizon(); ++n) {
        const auto& pay = r.at(n, m.atom_of(n, static_cast<int>(w)));
        if (pay(solo, i + 1) != pc.peak[i]) continue;
        const S& v = pay(solo, 2 - i);
        if (first || v > best) best = v;
        first = false;
      }
      return best;
    };
    if (pc.peak[0] <= S(0) && pc.peak[1] <= S(0))
      pc.label = StopClass::BothNonpositive;
    else if (cross_peak(0) >= pc.peak[1])
      pc.label = StopClass::P1SoloGenerous;
    else if (cross_peak(1) >= pc.peak[0])
      pc.label = StopClass::P2SoloGenerous;
    else
      pc.label = StopClass::Contested;
  }
  return out;
}

template <class S>
struct NormalizedGame {
  PayoffProcess<S> process;            // modified copy of the input process
  std::vector<PointClass<S>> points;   // after the measurability override
  int tail_from = 0;
  int tau0 = 0;           // earliest stage with atom-constant labels and peaks
  S modified_measure{0};  // probability of points whose payoffs or labels changed
};

template <class S>
NormalizedGame<S> normalize(const FiltrationModel<S>& m, const PayoffProcess<S>& r, int tail_from,
                            int min_occurrences = 3) {
  NormalizedGame<S> out;
  out.process = r;
  out.tail_from = tail_from;
  out.points = classify(m, r, tail_from, min_occurrences);
  std::vector<char> touched(m.point_count(), 0);

  // make labels and peaks measurable at the window start: the heaviest point
  // of each atom is the representative
  for (std::size_t a = 0; a < m.atom_count(tail_from); ++a) {
    const auto& pts = m.atom_points(tail_from, static_cast<int>(a));
    int rep = pts[0];
    for (int w : pts)
      if (m.point_prob(w) > m.point_prob(rep)) rep = w;
    for (int w : pts) {
      auto& pc = out.points[static_cast<std::size_t>(w)];
      const auto& rc = out.points[static_cast<std::size_t>(rep)];
      if (pc.label != rc.label || pc.peak[0] != rc.peak[0] || pc.peak[1] != rc.peak[1]) {
        pc = rc;
        touched[static_cast<std::size_t>(w)] = 1;
      }
    }
  }

  // earliest stage at which every atom has constant (label, peaks)
  out.tau0 = tail_from;
  for (int n = 0; n <= tail_from; ++n) {
    bool constant = true;
    for (std::size_t a = 0; a < m.atom_count(n) && constant; ++a) {
      const auto& pts = m.atom_points(n, static_cast<int>(a));
      for (int w : pts) {
        const auto& pc = out.points[static_cast<std::size_t>(w)];
        const auto& p0 = out.points[static_cast<std::size_t>(pts[0])];
        if (pc.label != p0.label || pc.peak[0] != p0.peak[0] || pc.peak[1] != p0.peak[1]) {
          constant = false;
          break;
        }
      }
    }
    if (constant) {
      out.tau0 = n;
      break;
    }
  }

  // cap solo payoffs by the peaks from tau0 onward, and enforce the penalty
  // shape on contested atoms (a peak-attaining stage must pay the opponent
  // strictly below the opponent's peak)
  const S step = scalar_traits<S>::from_fraction(1, r.granularity);
  for (int n = out.tau0; n < m.horizon(); ++n) {
    for (std::size_t a = 0; a < m.atom_count(n); ++a) {
      const auto& pts = m.atom_points(n, static_cast<int>(a));
      const auto& pc = out.points[static_cast<std::size_t>(pts[0])];
      auto& pay = out.process.at(n, static_cast<int>(a));
      bool changed = false;
      for (int i = 0; i < 2; ++i) {
        StopSet solo = i == 0 ? StopSet::P1 : StopSet::P2;
        if (pay(solo, i + 1) > pc.peak[i]) {
          pay(solo, i + 1) = pc.peak[i];
          changed = true;
        }
        if (pc.label == StopClass::Contested && pay(solo, i + 1) == pc.peak[i] &&
            pay(solo, 2 - i) >= pc.peak[1 - i]) {
          pay(solo, 2 - i) = pc.peak[1 - i] - step;
          changed = true;
        }
      }
      if (changed)
        for (int w : pts) touched[static_cast<std::size_t>(w)] = 1;
    }
  }

  for (std::size_t w = 0; w < m.point_count(); ++w)
    if (touched[w]) out.modified_measure += m.point_prob(static_cast<int>(w));
  return out;
}

}  // namespace stopgame
