#pragma once

// Backward-induction best response on a filtration segment: against a fixed
// opponent behavior strategy, the deviator's optimal value from stage k
// satisfies
//   alpha(k) = continuation                        for k >= segment end,
//   alpha(k) = max( not stopping, stopping now )   otherwise,
// where "not stopping" collects the opponent's stage-k stop mass and the
// conditional expectation of alpha(k+1), and "stopping now" collects the
// simultaneous- and solo-stop payoffs.  Ties prefer continuing.

#include <functional>
#include <vector>

#include "stopgame/filtration.hpp"
#include "stopgame/filtration_stats.hpp"

namespace stopgame {

template <class S>
struct DpResult {
  std::vector<S> value_at_start;   // per sample point, alpha(t1(w), w)
  S expected_value{0};             // sum over points of prob * value_at_start
  AdaptedStrategy<S> strategy;     // pure argmax, meaningful on [t1, t2)
};

// own-payoff provider: (stage, atom, own-stop-set) -> payoff to the deviator.
// Passing a provider rather than a PayoffProcess lets audits shift payoffs by
// a per-atom constant without copying tables.
template <class S>
using OwnPayoff = std::function<S(int stage, int atom, StopSet q)>;

template <class S>
OwnPayoff<S> payoffs_of(const PayoffProcess<S>& r, int player) {
  return [&r, player](int stage, int atom, StopSet q) { return r.at(stage, atom)(q, player); };
}

template <class S>
DpResult<S> best_response_dp(const FiltrationModel<S>& m, const OwnPayoff<S>& pay,
                             const AdaptedStrategy<S>& opponent, int player,
                             const StoppingTime& t1, const StoppingTime& t2,
                             const std::vector<S>& continuation) {
  require_adapted(m, t1, "segment start");
  require_adapted(m, t2, "segment end");
  if (!pointwise_leq(t1, t2))
    throw std::invalid_argument("segment start must not exceed segment end");
  require_strategy_shape(m, opponent);
  if (continuation.size() != m.point_count())
    throw std::invalid_argument("continuation must give one value per sample point");

  DpResult<S> out;
  out.strategy = AdaptedStrategy<S>::never(m);
  std::vector<S> alpha = continuation;  // alpha(k+1) during the sweep
  StopSet own_solo = player == 1 ? StopSet::P1 : StopSet::P2;
  StopSet other_solo = player == 1 ? StopSet::P2 : StopSet::P1;

  for (int k = m.horizon() - 1; k >= 0; --k) {
    std::vector<S> next = alpha;
    for (std::size_t a = 0; a < m.atom_count(k); ++a) {
      const auto& pts = m.atom_points(k, static_cast<int>(a));
      bool inside = false;
      for (int w : pts)
        if (t1.at(w) <= k && k < t2.at(w)) inside = true;
      if (!inside) continue;
      S cond(0), mass(0);
      for (int w : pts) {
        cond += m.point_prob(w) * alpha[static_cast<std::size_t>(w)];
        mass += m.point_prob(w);
      }
      cond = cond / mass;  // E[alpha(k+1) | F_k] on this atom
      const S& o = opponent.at(k, static_cast<int>(a));
      S stay = o * pay(k, static_cast<int>(a), other_solo) + (S(1) - o) * cond;
      S go = o * pay(k, static_cast<int>(a), StopSet::Both) +
             (S(1) - o) * pay(k, static_cast<int>(a), own_solo);
      S best = stay;
      if (go > stay) {
        best = go;
        out.strategy.at(k, static_cast<int>(a)) = S(1);
      }
      for (int w : pts) next[static_cast<std::size_t>(w)] = best;
    }
    alpha = std::move(next);
  }
  out.value_at_start = alpha;
  for (std::size_t w = 0; w < m.point_count(); ++w)
    out.expected_value += m.point_prob(static_cast<int>(w)) * alpha[w];
  return out;
}

template <class S>
DpResult<S> best_response_dp(const FiltrationModel<S>& m, const PayoffProcess<S>& r,
                             const AdaptedStrategy<S>& opponent, int player,
                             const StoppingTime& t1, const StoppingTime& t2,
                             const std::vector<S>& continuation) {
  return best_response_dp(m, payoffs_of(r, player), opponent, player, t1, t2, continuation);
}

// Full-window deviation value with zero continuation: the best any adapted
// behavior deviation can earn against the opponent from stage 0.
template <class S>
DpResult<S> best_deviation(const FiltrationModel<S>& m, const PayoffProcess<S>& r,
                           const AdaptedStrategy<S>& opponent, int player) {
  StoppingTime from = StoppingTime::constant(m.point_count(), 0);
  StoppingTime to = StoppingTime::constant(m.point_count(), m.horizon());
  return best_response_dp(m, r, opponent, player, from, to,
                          std::vector<S>(m.point_count(), S(0)));
}

}  // namespace stopgame
