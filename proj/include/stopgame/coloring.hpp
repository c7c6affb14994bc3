#pragma once

// Tree coloring: run the accretion procedure once per bad rectangle of a
// covering, chaining the trims, then solve the final trimmed game for an
// eps/2-equilibrium.  The color of the tree is the good rectangle containing
// that equilibrium payoff, or "none" when the trims ate the whole tree.  The
// per-rectangle exit probabilities lambda_j feed the concatenation layer.

#include <optional>
#include <string>
#include <vector>

#include "stopgame/accretion.hpp"
#include "stopgame/covering.hpp"
#include "stopgame/equilibrium_search.hpp"
#include "stopgame/hash.hpp"
#include "stopgame/tree.hpp"

namespace stopgame {

enum class ColorKind {
  Empty,       // final trimmed game is trivial
  Good,        // a good rectangle contains the final equilibrium payoff
  Incomplete,  // search-resolution failure, never silently mapped to Empty
};

template <class S>
struct ColorResult {
  ColorKind kind = ColorKind::Incomplete;
  int good_index = -1;                  // valid when kind == Good
  std::vector<S> lambdas;               // one per bad rectangle, in order
  std::vector<std::optional<StationaryProfile<S>>> per_rect_profiles;  // on the input tree
  std::optional<StationaryProfile<S>> final_profile;                   // on the input tree
  std::optional<RoundStats<S>> final_stats;
  std::vector<GameTree<S>> trimmed_games;  // T = T(0) >= T(1) >= ... >= T(J)
  std::vector<AccretionCertificate<S>> certificates;
  std::string note;
  std::uint64_t tree_hash = 0;

  bool is_empty() const { return kind == ColorKind::Empty; }
  bool is_good() const { return kind == ColorKind::Good; }
};

struct ColoringConfig {
  AccretionConfig accretion;
  EqSearchConfig final_search;
};

template <class S>
ColorResult<S> color_tree(const GameTree<S>& t, const Covering<S>& cov, const S& eps,
                          const ColoringConfig& cfg = {}) {
  ColorResult<S> result;
  result.tree_hash = tree_hash(t);
  result.trimmed_games.push_back(t);
  GameTree<S> current = t;
  for (const auto& rect : cov.bad) {
    if (current.is_trivial()) {
      // nothing left to trim; remaining rounds are no-ops
      result.lambdas.push_back(S(0));
      result.per_rect_profiles.push_back(std::nullopt);
      result.trimmed_games.push_back(current);
      result.certificates.push_back({});
      continue;
    }
    auto acc = accrete_equilibria(current, rect, eps, cov.rbar, cfg.accretion);
    result.certificates.push_back(acc.certificate);
    GameTree<S> next = acc.d.empty() ? current : trim(current, acc.d);
    S lambda = leaf_passage_prob(t, next, current);
    result.lambdas.push_back(lambda);
    if (acc.d.empty())
      result.per_rect_profiles.push_back(std::nullopt);
    else
      result.per_rect_profiles.push_back(extend_by_zero(current, acc.profile, t));
    result.trimmed_games.push_back(next);
    current = next;
  }

  if (current.is_trivial()) {
    result.kind = ColorKind::Empty;
    return result;
  }
  auto search = find_stationary_equilibrium(current, eps / S(2), {}, cfg.final_search);
  if (!search.found) {
    result.kind = ColorKind::Incomplete;
    result.note = "no eps/2-equilibrium found in the final trimmed game: " + search.note;
    return result;
  }
  result.final_profile = extend_by_zero(current, search.profile, t);
  result.final_stats = search.stats;
  int good = first_good_rect(cov, search.stats.gamma[0], search.stats.gamma[1]);
  if (good < 0) {
    result.kind = ColorKind::Incomplete;
    result.note =
        "final equilibrium payoff lies in no good rectangle (a bad rectangle "
        "was not fully exhausted at this search resolution)";
    return result;
  }
  result.kind = ColorKind::Good;
  result.good_index = good;
  return result;
}

}  // namespace stopgame
