#pragma once

// Equilibrium accretion: repeatedly find a stationary eps-equilibrium with
// payoff inside a given bad rectangle in some subgame of the current trimmed
// tree, union it into the running profile, recompute the eps^2-heavy set and
// trim there.  When the search exhausts, the heavy set D and the union
// profile certify: either D is empty, or the profile has payoff near the
// rectangle anchors, terminates with probability at least eps^2 * p_D, and
// neither player's best response exceeds the anchor by more than 8 eps.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stopgame/best_response.hpp"
#include "stopgame/covering.hpp"
#include "stopgame/equilibrium_search.hpp"
#include "stopgame/heavy.hpp"
#include "stopgame/tree.hpp"
#include "stopgame/tree_stats.hpp"

namespace stopgame {

struct AccretionConfig {
  AccretionConfig() {
    // accretion fires many searches, most of which must fail fast
    search.exhaustive_budget = 20000;
    search.dynamics_starts = 4;
    search.dynamics_iters = 12;
    search.pure_pair_cap = 64;
  }
  EqSearchConfig search;
  std::size_t subgame_budget = 16;  // subgames scanned per search round
  std::size_t max_rounds = 64;
};

template <class S>
struct AccretionCertificate {
  bool d_empty = true;
  bool payoff_floor_ok = true;       // gamma_i >= a_i - eps when D nonempty
  bool termination_mass_ok = true;   // pi >= eps^2 * p_D when D nonempty
  bool deviation_cap_ok = true;      // best-response values <= a_i + 8 eps
  S gamma[2]{S(0), S(0)};
  S pi{0};
  S p_d{0};
  S br_value[2]{S(0), S(0)};
  std::size_t rounds = 0;
  std::string search_note;  // how the final exhaustion was certified
  bool ok() const {
    return payoff_floor_ok && termination_mass_ok && deviation_cap_ok;
  }
};

template <class S>
struct AccretionResult {
  std::set<int> d;                       // node indexes in the input tree
  StationaryProfile<S> profile;          // union of all accreted equilibria
  std::vector<StationaryProfile<S>> parts;
  AccretionCertificate<S> certificate;
};

namespace detail {

// Deterministic list of candidate subgames of `base`, largest first: the tree
// itself, then single-node trims, then whole-depth trims.
template <class S>
std::vector<GameTree<S>> candidate_subgames(const GameTree<S>& base, std::size_t budget) {
  std::vector<GameTree<S>> out;
  std::set<std::set<std::string>> seen;
  auto push = [&](GameTree<S> g) {
    if (out.size() >= budget || g.is_trivial()) return;
    std::set<std::string> key;
    for (std::size_t i = 0; i < g.node_count(); ++i) key.insert(g.node(static_cast<int>(i)).id);
    if (seen.insert(std::move(key)).second) out.push_back(std::move(g));
  };
  push(base);
  // deeper trims remove less, so they come first (decreasing subgame size)
  std::vector<int> by_size = base.internal_nodes();
  std::sort(by_size.begin(), by_size.end(), [&](int a, int b) {
    return base.depth(a) != base.depth(b) ? base.depth(a) > base.depth(b)
                                          : base.node(a).id < base.node(b).id;
  });
  for (int v : by_size) {
    if (v == base.root()) continue;
    push(trim(base, std::set<int>{v}));
  }
  int max_depth = 0;
  for (int v : base.internal_nodes()) max_depth = std::max(max_depth, base.depth(v));
  for (int d = max_depth; d >= 1; --d) {
    std::set<int> cut;
    for (int v : base.internal_nodes())
      if (base.depth(v) == d) cut.insert(v);
    if (!cut.empty()) push(trim(base, cut));
  }
  return out;
}

}  // namespace detail

template <class S>
AccretionResult<S> accrete_equilibria(const GameTree<S>& t, const Rectangle<S>& rect, const S& eps,
                                      const S rbar[2], const AccretionConfig& cfg = {}) {
  {
    S cap = S(1) / (S(36) * scalar_traits<S>::from_int(t.granularity() * t.granularity()));
    if (eps <= S(0) || eps >= cap)
      throw std::invalid_argument("accretion requires 0 < eps < 1/(36 K^2)");
    if (!is_bad_rect(rect, rbar, eps))
      throw std::invalid_argument("accretion rectangle is not bad for the given peaks");
  }
  AccretionResult<S> result;
  result.profile = StationaryProfile<S>::never(t);

  GameTree<S> current = t;  // the trimmed game T_{H_k}
  std::set<int> heavy_now;
  while (result.certificate.rounds < cfg.max_rounds) {
    bool found = false;
    if (!current.is_trivial()) {
      for (auto& sub : detail::candidate_subgames(current, cfg.subgame_budget)) {
        auto search = find_stationary_equilibrium(sub, eps, std::optional<Rectangle<S>>(rect),
                                                  cfg.search);
        if (!search.found) continue;
        auto part = extend_by_zero(sub, search.profile, t);
        result.parts.push_back(part);
        result.profile = profile_union(t, {result.profile, part});
        found = true;
        break;
      }
    }
    if (!found) {
      result.certificate.search_note =
          current.is_trivial()
              ? "trimmed game is trivial"
              : "no eps-equilibrium with payoff in the rectangle found in any scanned subgame";
      break;
    }
    ++result.certificate.rounds;
    auto heavy = heavy_nodes(t, result.profile, S(eps * eps)).nodes;
    if (heavy == heavy_now) {
      // each accepted equilibrium must contribute a new heavy node; a
      // stalled set would loop forever
      result.certificate.search_note = "heavy set stalled before search exhaustion";
      break;
    }
    heavy_now = std::move(heavy);
    current = trim(t, heavy_now);
  }

  result.d = heavy_now;
  auto& cert = result.certificate;
  cert.d_empty = result.d.empty();
  auto stats = round_stats(t, result.profile);
  cert.gamma[0] = stats.gamma[0];
  cert.gamma[1] = stats.gamma[1];
  cert.pi = stats.pi;
  cert.p_d = branch_prob(t, result.d);
  cert.br_value[0] = best_response(t, result.profile.p2, 1).value;
  cert.br_value[1] = best_response(t, result.profile.p1, 2).value;
  if (!cert.d_empty) {
    cert.payoff_floor_ok = approx_ge<S>(cert.gamma[0], rect.a1 - eps) &&
                           approx_ge<S>(cert.gamma[1], rect.a2 - eps);
    cert.termination_mass_ok = approx_ge<S>(cert.pi, eps * eps * cert.p_d);
    cert.deviation_cap_ok = approx_le<S>(cert.br_value[0], rect.a1 + S(8) * eps) &&
                            approx_le<S>(cert.br_value[1], rect.a2 + S(8) * eps);
  }
  return result;
}

}  // namespace stopgame
