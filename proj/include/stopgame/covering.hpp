#pragma once

// Coverings of the payoff square [-1,1]^2 by eps-side rectangles, each one
// classifiable relative to the per-player solo-stop peaks (R1, R2):
//   bad:  both anchors at least R_i - eps (payoffs near both peaks);
//   good: anchored at least 2 eps below the peak for some player.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "stopgame/scalar.hpp"

namespace stopgame {

template <class S>
struct Rectangle {
  S a1{0};
  S a2{0};
  S side{0};

  bool contains(const S& g1, const S& g2) const {
    return approx_ge<S>(g1, a1) && approx_le<S>(g1, a1 + side) && approx_ge<S>(g2, a2) &&
           approx_le<S>(g2, a2 + side);
  }
};

template <class S>
struct Covering {
  S rbar[2]{S(0), S(0)};
  S eps{0};
  std::vector<Rectangle<S>> bad;   // ordered: processing order of the coloring
  std::vector<Rectangle<S>> good;
};

template <class S>
bool is_bad_rect(const Rectangle<S>& r, const S rbar[2], const S& eps) {
  return approx_ge<S>(r.a1, rbar[0] - eps) && approx_ge<S>(r.a2, rbar[1] - eps);
}

template <class S>
bool is_good_rect(const Rectangle<S>& r, const S rbar[2], const S& eps) {
  return approx_le<S>(r.a1 + eps, rbar[0] - eps) || approx_le<S>(r.a2 + eps, rbar[1] - eps);
}

// Tiles [-1,1]^2 with side-eps rectangles: the bad block is anchored at
// (R1-eps, R2-eps) and grows toward (1,1); the rest is tiled by rectangles
// anchored at least 2 eps below a peak, stepping away from it, so that every
// cell is classifiable by construction.  In the degenerate case R_i < -1+2eps
// anchors may fall below -1; the cells still cover their part of the square.
template <class S>
Covering<S> build_covering(const S& rbar1, const S& rbar2, const S& eps) {
  if (eps <= S(0)) throw std::invalid_argument("covering eps must be positive");
  if (rbar1 > S(1) || rbar1 < S(-1) || rbar2 > S(1) || rbar2 < S(-1))
    throw std::invalid_argument("peak payoffs must lie in [-1,1]");
  if (rbar1 <= S(0) && rbar2 <= S(0))
    throw std::invalid_argument("at least one peak payoff must be positive");
  Covering<S> cov;
  cov.rbar[0] = rbar1;
  cov.rbar[1] = rbar2;
  cov.eps = eps;

  auto ascending = [&](const S& from) {
    std::vector<S> out;
    for (S a = from; a < S(1); a += eps) out.push_back(a);
    if (out.empty()) out.push_back(from);
    return out;
  };
  auto descending = [&](const S& from) {
    std::vector<S> out;
    for (S a = from; a + eps > S(-1); a -= eps) out.push_back(a);
    return out;
  };

  // bad block, row-major over (y, x) anchors
  for (const S& ay : ascending(rbar2 - eps))
    for (const S& ax : ascending(rbar1 - eps))
      cov.bad.push_back({ax, ay, eps});

  // good by player 1: everything left of the bad block
  if (rbar1 - eps > S(-1))
    for (const S& ay : ascending(S(-1)))
      for (const S& ax : descending(rbar1 - S(2) * eps))
        cov.good.push_back({ax, ay, eps});

  // good by player 2: below the bad block, to its right
  {
    S x_from = rbar1 - eps > S(-1) ? rbar1 - eps : S(-1);
    for (const S& ay : descending(rbar2 - S(2) * eps))
      for (const S& ax : ascending(x_from))
        cov.good.push_back({ax, ay, eps});
  }

  for (const auto& r : cov.bad)
    if (!is_bad_rect(r, cov.rbar, eps))
      throw std::logic_error("covering construction produced a non-bad rectangle");
  for (const auto& r : cov.good)
    if (!is_good_rect(r, cov.rbar, eps))
      throw std::logic_error("covering construction produced a non-good rectangle");
  return cov;
}

// Index (into bad then good, in order) of every rectangle containing (g1,g2);
// bad rectangles get indices [0, bad.size()), good ones follow.
template <class S>
std::vector<std::size_t> covering_members(const Covering<S>& cov, const S& g1, const S& g2) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cov.bad.size(); ++i)
    if (cov.bad[i].contains(g1, g2)) out.push_back(i);
  for (std::size_t i = 0; i < cov.good.size(); ++i)
    if (cov.good[i].contains(g1, g2)) out.push_back(cov.bad.size() + i);
  return out;
}

// Lowest-index good rectangle containing the point, if any.
template <class S>
int first_good_rect(const Covering<S>& cov, const S& g1, const S& g2) {
  for (std::size_t i = 0; i < cov.good.size(); ++i)
    if (cov.good[i].contains(g1, g2)) return static_cast<int>(i);
  return -1;
}

}  // namespace stopgame
