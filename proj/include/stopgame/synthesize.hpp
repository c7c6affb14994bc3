#pragma once

// End-to-end equilibrium synthesis on a finite filtration model.
//
// After normalization, every atom at the classification stage falls into one
// of the stopping classes and gets its own construction:
//   both-nonpositive   nobody ever stops;
//   solo-generous      the favored player drips eps-probability stops on the
//                      stages that attain their peak and please the opponent,
//                      with an eps punishment phase when the payoff is
//                      negative;
//   contested          color the segment trees of a stopping-time chain, then
//                      either chain bad-rectangle equilibria (when their exit
//                      mass accumulates) or good-rectangle equilibria with the
//                      punishment masses supplied by the low-payoff bound.
// Before the classification stage the players follow an exact backward
// induction equilibrium of the finite-stage game with the constructed
// continuation payoffs.  The certificate reports the audited deviation gains
// against the composed bound 24 eps.

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stopgame/approximation.hpp"
#include "stopgame/classify.hpp"
#include "stopgame/coloring.hpp"
#include "stopgame/dp.hpp"
#include "stopgame/filtration_stats.hpp"
#include "stopgame/ramsey.hpp"
#include "stopgame/schedule.hpp"

namespace stopgame {

template <class S>
struct SynthesisConfig {
  int tail_from = -1;       // default: horizon / 2
  int min_occurrences = 3;
  S lambda_threshold = scalar_traits<S>::from_fraction(1, 2);
  RamseyConfig ramsey;
  ColoringConfig coloring;
};

struct AtomTrace {
  int stage = 0;
  int atom = 0;
  StopClass label = StopClass::BothNonpositive;
  std::string case_name;
  bool search_failure = false;
  std::string note;
};

template <class S>
struct SynthesisResult {
  AdaptedStrategy<S> x;
  AdaptedStrategy<S> y;
  S gamma[2]{S(0), S(0)};
  S deviation_value[2]{S(0), S(0)};
  S gain[2]{S(0), S(0)};
  S gain_bound{0};  // 24 eps
  bool gains_ok = false;
  bool complete = true;  // no sub-search failures
  int tau0 = 0;
  S modified_measure{0};
  std::vector<AtomTrace> traces;
};

namespace detail {

// The game restricted to one classification atom, re-based at stage 0.
template <class S>
struct SubGame {
  FiltrationModel<S> model;
  PayoffProcess<S> process;
  std::vector<int> points;  // original ids per sub id
  int from_stage = 0;
};

template <class S>
SubGame<S> restrict_game(const FiltrationModel<S>& m, const PayoffProcess<S>& r,
                         const std::vector<int>& points, int from_stage) {
  SubGame<S> sub;
  sub.points = points;
  sub.from_stage = from_stage;
  std::map<int, int> sub_id;
  for (std::size_t i = 0; i < points.size(); ++i) sub_id[points[i]] = static_cast<int>(i);
  S mass(0);
  for (int w : points) mass += m.point_prob(w);
  std::vector<S> prob;
  for (int w : points) prob.push_back(m.point_prob(w) / mass);
  int horizon = m.horizon() - from_stage;
  std::vector<std::vector<std::vector<int>>> parts;
  std::vector<std::vector<Payoffs<S>>> values;
  for (int n = 0; n <= horizon; ++n) {
    std::map<int, std::vector<int>> groups;
    for (int w : points) groups[m.atom_of(from_stage + n, w)].push_back(sub_id.at(w));
    std::vector<std::vector<int>> level;
    std::vector<Payoffs<S>> pay;
    for (auto& [orig_atom, pts] : groups) {
      level.push_back(pts);
      if (n < horizon) pay.push_back(r.at(from_stage + n, orig_atom));
    }
    parts.push_back(level);
    if (n < horizon) values.push_back(pay);
  }
  sub.model = FiltrationModel<S>(prob, horizon, parts);
  sub.process.granularity = r.granularity;
  sub.process.values = values;
  return sub;
}

// Write a sub-model strategy back onto the original stages and atoms.
template <class S>
void install_strategy(const FiltrationModel<S>& m, const SubGame<S>& sub,
                      const AdaptedStrategy<S>& from, AdaptedStrategy<S>& onto) {
  for (int n = 0; n < sub.model.horizon(); ++n)
    for (std::size_t a = 0; a < sub.model.atom_count(n); ++a) {
      int w0 = sub.points[static_cast<std::size_t>(sub.model.atom_points(n, static_cast<int>(a))[0])];
      onto.at(sub.from_stage + n, m.atom_of(sub.from_stage + n, w0)) =
          from.at(n, static_cast<int>(a));
    }
}

// Coloring of segment trees extracted from the quantized approximation, with
// results cached by structural tree hash.  Color ids: 0 = all trimmed away,
// 1..V = good rectangles, V+1 = unresolved (a search-resolution failure).
template <class S>
class SegmentTreeColoring : public NtColoring<S> {
 public:
  SegmentTreeColoring(const PayoffProcess<S>& process, Covering<S> covering, const S& eps,
                      const ColoringConfig& cfg)
      : process_(process), covering_(std::move(covering)), eps_(eps), cfg_(cfg) {}

  int color_count() const override { return static_cast<int>(covering_.good.size()) + 2; }
  int unresolved_color() const { return static_cast<int>(covering_.good.size()) + 1; }

  int evaluate(const FiltrationModel<S>& m, int stage, int atom,
               const StoppingTime& tau) const override {
    const ColorResult<S>& res = color_of(m, stage, atom, tau);
    if (res.kind == ColorKind::Empty) return 0;
    if (res.kind == ColorKind::Good) return 1 + res.good_index;
    return unresolved_color();
  }

  // full result plus the extraction used, for strategy transport
  struct Evaluation {
    ColorResult<S> result;
    ApproximationPair<S> ap;
    ExtractedTree<S> tree;
  };

  Evaluation full_evaluation(const FiltrationModel<S>& m, int stage, int atom,
                             const StoppingTime& tau) const {
    StoppingTime clamped = tau;
    for (auto& v : clamped.value) v = std::max(v, stage);
    auto ap = build_delta_approximation(m, process_, stage, clamped, eps_);
    auto trees = extract_trees(m, process_, ap);
    int w0 = m.atom_points(stage, atom)[0];
    int root = ap.atom_at(0, w0);
    for (auto& ex : trees)
      if (ex.root_atom == root) {
        Evaluation ev{color_for_tree(ex.tree), std::move(ap), std::move(ex)};
        return ev;
      }
    throw std::logic_error("no extracted tree contains the evaluation atom");
  }

 private:
  const ColorResult<S>& color_of(const FiltrationModel<S>& m, int stage, int atom,
                                 const StoppingTime& tau) const {
    StoppingTime clamped = tau;
    for (auto& v : clamped.value) v = std::max(v, stage);
    auto ap = build_delta_approximation(m, process_, stage, clamped, eps_);
    auto trees = extract_trees(m, process_, ap);
    int w0 = m.atom_points(stage, atom)[0];
    int root = ap.atom_at(0, w0);
    for (auto& ex : trees)
      if (ex.root_atom == root) return color_for_tree(ex.tree);
    throw std::logic_error("no extracted tree contains the evaluation atom");
  }

  const ColorResult<S>& color_for_tree(const GameTree<S>& t) const {
    std::uint64_t h = tree_hash(t);
    auto it = cache_.find(h);
    if (it != cache_.end()) return it->second;
    ColorResult<S> res;
    if (t.is_trivial()) {
      res.kind = ColorKind::Empty;
      res.tree_hash = h;
    } else {
      res = color_tree(t, covering_, eps_, cfg_);
    }
    return cache_.emplace(h, std::move(res)).first->second;
  }

  const PayoffProcess<S>& process_;
  Covering<S> covering_;
  S eps_;
  ColoringConfig cfg_;
  mutable std::map<std::uint64_t, ColorResult<S>> cache_;
};

// exact conditional expected payoff from a stage on, per sample point
template <class S>
std::vector<std::pair<S, S>> continuation_payoff(const FiltrationModel<S>& m,
                                                 const PayoffProcess<S>& r,
                                                 const AdaptedStrategy<S>& x,
                                                 const AdaptedStrategy<S>& y, int from_stage) {
  std::vector<std::pair<S, S>> out(m.point_count(), {S(0), S(0)});
  for (int n = m.horizon() - 1; n >= from_stage; --n) {
    std::vector<std::pair<S, S>> next = out;
    for (std::size_t a = 0; a < m.atom_count(n); ++a) {
      const auto& pts = m.atom_points(n, static_cast<int>(a));
      S cond1(0), cond2(0), mass(0);
      for (int w : pts) {
        cond1 += m.point_prob(w) * out[static_cast<std::size_t>(w)].first;
        cond2 += m.point_prob(w) * out[static_cast<std::size_t>(w)].second;
        mass += m.point_prob(w);
      }
      cond1 = cond1 / mass;
      cond2 = cond2 / mass;
      const S& px = x.at(n, static_cast<int>(a));
      const S& py = y.at(n, static_cast<int>(a));
      const auto& pay = r.at(n, static_cast<int>(a));
      S v1 = px * (S(1) - py) * pay(StopSet::P1, 1) + (S(1) - px) * py * pay(StopSet::P2, 1) +
             px * py * pay(StopSet::Both, 1) + (S(1) - px) * (S(1) - py) * cond1;
      S v2 = px * (S(1) - py) * pay(StopSet::P1, 2) + (S(1) - px) * py * pay(StopSet::P2, 2) +
             px * py * pay(StopSet::Both, 2) + (S(1) - px) * (S(1) - py) * cond2;
      for (int w : pts) next[static_cast<std::size_t>(w)] = {v1, v2};
    }
    out = std::move(next);
  }
  return out;
}

// 0-equilibrium of the one-shot 2x2 stop/continue game with the given
// continuation pair; ties prefer continuing.  Returns (x, y, value1, value2).
template <class S>
std::array<S, 4> stage_equilibrium(const Payoffs<S>& pay, const S& cont1, const S& cont2) {
  auto u1 = [&](const S& xs, const S& ys) {
    return xs * (S(1) - ys) * pay(StopSet::P1, 1) + (S(1) - xs) * ys * pay(StopSet::P2, 1) +
           xs * ys * pay(StopSet::Both, 1) + (S(1) - xs) * (S(1) - ys) * cont1;
  };
  auto u2 = [&](const S& xs, const S& ys) {
    return xs * (S(1) - ys) * pay(StopSet::P1, 2) + (S(1) - xs) * ys * pay(StopSet::P2, 2) +
           xs * ys * pay(StopSet::Both, 2) + (S(1) - xs) * (S(1) - ys) * cont2;
  };
  const S zero(0), one(1);
  // pure profiles, continue-first order
  for (const S& xs : {zero, one})
    for (const S& ys : {zero, one}) {
      bool best1 = u1(xs, ys) >= u1(one - xs, ys);
      bool best2 = u2(xs, ys) >= u2(xs, one - ys);
      if (best1 && best2) return {xs, ys, u1(xs, ys), u2(xs, ys)};
    }
  // fully mixed: make each opponent indifferent
  // u1(S,y) - u1(C,y) is affine in y; its root gives player 2's mix
  S a1 = pay(StopSet::P1, 1) - cont1;  // gap at y = 0
  S b1 = pay(StopSet::Both, 1) - pay(StopSet::P2, 1);  // gap at y = 1
  S a2 = pay(StopSet::P2, 2) - cont2;
  S b2 = pay(StopSet::Both, 2) - pay(StopSet::P1, 2);
  S ys = a1 / (a1 - b1);
  S xs = a2 / (a2 - b2);
  return {xs, ys, u1(xs, ys), u2(xs, ys)};
}

}  // namespace detail

template <class S>
SynthesisResult<S> synthesize(const FiltrationModel<S>& m, const PayoffProcess<S>& r, const S& eps,
                              const SynthesisConfig<S>& cfg = {}) {
  {
    auto rep = validate_model(m);
    if (!rep.ok()) throw std::invalid_argument("invalid model: " + rep.issues.front());
    if (!(eps > S(0)) || !(eps < S(1)))
      throw std::invalid_argument("synthesis requires eps in (0,1)");
  }
  // only the contested pipeline needs the accretion margin
  const S contested_cap =
      S(1) / (S(36) * scalar_traits<S>::from_int(r.granularity * r.granularity));
  int tail_from = cfg.tail_from >= 0 ? cfg.tail_from : m.horizon() / 2;
  auto norm = normalize(m, r, tail_from, cfg.min_occurrences);
  const PayoffProcess<S>& proc = norm.process;

  SynthesisResult<S> result;
  result.tau0 = norm.tau0;
  result.modified_measure = norm.modified_measure;
  result.gain_bound = S(24) * eps;
  result.x = AdaptedStrategy<S>::never(m);
  result.y = AdaptedStrategy<S>::never(m);

  for (std::size_t b = 0; b < m.atom_count(norm.tau0); ++b) {
    const auto& pts = m.atom_points(norm.tau0, static_cast<int>(b));
    const PointClass<S>& pc = norm.points[static_cast<std::size_t>(pts[0])];
    AtomTrace trace;
    trace.stage = norm.tau0;
    trace.atom = static_cast<int>(b);
    trace.label = pc.label;

    auto qualifying_drip = [&](int player) {
      // stop with probability eps wherever the player's solo stop attains
      // their peak and pays the opponent at least the opponent's peak
      StopSet solo = player == 1 ? StopSet::P1 : StopSet::P2;
      auto& strat = player == 1 ? result.x : result.y;
      for (int n = norm.tau0; n < m.horizon(); ++n)
        for (std::size_t a = 0; a < m.atom_count(n); ++a) {
          int w0 = m.atom_points(n, static_cast<int>(a))[0];
          if (m.atom_of(norm.tau0, w0) != static_cast<int>(b)) continue;
          const auto& pay = proc.at(n, static_cast<int>(a));
          if (pay(solo, player) == pc.peak[player - 1] &&
              pay(solo, 3 - player) >= pc.peak[2 - player])
            strat.at(n, static_cast<int>(a)) = eps;
        }
    };

    switch (pc.label) {
      case StopClass::BothNonpositive:
        trace.case_name = "never-stop";
        break;
      case StopClass::P1SoloGenerous:
      case StopClass::P2SoloGenerous: {
        int player = pc.label == StopClass::P1SoloGenerous ? 1 : 2;
        if (pc.peak[player - 1] >= S(0)) {
          trace.case_name = "solo-generous p" + std::to_string(player);
          qualifying_drip(player);
        } else {
          // negative own peak: drip anyway and let the opponent punish late
          // deviations at stages that harm the dripping player
          trace.case_name = "punished-solo p" + std::to_string(player);
          qualifying_drip(player);
          // smallest stage by which the drip has fired with mass 1 - eps
          auto& strat = player == 1 ? result.x : result.y;
          int cutoff = m.horizon();
          {
            std::vector<S> alive(m.point_count(), S(1));
            for (int n = norm.tau0; n < m.horizon(); ++n) {
              S no_stop(0), mass(0);
              for (int w : pts) {
                alive[static_cast<std::size_t>(w)] *=
                    S(1) - strat.at(n, m.atom_of(n, w));
                no_stop += m.point_prob(w) * alive[static_cast<std::size_t>(w)];
                mass += m.point_prob(w);
              }
              if (no_stop <= eps * mass) {
                cutoff = n + 1;
                break;
              }
            }
          }
          if (cutoff >= m.horizon()) {
            trace.note = "drip mass did not reach 1 - eps before the horizon";
            result.complete = false;
            trace.search_failure = true;
          }
          StopSet solo = player == 1 ? StopSet::P2 : StopSet::P1;
          auto& punisher = player == 1 ? result.y : result.x;
          for (int n = cutoff; n < m.horizon(); ++n)
            for (std::size_t a = 0; a < m.atom_count(n); ++a) {
              int w0 = m.atom_points(n, static_cast<int>(a))[0];
              if (m.atom_of(norm.tau0, w0) != static_cast<int>(b)) continue;
              if (proc.at(n, static_cast<int>(a))(solo, player) < pc.peak[player - 1])
                punisher.at(n, static_cast<int>(a)) = eps;
            }
        }
        break;
      }
      case StopClass::Contested: {
        if (!(eps < contested_cap)) {
          trace.case_name = "contested";
          trace.search_failure = true;
          trace.note = "eps too large for the contested pipeline (needs eps < 1/(36 K^2))";
          result.complete = false;
          break;
        }
        auto sub = detail::restrict_game(m, proc, pts, norm.tau0);
        auto cov = build_covering(pc.peak[0], pc.peak[1], eps);
        detail::SegmentTreeColoring<S> coloring(sub.process, cov, eps, cfg.coloring);
        auto chain = ramsey_chain(sub.model, coloring, eps, cfg.ramsey);
        if (chain.times.size() < 2) {
          trace.case_name = "contested";
          trace.search_failure = true;
          trace.note = "no usable stopping-time chain: " + chain.note;
          result.complete = false;
          break;
        }
        // full evaluations per segment and segment-start atom
        std::size_t segs = chain.times.size() - 1;
        std::map<std::pair<int, std::pair<int, int>>,
                 typename detail::SegmentTreeColoring<S>::Evaluation>
            seg_evals;
        for (std::size_t k = 0; k < segs; ++k)
          for (const auto& ta : atoms_at(sub.model, chain.times[k]))
            seg_evals.emplace(
                std::make_pair(static_cast<int>(k), std::make_pair(ta.stage, ta.atom)),
                coloring.full_evaluation(sub.model, ta.stage, ta.atom, chain.times[k + 1]));

        // lambda partial sums per bad rectangle (probability weighted)
        std::size_t bad_count = cov.bad.size();
        std::vector<S> lambda_sum(bad_count, S(0));
        for (auto& [key, ev] : seg_evals) {
          auto [stage, atom] = key.second;
          S mass(0);
          for (int w : sub.model.atom_points(stage, atom)) mass += sub.model.point_prob(w);
          for (std::size_t j = 0; j < ev.result.lambdas.size(); ++j)
            lambda_sum[j] += mass * ev.result.lambdas[j];
        }
        int bad_pick = -1;
        for (std::size_t j = 0; j < bad_count; ++j)
          if (lambda_sum[j] >= cfg.lambda_threshold) {
            bad_pick = static_cast<int>(j);
            break;
          }
        // majority good color over the chain
        int good_pick = -1;
        {
          std::map<int, S> mass_by_color;
          for (std::size_t w = 0; w < sub.model.point_count(); ++w)
            mass_by_color[chain.final_color[w]] += sub.model.point_prob(static_cast<int>(w));
          S best_mass(0);
          for (auto& [c, mass] : mass_by_color)
            if (c >= 1 && c <= static_cast<int>(cov.good.size()) && mass > best_mass) {
              best_mass = mass;
              good_pick = c - 1;
            }
        }

        SegmentSchedule<S> sched;
        sched.times = chain.times;
        S anchors[2];
        bool use_bad = bad_pick >= 0;
        if (use_bad) {
          anchors[0] = cov.bad[static_cast<std::size_t>(bad_pick)].a1;
          anchors[1] = cov.bad[static_cast<std::size_t>(bad_pick)].a2;
          trace.case_name = "contested-bad-rect";
        } else if (good_pick >= 0) {
          anchors[0] = cov.good[static_cast<std::size_t>(good_pick)].a1;
          anchors[1] = cov.good[static_cast<std::size_t>(good_pick)].a2;
          trace.case_name = "contested-good-rect";
        } else {
          trace.case_name = "contested";
          trace.search_failure = true;
          trace.note = "no bad rectangle accumulated mass and no good color prevailed";
          result.complete = false;
          break;
        }
        for (std::size_t k = 0; k < segs; ++k) {
          auto prof = AdaptedProfile<S>::never(sub.model);
          for (const auto& ta : atoms_at(sub.model, chain.times[k])) {
            auto& ev = seg_evals.at(
                std::make_pair(static_cast<int>(k), std::make_pair(ta.stage, ta.atom)));
            const std::optional<StationaryProfile<S>>* chosen = nullptr;
            if (use_bad)
              chosen = &ev.result.per_rect_profiles[static_cast<std::size_t>(bad_pick)];
            else if (ev.result.final_profile)
              chosen = &ev.result.final_profile;
            if (!chosen || !chosen->has_value()) continue;
            auto x_part = lift_tree_strategy(sub.model, ev.ap, ev.tree, (*chosen)->p1);
            auto y_part = lift_tree_strategy(sub.model, ev.ap, ev.tree, (*chosen)->p2);
            for (int n = 0; n < sub.model.horizon(); ++n)
              for (std::size_t a = 0; a < sub.model.atom_count(n); ++a) {
                if (x_part.at(n, static_cast<int>(a)) != S(0))
                  prof.p1.at(n, static_cast<int>(a)) = x_part.at(n, static_cast<int>(a));
                if (y_part.at(n, static_cast<int>(a)) != S(0))
                  prof.p2.at(n, static_cast<int>(a)) = y_part.at(n, static_cast<int>(a));
              }
          }
          sched.profiles.push_back(std::move(prof));
        }
        try {
          auto concat = concat_equilibrium(sub.model, sub.process, sched, anchors, S(2) * eps,
                                           pc.peak);
          detail::install_strategy(m, sub, concat.x, result.x);
          detail::install_strategy(m, sub, concat.y, result.y);
          if (!concat.gains_ok) {
            trace.note = "segment concatenation exceeded its gain budget";
            trace.search_failure = true;
            result.complete = false;
          }
        } catch (const std::invalid_argument& e) {
          // install the uncertified concatenation and report the failure
          auto best_effort = concat_profiles(sub.model, sched, sched.profiles.size());
          detail::install_strategy(m, sub, best_effort.p1, result.x);
          detail::install_strategy(m, sub, best_effort.p2, result.y);
          trace.search_failure = true;
          trace.note = e.what();
          result.complete = false;
        }
        break;
      }
    }
    result.traces.push_back(std::move(trace));
  }

  // stage equilibria before the classification stage, with the constructed
  // continuation payoffs as terminal values
  if (norm.tau0 > 0) {
    auto cont = detail::continuation_payoff(m, proc, result.x, result.y, norm.tau0);
    std::vector<std::pair<S, S>> value(m.point_count());
    for (std::size_t w = 0; w < m.point_count(); ++w) value[w] = cont[w];
    for (int n = norm.tau0 - 1; n >= 0; --n) {
      std::vector<std::pair<S, S>> next = value;
      for (std::size_t a = 0; a < m.atom_count(n); ++a) {
        const auto& pts = m.atom_points(n, static_cast<int>(a));
        S c1(0), c2(0), mass(0);
        for (int w : pts) {
          c1 += m.point_prob(w) * value[static_cast<std::size_t>(w)].first;
          c2 += m.point_prob(w) * value[static_cast<std::size_t>(w)].second;
          mass += m.point_prob(w);
        }
        auto cell = detail::stage_equilibrium(proc.at(n, static_cast<int>(a)), S(c1 / mass),
                                              S(c2 / mass));
        result.x.at(n, static_cast<int>(a)) = cell[0];
        result.y.at(n, static_cast<int>(a)) = cell[1];
        for (int w : pts) next[static_cast<std::size_t>(w)] = std::make_pair(cell[2], cell[3]);
      }
      value = std::move(next);
    }
  }

  auto [g1, g2] = game_payoff(m, proc, result.x, result.y);
  result.gamma[0] = g1;
  result.gamma[1] = g2;
  result.deviation_value[0] = best_deviation(m, proc, result.y, 1).expected_value;
  result.deviation_value[1] = best_deviation(m, proc, result.x, 2).expected_value;
  result.gain[0] = result.deviation_value[0] - result.gamma[0];
  result.gain[1] = result.deviation_value[1] - result.gamma[1];
  result.gains_ok = approx_le<S>(result.gain[0], result.gain_bound) &&
                    approx_le<S>(result.gain[1], result.gain_bound);
  return result;
}

}  // namespace stopgame
