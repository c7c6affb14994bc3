#pragma once

// Finite filtration models for discrete-time stopping games: a finite sample
// space with positive weights, a bounded horizon, and a refining sequence of
// partitions (the information available at each stage).  Strategies and
// payoffs are stored per (stage, atom), which makes adaptedness structural.

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "stopgame/scalar.hpp"
#include "stopgame/tree.hpp"

namespace stopgame {

template <class S>
class FiltrationModel {
 public:
  FiltrationModel() = default;
  FiltrationModel(std::vector<S> prob, int horizon,
                  std::vector<std::vector<std::vector<int>>> partitions)
      : prob_(std::move(prob)), horizon_(horizon), partitions_(std::move(partitions)) {
    index();
  }

  std::size_t point_count() const { return prob_.size(); }
  int horizon() const { return horizon_; }
  const S& point_prob(int w) const { return prob_.at(static_cast<std::size_t>(w)); }
  std::size_t atom_count(int stage) const {
    return partitions_.at(static_cast<std::size_t>(stage)).size();
  }
  const std::vector<int>& atom_points(int stage, int atom) const {
    return partitions_.at(static_cast<std::size_t>(stage)).at(static_cast<std::size_t>(atom));
  }
  int atom_of(int stage, int point) const {
    return atom_index_.at(static_cast<std::size_t>(stage)).at(static_cast<std::size_t>(point));
  }
  S atom_prob(int stage, int atom) const {
    S p(0);
    for (int w : atom_points(stage, atom)) p += point_prob(w);
    return p;
  }

 private:
  void index() {
    if (horizon_ < 1) throw std::invalid_argument("horizon must be at least 1");
    if (partitions_.size() != static_cast<std::size_t>(horizon_) + 1)
      throw std::invalid_argument("need one partition per stage 0..horizon");
    atom_index_.assign(partitions_.size(),
                       std::vector<int>(prob_.size(), -1));
    for (std::size_t n = 0; n < partitions_.size(); ++n) {
      for (std::size_t a = 0; a < partitions_[n].size(); ++a) {
        if (partitions_[n][a].empty()) throw std::invalid_argument("empty atom");
        for (int w : partitions_[n][a]) {
          if (w < 0 || static_cast<std::size_t>(w) >= prob_.size())
            throw std::invalid_argument("atom refers to an unknown sample point");
          if (atom_index_[n][static_cast<std::size_t>(w)] != -1)
            throw std::invalid_argument("partitions overlap at stage " + std::to_string(n));
          atom_index_[n][static_cast<std::size_t>(w)] = static_cast<int>(a);
        }
      }
      for (std::size_t w = 0; w < prob_.size(); ++w)
        if (atom_index_[n][w] == -1)
          throw std::invalid_argument("partition at stage " + std::to_string(n) +
                                      " does not cover the sample space");
    }
  }

  std::vector<S> prob_;
  int horizon_ = 0;
  std::vector<std::vector<std::vector<int>>> partitions_;
  std::vector<std::vector<int>> atom_index_;
};

template <class S>
ValidationReport validate_model(const FiltrationModel<S>& m) {
  ValidationReport rep;
  S total(0);
  for (std::size_t w = 0; w < m.point_count(); ++w) {
    if (m.point_prob(static_cast<int>(w)) <= S(0))
      rep.issues.push_back("point " + std::to_string(w) + " has nonpositive probability");
    total += m.point_prob(static_cast<int>(w));
  }
  if (!approx_eq<S>(total, S(1)))
    rep.issues.push_back("point probabilities sum to " + scalar_traits<S>::to_string(total));
  // refinement: two points sharing an atom at stage n+1 share one at stage n
  for (int n = 0; n + 1 <= m.horizon(); ++n)
    for (std::size_t a = 0; a < m.atom_count(n + 1); ++a) {
      const auto& pts = m.atom_points(n + 1, static_cast<int>(a));
      for (int w : pts)
        if (m.atom_of(n, w) != m.atom_of(n, pts[0])) {
          rep.issues.push_back("partition at stage " + std::to_string(n + 1) +
                               " does not refine stage " + std::to_string(n));
          break;
        }
    }
  return rep;
}

// Adapted payoff process: six payoff components per (stage, atom), stages
// 0..horizon-1 (players cannot stop at the horizon).
template <class S>
struct PayoffProcess {
  long long granularity = 1;
  std::vector<std::vector<Payoffs<S>>> values;  // [stage][atom]

  const Payoffs<S>& at(int stage, int atom) const {
    return values.at(static_cast<std::size_t>(stage)).at(static_cast<std::size_t>(atom));
  }
  Payoffs<S>& at(int stage, int atom) {
    return values.at(static_cast<std::size_t>(stage)).at(static_cast<std::size_t>(atom));
  }
};

template <class S>
ValidationReport validate_process(const FiltrationModel<S>& m, const PayoffProcess<S>& r) {
  ValidationReport rep;
  if (r.granularity <= 0) rep.issues.push_back("granularity K must be positive");
  if (r.values.size() < static_cast<std::size_t>(m.horizon()))
    rep.issues.push_back("payoffs must cover stages 0..horizon-1");
  for (std::size_t n = 0; n < r.values.size() && n < static_cast<std::size_t>(m.horizon()); ++n) {
    if (r.values[n].size() != m.atom_count(static_cast<int>(n))) {
      rep.issues.push_back("payoff table size mismatch at stage " + std::to_string(n));
      continue;
    }
    for (std::size_t a = 0; a < r.values[n].size(); ++a)
      for (int q = 0; q < 3; ++q)
        for (int i = 0; i < 2; ++i)
          if (!detail::on_payoff_grid<S>(r.values[n][a].value[q][i], r.granularity))
            rep.issues.push_back("payoff off the 1/K grid at stage " + std::to_string(n) +
                                 " atom " + std::to_string(a));
  }
  return rep;
}

// Bounded stopping time: a stage per sample point, with {tau = n} a union of
// stage-n atoms.
struct StoppingTime {
  std::vector<int> value;

  static StoppingTime constant(std::size_t points, int stage) {
    return {std::vector<int>(points, stage)};
  }
  int at(int point) const { return value.at(static_cast<std::size_t>(point)); }
  int max_value() const { return *std::max_element(value.begin(), value.end()); }
  int min_value() const { return *std::min_element(value.begin(), value.end()); }
  friend bool operator==(const StoppingTime& a, const StoppingTime& b) {
    return a.value == b.value;
  }
  friend bool operator<(const StoppingTime& a, const StoppingTime& b) {
    return a.value < b.value;
  }
};

template <class S>
bool is_adapted(const FiltrationModel<S>& m, const StoppingTime& tau) {
  if (tau.value.size() != m.point_count()) return false;
  // {tau = n} is a union of stage-n atoms iff tau is constant on the stage-n
  // atom of every point with tau = n (a mate stopping earlier would force
  // this point to stop earlier too, by refinement).
  for (std::size_t w = 0; w < m.point_count(); ++w) {
    int n = tau.value[w];
    if (n < 0 || n > m.horizon()) return false;
    for (int w2 : m.atom_points(n, m.atom_of(n, static_cast<int>(w))))
      if (tau.value[static_cast<std::size_t>(w2)] != n) return false;
  }
  return true;
}

template <class S>
void require_adapted(const FiltrationModel<S>& m, const StoppingTime& tau,
                     const std::string& what) {
  if (!is_adapted(m, tau)) throw std::invalid_argument(what + " is not an adapted stopping time");
}

inline bool strictly_before(const StoppingTime& a, const StoppingTime& b) {
  if (a.value.size() != b.value.size()) return false;
  for (std::size_t w = 0; w < a.value.size(); ++w)
    if (a.value[w] >= b.value[w]) return false;
  return true;
}

inline bool pointwise_leq(const StoppingTime& a, const StoppingTime& b) {
  if (a.value.size() != b.value.size()) return false;
  for (std::size_t w = 0; w < a.value.size(); ++w)
    if (a.value[w] > b.value[w]) return false;
  return true;
}

// Behavior strategy: a stop probability per (stage, atom), stages
// 0..horizon-1.  Measurable by construction.
template <class S>
struct AdaptedStrategy {
  std::vector<std::vector<S>> stop;  // [stage][atom]

  static AdaptedStrategy never(const FiltrationModel<S>& m) {
    AdaptedStrategy s;
    s.stop.resize(static_cast<std::size_t>(m.horizon()));
    for (int n = 0; n < m.horizon(); ++n)
      s.stop[static_cast<std::size_t>(n)].assign(m.atom_count(n), S(0));
    return s;
  }
  const S& at(int stage, int atom) const {
    return stop.at(static_cast<std::size_t>(stage)).at(static_cast<std::size_t>(atom));
  }
  S& at(int stage, int atom) {
    return stop.at(static_cast<std::size_t>(stage)).at(static_cast<std::size_t>(atom));
  }
  friend bool operator==(const AdaptedStrategy& a, const AdaptedStrategy& b) {
    return a.stop == b.stop;
  }
};

template <class S>
struct AdaptedProfile {
  AdaptedStrategy<S> p1;
  AdaptedStrategy<S> p2;

  static AdaptedProfile never(const FiltrationModel<S>& m) {
    return {AdaptedStrategy<S>::never(m), AdaptedStrategy<S>::never(m)};
  }
  const AdaptedStrategy<S>& of(int player) const { return player == 1 ? p1 : p2; }
  AdaptedStrategy<S>& of(int player) { return player == 1 ? p1 : p2; }
};

template <class S>
void require_strategy_shape(const FiltrationModel<S>& m, const AdaptedStrategy<S>& s) {
  if (s.stop.size() != static_cast<std::size_t>(m.horizon()))
    throw std::invalid_argument("strategy does not cover stages 0..horizon-1");
  for (int n = 0; n < m.horizon(); ++n) {
    if (s.stop[static_cast<std::size_t>(n)].size() != m.atom_count(n))
      throw std::invalid_argument("strategy table does not match the stage-" +
                                  std::to_string(n) + " partition");
    for (const S& v : s.stop[static_cast<std::size_t>(n)])
      if (v < S(0) || v > S(1)) throw std::invalid_argument("stop probability outside [0,1]");
  }
}

}  // namespace stopgame
