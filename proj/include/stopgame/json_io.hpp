#pragma once

// Versioned JSON serialization of the domain types.  All probabilities and
// payoffs travel as decimal or fraction strings so that rational-mode
// round-trips are exact; float mode parses the same documents.

#include <json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>

#include "stopgame/best_response.hpp"
#include "stopgame/coloring.hpp"
#include "stopgame/filtration.hpp"
#include "stopgame/ramsey.hpp"
#include "stopgame/synthesize.hpp"
#include "stopgame/tree.hpp"
#include "stopgame/union_bounds.hpp"

namespace stopgame {

using Json = nlohmann::ordered_json;

inline void require_schema(const Json& j, const std::string& want) {
  if (!j.contains("schema") || !j["schema"].is_string())
    throw std::invalid_argument("missing mandatory schema field");
  if (j["schema"].get<std::string>() != want)
    throw std::invalid_argument("schema mismatch: expected " + want + ", got " +
                                j["schema"].get<std::string>());
}

// ---------------------------------------------------------------------------
// game trees
// ---------------------------------------------------------------------------

template <class S>
Json tree_to_json(const GameTree<S>& t) {
  Json j;
  j["schema"] = "stopgame.tree/1";
  j["k"] = t.granularity();
  j["root"] = t.node(t.root()).id;
  Json nodes = Json::array();
  for (std::size_t i = 0; i < t.node_count(); ++i) {
    const auto& nd = t.node(static_cast<int>(i));
    Json n;
    n["id"] = nd.id;
    if (!nd.children.empty()) {
      Json kids = Json::array();
      for (std::size_t c = 0; c < nd.children.size(); ++c)
        kids.push_back({{"id", t.node(nd.children[c]).id},
                        {"prob", scalar_traits<S>::to_string(nd.child_prob[c])}});
      n["children"] = kids;
      n["payoff"] = {
          {"p1_stop", {scalar_traits<S>::to_string(nd.payoff(StopSet::P1, 1)),
                       scalar_traits<S>::to_string(nd.payoff(StopSet::P1, 2))}},
          {"p2_stop", {scalar_traits<S>::to_string(nd.payoff(StopSet::P2, 1)),
                       scalar_traits<S>::to_string(nd.payoff(StopSet::P2, 2))}},
          {"both_stop", {scalar_traits<S>::to_string(nd.payoff(StopSet::Both, 1)),
                         scalar_traits<S>::to_string(nd.payoff(StopSet::Both, 2))}}};
    }
    nodes.push_back(n);
  }
  j["nodes"] = nodes;
  return j;
}

template <class S>
GameTree<S> tree_from_json(const Json& j) {
  require_schema(j, "stopgame.tree/1");
  long long k = j.at("k").get<long long>();
  std::map<std::string, int> indexes;
  std::vector<TreeNode<S>> nodes;
  for (const auto& n : j.at("nodes")) {
    TreeNode<S> nd;
    nd.id = n.at("id").get<std::string>();
    indexes[nd.id] = static_cast<int>(nodes.size());
    nodes.push_back(nd);
  }
  std::size_t i = 0;
  for (const auto& n : j.at("nodes")) {
    auto& nd = nodes[i++];
    if (!n.contains("children")) continue;
    for (const auto& c : n.at("children")) {
      auto it = indexes.find(c.at("id").get<std::string>());
      if (it == indexes.end())
        throw std::invalid_argument("child refers to unknown node " +
                                    c.at("id").get<std::string>());
      nd.children.push_back(it->second);
      nd.child_prob.push_back(scalar_traits<S>::parse(c.at("prob").get<std::string>()));
    }
    const auto& p = n.at("payoff");
    auto read = [&](const char* key, StopSet q) {
      const auto& arr = p.at(key);
      nd.payoff(q, 1) = scalar_traits<S>::parse(arr.at(0).get<std::string>());
      nd.payoff(q, 2) = scalar_traits<S>::parse(arr.at(1).get<std::string>());
    };
    read("p1_stop", StopSet::P1);
    read("p2_stop", StopSet::P2);
    read("both_stop", StopSet::Both);
  }
  auto root = indexes.find(j.at("root").get<std::string>());
  if (root == indexes.end()) throw std::invalid_argument("root id not among the nodes");
  return GameTree<S>::from_nodes(std::move(nodes), root->second, k);
}

template <class S>
Json profile_to_json(const GameTree<S>& t, const StationaryProfile<S>& prof) {
  Json j;
  j["schema"] = "stopgame.profile/1";
  for (int player = 1; player <= 2; ++player) {
    Json side = Json::object();
    for (int v : t.internal_nodes())
      side[t.node(v).id] = scalar_traits<S>::to_string(prof.of(player).at(v));
    j[player == 1 ? "p1" : "p2"] = side;
  }
  return j;
}

template <class S>
StationaryProfile<S> profile_from_json(const GameTree<S>& t, const Json& j) {
  require_schema(j, "stopgame.profile/1");
  StationaryProfile<S> prof = StationaryProfile<S>::never(t);
  for (int player = 1; player <= 2; ++player) {
    const auto& side = j.at(player == 1 ? "p1" : "p2");
    for (auto it = side.begin(); it != side.end(); ++it)
      prof.of(player).at(t.require_node(it.key())) =
          scalar_traits<S>::parse(it.value().template get<std::string>());
  }
  require_profile_domain(t, prof);
  return prof;
}

// ---------------------------------------------------------------------------
// filtration models
// ---------------------------------------------------------------------------

template <class S>
Json model_to_json(const FiltrationModel<S>& m, const PayoffProcess<S>& r) {
  Json j;
  j["schema"] = "stopgame.filtration/1";
  j["k"] = r.granularity;
  j["horizon"] = m.horizon();
  Json points = Json::array();
  for (std::size_t w = 0; w < m.point_count(); ++w)
    points.push_back({{"id", w},
                      {"prob", scalar_traits<S>::to_string(m.point_prob(static_cast<int>(w)))}});
  j["points"] = points;
  Json parts = Json::array();
  for (int n = 0; n <= m.horizon(); ++n) {
    Json level = Json::array();
    for (std::size_t a = 0; a < m.atom_count(n); ++a) level.push_back(m.atom_points(n, static_cast<int>(a)));
    parts.push_back(level);
  }
  j["partitions"] = parts;
  Json payoffs = Json::object();
  for (int n = 0; n < m.horizon(); ++n) {
    Json level = Json::object();
    for (std::size_t a = 0; a < m.atom_count(n); ++a) {
      const auto& p = r.at(n, static_cast<int>(a));
      level[std::to_string(a)] = {
          {"p1_stop", {scalar_traits<S>::to_string(p(StopSet::P1, 1)),
                       scalar_traits<S>::to_string(p(StopSet::P1, 2))}},
          {"p2_stop", {scalar_traits<S>::to_string(p(StopSet::P2, 1)),
                       scalar_traits<S>::to_string(p(StopSet::P2, 2))}},
          {"both_stop", {scalar_traits<S>::to_string(p(StopSet::Both, 1)),
                         scalar_traits<S>::to_string(p(StopSet::Both, 2))}}};
    }
    payoffs[std::to_string(n)] = level;
  }
  j["payoffs"] = payoffs;
  return j;
}

template <class S>
std::pair<FiltrationModel<S>, PayoffProcess<S>> model_from_json(const Json& j) {
  require_schema(j, "stopgame.filtration/1");
  int horizon = j.at("horizon").get<int>();
  std::vector<S> prob(j.at("points").size());
  for (const auto& p : j.at("points"))
    prob.at(p.at("id").get<std::size_t>()) =
        scalar_traits<S>::parse(p.at("prob").get<std::string>());
  std::vector<std::vector<std::vector<int>>> parts;
  for (const auto& level : j.at("partitions")) {
    std::vector<std::vector<int>> atoms;
    for (const auto& atom : level) atoms.push_back(atom.get<std::vector<int>>());
    parts.push_back(atoms);
  }
  FiltrationModel<S> m(std::move(prob), horizon, std::move(parts));
  PayoffProcess<S> r;
  r.granularity = j.at("k").get<long long>();
  r.values.resize(static_cast<std::size_t>(horizon));
  for (int n = 0; n < horizon; ++n) {
    r.values[static_cast<std::size_t>(n)].resize(m.atom_count(n));
    const auto& level = j.at("payoffs").at(std::to_string(n));
    for (std::size_t a = 0; a < m.atom_count(n); ++a) {
      const auto& p = level.at(std::to_string(a));
      Payoffs<S> pay;
      auto read = [&](const char* key, StopSet q) {
        pay(q, 1) = scalar_traits<S>::parse(p.at(key).at(0).template get<std::string>());
        pay(q, 2) = scalar_traits<S>::parse(p.at(key).at(1).template get<std::string>());
      };
      read("p1_stop", StopSet::P1);
      read("p2_stop", StopSet::P2);
      read("both_stop", StopSet::Both);
      r.values[static_cast<std::size_t>(n)][a] = pay;
    }
  }
  return {std::move(m), std::move(r)};
}

template <class S>
Json adapted_to_json(const FiltrationModel<S>& m, const AdaptedStrategy<S>& s) {
  Json j;
  j["schema"] = "stopgame.adapted/1";
  Json stop = Json::object();
  for (int n = 0; n < m.horizon(); ++n) {
    Json level = Json::object();
    for (std::size_t a = 0; a < m.atom_count(n); ++a)
      level[std::to_string(a)] = scalar_traits<S>::to_string(s.at(n, static_cast<int>(a)));
    stop[std::to_string(n)] = level;
  }
  j["stop"] = stop;
  return j;
}

template <class S>
AdaptedStrategy<S> adapted_from_json(const FiltrationModel<S>& m, const Json& j) {
  require_schema(j, "stopgame.adapted/1");
  auto s = AdaptedStrategy<S>::never(m);
  for (int n = 0; n < m.horizon(); ++n) {
    const auto& level = j.at("stop").at(std::to_string(n));
    for (std::size_t a = 0; a < m.atom_count(n); ++a)
      s.at(n, static_cast<int>(a)) =
          scalar_traits<S>::parse(level.at(std::to_string(a)).template get<std::string>());
  }
  return s;
}

// ---------------------------------------------------------------------------
// result artifacts (emit only)
// ---------------------------------------------------------------------------

template <class S>
Json certificate_to_json(const EquilibriumCertificate<S>& c) {
  Json j;
  j["schema"] = "stopgame.certificate/1";
  j["eps"] = scalar_traits<S>::to_string(c.eps);
  j["pi"] = scalar_traits<S>::to_string(c.stats.pi);
  j["gamma"] = {scalar_traits<S>::to_string(c.stats.gamma[0]),
                scalar_traits<S>::to_string(c.stats.gamma[1])};
  j["best_response"] = {scalar_traits<S>::to_string(c.br_value[0]),
                        scalar_traits<S>::to_string(c.br_value[1])};
  j["gain"] = {scalar_traits<S>::to_string(c.gain[0]), scalar_traits<S>::to_string(c.gain[1])};
  j["is_equilibrium"] = c.is_equilibrium;
  return j;
}

template <class S>
Json color_result_to_json(const GameTree<S>& t, const ColorResult<S>& res) {
  Json j;
  j["schema"] = "stopgame.color/1";
  j["tree_hash"] = res.tree_hash;
  switch (res.kind) {
    case ColorKind::Empty: j["color"] = "none"; break;
    case ColorKind::Good: j["color"] = res.good_index; break;
    default: j["color"] = "incomplete"; break;
  }
  Json lambdas = Json::array();
  for (const auto& l : res.lambdas) lambdas.push_back(scalar_traits<S>::to_string(l));
  j["lambdas"] = lambdas;
  if (res.final_profile) j["final_profile"] = profile_to_json(t, *res.final_profile);
  if (res.final_stats)
    j["final_gamma"] = {scalar_traits<S>::to_string(res.final_stats->gamma[0]),
                        scalar_traits<S>::to_string(res.final_stats->gamma[1])};
  if (!res.note.empty()) j["note"] = res.note;
  return j;
}

template <class S>
Json chain_result_to_json(const FiltrationModel<S>& m, const ChainResult<S>& res) {
  Json j;
  j["schema"] = "stopgame.chain/1";
  Json times = Json::array();
  for (const auto& t : res.times) times.push_back(t.value);
  j["times"] = times;
  j["mono_prob"] = scalar_traits<S>::to_string(res.mono_prob);
  j["horizon_limited"] = res.horizon_limited;
  j["exact_red_sets"] = res.exact;
  if (!res.note.empty()) j["note"] = res.note;
  j["final_color"] = res.final_color;
  (void)m;
  return j;
}

template <class S>
Json synthesis_to_json(const FiltrationModel<S>& m, const SynthesisResult<S>& res) {
  Json j;
  j["schema"] = "stopgame.synthesis/1";
  j["gamma"] = {scalar_traits<S>::to_string(res.gamma[0]),
                scalar_traits<S>::to_string(res.gamma[1])};
  j["gain"] = {scalar_traits<S>::to_string(res.gain[0]), scalar_traits<S>::to_string(res.gain[1])};
  j["gain_bound"] = scalar_traits<S>::to_string(res.gain_bound);
  j["gains_ok"] = res.gains_ok;
  j["complete"] = res.complete;
  j["classification_stage"] = res.tau0;
  j["modified_measure"] = scalar_traits<S>::to_string(res.modified_measure);
  Json traces = Json::array();
  for (const auto& tr : res.traces) {
    Json t;
    t["stage"] = tr.stage;
    t["atom"] = tr.atom;
    t["label"] = stop_class_name(tr.label);
    t["case"] = tr.case_name;
    t["search_failure"] = tr.search_failure;
    if (!tr.note.empty()) t["note"] = tr.note;
    traces.push_back(t);
  }
  j["traces"] = traces;
  j["x"] = adapted_to_json(m, res.x);
  j["y"] = adapted_to_json(m, res.y);
  return j;
}

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  Json j;
  in >> j;
  return j;
}

inline void save_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace stopgame
