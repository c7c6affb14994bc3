// Command-line driver: instance generation, solving, certification and the
// seeded property suite.  Exit codes: 0 all requested certificates pass,
// 1 usage/parse/validation error, 2 a certificate failed, 3 a search was
// exhausted without a verdict (not found / horizon-limited / incomplete).

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include "stopgame/accretion.hpp"
#include "stopgame/best_response.hpp"
#include "stopgame/coloring.hpp"
#include "stopgame/equilibrium_search.hpp"
#include "stopgame/generator.hpp"
#include "stopgame/json_io.hpp"
#include "stopgame/ramsey.hpp"
#include "stopgame/synthesize.hpp"
#include "stopgame/union_bounds.hpp"

using namespace stopgame;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCertificateFailed = 2;
constexpr int kExitSearchExhausted = 3;

struct CommonOpts {
  std::string arith = "float";
  std::string out;
  std::uint64_t seed = 1;
  double eps = 0.1;
  double grid_step = 0.25;    // equilibrium-search grid step, fraction of eps
  std::size_t exact_cap = 20;  // exact best-response enumeration cap
};

void write_artifact(const CommonOpts& opts, const std::string& name, const Json& j) {
  if (opts.out.empty()) return;
  std::filesystem::create_directories(opts.out);
  save_json(opts.out + "/" + name, j);
}

template <class S>
S to_scalar(double v) {
  return scalar_traits<S>::parse(double_to_string(v));
}

template <class S>
int run_solve_tree(const CommonOpts& opts, const std::string& input, bool has_target, double a1,
                   double a2, double side) {
  auto tree = tree_from_json<S>(load_json(input));
  auto report = validate_tree(tree);
  if (!report.ok()) {
    for (const auto& issue : report.issues) std::cerr << "invalid tree: " << issue << "\n";
    return kExitUsage;
  }
  EqSearchConfig cfg;
  cfg.seed = opts.seed;
  cfg.grid_step_fraction = opts.grid_step;
  cfg.exact_cap = opts.exact_cap;
  std::optional<Rectangle<S>> target;
  if (has_target)
    target = Rectangle<S>{to_scalar<S>(a1), to_scalar<S>(a2), to_scalar<S>(side)};
  auto res = find_stationary_equilibrium(tree, to_scalar<S>(opts.eps), target, cfg);
  if (!res.found) {
    std::cout << "not found: " << res.note << "\n";
    return kExitSearchExhausted;
  }
  std::cout << "equilibrium found\n"
            << "  pi     = " << scalar_traits<S>::to_string(res.stats.pi) << "\n"
            << "  gamma  = (" << scalar_traits<S>::to_string(res.stats.gamma[0]) << ", "
            << scalar_traits<S>::to_string(res.stats.gamma[1]) << ")\n"
            << "  gains  = (" << scalar_traits<S>::to_string(res.certificate.gain[0]) << ", "
            << scalar_traits<S>::to_string(res.certificate.gain[1]) << ")\n";
  write_artifact(opts, "profile.json", profile_to_json(tree, res.profile));
  write_artifact(opts, "certificate.json", certificate_to_json(res.certificate));
  return kExitOk;
}

template <class S>
int run_check_eq(const CommonOpts& opts, const std::string& input, const std::string& profile) {
  auto tree = tree_from_json<S>(load_json(input));
  auto prof = profile_from_json<S>(tree, load_json(profile));
  auto cert = check_equilibrium(tree, prof, to_scalar<S>(opts.eps));
  const auto& stats = cert.stats;
  std::cout << "pi    = " << scalar_traits<S>::to_string(stats.pi) << "\n"
            << "rho   = (" << scalar_traits<S>::to_string(stats.rho[0]) << ", "
            << scalar_traits<S>::to_string(stats.rho[1]) << ")\n"
            << "gamma = (" << scalar_traits<S>::to_string(stats.gamma[0]) << ", "
            << scalar_traits<S>::to_string(stats.gamma[1]) << ")\n"
            << "gains = (" << scalar_traits<S>::to_string(cert.gain[0]) << ", "
            << scalar_traits<S>::to_string(cert.gain[1]) << ")\n"
            << "verdict: " << (cert.is_equilibrium ? "eps-equilibrium" : "not an equilibrium")
            << " at eps = " << opts.eps << "\n";
  write_artifact(opts, "certificate.json", certificate_to_json(cert));
  return cert.is_equilibrium ? kExitOk : kExitCertificateFailed;
}

template <class S>
int run_accrete(const CommonOpts& opts, const std::string& input, double a1, double a2, double r1,
                double r2) {
  auto tree = tree_from_json<S>(load_json(input));
  S rbar[2] = {to_scalar<S>(r1), to_scalar<S>(r2)};
  auto issues = peak_condition_issues(tree, rbar);
  if (!issues.empty()) {
    for (const auto& s : issues) std::cerr << "peak condition: " << s << "\n";
    return kExitUsage;
  }
  S eps = to_scalar<S>(opts.eps);
  Rectangle<S> rect{to_scalar<S>(a1), to_scalar<S>(a2), eps};
  AccretionConfig cfg;
  cfg.search.seed = opts.seed;
  cfg.search.grid_step_fraction = opts.grid_step;
  cfg.search.exact_cap = opts.exact_cap;
  auto res = accrete_equilibria(tree, rect, eps, rbar, cfg);
  const auto& c = res.certificate;
  std::cout << "rounds = " << c.rounds << ", trimmed nodes = " << res.d.size() << "\n"
            << "pi = " << scalar_traits<S>::to_string(c.pi)
            << ", required >= " << scalar_traits<S>::to_string(eps * eps * c.p_d) << "\n"
            << "gamma = (" << scalar_traits<S>::to_string(c.gamma[0]) << ", "
            << scalar_traits<S>::to_string(c.gamma[1]) << ")\n"
            << "best responses = (" << scalar_traits<S>::to_string(c.br_value[0]) << ", "
            << scalar_traits<S>::to_string(c.br_value[1]) << ")\n"
            << "certificate: " << (c.ok() ? "pass" : "FAIL") << " (" << c.search_note << ")\n";
  Json j;
  j["schema"] = "stopgame.accretion/1";
  j["rounds"] = c.rounds;
  j["trimmed"] = res.d.size();
  j["certificate_ok"] = c.ok();
  j["note"] = c.search_note;
  write_artifact(opts, "accretion.json", j);
  return c.ok() ? kExitOk : kExitCertificateFailed;
}

template <class S>
int run_color_tree(const CommonOpts& opts, const std::string& input, double r1, double r2) {
  auto tree = tree_from_json<S>(load_json(input));
  S eps = to_scalar<S>(opts.eps);
  auto cov = build_covering<S>(to_scalar<S>(r1), to_scalar<S>(r2), eps);
  ColoringConfig cfg;
  cfg.accretion.search.seed = opts.seed;
  cfg.accretion.search.grid_step_fraction = opts.grid_step;
  cfg.final_search.seed = opts.seed;
  cfg.final_search.grid_step_fraction = opts.grid_step;
  auto res = color_tree(tree, cov, eps, cfg);
  switch (res.kind) {
    case ColorKind::Empty: std::cout << "color: none (tree fully trimmed)\n"; break;
    case ColorKind::Good: std::cout << "color: good rectangle " << res.good_index << "\n"; break;
    default: std::cout << "coloring incomplete: " << res.note << "\n"; break;
  }
  write_artifact(opts, "color.json", color_result_to_json(tree, res));
  return res.kind == ColorKind::Incomplete ? kExitSearchExhausted : kExitOk;
}

template <class S>
int run_approx(const CommonOpts& opts, const std::string& input, int from_stage) {
  auto [model, process] = model_from_json<S>(load_json(input));
  auto rep = validate_model(model);
  if (!rep.ok()) {
    for (const auto& s : rep.issues) std::cerr << "invalid model: " << s << "\n";
    return kExitUsage;
  }
  auto tau = StoppingTime::constant(model.point_count(), model.horizon());
  auto ap = build_delta_approximation(model, process, from_stage, tau, to_scalar<S>(opts.eps));
  auto verify = verify_delta_approximation(model, process, ap);
  auto trees = extract_trees(model, process, ap);
  std::cout << "levels = " << ap.levels() << ", root atoms = " << ap.atoms[0].size()
            << ", trees = " << trees.size() << "\n"
            << "conditions: " << (verify.ok() ? "pass" : verify.issues.front()) << "\n";
  Json out = Json::array();
  for (auto& ex : trees) out.push_back(tree_to_json(ex.tree));
  write_artifact(opts, "trees.json", out);
  return verify.ok() ? kExitOk : kExitCertificateFailed;
}

template <class S>
int run_ramsey(const CommonOpts& opts, const std::string& input, const std::string& family,
               int colors, int persistence) {
  auto [model, process] = model_from_json<S>(load_json(input));
  (void)process;
  std::unique_ptr<NtColoring<S>> coloring;
  if (family == "persistent") {
    coloring = std::make_unique<AtomColoring<S>>(
        random_persistent_coloring(model, colors, persistence, opts.seed));
  } else if (family == "marked") {
    // mark a pseudorandom selection of late atoms
    std::mt19937_64 rng(opts.seed);
    std::set<TimeAtom> marks;
    for (int n = model.horizon() / 2; n <= model.horizon(); ++n)
      for (std::size_t a = 0; a < model.atom_count(n); ++a)
        if (rng() % 3 == 0) marks.insert({n, static_cast<int>(a)});
    coloring = std::make_unique<MarkedSubtreeColoring<S>>(std::move(marks));
  } else {
    std::cerr << "unknown coloring family: " << family << " (want persistent or marked)\n";
    return kExitUsage;
  }
  auto verdict = check_consistency(model, *coloring, 500, opts.seed);
  if (!verdict.consistent) {
    std::cerr << "coloring failed the consistency check\n";
    return kExitUsage;
  }
  auto chain = ramsey_chain(model, *coloring, to_scalar<S>(opts.eps));
  std::cout << "times = " << chain.times.size()
            << ", mono probability = " << scalar_traits<S>::to_string(chain.mono_prob) << "\n";
  if (chain.horizon_limited) std::cout << "horizon-limited: " << chain.note << "\n";
  write_artifact(opts, "chain.json", chain_result_to_json(model, chain));
  return chain.horizon_limited ? kExitSearchExhausted : kExitOk;
}

template <class S>
int run_synthesize(const CommonOpts& opts, const std::string& input, int tail_from) {
  auto [model, process] = model_from_json<S>(load_json(input));
  SynthesisConfig<S> cfg;
  cfg.tail_from = tail_from;
  cfg.ramsey.seed = opts.seed;
  auto res = synthesize(model, process, to_scalar<S>(opts.eps), cfg);
  std::cout << "gamma = (" << scalar_traits<S>::to_string(res.gamma[0]) << ", "
            << scalar_traits<S>::to_string(res.gamma[1]) << ")\n"
            << "gains = (" << scalar_traits<S>::to_string(res.gain[0]) << ", "
            << scalar_traits<S>::to_string(res.gain[1])
            << "), bound = " << scalar_traits<S>::to_string(res.gain_bound) << "\n";
  for (const auto& tr : res.traces)
    std::cout << "  atom " << tr.atom << " [" << stop_class_name(tr.label)
              << "] case: " << tr.case_name << (tr.search_failure ? " (search failure)" : "")
              << "\n";
  write_artifact(opts, "synthesis.json", synthesis_to_json(model, res));
  if (!res.complete) return kExitSearchExhausted;
  return res.gains_ok ? kExitOk : kExitCertificateFailed;
}

template <class S>
int run_suite(const CommonOpts& opts, std::size_t tree_count) {
  std::size_t pass = 0, fail = 0;
  for (std::uint64_t i = 0; i < tree_count; ++i) {
    TreeSpec spec;
    spec.internal_nodes = 3 + i % 8;
    spec.granularity = 1 + static_cast<long long>(i % 4);
    auto g = generate_tree<S>(spec, opts.seed + i);
    auto prof = generate_profile(g.tree, opts.seed + i + 1000);
    auto st = round_stats(g.tree, prof);
    bool ok = approx_eq<S>(st.pi * st.gamma[0], st.rho[0]) &&
              approx_eq<S>(st.pi * st.gamma[1], st.rho[1]);
    S pi_x0 = round_stats(g.tree, {prof.p1, StationaryStrategy<S>::never(g.tree)}).pi;
    S pi_0y = round_stats(g.tree, {StationaryStrategy<S>::never(g.tree), prof.p2}).pi;
    ok = ok && approx_ge<S>(pi_x0 + pi_0y, st.pi);
    auto seq = generate_orthogonal_sequence<S>(g.tree, 3, to_scalar<S>(0.1), opts.seed + i);
    ok = ok && union_bounds(g.tree, seq, to_scalar<S>(0.1)).all_hold();
    ++(ok ? pass : fail);
  }
  std::cout << "suite: " << pass << " passed, " << fail << " failed\n";
  return fail == 0 ? kExitOk : kExitCertificateFailed;
}

// instances are always generated in exact arithmetic so the emitted decimal
// and fraction strings round-trip in either mode
int run_generate(const CommonOpts& opts, const std::string& kind, std::size_t size, int horizon,
                 long long k, bool enforce_peaks) {
  using S = Rational;
  Json j;
  if (kind == "tree") {
    TreeSpec spec;
    spec.internal_nodes = size;
    spec.granularity = k;
    spec.solo_caps = enforce_peaks;
    spec.peak_penalty = enforce_peaks;
    spec.force_attainment = enforce_peaks;
    spec.peak1_num = k;
    spec.peak2_num = k;
    auto g = generate_tree<S>(spec, opts.seed);
    j = tree_to_json(g.tree);
  } else if (kind == "filtration") {
    FiltrationSpec spec;
    spec.points = size;
    spec.horizon = horizon;
    spec.granularity = k;
    auto m = generate_filtration_model<S>(spec, opts.seed);
    auto r = generate_payoff_process(m, spec, opts.seed);
    j = model_to_json(m, r);
  } else {
    std::cerr << "unknown kind: " << kind << " (want tree or filtration)\n";
    return kExitUsage;
  }
  j["provenance"] = {{"kind", kind},
                     {"seed", opts.seed},
                     {"size", size},
                     {"horizon", horizon},
                     {"k", k},
                     {"enforce_peaks", enforce_peaks}};
  if (opts.out.empty())
    std::cout << j.dump(2) << "\n";
  else
    save_json(opts.out, j);
  return kExitOk;
}

template <class F>
int dispatch(const std::string& arith, F&& f) {
  if (arith == "rational") return f(Rational{});
  if (arith == "float") return f(0.0);
  std::cerr << "unknown arithmetic mode: " << arith << "\n";
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stopgame: solver and verifier for two-player stopping games"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand name

  CommonOpts opts;
  app.add_option("--arith", opts.arith, "arithmetic mode: float or rational");
  app.add_option("--seed", opts.seed, "seed for all randomized searches");
  app.add_option("--eps", opts.eps, "equilibrium tolerance");
  app.add_option("--out", opts.out, "output directory (or file for generate)");
  app.add_option("--grid-step", opts.grid_step, "search grid step as a fraction of eps");
  app.add_option("--exact-cap", opts.exact_cap,
                 "largest tree solved by exact best-response enumeration");

  std::string input, profile, family = "persistent", kind = "tree";
  double a1 = 0, a2 = 0, side = 0, r1 = 1, r2 = 1;
  bool enforce_peaks = false;
  int from_stage = 0, tail_from = -1, colors = 2, persistence = 85, horizon = 5;
  long long granularity = 2;
  std::size_t size = 6, tree_count = 100;

  auto* gen = app.add_subcommand("generate", "generate a random instance");
  gen->add_option("--kind", kind, "tree or filtration");
  gen->add_option("--size", size, "internal nodes / sample points");
  gen->add_option("--horizon", horizon, "stages (filtration only)");
  gen->add_option("--granularity", granularity, "payoff grid denominator K");
  gen->add_flag("--enforce-peaks", enforce_peaks, "cap and penalize peak payoffs");

  auto* solve = app.add_subcommand("solve-tree", "search for a stationary equilibrium");
  solve->add_option("--input", input, "tree JSON")->required();
  solve->add_option("--a1", a1, "target rectangle lower corner, player 1");
  solve->add_option("--a2", a2, "target rectangle lower corner, player 2");
  auto* side_opt = solve->add_option("--side", side, "target rectangle side");

  auto* check = app.add_subcommand("check-eq", "certify a stationary profile");
  check->add_option("--input", input, "tree JSON")->required();
  check->add_option("--profile", profile, "profile JSON")->required();

  auto* acc = app.add_subcommand("accrete", "trim a tree along one bad rectangle");
  acc->add_option("--input", input, "tree JSON")->required();
  acc->add_option("--a1", a1, "rectangle lower corner, player 1")->required();
  acc->add_option("--a2", a2, "rectangle lower corner, player 2")->required();
  acc->add_option("--r1", r1, "player 1 peak");
  acc->add_option("--r2", r2, "player 2 peak");

  auto* color = app.add_subcommand("color-tree", "run the full coloring procedure");
  color->add_option("--input", input, "tree JSON")->required();
  color->add_option("--r1", r1, "player 1 peak");
  color->add_option("--r2", r2, "player 2 peak");

  auto* approx = app.add_subcommand("approx", "build and verify the quantized approximation");
  approx->add_option("--input", input, "filtration JSON")->required();
  approx->add_option("--from", from_stage, "segment start stage");

  auto* ramsey = app.add_subcommand("ramsey", "extract a monochromatic stopping-time chain");
  ramsey->add_option("--input", input, "filtration JSON")->required();
  ramsey->add_option("--family", family, "coloring family: persistent or marked");
  ramsey->add_option("--colors", colors, "number of colors (persistent family)");
  ramsey->add_option("--persistence", persistence, "color persistence percent");

  auto* synth = app.add_subcommand("synthesize", "construct a full equilibrium profile");
  synth->add_option("--input", input, "filtration JSON")->required();
  synth->add_option("--tail-window", tail_from, "classification window start stage");

  auto* suite = app.add_subcommand("suite", "run the seeded invariant battery");
  suite->add_option("--trees", tree_count, "number of random instances");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return run_generate(opts, kind, size, horizon, granularity, enforce_peaks);
    if (solve->parsed())
      return dispatch(opts.arith, [&]<class S>(S) {
        return run_solve_tree<S>(opts, input, side_opt->count() > 0, a1, a2, side);
      });
    if (check->parsed())
      return dispatch(opts.arith,
                      [&]<class S>(S) { return run_check_eq<S>(opts, input, profile); });
    if (acc->parsed())
      return dispatch(opts.arith,
                      [&]<class S>(S) { return run_accrete<S>(opts, input, a1, a2, r1, r2); });
    if (color->parsed())
      return dispatch(opts.arith,
                      [&]<class S>(S) { return run_color_tree<S>(opts, input, r1, r2); });
    if (approx->parsed())
      return dispatch(opts.arith,
                      [&]<class S>(S) { return run_approx<S>(opts, input, from_stage); });
    if (ramsey->parsed())
      return dispatch(opts.arith, [&]<class S>(S) {
        return run_ramsey<S>(opts, input, family, colors, persistence);
      });
    if (synth->parsed())
      return dispatch(opts.arith,
                      [&]<class S>(S) { return run_synthesize<S>(opts, input, tail_from); });
    if (suite->parsed())
      return dispatch(opts.arith, [&]<class S>(S) { return run_suite<S>(opts, tree_count); });
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
