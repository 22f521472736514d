// chasesim command line: graphs, runs, snapshots, sweeps, crossings,
// verification and bounds. Results go to stdout (or --out), logs to stderr.
//
// Exit codes: 0 ok, 1 usage, 2 bad input, 3 verification failed.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include "CLI11.hpp"

#include "chasesim/chasesim.hpp"
#include "chasesim/io.hpp"

using namespace chasesim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitVerify = 3;

struct GraphOpts {
  std::string family;
  std::string file;
  std::uint64_t n = 5;
  std::uint64_t offspring = 2;
  std::uint64_t depth = 3;
  std::string tree_root = "rooted";
  std::string geometry = "cylinder";
};

void add_graph_options(CLI::App* app, GraphOpts& o, const std::string& family_flag) {
  auto* fam = app->add_option(family_flag, o.family, "graph family")
                  ->check(CLI::IsMember({"path", "star", "complete", "tree", "torus"}));
  auto* file = app->add_option("--graph-file", o.file, "graph file (n=<int> root=<int> header, one edge per line)");
  fam->excludes(file);
  app->add_option("--n", o.n, "path/complete: vertices; star: leaves; torus: side length")->capture_default_str();
  app->add_option("--offspring", o.offspring, "tree: children per vertex")->capture_default_str();
  app->add_option("--depth", o.depth, "tree: depth")->capture_default_str();
  app->add_option("--tree-root", o.tree_root, "tree: rooted (root has offspring children) or regular (root degree offspring+1)")->capture_default_str()
      ->check(CLI::IsMember({"rooted", "regular"}));
  app->add_option("--geometry", o.geometry, "torus: cylinder or torus")->capture_default_str()
      ->check(CLI::IsMember({"cylinder", "torus"}));
}

Graph load_graph_file(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return parse_graph(text);
  } catch (const ParseFailure& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

Graph build_graph(const GraphOpts& o) {
  if (!o.file.empty()) return load_graph_file(o.file);
  if (o.family.empty()) throw Error(ErrorCode::InvalidSpec, "one of --graph/--family or --graph-file is required");
  if (o.family == "path") return build_path(o.n);
  if (o.family == "star") return build_star(o.n);
  if (o.family == "complete") return build_complete(o.n);
  if (o.family == "tree")
    return build_regular_tree(o.offspring, o.depth, o.tree_root == "regular" ? TreeRoot::Regular : TreeRoot::Rooted);
  return build_torus(o.n, parse_geometry(o.geometry));
}

InitSpec parse_init(const std::string& s) {
  if (s == "standard") return InitSpec::StandardRoot;
  if (s == "band") return InitSpec::Band;
  return InitSpec::ClassicalWithBlueNeighbor;
}

// Output sink: --out file or stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw Error(ErrorCode::ParseError, "--out: cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

void emit(const std::string& out, const std::string& text) {
  Sink sink(out);
  sink.stream() << text;
  sink.stream().flush();
}

void emit(const std::string& out, const json& j) { emit(out, j.dump(2) + "\n"); }

// Flags beat the config file, but only the ones actually given.
template <class T>
void override_if(CLI::Option* opt, T& target, const T& value) {
  if (opt->count() > 0) target = value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chasesim: red/blue chase-escape simulator with conversions"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  std::string out_path;
  unsigned workers = default_workers();
  auto add_common = [&](CLI::App* sub, bool with_workers) {
    sub->add_option("--out", out_path, "write results to this file instead of stdout");
    if (with_workers)
      sub->add_option("--workers", workers, "replica threads (default: CHASESIM_WORKERS or hardware count)")->capture_default_str()
          ->check(CLI::PositiveNumber);
  };

  double lambda = 1.0, alpha = 1.0, lambda_prime = 0.0, alpha_prime = 0.0;
  std::uint64_t seed = 0;

  // graph
  GraphOpts graph_opts;
  auto* cmd_graph = app.add_subcommand("graph", "build a graph and print it in the text format");
  add_graph_options(cmd_graph, graph_opts, "--family");
  add_common(cmd_graph, false);

  // simulate
  GraphOpts sim_graph;
  std::string init = "standard", engine = "gillespie";
  std::uint64_t replicas = 1;
  std::optional<std::uint64_t> max_events;
  auto* cmd_sim = app.add_subcommand("simulate", "run the process to fixation (or a stop condition)");
  add_graph_options(cmd_sim, sim_graph, "--graph");
  cmd_sim->add_option("--lambda", lambda, "red spread rate")->capture_default_str();
  cmd_sim->add_option("--alpha", alpha, "red conversion rate")->capture_default_str();
  cmd_sim->add_option("--seed", seed, "base seed")->capture_default_str();
  cmd_sim->add_option("--init", init, "standard (red root), band (torus rows 0/1), classical (extra blue neighbour)")->capture_default_str()
      ->check(CLI::IsMember({"standard", "band", "classical"}));
  cmd_sim->add_option("--engine", engine, "gillespie or per-clock")->capture_default_str()
      ->check(CLI::IsMember({"gillespie", "per-clock"}));
  cmd_sim->add_option("--replicas", replicas, "number of runs; more than one prints a JSON array")->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd_sim->add_option("--max-events", max_events, "stop after this many events");
  add_common(cmd_sim, true);

  // snapshot
  GraphOpts snap_graph;
  std::uint64_t snap_events = 0;
  auto* cmd_snap = app.add_subcommand("snapshot", "state code grid after a number of events (0 white, 1 red, 2 blue by predation, 3 blue by conversion)");
  add_graph_options(cmd_snap, snap_graph, "--graph");
  cmd_snap->add_option("--lambda", lambda, "red spread rate")->capture_default_str();
  cmd_snap->add_option("--alpha", alpha, "red conversion rate")->capture_default_str();
  cmd_snap->add_option("--seed", seed, "seed")->capture_default_str();
  cmd_snap->add_option("--init", init, "standard or band")->capture_default_str()->check(CLI::IsMember({"standard", "band"}));
  cmd_snap->add_option("--events", snap_events, "events to run before the snapshot")->capture_default_str();
  add_common(cmd_snap, false);

  // sweep
  std::string config_path;
  std::string vary_s, geometry_s;
  double fixed = 0.0;
  std::vector<double> grid;
  std::vector<std::uint64_t> sizes;
  std::uint64_t samples = 0;
  bool csv = false;
  auto* cmd_sweep = app.add_subcommand("sweep", "escape probability over a (lambda or alpha) x L grid");
  cmd_sweep->add_option("--config", config_path, "JSON config mirroring the sweep fields; flags override it");
  auto* o_vary = cmd_sweep->add_option("--vary", vary_s, "lambda or alpha")->check(CLI::IsMember({"lambda", "alpha"}));
  auto* o_fixed = cmd_sweep->add_option("--fixed", fixed, "value of the rate that is not varied");
  auto* o_grid = cmd_sweep->add_option("--grid", grid, "increasing comma separated values")->delimiter(',');
  auto* o_sizes = cmd_sweep->add_option("--sizes", sizes, "comma separated side lengths")->delimiter(',');
  auto* o_samples = cmd_sweep->add_option("--samples", samples, "runs per (size, value)");
  auto* o_seed = cmd_sweep->add_option("--seed", seed, "base seed");
  auto* o_geom = cmd_sweep->add_option("--geometry", geometry_s, "cylinder or torus")
                     ->check(CLI::IsMember({"cylinder", "torus"}));
  cmd_sweep->add_flag("--csv", csv, "CSV table instead of JSON");
  add_common(cmd_sweep, true);

  // crossing
  std::string csv_in;
  auto* cmd_cross = app.add_subcommand("crossing", "estimate the crossing of escape curves from a sweep table");
  cmd_cross->add_option("--csv-in", csv_in, "sweep CSV")->required();
  add_common(cmd_cross, false);

  // bounds
  std::uint32_t degree = 3;
  double p_c = 0.5;
  std::optional<double> bound_lambda;
  auto* cmd_bounds = app.add_subcommand("bounds", "critical-rate bracket for graphs of bounded degree");
  auto* o_d = cmd_bounds->add_option("--d", degree, "maximum degree (>= 3)");
  auto* o_alpha_b = cmd_bounds->add_option("--alpha", alpha, "conversion rate");
  auto* o_pc = cmd_bounds->add_option("--pc", p_c, "site percolation threshold of the graph, in (0, 1)");
  cmd_bounds->add_option("--lambda", bound_lambda, "also report the expected damage bound at this lambda");
  add_common(cmd_bounds, false);

  GraphOpts perc_graph;
  std::uint64_t draws = 1000;
  auto* cmd_perc = cmd_bounds->add_subcommand("percolate", "sample the good-site percolation on a graph");
  add_graph_options(cmd_perc, perc_graph, "--graph");
  cmd_perc->add_option("--lambda", lambda, "red spread rate")->capture_default_str();
  cmd_perc->add_option("--alpha", alpha, "red conversion rate")->capture_default_str();
  cmd_perc->add_option("--draws", draws, "independent samples")->capture_default_str()->check(CLI::PositiveNumber);
  cmd_perc->add_option("--seed", seed, "base seed")->capture_default_str();
  add_common(cmd_perc, true);

  // verify
  auto* cmd_verify = app.add_subcommand("verify", "statistical self-checks");
  cmd_verify->require_subcommand(1);

  GraphOpts oracle_graph;
  oracle_graph.n = 200;
  std::uint64_t oracle_samples = 100000;
  auto* cmd_oracle = cmd_verify->add_subcommand(
      "oracle", "chi-square of a reduced sampler against direct simulation (path, star, complete, tree)");
  cmd_oracle->add_option("--graph", oracle_graph.family, "path, star, complete or tree")
      ->required()
      ->check(CLI::IsMember({"path", "star", "complete", "tree"}));
  cmd_oracle->add_option("--n", oracle_graph.n, "path/complete: vertices; star: leaves")->capture_default_str();
  cmd_oracle->add_option("--offspring", oracle_graph.offspring, "tree: children per vertex")->capture_default_str();
  cmd_oracle->add_option("--depth", oracle_graph.depth, "tree: depth")->capture_default_str();
  cmd_oracle->add_option("--lambda", lambda, "red spread rate")->capture_default_str();
  cmd_oracle->add_option("--alpha", alpha, "red conversion rate")->capture_default_str();
  cmd_oracle->add_option("--samples", oracle_samples, "samples per side")->capture_default_str()->check(CLI::PositiveNumber);
  cmd_oracle->add_option("--seed", seed, "base seed")->capture_default_str();
  add_common(cmd_oracle, true);

  std::string coupling;
  std::uint64_t pairs = 10000, n_large = 10;
  std::optional<std::uint64_t> n_small;
  std::uint64_t tree_depth = 6, tree_offspring = 2;
  bool inject = false;
  auto* cmd_dom = cmd_verify->add_subcommand("dominance", "audit a monotone coupling: X' <= X on every pair");
  cmd_dom->add_option("--coupling", coupling, "tree-alpha, jumpchain, star or complete")
      ->required()
      ->check(CLI::IsMember({"tree-alpha", "jumpchain", "star", "complete"}));
  auto* o_lam = cmd_dom->add_option("--lambda", lambda, "larger red rate")->capture_default_str();
  auto* o_lamp = cmd_dom->add_option("--lambda-prime", lambda_prime, "smaller red rate (default: --lambda)");
  auto* o_al = cmd_dom->add_option("--alpha", alpha, "smaller conversion rate")->capture_default_str();
  auto* o_alp = cmd_dom->add_option("--alpha-prime", alpha_prime, "larger conversion rate (default: --alpha)");
  cmd_dom->add_option("--n", n_large, "star: leaves; complete: vertices (larger graph)")->capture_default_str();
  cmd_dom->add_option("--n-prime", n_small, "star/complete: size of the smaller graph (default: --n)");
  cmd_dom->add_option("--depth", tree_depth, "tree-alpha: tree depth")->capture_default_str();
  cmd_dom->add_option("--offspring", tree_offspring, "tree-alpha: children per vertex")->capture_default_str();
  cmd_dom->add_option("--pairs", pairs, "coupled pairs")->capture_default_str()->check(CLI::PositiveNumber);
  cmd_dom->add_option("--seed", seed, "base seed")->capture_default_str();
  cmd_dom->add_flag("--inject-violation", inject, "plant one violating pair (tests the audit itself)");
  add_common(cmd_dom, true);
  (void)o_lam;
  (void)o_al;

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*cmd_graph) {
      emit(out_path, serialize_graph(build_graph(graph_opts)));
      return kExitOk;
    }

    if (*cmd_sim) {
      const Graph g = build_graph(sim_graph);
      const ProcessParams p = validate_params(lambda, alpha);
      const InitSpec spec = parse_init(init);
      RunLimits limits = spec == InitSpec::Band ? band_limits(g) : RunLimits{};
      limits.max_events = max_events;
      const bool per_clock = engine == "per-clock";
      const auto outcomes = run_replicas(
          [&] {
            auto sim = per_clock ? nullptr : std::make_shared<Simulator>(g, p, spec, limits);
            return [&, sim](std::uint64_t, RandomStream& rng) {
              return sim ? sim->run(rng) : per_clock_run(g, p, spec, limits, rng);
            };
          },
          replicas, seed, workers);
      if (replicas == 1) {
        emit(out_path, to_json(outcomes[0]));
      } else {
        json arr = json::array();
        for (const auto& r : outcomes) arr.push_back(to_json(r));
        emit(out_path, arr);
      }
      return kExitOk;
    }

    if (*cmd_snap) {
      const Graph g = build_graph(snap_graph);
      if (!g.rows()) throw Error(ErrorCode::InvalidSpec, "--graph: snapshot needs a torus");
      RunLimits limits;
      limits.max_events = snap_events;
      Simulator sim(g, validate_params(lambda, alpha), parse_init(init), limits);
      RandomStream rng(seed);
      const RunOutcome r = sim.run(rng);
      std::cerr << "snapshot: status " << to_string(r.status) << ", clock " << sim.configuration().clock() << "\n";
      emit(out_path, snapshot_csv(sim.configuration()));
      return kExitOk;
    }

    if (*cmd_sweep) {
      SweepSpec spec;
      if (!config_path.empty()) merge_sweep_spec(parse_json(read_file(config_path), config_path), spec);
      if (o_vary->count()) spec.vary = parse_vary(vary_s);
      override_if(o_fixed, spec.fixed_value, fixed);
      override_if(o_grid, spec.grid, grid);
      override_if(o_sizes, spec.sizes, sizes);
      override_if(o_samples, spec.samples_per_point, samples);
      override_if(o_seed, spec.base_seed, seed);
      if (o_geom->count()) spec.geometry = parse_geometry(geometry_s);
      const auto rows = sweep(spec, workers);
      for (const auto& r : rows)
        if (r.error) std::cerr << "sweep: L=" << r.L << " value=" << r.value << " failed: " << *r.error << "\n";
      if (csv) {
        emit(out_path, sweep_csv(rows));
      } else {
        json arr = json::array();
        for (const auto& r : rows) {
          json j{{"vary", std::string(to_string(r.vary))}, {"value", r.value}, {"L", r.L}, {"n", r.n}};
          if (r.error) {
            j["error"] = *r.error;
          } else {
            j["escaped"] = r.escaped;
            j["p_hat"] = r.p_hat;
            j["ci_low"] = r.ci_low;
            j["ci_high"] = r.ci_high;
          }
          arr.push_back(j);
        }
        emit(out_path, json{{"spec", to_json(spec)}, {"seed_scheme", std::string(kSeedScheme)}, {"rows", arr}});
      }
      return kExitOk;
    }

    if (*cmd_cross) {
      std::vector<EstimateRow> table;
      try {
        table = parse_sweep_csv(read_file(csv_in));
      } catch (const ParseFailure& e) {
        throw Error(e.code(), csv_in + ": " + e.what());
      }
      emit(out_path, to_json(estimate_crossing(table)));
      return kExitOk;
    }

    if (*cmd_perc) {
      const Graph g = build_graph(perc_graph);
      const ProcessParams p = validate_params(lambda, alpha);
      const auto results = run_replicas(
          [&] {
            return [&](std::uint64_t, RandomStream& rng) {
              const auto s = good_site_percolation_sim(g, p, rng);
              return std::pair<std::uint64_t, std::uint64_t>(s.good_count, s.root_cluster_size);
            };
          },
          draws, seed, workers);
      std::uint64_t good = 0, root_good = 0, cluster = 0;
      for (auto [count, root_size] : results) {
        good += count;
        root_good += root_size > 0;
        cluster += root_size;
      }
      const double total = static_cast<double>(draws) * static_cast<double>(g.size());
      json j{{"vertices", g.size()},
             {"max_degree", g.max_degree()},
             {"draws", draws},
             {"good_fraction", static_cast<double>(good) / total},
             {"root_good_fraction", static_cast<double>(root_good) / static_cast<double>(draws)},
             {"mean_root_cluster", static_cast<double>(cluster) / static_cast<double>(draws)}};
      if (g.max_degree() >= 1)
        j["good_prob_lower"] = good_site_prob_lower(lambda, alpha, static_cast<std::uint32_t>(g.max_degree()));
      emit(out_path, j);
      return kExitOk;
    }

    if (*cmd_bounds) {
      for (auto* o : {o_d, o_alpha_b, o_pc})
        if (o->count() == 0) {
          std::cerr << "bounds: " << o->get_name() << " is required\n";
          return kExitUsage;
        }
      json j = to_json(bound_report({degree, alpha, p_c}));
      if (bound_lambda) j["expected_damage_bound"] = to_json(expected_damage_bound(*bound_lambda, alpha, degree));
      emit(out_path, j);
      return kExitOk;
    }

    if (*cmd_oracle) {
      const ProcessParams p = validate_params(lambda, alpha);
      Graph g = oracle_graph.family == "path"       ? build_path(oracle_graph.n)
                : oracle_graph.family == "star"     ? build_star(oracle_graph.n)
                : oracle_graph.family == "complete" ? build_complete(oracle_graph.n)
                                                    : build_regular_tree(oracle_graph.offspring, oracle_graph.depth);
      const std::string fam = oracle_graph.family;
      const auto direct = run_replicas(
          [&] {
            return [sim = std::make_shared<Simulator>(g, p, InitSpec::StandardRoot)](std::uint64_t, RandomStream& rng) {
              return sim->run(rng).damage;
            };
          },
          oracle_samples, derive_seed(seed, {0}), workers);
      std::shared_ptr<const RootedTree> tree;
      if (fam == "tree") tree = std::make_shared<const RootedTree>(g);
      const auto reduced = run_replicas(
          [&] {
            return [&](std::uint64_t, RandomStream& rng) -> std::uint64_t {
              if (fam == "path") return sample_X_via_jump_chain(p, rng);
              if (fam == "star") return star_sample_X(oracle_graph.n, p, rng);
              if (fam == "complete") return complete_sample_X(oracle_graph.n, p, rng);
              return tree_passage_sample(*tree, p, rng).damage;
            };
          },
          oracle_samples, derive_seed(seed, {1}), workers);
      const ChiSquareResult r = distribution_compare(reduced, direct);
      json j{{"graph", fam}, {"samples", oracle_samples}};
      j.update(to_json(r));
      emit(out_path, j);
      if (!r.pass) std::cerr << "verify oracle: chi-square rejects equality (p = " << r.p_value << ")\n";
      return r.pass ? kExitOk : kExitVerify;
    }

    if (*cmd_dom) {
      if (o_lamp->count() == 0) lambda_prime = lambda;
      if (o_alp->count() == 0) alpha_prime = alpha;
      const std::uint64_t n_prime = n_small.value_or(n_large);
      std::shared_ptr<const RootedTree> tree;
      if (coupling == "tree-alpha") tree = std::make_shared<const RootedTree>(build_regular_tree(tree_offspring, tree_depth));
      auto one = [&](RandomStream& rng) -> CoupledPair {
        if (coupling == "tree-alpha") return tree_alpha_coupling(*tree, lambda, alpha, alpha_prime, rng).pair;
        if (coupling == "jumpchain") return jumpchain_coupling(lambda, lambda_prime, alpha, alpha_prime, rng).pair;
        if (coupling == "star") return star_coupling(n_large, n_prime, lambda, lambda_prime, alpha, alpha_prime, rng).pair;
        return complete_coupling(n_large, n_prime, lambda, lambda_prime, alpha, alpha_prime, rng).pair;
      };
      {
        // Parameter order errors surface before any threads start.
        RandomStream probe(seed);
        one(probe);
      }
      auto results = run_replicas([&] { return [&](std::uint64_t, RandomStream& rng) { return one(rng); }; }, pairs,
                                  seed, workers);
      if (inject) {
        results[0].x_small = results[0].x_large + 1;
        std::cerr << "verify dominance: planted a violation at pair 0\n";
      }
      const DominanceReport rep = verify_dominance(results);
      json j{{"coupling", coupling},
             {"lambda", lambda},
             {"lambda_prime", lambda_prime},
             {"alpha", alpha},
             {"alpha_prime", alpha_prime}};
      if (coupling == "star" || coupling == "complete") {
        j["n"] = n_large;
        j["n_prime"] = n_prime;
      }
      if (coupling == "tree-alpha") {
        j["offspring"] = tree_offspring;
        j["depth"] = tree_depth;
      }
      j.update(to_json(rep));
      emit(out_path, j);
      if (!rep.pass) std::cerr << "verify dominance: " << rep.n_violations << " violating pairs\n";
      return rep.pass ? kExitOk : kExitVerify;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitUsage;
}
