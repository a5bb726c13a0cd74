// Command-line front door: instance I/O, equilibrium solving, region
// enumeration, online-learning simulation, the benchmark preset, and the
// cross-oracle self-check. Exit codes: 0 success, 1 validation/usage error,
// 2 cap or horizon error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bsg/game.hpp"
#include "bsg/geometry.hpp"
#include "bsg/harness.hpp"
#include "bsg/io.hpp"
#include "bsg/learners.hpp"
#include "bsg/solvers.hpp"

namespace {

struct InstanceArgs {
  std::string path;
  std::string gen;
};

void add_instance_flags(CLI::App* cmd, InstanceArgs& args) {
  auto* p = cmd->add_option("--instance", args.path, "instance JSON file");
  auto* g = cmd->add_option("--gen", args.gen,
                            "generator spec (see README for the grammar)");
  p->excludes(g);
}

bsg::GameInstance resolve_instance(const InstanceArgs& args) {
  if (!args.gen.empty()) return bsg::make_from_gen_spec(args.gen);
  if (!args.path.empty()) return bsg::load_instance(args.path);
  throw bsg::ValidationError("need --instance or --gen");
}

void print_strategy(const char* label, const bsg::MixedStrategy& x) {
  std::printf("%s", label);
  for (int l = 0; l < x.size(); ++l) std::printf(" %.6f", x(l));
  std::printf("\n");
}

void print_mapping(const char* label, const bsg::BestResponseMapping& w) {
  std::printf("%s", label);
  for (int i = 0; i < w.followers(); ++i)
    for (int k = 0; k < w.type_count(); ++k) std::printf(" %d", w.at(i, k));
  std::printf("\n");
}

int cmd_solve(const InstanceArgs& inst_args) {
  const bsg::GameInstance game = resolve_instance(inst_args);
  const bsg::Equilibrium eq =
      bsg::offline_optimal(game.view(), game.distribution());
  std::printf("value %.6f\n", eq.value);
  print_strategy("x_star", eq.x_star);
  print_mapping("mapping", eq.mapping);
  return 0;
}

int cmd_regions(const InstanceArgs& inst_args) {
  const bsg::GameInstance game = resolve_instance(inst_args);
  const std::vector<bsg::Region> regions =
      bsg::enumerate_regions(game.view());
  std::printf("regions %zu\n", regions.size());
  for (std::size_t r = 0; r < regions.size(); ++r) {
    std::printf("region %zu slack %.6g witness", r, regions[r].slack);
    for (int l = 0; l < regions[r].witness.size(); ++l)
      std::printf(" %.6f", regions[r].witness(l));
    std::printf(" mapping");
    const auto& w = regions[r].mapping;
    for (int i = 0; i < w.followers(); ++i)
      for (int k = 0; k < w.type_count(); ++k) std::printf(" %d", w.at(i, k));
    std::printf("\n");
  }
  return 0;
}

int cmd_simulate(const InstanceArgs& inst_args, const std::string& learner,
                 const std::string& feedback, int horizon,
                 std::uint64_t seed, int reps, const std::string& out_path) {
  const bsg::GameInstance game = resolve_instance(inst_args);
  bsg::ExperimentConfig cfg;
  cfg.learner = learner;
  cfg.mode = feedback == "action" ? bsg::FeedbackMode::kAction
                                  : bsg::FeedbackMode::kType;
  if (feedback != "action" && feedback != "type")
    throw bsg::ValidationError("--feedback must be type|action");
  cfg.horizon = horizon;
  cfg.seeds = {seed};
  cfg.replications = reps;

  const std::vector<bsg::RegretTrace> traces = bsg::run_experiment(game, cfg);
  if (out_path.empty()) {
    bsg::write_trace_csv(std::cout, traces);
  } else {
    std::ofstream out(out_path);
    if (!out) throw bsg::ValidationError("cannot write " + out_path);
    bsg::write_trace_csv(out, traces);
    std::printf("wrote %s (%d runs x %d rounds)\n", out_path.c_str(), reps,
                horizon);
  }
  return 0;
}

// Mean cumulative regret per round with a 90% normal CI, for the two
// learners of the requested feedback mode on the benchmark preset.
int cmd_bench(const std::string& feedback, int horizon, int reps,
              std::uint64_t seed, const std::string& out_path) {
  const bsg::GameInstance game = bsg::make_bench_instance();
  const bool action = feedback == "action";
  if (!action && feedback != "type")
    throw bsg::ValidationError("--feedback must be type|action");
  const std::vector<std::string> learners =
      action ? std::vector<std::string>{"ucb", "linbandit"}
             : std::vector<std::string>{"tf-general", "tf-independent"};

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw bsg::ValidationError("cannot write " + out_path);
    out = &file;
  }
  (*out) << "learner,round,mean_cum_regret,ci_lo,ci_hi\n";

  for (const std::string& name : learners) {
    bsg::ExperimentConfig cfg;
    cfg.learner = name;
    cfg.mode = action ? bsg::FeedbackMode::kAction : bsg::FeedbackMode::kType;
    cfg.horizon = horizon;
    cfg.seeds = {seed};
    cfg.replications = reps;
    const auto traces = bsg::run_experiment(game, cfg);

    char buf[160];
    for (int t = 0; t < horizon; ++t) {
      double mean = 0.0, m2 = 0.0;
      for (const auto& tr : traces) {
        const double v = tr.rows[static_cast<std::size_t>(t)].cumulative_regret;
        mean += v;
        m2 += v * v;
      }
      mean /= reps;
      const double var = std::max(0.0, m2 / reps - mean * mean);
      const double half = 1.6449 * std::sqrt(var / reps);  // 90% CI
      std::snprintf(buf, sizeof(buf), "%s,%d,%.8g,%.8g,%.8g\n", name.c_str(),
                    t + 1, mean, mean - half, mean + half);
      (*out) << buf;
    }
    std::fprintf(stderr, "bench: %s final mean cumulative regret %.4f\n",
                 name.c_str(),
                 [&] {
                   double m = 0.0;
                   for (const auto& tr : traces) m += tr.rows.back().cumulative_regret;
                   return m / reps;
                 }());
  }
  return 0;
}

bool check(const char* label, bool ok) {
  std::printf("%-58s %s\n", label, ok ? "PASS" : "FAIL");
  return ok;
}

// A quick cross-oracle suite: offline vs grid search, offline vs the LP
// reformulation, region enumeration vs sampling, and the closed-form
// hard-instance identities.
int cmd_oracle_check(int seeds, double grid) {
  bool all = true;

  {
    bool ok = true;
    for (int s = 1; s <= seeds; ++s) {
      const auto game = bsg::gen_random_instance(
          1 + (s % 2), 2 + (s % 2), 2, 1 + (s % 3),
          s % 2 ? bsg::DistKind::kGeneral : bsg::DistKind::kIndependent,
          static_cast<std::uint64_t>(s));
      const auto eq = bsg::offline_optimal(game.view(), game.distribution());
      const auto brute =
          bsg::brute_force_optimal(game.view(), game.distribution(), grid);
      if (std::fabs(eq.value - brute.second) > 2e-3) ok = false;
    }
    all &= check("offline optimum vs grid search", ok);
  }
  {
    bool ok = true;
    for (int s = 1; s <= seeds; ++s) {
      const auto game = bsg::gen_random_instance(
          1, 2, 2, 1 + (s % 2), bsg::DistKind::kGeneral,
          static_cast<std::uint64_t>(100 + s));
      const auto eq = bsg::offline_optimal(game.view(), game.distribution());
      const auto reform =
          bsg::lp_reform_optimal(game.view(), game.distribution());
      if (std::fabs(eq.value - reform.value) > 1e-6) ok = false;
    }
    all &= check("offline optimum vs LP reformulation", ok);
  }
  {
    bool ok = true;
    for (int s = 1; s <= seeds; ++s) {
      const auto game = bsg::gen_random_instance(
          2, 2, 2, 2, bsg::DistKind::kGeneral, static_cast<std::uint64_t>(200 + s));
      const auto regions = bsg::enumerate_regions(game.view());
      for (const auto& w :
           bsg::sample_regions(game.view(), 2000, static_cast<std::uint64_t>(s)))
        if (bsg::region_index_of(regions, w) < 0) ok = false;
    }
    all &= check("sampled regions covered by enumeration", ok);
  }
  {
    bool ok = true;
    const auto game = bsg::make_g1();
    bsg::SplitMix64 rng =
        bsg::make_stream(7, 0, bsg::StreamPurpose::kAux);
    const auto opt =
        bsg::offline_optimal(game.view(), game.distribution()).value;
    for (int t = 0; t < 50; ++t) {
      const bsg::MixedStrategy x(bsg::sample_simplex(rng, 2));
      const double u = bsg::leader_expected_utility(x, game.distribution(), game.view());
      const double expect =
          opt - 0.2 * bsg::disagree(x, game.distribution());
      if (std::fabs(u - expect) > 1e-12) ok = false;
    }
    all &= check("hard-instance regret identity", ok);
  }

  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-follower Bayesian Stackelberg games: equilibria and "
               "online learning"};
  app.require_subcommand(1);

  InstanceArgs inst;
  std::string learner = "tf-general";
  std::string feedback = "type";
  int horizon = 1000;
  std::uint64_t seed = 1;
  int reps = 1;
  std::string out_path;
  double grid = 0.01;
  int check_seeds = 10;

  auto* solve = app.add_subcommand("solve", "compute the leader's optimal strategy");
  add_instance_flags(solve, inst);

  auto* regions = app.add_subcommand("regions", "enumerate best-response regions");
  add_instance_flags(regions, inst);

  auto* simulate = app.add_subcommand("simulate", "run an online learner and write a trace");
  add_instance_flags(simulate, inst);
  simulate->add_option("--learner", learner,
                       "tf-general|tf-independent|ucb|linbandit|fixed:p0,p1,...");
  simulate->add_option("--feedback", feedback, "type|action");
  simulate->add_option("-T", horizon, "rounds per run");
  simulate->add_option("--seed", seed, "root seed");
  simulate->add_option("--reps", reps, "replications");
  simulate->add_option("--out", out_path, "trace CSV path (default stdout)");

  auto* bench = app.add_subcommand(
      "bench", "pair comparison on the benchmark preset (L=2,K=6,A=2,n=2)");
  bench->add_option("--feedback", feedback, "type|action");
  bench->add_option("-T", horizon, "rounds per run");
  bench->add_option("--reps", reps, "replications");
  bench->add_option("--seed", seed, "root seed");
  bench->add_option("--out", out_path, "summary CSV path (default stdout)");

  auto* oracle = app.add_subcommand("oracle-check", "run the cross-oracle suite");
  oracle->add_option("--seeds", check_seeds, "instances per check");
  oracle->add_option("--grid", grid, "grid step for the brute-force oracle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  try {
    if (solve->parsed()) return cmd_solve(inst);
    if (regions->parsed()) return cmd_regions(inst);
    if (simulate->parsed())
      return cmd_simulate(inst, learner, feedback, horizon, seed, reps, out_path);
    if (bench->parsed()) return cmd_bench(feedback, horizon, reps, seed, out_path);
    if (oracle->parsed()) return cmd_oracle_check(check_seeds, grid);
  } catch (const bsg::CapExceededError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const bsg::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
