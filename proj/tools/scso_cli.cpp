#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scso/decomposer.hpp"
#include "scso/errors.hpp"
#include "scso/harness.hpp"
#include "scso/microsim.hpp"
#include "scso/net_model.hpp"

using namespace scso;

namespace {

int cmd_run(const ExperimentSpec& spec) {
  const auto res = run_experiment(spec);
  std::printf("algo=%s scenario=%s seeds=%zu budget=%ld\n", algo_name(spec.algo),
              spec.scenario_path.c_str(), spec.seeds.size(), spec.scso.max_evaluations);
  for (const auto& o : res.outcomes)
    std::printf("  seed %llu: final %.6f (%ld sims, %.2fs sim + %.2fs other)\n",
                static_cast<unsigned long long>(o.seed), o.final_fitness, o.sims_used,
                o.sim_wall_s, o.other_wall_s);
  std::printf("median final fitness: %.6f\n", res.median_final);
  std::printf("outputs in %s\n", spec.out_dir.c_str());
  return 0;
}

int cmd_decompose(const std::string& scenario_path, const std::string& out_path) {
  const auto scenario = load_scenario(scenario_path);
  const auto part = newman_fast(build_junction_graph(scenario));
  write_partition(part, out_path);
  std::printf("%d junctions -> %d sub-networks, modularity %.6f\n",
              static_cast<int>(scenario.junctions.size()), part.group_count, part.modularity_q);
  std::printf("partition written to %s\n", out_path.c_str());
  return 0;
}

int cmd_simulate(const std::string& scenario_path, const std::string& plan_path,
                 std::uint64_t seed, int horizon) {
  const auto scenario = load_scenario(scenario_path);
  const auto plan = load_plan(plan_path);
  SimConfig config;
  config.seed = seed;
  config.horizon_s = horizon;
  const auto res = simulate(scenario, plan, config);
  std::printf("horizon %d s, seed %llu\n", horizon, static_cast<unsigned long long>(seed));
  std::printf("vehicles: %ld entered, %ld exited, %ld still in network\n", res.vehicles_entered,
              res.vehicles_exited, res.vehicles_in_network);
  std::printf("total delay %.3f s, average delay %.6f s/vehicle\n", res.total_delay_s,
              res.avg_delay_s);
  return 0;
}

int cmd_ranksum(const std::string& a_path, const std::string& b_path) {
  const auto a = load_sample(a_path);
  const auto b = load_sample(b_path);
  const auto r = wilcoxon_ranksum(a, b);
  std::printf("n=%zu m=%zu U=%.1f\n", a.size(), b.size(), r.u);
  std::printf("two-sided p = %.6g (%s)%s\n", r.p,
              r.exact ? "exact enumeration" : "normal approximation with tie correction",
              r.degenerate ? " [degenerate: all values equal]" : "");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative surrogate-assisted signal plan optimizer"};
  app.require_subcommand(1);

  // run
  ExperimentSpec spec;
  std::string decompose_method = "newman";
  int horizon = 500;
  auto* run = app.add_subcommand("run", "Optimize a scenario over a batch of seeds");
  run->add_option("--scenario", spec.scenario_path, "Scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  std::string algo_str = "scso";
  run->add_option("--algo", algo_str, "scso, eda2-global, or random")
      ->check(CLI::IsMember({"scso", "eda2-global", "random"}));
  auto* part_opt =
      run->add_option("--partition", spec.partition_path, "Partition JSON file")
          ->check(CLI::ExistingFile);
  run->add_option("--decompose", decompose_method, "Graph decomposition method")
      ->check(CLI::IsMember({"newman"}))
      ->excludes(part_opt);
  run->add_option("--cycles", spec.scso.cycles, "Passes over all sub-networks")
      ->check(CLI::PositiveNumber);
  run->add_option("--budget", spec.scso.max_evaluations, "Total simulator calls")
      ->check(CLI::PositiveNumber);
  run->add_option("--seeds", spec.seeds, "Run seeds, comma separated")
      ->required()
      ->delimiter(',');
  run->add_option("--out", spec.out_dir, "Output directory")->required();
  run->add_option("--horizon", horizon, "Simulated seconds per evaluation")
      ->check(CLI::PositiveNumber);
  run->add_option("--population", spec.scso.eda2.population, "Search population size")
      ->check(CLI::PositiveNumber);
  run->add_option("--iterations", spec.scso.eda2.max_iterations, "Search iterations per fit")
      ->check(CLI::PositiveNumber);

  // decompose
  std::string dec_scenario, dec_out;
  auto* dec = app.add_subcommand("decompose", "Split a scenario into sub-networks");
  dec->add_option("--scenario", dec_scenario, "Scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  dec->add_option("--out", dec_out, "Partition file to write")->required();

  // simulate
  std::string sim_scenario, sim_plan;
  std::uint64_t sim_seed = 0;
  int sim_horizon = 500;
  auto* sim = app.add_subcommand("simulate", "Score one signal plan");
  sim->add_option("--scenario", sim_scenario, "Scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--plan", sim_plan, "Plan JSON file")->required()->check(CLI::ExistingFile);
  sim->add_option("--seed", sim_seed, "Arrival stream seed");
  sim->add_option("--horizon", sim_horizon, "Simulated seconds")->check(CLI::PositiveNumber);

  // stats ranksum
  std::string stat_a, stat_b;
  auto* stats = app.add_subcommand("stats", "Statistical comparisons");
  auto* ranksum = stats->add_subcommand("ranksum", "Two-sided rank-sum test");
  ranksum->add_option("--a", stat_a, "First sample (summary CSV or number list)")
      ->required()
      ->check(CLI::ExistingFile);
  ranksum->add_option("--b", stat_b, "Second sample")->required()->check(CLI::ExistingFile);
  stats->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      spec.algo = parse_algo(algo_str);
      spec.sim.horizon_s = horizon;
      return cmd_run(spec);
    }
    if (dec->parsed()) return cmd_decompose(dec_scenario, dec_out);
    if (sim->parsed()) return cmd_simulate(sim_scenario, sim_plan, sim_seed, sim_horizon);
    if (stats->parsed()) return cmd_ranksum(stat_a, stat_b);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
