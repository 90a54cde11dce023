#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scso/microsim.hpp"
#include "scso/net_model.hpp"
#include "scso/rng.hpp"
#include "scso/scso.hpp"

namespace scso {

enum class Algo { Scso, Eda2Global, Random };

const char* algo_name(Algo a);
Algo parse_algo(const std::string& s);

/// Outcome shared by all three search algorithms: the winning plan, its
/// fitness, and one log row per simulator call.
struct SearchResult {
  SignalPlan best_plan;
  double best_fitness = 0.0;
  RunLog log;
};

/// Samples `budget` uniform integer plans and keeps the best (earliest on
/// ties).
SearchResult random_search(Evaluator& evaluator, const PlanLayout& layout,
                           const PlanBounds& bounds, long budget, Rng& rng);

/// Runs the Gaussian-model search directly on the full-dimensional
/// objective. Each proposed point is rounded to an integer plan before
/// evaluation; the model update still sees the raw points. Stops mid
/// generation when the budget runs out (that partial generation is not fed
/// back into the model).
SearchResult eda2_global(Evaluator& evaluator, const PlanLayout& layout, const PlanBounds& bounds,
                         long budget, const Eda2Config& config, Rng& rng);

struct RankSumResult {
  double u = 0.0;          // rank-sum U statistic of the first sample
  double p = 1.0;          // two-sided
  bool exact = false;      // exact enumeration vs normal approximation
  bool degenerate = false; // every value across both samples equal
};

/// Two-sided rank-sum test with midranks for ties. Exact enumeration of all
/// C(n+m, n) group assignments when that count is at most 1e6, otherwise a
/// normal approximation with tie and continuity corrections. Two identical
/// constant samples are flagged degenerate with p = 1.
RankSumResult wilcoxon_ranksum(const std::vector<double>& a, const std::vector<double>& b);

struct ExperimentSpec {
  std::string scenario_path;
  Algo algo = Algo::Scso;
  std::string partition_path;  // empty: decompose the scenario graph
  ScsoConfig scso;             // cycles, budget, bounds, model settings
  SimConfig sim;               // per-seed: sim.seed is overwritten by each run seed
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  double final_fitness = 0.0;
  long sims_used = 0;
  double sim_wall_s = 0.0;    // wall time inside evaluator calls
  double other_wall_s = 0.0;  // everything else in the run
};

struct ExperimentResult {
  std::vector<SeedOutcome> outcomes;  // in spec.seeds order
  double median_final = 0.0;
};

/// Runs one algorithm over every seed (seeds may run on separate threads),
/// writing <out_dir>/runlog_<algo>_seed<seed>.csv as each seed finishes and
/// <out_dir>/summary.csv (per-seed rows plus a trailing median row) at the
/// end. Log files depend only on the experiment settings and the seed; the
/// summary's wall-time
/// columns necessarily vary between reruns.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Repeats the experiment for each pass count in `cycle_values` (output in
/// <out_dir>/c<value>/) and writes <out_dir>/sweep.csv with one median row
/// per value. Returns the medians in input order.
std::vector<double> run_c_sweep(const ExperimentSpec& spec, const std::vector<int>& cycle_values);

double median(std::vector<double> v);

/// Plan file: JSON array of integers.
SignalPlan load_plan(const std::string& path);
void write_plan(const SignalPlan& plan, const std::string& path);

/// Reads a fitness sample for the rank-sum command: either a summary CSV
/// (the final_fitness column of the per-seed rows) or a plain list of
/// numbers, one per line.
std::vector<double> load_sample(const std::string& path);

void write_runlog_csv(const RunLog& log, const std::string& path);
RunLog read_runlog_csv(const std::string& path);

}  // namespace scso
