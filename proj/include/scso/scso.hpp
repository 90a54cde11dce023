#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "scso/eda2.hpp"
#include "scso/microsim.hpp"
#include "scso/net_model.hpp"
#include "scso/partition.hpp"
#include "scso/rng.hpp"

namespace scso {

struct ScsoConfig {
  int cycles = 2;              // passes over all sub-networks
  long max_evaluations = 5000; // total simulator calls, consumed exactly
  int seeds_per_dim = 3;       // database seeding: k = seeds_per_dim * dims
  PlanBounds bounds;
  Eda2Config eda2;             // surrogate search settings
};

/// One row per simulator call; best_so_far is the running minimum.
struct RunLog {
  struct SimRecord {
    long sim_index = 0;  // 1-based
    int cycle = 0;       // 0 for the initial context evaluation
    int subnetwork = 0;  // 1-based; 0 for the initial context evaluation
    double candidate_fitness = 0.0;
    double best_so_far = 0.0;
  };
  /// Context fitness before and after one sub-network visit.
  struct VisitRecord {
    int cycle = 0;
    int subnetwork = 0;  // 1-based
    double before = 0.0;
    double after = 0.0;
  };

  std::vector<SimRecord> records;
  std::vector<VisitRecord> visits;

  void add(int cycle, int subnetwork, double fitness);
  double best() const;
  std::vector<double> best_history() const;  // best_so_far column as a vector
};

/// Splits `total` evaluations over cycles x m sub-network visits in cycle
/// order: every visit gets floor(total / (cycles * m)), and the remainder
/// grants one extra to the earliest visits.
std::vector<long> allocate_budget(long total, int cycles, int subnetworks);

/// Nearest integers (halves away from zero), clamped into the bounds.
std::vector<int> round_plan(const Eigen::VectorXd& x, const PlanBounds& bounds);

/// Database of sub-plans simulated within one fixed context.
struct SubDatabase {
  std::vector<Eigen::VectorXd> points;  // integer-valued sub-plans
  std::vector<double> values;

  bool contains(const Eigen::VectorXd& p) const;
  int best_index() const;  // lowest value, earliest on ties
};

/// One sub-network visit: seeds the database with k = seeds_per_dim * n
/// random integer sub-plans evaluated in context, then alternates surrogate
/// fit / surrogate search / rounding / simulation until exactly `budget`
/// evaluator calls are spent. A candidate that already sits in the database
/// is nudged by +-1 on one random coordinate before simulation.
SubDatabase optimize_subnetwork(Evaluator& evaluator, const Partition& partition, int group,
                                const SignalPlan& context, long budget, const ScsoConfig& config,
                                Rng& rng, RunLog& log, int cycle_number);

struct ScsoResult {
  SignalPlan best_plan;
  double best_fitness = 0.0;
  RunLog log;
};

/// Cooperative loop: the shared context starts at the midpoint plan (one
/// charged evaluation), then every cycle visits each sub-network in
/// ascending order, re-seeding its database and adopting its best sub-plan
/// into the context only on improvement. Spends config.max_evaluations
/// simulator calls exactly.
ScsoResult run_scso(Evaluator& evaluator, const PlanLayout& layout, const Partition& partition,
                    const ScsoConfig& config, Rng& rng);

}  // namespace scso
