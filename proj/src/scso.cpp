#include "scso/scso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scso/errors.hpp"
#include "scso/surrogate.hpp"

namespace scso {

void RunLog::add(int cycle, int subnetwork, double fitness) {
  SimRecord r;
  r.sim_index = static_cast<long>(records.size()) + 1;
  r.cycle = cycle;
  r.subnetwork = subnetwork;
  r.candidate_fitness = fitness;
  r.best_so_far = records.empty() ? fitness : std::min(records.back().best_so_far, fitness);
  records.push_back(r);
}

double RunLog::best() const {
  if (records.empty())
    throw IndexError("run log is empty");
  return records.back().best_so_far;
}

std::vector<double> RunLog::best_history() const {
  std::vector<double> h;
  h.reserve(records.size());
  for (const auto& r : records) h.push_back(r.best_so_far);
  return h;
}

std::vector<long> allocate_budget(long total, int cycles, int subnetworks) {
  if (cycles < 1 || subnetworks < 1)
    throw BudgetTooSmall("need at least one cycle and one sub-network");
  const long visits = static_cast<long>(cycles) * subnetworks;
  if (total < visits)
    throw BudgetTooSmall("budget " + std::to_string(total) + " cannot cover " +
                         std::to_string(visits) + " sub-network visits");
  const long base = total / visits;
  const long extra = total % visits;
  std::vector<long> out(static_cast<std::size_t>(visits), base);
  for (long i = 0; i < extra; ++i) out[static_cast<std::size_t>(i)] += 1;
  return out;
}

std::vector<int> round_plan(const Eigen::VectorXd& x, const PlanBounds& bounds) {
  std::vector<int> out(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const int v = static_cast<int>(std::round(x(i)));  // halves away from zero
    out[static_cast<std::size_t>(i)] = std::clamp(v, bounds.lower, bounds.upper);
  }
  return out;
}

bool SubDatabase::contains(const Eigen::VectorXd& p) const {
  for (const auto& q : points)
    if ((q - p).cwiseAbs().maxCoeff() < 1e-9) return true;
  return false;
}

int SubDatabase::best_index() const {
  if (values.empty())
    throw IndexError("sub-network database is empty");
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

namespace {

Eigen::VectorXd to_vector(const std::vector<int>& v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = v[i];
  return x;
}

std::vector<int> to_ints(const Eigen::VectorXd& x) {
  // Database points hold exact integers; rounding just undoes the storage type.
  std::vector<int> v(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i)
    v[static_cast<std::size_t>(i)] = static_cast<int>(std::llround(x(i)));
  return v;
}

// Nudges one random coordinate by +-1 (clamped) until the point leaves the
// database. Bounded retries; a persistent duplicate is accepted because the
// surrogate fit averages duplicates anyway.
Eigen::VectorXd perturb_until_fresh(const SubDatabase& db, Eigen::VectorXd x,
                                    const PlanBounds& bounds, Rng& rng) {
  for (int attempt = 0; attempt < 1000 && db.contains(x); ++attempt) {
    const Eigen::Index c = rng.uniform_int(0, static_cast<int>(x.size()) - 1);
    const double step = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    x(c) = std::clamp(x(c) + step, static_cast<double>(bounds.lower),
                      static_cast<double>(bounds.upper));
  }
  return x;
}

}  // namespace

SubDatabase optimize_subnetwork(Evaluator& evaluator, const Partition& partition, int group,
                                const SignalPlan& context, long budget, const ScsoConfig& config,
                                Rng& rng, RunLog& log, int cycle_number) {
  const int n = partition.subplan_dims(group);
  const long k = static_cast<long>(config.seeds_per_dim) * n;
  if (budget < k)
    throw BudgetTooSmall("visit budget " + std::to_string(budget) + " cannot seed " +
                         std::to_string(k) + " database points");

  SubDatabase db;
  long used = 0;

  auto simulate_subplan = [&](const std::vector<int>& sub) {
    const SignalPlan full = insert_subplan(context, sub, partition, group);
    const double fitness = evaluator.evaluate(full);
    db.points.push_back(to_vector(sub));
    db.values.push_back(fitness);
    log.add(cycle_number, group + 1, fitness);
    ++used;
  };

  for (long s = 0; s < k; ++s) {
    std::vector<int> sub(static_cast<std::size_t>(n));
    for (auto& d : sub) d = rng.uniform_int(config.bounds.lower, config.bounds.upper);
    simulate_subplan(sub);
  }

  const Box box = Box::uniform(n, config.bounds.lower, config.bounds.upper);
  while (used < budget) {
    Eigen::VectorXd candidate;
    bool have_candidate = false;
    try {
      Eigen::MatrixXd pts(static_cast<Eigen::Index>(db.points.size()), n);
      Eigen::VectorXd vals(static_cast<Eigen::Index>(db.values.size()));
      for (std::size_t i = 0; i < db.points.size(); ++i) {
        pts.row(static_cast<Eigen::Index>(i)) = db.points[i];
        vals(static_cast<Eigen::Index>(i)) = db.values[i];
      }
      const RbfModel model = train_rbf(pts, vals);
      const Eda2Result search = run_eda2(RbfObjective(model), box, config.eda2, rng);
      candidate = to_vector(round_plan(search.best_point, config.bounds));
      have_candidate = true;
    } catch (const SingularSystem&) {
      // Degenerate geometry: fall back to a local step off the incumbent.
    } catch (const TooFewPoints&) {
      // Duplicate seeds can leave the database too thin to fit; same fallback.
    }
    if (!have_candidate)
      candidate = db.points[static_cast<std::size_t>(db.best_index())];
    if (!have_candidate || db.contains(candidate))
      candidate = perturb_until_fresh(db, candidate, config.bounds, rng);
    simulate_subplan(to_ints(candidate));
  }
  return db;
}

ScsoResult run_scso(Evaluator& evaluator, const PlanLayout& layout, const Partition& partition,
                    const ScsoConfig& config, Rng& rng) {
  if (!partition.bound())
    throw ValidationError("partition must have a bound layout");
  const int m = partition.group_count;

  // The initial context evaluation is charged, so the visits share the rest.
  const std::vector<long> visit_budget =
      allocate_budget(config.max_evaluations - 1, config.cycles, m);
  for (int g = 0; g < m; ++g) {
    const long k = static_cast<long>(config.seeds_per_dim) * partition.subplan_dims(g);
    for (int c = 0; c < config.cycles; ++c)
      if (visit_budget[static_cast<std::size_t>(c) * m + g] < k)
        throw BudgetTooSmall("visit budget for sub-network " + std::to_string(g + 1) +
                             " cannot cover its " + std::to_string(k) + " seeds");
  }

  ScsoResult res;
  res.best_plan = midpoint_plan(layout, config.bounds);
  res.best_fitness = evaluator.evaluate(res.best_plan);
  res.log.add(0, 0, res.best_fitness);

  for (int cycle = 1; cycle <= config.cycles; ++cycle) {
    for (int g = 0; g < m; ++g) {
      const long budget = visit_budget[static_cast<std::size_t>(cycle - 1) * m + g];
      RunLog::VisitRecord visit;
      visit.cycle = cycle;
      visit.subnetwork = g + 1;
      visit.before = res.best_fitness;

      const SubDatabase db = optimize_subnetwork(evaluator, partition, g, res.best_plan, budget,
                                                 config, rng, res.log, cycle);

      const int bi = db.best_index();
      if (db.values[static_cast<std::size_t>(bi)] < res.best_fitness) {
        res.best_plan = insert_subplan(res.best_plan,
                                       to_ints(db.points[static_cast<std::size_t>(bi)]),
                                       partition, g);
        res.best_fitness = db.values[static_cast<std::size_t>(bi)];
      }
      visit.after = res.best_fitness;
      res.log.visits.push_back(visit);
    }
  }
  return res;
}

}  // namespace scso
