#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "scso/decomposer.hpp"
#include "scso/errors.hpp"
#include "scso/net_model.hpp"
#include "scso/partition.hpp"
#include "scso/rng.hpp"
#include "scso/scso.hpp"

using namespace scso;

namespace {

std::string data_path(const std::string& file) {
  return std::string(SCSO_DATA_DIR) + "/" + file;
}

PlanLayout make_layout(const std::vector<std::pair<std::string, int>>& junctions) {
  PlanLayout l;
  int off = 0;
  for (const auto& [id, phases] : junctions) {
    PlanLayout::Slot s;
    s.junction_id = id;
    s.offset = off;
    s.phases = phases;
    l.slots.push_back(s);
    off += phases;
  }
  l.total_dims = off;
  return l;
}

/// Deterministic stand-in for the simulator: any scalar function of the
/// plan, optionally recording every plan it was asked to score.
class MockEvaluator : public Evaluator {
 public:
  MockEvaluator(int dims, std::function<double(const SignalPlan&)> fn, bool record = false)
      : fn_(std::move(fn)), dims_(dims), record_(record) {}

  int dims() const override { return dims_; }

  std::vector<SignalPlan> seen;

 private:
  double do_evaluate(const SignalPlan& plan) override {
    if (static_cast<int>(plan.size()) != dims_)
      throw DimensionMismatch("mock evaluator got a plan of the wrong size");
    if (record_) seen.push_back(plan);
    return fn_(plan);
  }

  std::function<double(const SignalPlan&)> fn_;
  int dims_;
  bool record_;
};

double sum_sq_from(const SignalPlan& plan, double target) {
  double s = 0.0;
  for (int v : plan) {
    const double d = static_cast<double>(v) - target;
    s += d * d;
  }
  return s;
}

Eda2Config light_search() {
  Eda2Config e;
  e.population = 16;
  e.max_iterations = 8;
  e.archive_length = 5;
  return e;
}

}  // namespace

TEST_CASE("allocate_budget splits evenly and grants the remainder to the earliest visits") {
  {
    const auto b = allocate_budget(5000, 2, 5);
    REQUIRE(b.size() == 10);
    for (long v : b) CHECK(v == 500);
  }
  {
    const auto b = allocate_budget(5000, 1, 1);
    REQUIRE(b.size() == 1);
    CHECK(b[0] == 5000);
  }
  {
    // 101 over 10 visits: one spare goes to the first visit.
    const auto b = allocate_budget(101, 2, 5);
    REQUIRE(b.size() == 10);
    CHECK(b[0] == 11);
    for (std::size_t i = 1; i < b.size(); ++i) CHECK(b[i] == 10);
  }
  {
    // 17 over 6 visits: base 2, remainder 5 spread over visits 1..5.
    const auto b = allocate_budget(17, 2, 3);
    const std::vector<long> want = {3, 3, 3, 3, 3, 2};
    CHECK(std::vector<long>(b.begin(), b.end()) == want);
  }
  {
    long total = 0;
    const auto b = allocate_budget(997, 3, 4);
    for (long v : b) total += v;
    CHECK(total == 997);
    // Never more than one apart, and sorted descending by construction.
    CHECK(b.front() - b.back() <= 1);
    CHECK(std::is_sorted(b.rbegin(), b.rend()));
  }

  CHECK_THROWS_AS(allocate_budget(5, 2, 3), BudgetTooSmall);   // 5 < 6 visits
  CHECK_THROWS_AS(allocate_budget(100, 0, 3), BudgetTooSmall);
  CHECK_THROWS_AS(allocate_budget(100, 2, 0), BudgetTooSmall);
}

TEST_CASE("round_plan rounds halves away from zero and clamps into the bounds") {
  PlanBounds b;  // [20, 50]
  Eigen::VectorXd x(7);
  x << 34.4, 50.7, 34.5, 19.2, -3.0, 49.5, 20.49;
  const auto p = round_plan(x, b);
  CHECK(p == std::vector<int>({34, 50, 35, 20, 20, 50, 20}));

  PlanBounds wide;
  wide.lower = -100;
  wide.upper = 100;
  Eigen::VectorXd y(4);
  y << -34.5, -34.4, 0.5, -0.5;
  CHECK(round_plan(y, wide) == std::vector<int>({-35, -34, 1, -1}));

  CHECK(round_plan(Eigen::VectorXd(0), b).empty());
}

TEST_CASE("SubDatabase membership radius and earliest-best lookup") {
  SubDatabase db;
  Eigen::VectorXd a(2), b(2);
  a << 1.0, 2.0;
  b << 3.0, 4.0;
  db.points = {a, b};
  db.values = {5.0, 3.0};

  CHECK(db.contains(a));
  Eigen::VectorXd near = a;
  near(0) += 5e-10;
  CHECK(db.contains(near));
  Eigen::VectorXd far = a;
  far(0) += 1e-8;
  CHECK_FALSE(db.contains(far));

  CHECK(db.best_index() == 1);

  db.points.push_back(a);
  db.values.push_back(3.0);  // tie with index 1: earliest wins
  CHECK(db.best_index() == 1);

  SubDatabase empty;
  CHECK_THROWS_AS(empty.best_index(), IndexError);
}

TEST_CASE("RunLog numbers simulations from 1 and tracks the running minimum") {
  RunLog log;
  CHECK_THROWS_AS(log.best(), IndexError);

  log.add(0, 0, 10.0);
  log.add(1, 1, 12.0);
  log.add(1, 2, 7.0);
  log.add(2, 1, 9.0);

  REQUIRE(log.records.size() == 4);
  CHECK(log.records[0].sim_index == 1);
  CHECK(log.records[3].sim_index == 4);
  CHECK(log.records[1].cycle == 1);
  CHECK(log.records[1].subnetwork == 1);
  CHECK(log.records[1].candidate_fitness == 12.0);

  CHECK(log.best() == 7.0);
  CHECK(log.best_history() == std::vector<double>({10.0, 10.0, 7.0, 7.0}));
}

TEST_CASE("optimize_subnetwork spends its budget exactly and only touches its own slice") {
  // Two synthetic junctions: A holds plan[0..1], B holds plan[2..4].
  const auto layout = make_layout({{"A", 2}, {"B", 3}});
  auto part = make_partition({{"A", 0}, {"B", 1}});
  part.bind_layout(layout);

  ScsoConfig config;
  config.eda2 = light_search();

  const SignalPlan context = {21, 22, 23, 24, 25};

  SUBCASE("budget accounting, log attribution, and database shape") {
    MockEvaluator eval(5, [](const SignalPlan& p) { return sum_sq_from(p, 30.0); });
    Rng rng(11);
    RunLog log;
    // Group 1 (junction B) has n = 3, so k = 9 seeds; 3 refinements follow.
    const auto db = optimize_subnetwork(eval, part, 1, context, 12, config, rng, log, 3);

    CHECK(eval.calls() == 12);
    CHECK(db.points.size() == 12);
    CHECK(db.values.size() == 12);
    REQUIRE(log.records.size() == 12);
    for (std::size_t i = 0; i < log.records.size(); ++i) {
      CHECK(log.records[i].sim_index == static_cast<long>(i) + 1);
      CHECK(log.records[i].cycle == 3);
      CHECK(log.records[i].subnetwork == 2);
    }
    for (const auto& p : db.points) {
      REQUIRE(p.size() == 3);
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        CHECK(p(i) == std::floor(p(i)));  // integer sub-plans
        CHECK(p(i) >= config.bounds.lower);
        CHECK(p(i) <= config.bounds.upper);
      }
    }
    // Stored value matches the mock applied to the stitched plan.
    const int bi = db.best_index();
    SignalPlan stitched = context;
    for (int i = 0; i < 3; ++i)
      stitched[static_cast<std::size_t>(2 + i)] =
          static_cast<int>(std::llround(db.points[static_cast<std::size_t>(bi)](i)));
    CHECK(db.values[static_cast<std::size_t>(bi)] == sum_sq_from(stitched, 30.0));
  }

  SUBCASE("every simulated plan keeps the out-of-group slice of the context") {
    MockEvaluator eval(5, [](const SignalPlan& p) { return sum_sq_from(p, 30.0); }, true);
    Rng rng(4);
    RunLog log;
    optimize_subnetwork(eval, part, 0, context, 10, config, rng, log, 1);

    REQUIRE(eval.seen.size() == 10);
    for (const auto& plan : eval.seen) {
      REQUIRE(plan.size() == 5);
      CHECK(plan[2] == 23);
      CHECK(plan[3] == 24);
      CHECK(plan[4] == 25);
    }
  }

  SUBCASE("a budget below the seed count is rejected") {
    MockEvaluator eval(5, [](const SignalPlan& p) { return sum_sq_from(p, 30.0); });
    Rng rng(1);
    RunLog log;
    CHECK_THROWS_AS(optimize_subnetwork(eval, part, 1, context, 8, config, rng, log, 1),
                    BudgetTooSmall);
    CHECK(eval.calls() == 0);
  }
}

TEST_CASE("optimize_subnetwork nudges repeat proposals to fresh points") {
  // One junction with a single phase on a 7-value range: the surrogate search
  // keeps re-proposing the incumbent, so refinements must come from the
  // duplicate fallback until the range is exhausted.
  const auto layout = make_layout({{"A", 1}});
  auto part = make_partition({{"A", 0}});
  part.bind_layout(layout);

  ScsoConfig config;
  config.bounds.lower = 20;
  config.bounds.upper = 26;
  config.eda2 = light_search();

  MockEvaluator eval(1, [](const SignalPlan& p) { return sum_sq_from(p, 23.0); });
  Rng rng(9);
  RunLog log;
  const SignalPlan context = {23};
  const auto db = optimize_subnetwork(eval, part, 0, context, 7, config, rng, log, 1);

  REQUIRE(db.points.size() == 7);
  const long k = 3;  // seeds_per_dim * 1
  for (std::size_t i = static_cast<std::size_t>(k); i < db.points.size(); ++i) {
    std::set<long> prior;
    for (std::size_t j = 0; j < i; ++j) prior.insert(std::llround(db.points[j](0)));
    if (prior.size() < 7) {
      // A fresh integer existed, so the appended point must be new.
      CHECK(prior.count(std::llround(db.points[i](0))) == 0);
    }
  }
}

TEST_CASE("run_scso structural contract on a synthetic network") {
  // Three junctions, seven phases total; group 0 = {A, B}, group 1 = {C}.
  const auto layout = make_layout({{"A", 2}, {"B", 2}, {"C", 3}});
  auto part = make_partition({{"A", 0}, {"B", 0}, {"C", 1}});
  part.bind_layout(layout);

  ScsoConfig config;
  config.cycles = 2;
  config.max_evaluations = 101;
  config.eda2 = light_search();

  MockEvaluator eval(7, [](const SignalPlan& p) { return sum_sq_from(p, 27.0); }, true);
  Rng rng(5);
  const auto res = run_scso(eval, layout, part, config, rng);

  CHECK(eval.calls() == 101);
  REQUIRE(res.log.records.size() == 101);

  const auto mid = midpoint_plan(layout, config.bounds);
  CHECK(res.log.records[0].sim_index == 1);
  CHECK(res.log.records[0].cycle == 0);
  CHECK(res.log.records[0].subnetwork == 0);
  CHECK(res.log.records[0].candidate_fitness == sum_sq_from(mid, 27.0));

  const auto hist = res.log.best_history();
  for (std::size_t i = 1; i < hist.size(); ++i) CHECK(hist[i] <= hist[i - 1]);
  CHECK(res.best_fitness == hist.back());
  CHECK(res.best_fitness == res.log.best());

  REQUIRE(res.best_plan.size() == 7);
  for (int v : res.best_plan) {
    CHECK(v >= config.bounds.lower);
    CHECK(v <= config.bounds.upper);
  }
  CHECK(sum_sq_from(res.best_plan, 27.0) == res.best_fitness);

  // Visits run cycle-major over ascending sub-networks and chain their
  // before/after fitness through the shared context.
  REQUIRE(res.log.visits.size() == 4);
  const int want_cycle[] = {1, 1, 2, 2};
  const int want_group[] = {1, 2, 1, 2};
  for (int i = 0; i < 4; ++i) {
    CHECK(res.log.visits[static_cast<std::size_t>(i)].cycle == want_cycle[i]);
    CHECK(res.log.visits[static_cast<std::size_t>(i)].subnetwork == want_group[i]);
  }
  CHECK(res.log.visits[0].before == sum_sq_from(mid, 27.0));
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(res.log.visits[i].after <= res.log.visits[i].before);
    if (i > 0) CHECK(res.log.visits[i].before == res.log.visits[i - 1].after);
  }
  CHECK(res.log.visits.back().after == res.best_fitness);

  // Replay the context evolution: within a visit, plans may differ from the
  // entering context only on that sub-network's slice, and adoptions take
  // the earliest best candidate of the visit.
  const auto budgets = allocate_budget(config.max_evaluations - 1, config.cycles, 2);
  SignalPlan ctx = mid;
  double ctx_fitness = sum_sq_from(mid, 27.0);
  std::size_t cursor = 1;  // seen[0] is the midpoint evaluation
  REQUIRE(eval.seen.size() == 101);
  for (std::size_t v = 0; v < budgets.size(); ++v) {
    const int group = static_cast<int>(v % 2);
    const auto& idx = part.plan_indices[static_cast<std::size_t>(group)];
    std::size_t best_at = cursor;
    double best_val = res.log.records[cursor].candidate_fitness;
    for (std::size_t s = 0; s < static_cast<std::size_t>(budgets[v]); ++s) {
      const auto& plan = eval.seen[cursor + s];
      for (int j = 0; j < 7; ++j) {
        if (std::find(idx.begin(), idx.end(), j) == idx.end())
          CHECK(plan[static_cast<std::size_t>(j)] == ctx[static_cast<std::size_t>(j)]);
      }
      const double val = res.log.records[cursor + s].candidate_fitness;
      if (val < best_val) {
        best_val = val;
        best_at = cursor + s;
      }
    }
    if (best_val < ctx_fitness) {
      for (int j : idx)
        ctx[static_cast<std::size_t>(j)] = eval.seen[best_at][static_cast<std::size_t>(j)];
      ctx_fitness = best_val;
    }
    CHECK(res.log.visits[v].after == ctx_fitness);
    cursor += static_cast<std::size_t>(budgets[v]);
  }
  CHECK(ctx == res.best_plan);
  CHECK(ctx_fitness == res.best_fitness);
}

TEST_CASE("run_scso keeps the starting context when nothing improves") {
  const auto layout = make_layout({{"A", 2}, {"B", 2}});
  auto part = make_partition({{"A", 0}, {"B", 1}});
  part.bind_layout(layout);

  ScsoConfig config;
  config.cycles = 2;
  config.max_evaluations = 61;
  config.eda2 = light_search();

  const auto mid = midpoint_plan(layout, config.bounds);
  // The midpoint is the unique global optimum, so no candidate can displace it.
  MockEvaluator eval(4, [mid](const SignalPlan& p) { return p == mid ? 0.0 : 5.0; });
  Rng rng(3);
  const auto res = run_scso(eval, layout, part, config, rng);

  CHECK(res.best_plan == mid);
  CHECK(res.best_fitness == 0.0);
  for (const auto& v : res.log.visits) {
    CHECK(v.before == 0.0);
    CHECK(v.after == 0.0);
  }
  for (double h : res.log.best_history()) CHECK(h == 0.0);
  CHECK(eval.calls() == 61);
}

TEST_CASE("run_scso consumes the budget exactly across random shapes") {
  Rng meta(2024);
  for (int trial = 0; trial < 6; ++trial) {
    const int cycles = meta.uniform_int(1, 4);
    const int m = meta.uniform_int(1, 5);

    std::vector<std::pair<std::string, int>> slots;
    std::map<std::string, int> raw;
    int max_k = 0;
    for (int g = 0; g < m; ++g) {
      const std::string id(1, static_cast<char>('A' + g));
      const int phases = meta.uniform_int(1, 3);
      slots.emplace_back(id, phases);
      raw[id] = g;
      max_k = std::max(max_k, 3 * phases);
    }
    const auto layout = make_layout(slots);
    auto part = make_partition(raw);
    part.bind_layout(layout);

    ScsoConfig config;
    config.cycles = cycles;
    config.eda2 = light_search();
    const long visits = static_cast<long>(cycles) * m;
    config.max_evaluations =
        1 + visits * (max_k + meta.uniform_int(1, 5)) + meta.uniform_int(0, static_cast<int>(visits) - 1);

    CAPTURE(trial);
    CAPTURE(cycles);
    CAPTURE(m);
    CAPTURE(config.max_evaluations);

    MockEvaluator eval(layout.total_dims,
                       [](const SignalPlan& p) { return sum_sq_from(p, 33.0); });
    Rng rng(static_cast<std::uint64_t>(100 + trial));
    const auto res = run_scso(eval, layout, part, config, rng);

    CHECK(eval.calls() == config.max_evaluations);
    CHECK(res.log.records.size() == static_cast<std::size_t>(config.max_evaluations));
    CHECK(res.log.visits.size() == static_cast<std::size_t>(visits));
    const auto hist = res.log.best_history();
    for (std::size_t i = 1; i < hist.size(); ++i) CHECK(hist[i] <= hist[i - 1]);
  }
}

TEST_CASE("run_scso degenerates to one whole-plan search when m = 1 and c = 1") {
  const auto layout = make_layout({{"A", 3}, {"B", 2}});
  auto part = make_partition({{"A", 0}, {"B", 0}});
  part.bind_layout(layout);

  ScsoConfig config;
  config.cycles = 1;
  config.max_evaluations = 40;
  config.eda2 = light_search();

  MockEvaluator eval(5, [](const SignalPlan& p) { return sum_sq_from(p, 42.0); }, true);
  Rng rng(8);
  const auto res = run_scso(eval, layout, part, config, rng);

  CHECK(eval.calls() == 40);
  REQUIRE(res.log.visits.size() == 1);
  CHECK(res.log.visits[0].cycle == 1);
  CHECK(res.log.visits[0].subnetwork == 1);
  // Whole plan is one slice, so every candidate may move every coordinate;
  // the only constraint left is the budget and the monotone log.
  const auto hist = res.log.best_history();
  CHECK(hist.size() == 40);
  for (std::size_t i = 1; i < hist.size(); ++i) CHECK(hist[i] <= hist[i - 1]);
}

TEST_CASE("run_scso rejects infeasible budgets and unbound partitions") {
  const auto layout = make_layout({{"A", 2}, {"B", 3}});
  auto bound_part = make_partition({{"A", 0}, {"B", 1}});
  bound_part.bind_layout(layout);

  ScsoConfig config;
  config.cycles = 2;
  config.eda2 = light_search();

  {
    // Visits get (33 - 1) / 4 = 8 evaluations; junction B needs 9 seeds.
    config.max_evaluations = 33;
    MockEvaluator eval(5, [](const SignalPlan& p) { return sum_sq_from(p, 30.0); });
    Rng rng(1);
    CHECK_THROWS_AS(run_scso(eval, layout, bound_part, config, rng), BudgetTooSmall);
    CHECK(eval.calls() == 0);  // rejected before any simulation
  }
  {
    config.max_evaluations = 3;  // cannot even cover one evaluation per visit
    MockEvaluator eval(5, [](const SignalPlan& p) { return sum_sq_from(p, 30.0); });
    Rng rng(1);
    CHECK_THROWS_AS(run_scso(eval, layout, bound_part, config, rng), BudgetTooSmall);
  }
  {
    auto loose = make_partition({{"A", 0}, {"B", 1}});  // bind_layout never called
    config.max_evaluations = 200;
    MockEvaluator eval(5, [](const SignalPlan& p) { return sum_sq_from(p, 30.0); });
    Rng rng(1);
    CHECK_THROWS_AS(run_scso(eval, layout, loose, config, rng), ValidationError);
  }
}

TEST_CASE("run_scso solves a separable quadratic over the benchmark layout") {
  const auto scenario = load_scenario(data_path("desk8.json"));
  const auto layout = build_layout(scenario);
  auto part = load_partition(data_path("desk8_groups2.json"), scenario);
  part.bind_layout(layout);
  REQUIRE(part.group_count == 2);
  REQUIRE(layout.total_dims == 29);

  ScsoConfig config;
  config.cycles = 1;
  config.max_evaluations = 300;
  // The surrogate search needs enough generations to localize the model's
  // minimum to sub-integer precision; the population can stay small.
  config.eda2.population = 40;
  config.eda2.max_iterations = 60;

  MockEvaluator eval(29, [](const SignalPlan& p) { return sum_sq_from(p, 30.0); });
  Rng rng(7);
  const auto res = run_scso(eval, layout, part, config, rng);

  CHECK(eval.calls() == 300);
  // Separable and convex with the optimum at all-30: the surrogate search
  // should land within one second of the target on every phase.
  for (int v : res.best_plan) CHECK(std::abs(v - 30) <= 1);
  CHECK(res.best_fitness <= 29.0);
}

TEST_CASE("run_scso is reproducible for a fixed seed") {
  const auto layout = make_layout({{"A", 2}, {"B", 2}, {"C", 2}});
  auto part = make_partition({{"A", 0}, {"B", 1}, {"C", 1}});
  part.bind_layout(layout);

  ScsoConfig config;
  config.cycles = 2;
  config.max_evaluations = 91;
  config.eda2 = light_search();

  auto run = [&](std::uint64_t seed) {
    MockEvaluator eval(6, [](const SignalPlan& p) { return sum_sq_from(p, 26.0); });
    Rng rng(seed);
    return run_scso(eval, layout, part, config, rng);
  };

  const auto a = run(77);
  const auto b = run(77);
  CHECK(a.best_plan == b.best_plan);
  CHECK(a.best_fitness == b.best_fitness);
  REQUIRE(a.log.records.size() == b.log.records.size());
  for (std::size_t i = 0; i < a.log.records.size(); ++i) {
    CHECK(a.log.records[i].candidate_fitness == b.log.records[i].candidate_fitness);
    CHECK(a.log.records[i].best_so_far == b.log.records[i].best_so_far);
  }

  const auto c = run(78);
  bool differs = a.best_plan != c.best_plan;
  for (std::size_t i = 0; i < a.log.records.size() && !differs; ++i)
    differs = a.log.records[i].candidate_fitness != c.log.records[i].candidate_fitness;
  CHECK(differs);
}
