#include "scso/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "scso/decomposer.hpp"
#include "scso/errors.hpp"

namespace scso {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double elapsed_s(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad " + what + " value '" + s + "'");
  }
}

long parse_long(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad " + what + " value '" + s + "'");
  }
}

bool is_unsigned_number(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

const char* algo_name(Algo a) {
  switch (a) {
    case Algo::Scso: return "scso";
    case Algo::Eda2Global: return "eda2-global";
    case Algo::Random: return "random";
  }
  return "?";
}

Algo parse_algo(const std::string& s) {
  if (s == "scso") return Algo::Scso;
  if (s == "eda2-global") return Algo::Eda2Global;
  if (s == "random") return Algo::Random;
  throw ParseError("unknown algorithm '" + s + "'");
}

SearchResult random_search(Evaluator& evaluator, const PlanLayout& layout,
                           const PlanBounds& bounds, long budget, Rng& rng) {
  if (budget < 1) throw BudgetTooSmall("random search needs a positive budget");
  SearchResult res;
  res.best_fitness = std::numeric_limits<double>::infinity();
  for (long i = 0; i < budget; ++i) {
    SignalPlan plan(static_cast<std::size_t>(layout.total_dims));
    for (auto& d : plan) d = rng.uniform_int(bounds.lower, bounds.upper);
    const double f = evaluator.evaluate(plan);
    res.log.add(0, 0, f);
    if (f < res.best_fitness) {
      res.best_fitness = f;
      res.best_plan = plan;
    }
  }
  return res;
}

SearchResult eda2_global(Evaluator& evaluator, const PlanLayout& layout, const PlanBounds& bounds,
                         long budget, const Eda2Config& config, Rng& rng) {
  if (budget < config.population)
    throw BudgetTooSmall("budget " + std::to_string(budget) +
                         " is below one population of " + std::to_string(config.population));
  const Box box = Box::uniform(layout.total_dims, bounds.lower, bounds.upper);
  Eda2 search(config, box, rng);
  SearchResult res;
  res.best_fitness = std::numeric_limits<double>::infinity();
  long used = 0;
  while (used < budget) {
    const Eigen::MatrixXd& pop = search.ask();
    const long take = std::min<long>(pop.rows(), budget - used);
    Eigen::VectorXd fitness(pop.rows());
    for (long i = 0; i < take; ++i) {
      const SignalPlan plan = round_plan(pop.row(i), bounds);
      const double f = evaluator.evaluate(plan);
      fitness(i) = f;
      res.log.add(search.generation(), 0, f);
      if (f < res.best_fitness) {
        res.best_fitness = f;
        res.best_plan = plan;
      }
    }
    used += take;
    if (take < pop.rows()) break;  // partial generation: no model update
    search.tell(fitness);
  }
  return res;
}

RankSumResult wilcoxon_ranksum(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty())
    throw ValidationError("rank-sum test needs two non-empty samples");
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  const int total = n + m;

  // Sort (value, group) pairs; group 0 is sample a.
  std::vector<std::pair<double, int>> all;
  all.reserve(static_cast<std::size_t>(total));
  for (double v : a) all.emplace_back(v, 0);
  for (double v : b) all.emplace_back(v, 1);
  std::sort(all.begin(), all.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });

  // Doubled midranks stay integral under ties: a tie block spanning 1-based
  // ranks [i, j] gets doubled rank i + j.
  std::vector<long> doubled(static_cast<std::size_t>(total));
  long tie_cubes = 0;  // sum of t^3 - t over tie blocks
  for (int i = 0; i < total;) {
    int j = i;
    while (j + 1 < total && all[static_cast<std::size_t>(j + 1)].first == all[static_cast<std::size_t>(i)].first)
      ++j;
    const long t = j - i + 1;
    tie_cubes += t * t * t - t;
    for (int k = i; k <= j; ++k) doubled[static_cast<std::size_t>(k)] = (i + 1) + (j + 1);
    i = j + 1;
  }

  long w2 = 0;  // doubled rank sum of sample a
  for (int i = 0; i < total; ++i)
    if (all[static_cast<std::size_t>(i)].second == 0) w2 += doubled[static_cast<std::size_t>(i)];

  RankSumResult res;
  res.u = 0.5 * static_cast<double>(w2) - 0.5 * static_cast<double>(n) * (n + 1);

  const bool degenerate = all.front().first == all.back().first;

  // C(n+m, n), capped just past the enumeration threshold.
  double combos = 1.0;
  for (int i = 1; i <= n; ++i) combos = combos * (m + i) / i;
  const bool exact = combos <= 1e6 + 0.5;

  if (degenerate) {
    res.degenerate = true;
    res.exact = exact;
    res.p = 1.0;
    return res;
  }

  if (exact) {
    res.exact = true;
    // Enumerate every size-n index subset and count doubled rank sums at
    // least as extreme (two-sided, around the exact mean n * (total + 1)).
    const long mu2 = static_cast<long>(n) * (total + 1);
    const long dev = std::llabs(w2 - mu2);
    long count = 0;
    long all_subsets = 0;
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
      long s = 0;
      for (int i = 0; i < n; ++i) s += doubled[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      if (std::llabs(s - mu2) >= dev) ++count;
      ++all_subsets;
      int k = n - 1;
      while (k >= 0 && idx[static_cast<std::size_t>(k)] == total - n + k) --k;
      if (k < 0) break;
      ++idx[static_cast<std::size_t>(k)];
      for (int i = k + 1; i < n; ++i)
        idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
    }
    res.p = static_cast<double>(count) / static_cast<double>(all_subsets);
    return res;
  }

  // Normal approximation with tie and continuity corrections.
  res.exact = false;
  const double mu_u = 0.5 * n * m;
  const double nm = static_cast<double>(n) * m;
  const double var = nm / 12.0 *
                     (static_cast<double>(total + 1) -
                      static_cast<double>(tie_cubes) /
                          (static_cast<double>(total) * (total - 1)));
  if (var <= 0.0) {  // everything tied; degenerate path above normally catches this
    res.degenerate = true;
    res.p = 1.0;
    return res;
  }
  const double z = std::max(0.0, (std::abs(res.u - mu_u) - 0.5)) / std::sqrt(var);
  res.p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return res;
}

namespace {

SeedOutcome run_one_seed(const ExperimentSpec& spec, const TrafficScenario& scenario,
                         const PlanLayout& layout, const Partition& partition,
                         std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();

  SimConfig sim = spec.sim;
  sim.seed = seed;
  SimEvaluator evaluator(scenario, sim);
  Rng rng(seed);

  SearchResult result;
  switch (spec.algo) {
    case Algo::Scso: {
      ScsoResult r = run_scso(evaluator, layout, partition, spec.scso, rng);
      result.best_plan = std::move(r.best_plan);
      result.best_fitness = r.best_fitness;
      result.log = std::move(r.log);
      break;
    }
    case Algo::Eda2Global:
      result = eda2_global(evaluator, layout, spec.scso.bounds, spec.scso.max_evaluations,
                           spec.scso.eda2, rng);
      break;
    case Algo::Random:
      result = random_search(evaluator, layout, spec.scso.bounds, spec.scso.max_evaluations, rng);
      break;
  }

  const std::string log_path = spec.out_dir + "/runlog_" + algo_name(spec.algo) + "_seed" +
                               std::to_string(seed) + ".csv";
  write_runlog_csv(result.log, log_path);

  SeedOutcome o;
  o.seed = seed;
  o.final_fitness = result.best_fitness;
  o.sims_used = evaluator.calls();
  o.sim_wall_s = evaluator.eval_seconds();
  o.other_wall_s = std::max(0.0, elapsed_s(start) - o.sim_wall_s);
  return o;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  if (spec.seeds.empty()) throw ValidationError("experiment needs at least one seed");
  if (spec.out_dir.empty()) throw ValidationError("experiment needs an output directory");
  std::filesystem::create_directories(spec.out_dir);

  const TrafficScenario scenario = load_scenario(spec.scenario_path);
  const PlanLayout layout = build_layout(scenario);

  Partition partition;
  if (spec.algo == Algo::Scso) {
    if (spec.partition_path.empty())
      partition = newman_fast(build_junction_graph(scenario));
    else
      partition = load_partition(spec.partition_path, scenario);
    partition.bind_layout(layout);
  }

  const int count = static_cast<int>(spec.seeds.size());
  std::vector<SeedOutcome> outcomes(static_cast<std::size_t>(count));
  std::vector<std::string> failures(static_cast<std::size_t>(count));

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int i = 0; i < count; ++i) {
    try {
      outcomes[static_cast<std::size_t>(i)] =
          run_one_seed(spec, scenario, layout, partition, spec.seeds[static_cast<std::size_t>(i)]);
    } catch (const std::exception& e) {
      failures[static_cast<std::size_t>(i)] = e.what();
    }
  }
  for (int i = 0; i < count; ++i)
    if (!failures[static_cast<std::size_t>(i)].empty())
      throw Error("seed " + std::to_string(spec.seeds[static_cast<std::size_t>(i)]) + ": " +
                  failures[static_cast<std::size_t>(i)]);

  ExperimentResult res;
  res.outcomes = outcomes;

  std::vector<double> finals, sims, sim_walls, other_walls;
  for (const auto& o : outcomes) {
    finals.push_back(o.final_fitness);
    sims.push_back(static_cast<double>(o.sims_used));
    sim_walls.push_back(o.sim_wall_s);
    other_walls.push_back(o.other_wall_s);
  }
  res.median_final = median(finals);

  auto out = open_out(spec.out_dir + "/summary.csv");
  out << "seed,algo,final_fitness,sims_used,sim_wall_s,other_wall_s\n";
  for (const auto& o : outcomes)
    out << o.seed << ',' << algo_name(spec.algo) << ',' << fmt(o.final_fitness) << ','
        << o.sims_used << ',' << fmt(o.sim_wall_s) << ',' << fmt(o.other_wall_s) << '\n';
  out << "median," << algo_name(spec.algo) << ',' << fmt(res.median_final) << ','
      << static_cast<long>(median(sims)) << ',' << fmt(median(sim_walls)) << ','
      << fmt(median(other_walls)) << '\n';
  return res;
}

std::vector<double> run_c_sweep(const ExperimentSpec& spec, const std::vector<int>& cycle_values) {
  if (cycle_values.empty()) throw ValidationError("sweep needs at least one pass count");
  std::filesystem::create_directories(spec.out_dir);
  std::vector<double> medians;
  for (int c : cycle_values) {
    ExperimentSpec sub = spec;
    sub.scso.cycles = c;
    sub.out_dir = spec.out_dir + "/c" + std::to_string(c);
    medians.push_back(run_experiment(sub).median_final);
  }
  auto out = open_out(spec.out_dir + "/sweep.csv");
  out << "cycles,median_final\n";
  for (std::size_t i = 0; i < cycle_values.size(); ++i)
    out << cycle_values[i] << ',' << fmt(medians[i]) << '\n';
  return medians;
}

double median(std::vector<double> v) {
  if (v.empty()) throw EmptySelection("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  if (v.size() % 2 == 1) return v[h];
  return 0.5 * (v[h - 1] + v[h]);
}

SignalPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open plan file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("plan file '" + path + "': " + e.what());
  }
  if (!j.is_array()) throw ParseError("plan file '" + path + "' must hold an array");
  SignalPlan plan;
  for (const auto& v : j) {
    if (!v.is_number_integer())
      throw ParseError("plan file '" + path + "' must hold integers");
    plan.push_back(v.get<int>());
  }
  return plan;
}

void write_plan(const SignalPlan& plan, const std::string& path) {
  auto out = open_out(path);
  out << nlohmann::json(plan).dump() << '\n';
}

std::vector<double> load_sample(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open sample file '" + path + "'");
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line))
    if (!line.empty() && line != "\r") lines.push_back(line);
  if (lines.empty()) throw ParseError("sample file '" + path + "' is empty");

  std::vector<double> sample;
  const auto header = split_csv_line(lines.front());
  const auto fit_col = std::find(header.begin(), header.end(), "final_fitness");
  if (fit_col != header.end()) {
    const std::size_t col = static_cast<std::size_t>(fit_col - header.begin());
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto fields = split_csv_line(lines[i]);
      if (fields.size() <= col)
        throw ParseError("sample file '" + path + "' row " + std::to_string(i) + " is short");
      if (!is_unsigned_number(fields.front())) continue;  // summary row
      sample.push_back(parse_double(fields[col], "final_fitness"));
    }
  } else {
    for (const auto& l : lines) sample.push_back(parse_double(l, "sample"));
  }
  if (sample.empty()) throw ParseError("sample file '" + path + "' holds no values");
  return sample;
}

void write_runlog_csv(const RunLog& log, const std::string& path) {
  auto out = open_out(path);
  out << "sim_index,cycle,subnetwork,candidate_fitness,best_so_far\n";
  for (const auto& r : log.records)
    out << r.sim_index << ',' << r.cycle << ',' << r.subnetwork << ','
        << fmt(r.candidate_fitness) << ',' << fmt(r.best_so_far) << '\n';
}

RunLog read_runlog_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open run log '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError("run log '" + path + "' is empty");
  if (split_csv_line(line) !=
      std::vector<std::string>{"sim_index", "cycle", "subnetwork", "candidate_fitness",
                               "best_so_far"})
    throw ParseError("run log '" + path + "' has an unexpected header");
  RunLog log;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 5)
      throw ParseError("run log '" + path + "' row has " + std::to_string(fields.size()) +
                       " fields");
    RunLog::SimRecord r;
    r.sim_index = parse_long(fields[0], "sim_index");
    r.cycle = static_cast<int>(parse_long(fields[1], "cycle"));
    r.subnetwork = static_cast<int>(parse_long(fields[2], "subnetwork"));
    r.candidate_fitness = parse_double(fields[3], "candidate_fitness");
    r.best_so_far = parse_double(fields[4], "best_so_far");
    log.records.push_back(r);
  }
  return log;
}

}  // namespace scso
