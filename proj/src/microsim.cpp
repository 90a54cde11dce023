#include "scso/microsim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>

#include "scso/errors.hpp"
#include "scso/rng.hpp"

namespace scso {

namespace {
constexpr std::uint64_t kStreamArrival = 1;
constexpr std::uint64_t kStreamTurn = 2;
}  // namespace

int phase_at(const std::vector<int>& durations, long t) {
  long cycle = 0;
  for (int d : durations) cycle += d;
  if (cycle <= 0)
    throw InvalidPlan("phase durations must sum to a positive cycle");
  long tau = t % cycle;
  if (tau < 0) tau += cycle;
  for (std::size_t i = 0; i < durations.size(); ++i) {
    tau -= durations[i];
    if (tau < 0) return static_cast<int>(i);
  }
  return static_cast<int>(durations.size()) - 1;
}

int phase_at(const SignalPlan& plan, const PlanLayout& layout, const std::string& junction_id,
             long t) {
  if (static_cast<int>(plan.size()) != layout.total_dims)
    throw InvalidPlan("plan has " + std::to_string(plan.size()) + " durations, layout needs " +
                      std::to_string(layout.total_dims));
  const auto& slot = layout.slot_for(junction_id);
  std::vector<int> durations(plan.begin() + slot.offset,
                             plan.begin() + slot.offset + slot.phases);
  return phase_at(durations, t);
}

bool movement_green(JunctionKind kind, const std::vector<Dir>& approaches, int phase,
                    Dir approach, Turn turn) {
  if (kind == JunctionKind::Crossroad) {
    const bool ns = approach == Dir::N || approach == Dir::S;
    switch (phase) {
      case 0: return ns && turn != Turn::Left;
      case 1: return ns && turn == Turn::Left;
      case 2: return !ns && turn != Turn::Left;
      case 3: return !ns && turn == Turn::Left;
      default: throw IndexError("crossroad phase " + std::to_string(phase) + " out of range");
    }
  }
  if (phase < 0 || phase >= static_cast<int>(approaches.size()))
    throw IndexError("t-junction phase " + std::to_string(phase) + " out of range");
  return approaches[static_cast<std::size_t>(phase)] == approach;
}

namespace {

// A movement group shares one queue and one service counter: at a crossroad
// through+right form group 0 and left forms group 1; a t-junction serves a
// whole approach in one group.
int group_of(JunctionKind kind, Turn turn) {
  return kind == JunctionKind::Crossroad && turn == Turn::Left ? 1 : 0;
}

int groups_per_approach(JunctionKind kind) {
  return kind == JunctionKind::Crossroad ? 2 : 1;
}

}  // namespace

struct CompiledJunction {
  std::string id;
  JunctionKind kind = JunctionKind::Crossroad;
  std::vector<Dir> approaches;             // canonical order
  int plan_offset = 0;
  int phases = 0;
  int out_link[4] = {-1, -1, -1, -1};      // by arm
  double turn_rate[4][3];                  // by approach arm, turn; <0 = absent
  int queue_base = 0;                      // index of first queue slot
  int approach_slot[4] = {-1, -1, -1, -1}; // arm -> position in `approaches`
};

struct CompiledLink {
  int from_junction = -1;  // -1: fed by an entrance
  int to_junction = -1;    // -1: ends at the network boundary
  Dir approach_dir = Dir::N;
  int tau = 1;             // traversal seconds
};

struct CompiledEntrance {
  int link = -1;
  double p = 0.0;  // per-second arrival probability
};

struct Network {
  std::vector<CompiledJunction> junctions;  // lexicographic id order
  std::vector<CompiledLink> links;
  std::vector<CompiledEntrance> entrances;
  int total_dims = 0;
  int queue_slots = 0;
};

Network compile_network(const TrafficScenario& s) {
  Network net;
  const PlanLayout layout = build_layout(s);
  net.total_dims = layout.total_dims;

  std::unordered_map<std::string, int> jidx;
  for (std::size_t i = 0; i < s.junctions.size(); ++i)
    jidx[s.junctions[i].id] = static_cast<int>(i);
  std::unordered_map<std::string, int> eidx;
  for (std::size_t i = 0; i < s.entrances.size(); ++i)
    eidx[s.entrances[i].id] = static_cast<int>(i);

  net.links.reserve(s.links.size());
  for (const auto& l : s.links) {
    CompiledLink cl;
    cl.approach_dir = l.approach_dir;
    cl.tau = std::max(1, static_cast<int>(std::ceil(l.length_m / s.free_speed_mps)));
    if (auto it = jidx.find(l.from); it != jidx.end()) cl.from_junction = it->second;
    if (auto it = jidx.find(l.to); it != jidx.end()) cl.to_junction = it->second;
    net.links.push_back(cl);
  }

  int queue_base = 0;
  for (const auto& j : s.junctions) {
    CompiledJunction cj;
    cj.id = j.id;
    cj.kind = j.kind;
    cj.approaches = j.approaches;
    const auto& slot = layout.slot_for(j.id);
    cj.plan_offset = slot.offset;
    cj.phases = slot.phases;
    for (int a = 0; a < 4; ++a)
      for (int t = 0; t < 3; ++t) cj.turn_rate[a][t] = -1.0;
    for (std::size_t k = 0; k < j.approaches.size(); ++k) {
      const Dir d = j.approaches[k];
      cj.approach_slot[static_cast<int>(d)] = static_cast<int>(k);
      const TurnRates& tr = j.turn_rates.at(d);
      for (Turn t : {Turn::Left, Turn::Through, Turn::Right})
        if (tr[t])
          cj.turn_rate[static_cast<int>(d)][static_cast<int>(t)] = *tr[t];
    }
    cj.queue_base = queue_base;
    queue_base += static_cast<int>(j.approaches.size()) * groups_per_approach(j.kind);
    net.junctions.push_back(std::move(cj));
  }
  net.queue_slots = queue_base;

  // A link departs its `from` junction through arm opposite(approach_dir);
  // first matching link in file order wins.
  for (std::size_t li = 0; li < s.links.size(); ++li) {
    const int fj = net.links[li].from_junction;
    if (fj < 0) continue;
    const int arm = static_cast<int>(opposite(net.links[li].approach_dir));
    if (net.junctions[static_cast<std::size_t>(fj)].out_link[arm] < 0)
      net.junctions[static_cast<std::size_t>(fj)].out_link[arm] = static_cast<int>(li);
  }

  for (std::size_t ei = 0; ei < s.entrances.size(); ++ei) {
    CompiledEntrance ce;
    for (std::size_t li = 0; li < s.links.size(); ++li)
      if (s.links[li].from == s.entrances[ei].id) {
        ce.link = static_cast<int>(li);
        break;
      }
    ce.p = std::min(1.0, s.entrances[ei].demand_vph / 3600.0);
    net.entrances.push_back(ce);
  }
  return net;
}

namespace {

struct Vehicle {
  int entry_t = 0;
  std::uint64_t key = 0;   // stable across demand changes: entrance and entry second
  long cum_wait = 0;
  int join_t = -1;         // queue-join second, -1 while on a link
  Turn turn = Turn::Through;
};

struct QueueState {
  std::deque<int> veh;
  double credit = 0.0;
};

int queue_index(const CompiledJunction& j, Dir approach, int group) {
  const int slot = j.approach_slot[static_cast<int>(approach)];
  return j.queue_base + slot * groups_per_approach(j.kind) + group;
}

}  // namespace

SimResult simulate(const Network& net, const SignalPlan& plan, const SimConfig& config) {
  const auto wall_start = std::chrono::steady_clock::now();

  if (config.horizon_s < 1)
    throw ValidationError("simulation horizon must be at least 1 s");
  if (config.saturation_headway_s < 1.0)
    throw ValidationError("saturation headway must be at least 1 s");
  if (static_cast<int>(plan.size()) != net.total_dims)
    throw InvalidPlan("plan has " + std::to_string(plan.size()) + " durations, network needs " +
                      std::to_string(net.total_dims));
  for (int d : plan)
    if (d < 1)
      throw InvalidPlan("phase duration " + std::to_string(d) + " is below 1 s");

  // Per-junction cumulative phase boundaries for O(phases) phase lookup.
  std::vector<long> cycle(net.junctions.size(), 0);
  for (std::size_t ji = 0; ji < net.junctions.size(); ++ji)
    for (int p = 0; p < net.junctions[ji].phases; ++p)
      cycle[ji] += plan[static_cast<std::size_t>(net.junctions[ji].plan_offset + p)];

  std::vector<Vehicle> vehicles;
  std::vector<std::deque<std::pair<int, int>>> on_link(net.links.size());  // (arrive_t, veh)
  std::vector<QueueState> queues(static_cast<std::size_t>(net.queue_slots));
  for (auto& q : queues) q.credit = config.saturation_headway_s;

  long exited = 0;

  auto junction_phase = [&](std::size_t ji, int t) {
    const auto& j = net.junctions[ji];
    long tau = t % cycle[ji];
    for (int p = 0; p < j.phases; ++p) {
      tau -= plan[static_cast<std::size_t>(j.plan_offset + p)];
      if (tau < 0) return p;
    }
    return j.phases - 1;
  };

  for (int t = 0; t < config.horizon_s; ++t) {
    // 1. Boundary arrivals enter their entrance link.
    for (std::size_t ei = 0; ei < net.entrances.size(); ++ei) {
      const auto& e = net.entrances[ei];
      if (e.p <= 0.0) continue;
      if (counter_uniform01(config.seed, kStreamArrival, ei, static_cast<std::uint64_t>(t)) < e.p) {
        Vehicle v;
        v.entry_t = t;
        v.key = (static_cast<std::uint64_t>(ei) << 32) | static_cast<std::uint64_t>(t);
        const int id = static_cast<int>(vehicles.size());
        vehicles.push_back(v);
        on_link[static_cast<std::size_t>(e.link)].emplace_back(t + net.links[static_cast<std::size_t>(e.link)].tau, id);
      }
    }

    // 2. Vehicles reaching the end of a link exit or join their movement queue.
    for (std::size_t li = 0; li < net.links.size(); ++li) {
      auto& pending = on_link[li];
      while (!pending.empty() && pending.front().first <= t) {
        const int vid = pending.front().second;
        pending.pop_front();
        Vehicle& v = vehicles[static_cast<std::size_t>(vid)];
        const int ji = net.links[li].to_junction;
        if (ji < 0) {
          ++exited;  // boundary reached; cum_wait is final
          continue;
        }
        const CompiledJunction& j = net.junctions[static_cast<std::size_t>(ji)];
        const Dir approach = net.links[li].approach_dir;
        const double u = counter_uniform01(config.seed, kStreamTurn, v.key,
                                           static_cast<std::uint64_t>(ji));
        double acc = 0.0;
        Turn turn = Turn::Through;
        bool chosen = false;
        for (Turn cand : {Turn::Left, Turn::Through, Turn::Right}) {
          const double r = j.turn_rate[static_cast<int>(approach)][static_cast<int>(cand)];
          if (r < 0.0) continue;
          acc += r;
          turn = cand;  // remember the last available turn as the fallback
          if (!chosen && u < acc) chosen = true;
          if (chosen) break;
        }
        v.turn = turn;
        v.join_t = t;
        queues[static_cast<std::size_t>(queue_index(j, approach, group_of(j.kind, turn)))]
            .veh.push_back(vid);
      }
    }

    // 3. Green movement groups discharge, one vehicle per headway of credit.
    for (std::size_t ji = 0; ji < net.junctions.size(); ++ji) {
      const CompiledJunction& j = net.junctions[ji];
      const int phase = junction_phase(ji, t);
      for (const Dir approach : j.approaches) {
        for (int g = 0; g < groups_per_approach(j.kind); ++g) {
          const Turn probe = g == 1 ? Turn::Left : Turn::Through;
          if (!movement_green(j.kind, j.approaches, phase, approach, probe)) continue;
          QueueState& q = queues[static_cast<std::size_t>(queue_index(j, approach, g))];
          // Credit accrues one second per green second, capped at one
          // headway, so an empty green keeps exactly one departure banked.
          q.credit = std::min(q.credit + 1.0, config.saturation_headway_s);
          if (q.veh.empty() || q.credit < config.saturation_headway_s - 1e-12) continue;
          const int vid = q.veh.front();
          q.veh.pop_front();
          q.credit -= config.saturation_headway_s;
          Vehicle& v = vehicles[static_cast<std::size_t>(vid)];
          v.cum_wait += t - v.join_t;
          v.join_t = -1;
          const int out = j.out_link[static_cast<int>(exit_arm(approach, v.turn))];
          // validate_scenario guarantees available turns have an exit link
          on_link[static_cast<std::size_t>(out)].emplace_back(
              t + net.links[static_cast<std::size_t>(out)].tau, vid);
        }
      }
    }
  }

  SimResult res;
  res.vehicles_entered = static_cast<long>(vehicles.size());
  res.vehicles_exited = exited;
  res.vehicles_in_network = res.vehicles_entered - exited;
  for (const auto& v : vehicles) {
    long w = v.cum_wait;
    if (v.join_t >= 0) w += config.horizon_s - v.join_t;  // still waiting at the horizon
    res.total_delay_s += static_cast<double>(w);
  }
  res.avg_delay_s = res.total_delay_s / static_cast<double>(std::max(res.vehicles_entered, 1L));

  res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return res;
}

SimResult simulate(const TrafficScenario& s, const SignalPlan& plan, const SimConfig& config) {
  return simulate(compile_network(s), plan, config);
}

double Evaluator::evaluate(const SignalPlan& plan) {
  const auto t0 = std::chrono::steady_clock::now();
  const double v = do_evaluate(plan);
  const auto t1 = std::chrono::steady_clock::now();
  eval_ns_.fetch_add(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
  calls_.fetch_add(1);
  return v;
}

SimEvaluator::SimEvaluator(const TrafficScenario& s, const SimConfig& config)
    : net_(std::make_shared<Network>(compile_network(s))), config_(config), dims_(net_->total_dims) {}

double SimEvaluator::do_evaluate(const SignalPlan& plan) {
  return simulate(*net_, plan, config_).avg_delay_s;
}

}  // namespace scso
