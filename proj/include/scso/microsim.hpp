#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "scso/net_model.hpp"

namespace scso {

struct SimConfig {
  int horizon_s = 500;           // simulated seconds, 1 s steps
  double saturation_headway_s = 2.0;  // green seconds per discharged vehicle
  std::uint64_t seed = 0;
};

struct SimResult {
  double avg_delay_s = 0.0;      // total delay / max(entered, 1)
  double total_delay_s = 0.0;
  long vehicles_entered = 0;
  long vehicles_exited = 0;
  long vehicles_in_network = 0;
  double wall_time_s = 0.0;      // instrumentation, not part of the result proper
};

/// Index of the active phase at second `t` for a junction with the given
/// phase durations: t mod cycle falls into the cumulative intervals.
int phase_at(const std::vector<int>& durations, long t);
int phase_at(const SignalPlan& plan, const PlanLayout& layout, const std::string& junction_id,
             long t);

/// Whether the (approach, turn) movement has green in `phase`.
/// Crossroads run four phases: 0 = N+S through and right, 1 = N+S left,
/// 2 = E+W through and right, 3 = E+W left. A T-junction runs one phase per
/// present approach (N, E, S, W order restricted to the present set) with
/// all of that approach's movements green.
bool movement_green(JunctionKind kind, const std::vector<Dir>& approaches, int phase,
                    Dir approach, Turn turn);

/// Scenario compiled into dense index structures for simulation.
/// Compile once, simulate many plans against it.
struct Network;
Network compile_network(const TrafficScenario& s);

SimResult simulate(const Network& net, const SignalPlan& plan, const SimConfig& config);
SimResult simulate(const TrafficScenario& s, const SignalPlan& plan, const SimConfig& config);

/// Cost-function interface carrying a thread-safe call counter and the
/// accumulated wall time spent inside evaluations.
class Evaluator {
 public:
  virtual ~Evaluator() = default;

  double evaluate(const SignalPlan& plan);

  long calls() const { return calls_.load(); }
  double eval_seconds() const { return static_cast<double>(eval_ns_.load()) * 1e-9; }
  virtual int dims() const = 0;

 private:
  virtual double do_evaluate(const SignalPlan& plan) = 0;

  std::atomic<long> calls_{0};
  std::atomic<long long> eval_ns_{0};
};

/// Average vehicle delay of a plan under the compiled scenario.
class SimEvaluator : public Evaluator {
 public:
  SimEvaluator(const TrafficScenario& s, const SimConfig& config);
  int dims() const override { return dims_; }
  const SimConfig& config() const { return config_; }

 private:
  double do_evaluate(const SignalPlan& plan) override;

  std::shared_ptr<Network> net_;
  SimConfig config_;
  int dims_;
};

}  // namespace scso
