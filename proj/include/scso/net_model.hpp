#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace scso {

/// Compass arm of a junction. An approach direction names the side on
/// which vehicles arrive: traffic approaching from the north arm is
/// southbound.
enum class Dir : int { N = 0, E = 1, S = 2, W = 3 };

enum class Turn : int { Left = 0, Through = 1, Right = 2 };

enum class JunctionKind { Crossroad, TJunction };

Dir opposite(Dir d);

/// Arm a vehicle departs through when making `turn` after arriving on
/// approach `a`. Right-hand traffic: from the north arm (southbound),
/// left exits east, through exits south, right exits west.
Dir exit_arm(Dir a, Turn turn);

const char* dir_name(Dir d);
const char* turn_name(Turn t);
Dir parse_dir(const std::string& s);

int phase_count(JunctionKind kind);

/// Turn fractions for one approach. A disengaged entry means the movement
/// does not exist at this junction (the target arm is absent).
struct TurnRates {
  std::array<std::optional<double>, 3> rate;  // indexed by Turn

  std::optional<double>& operator[](Turn t) { return rate[static_cast<int>(t)]; }
  const std::optional<double>& operator[](Turn t) const { return rate[static_cast<int>(t)]; }
};

struct Junction {
  std::string id;
  JunctionKind kind = JunctionKind::Crossroad;
  std::vector<Dir> approaches;                  // canonical N,E,S,W order
  std::unordered_map<Dir, TurnRates> turn_rates;

  bool has_approach(Dir d) const;
};

/// Directed road segment. `approach_dir` is the arm of `to` on which the
/// link arrives; a link departs `from` through the opposite arm.
struct RoadLink {
  std::string from;
  std::string to;
  double length_m = 0.0;
  Dir approach_dir = Dir::N;
};

struct Entrance {
  std::string id;
  double demand_vph = 0.0;
};

struct TrafficScenario {
  std::string name;
  double free_speed_mps = 13.89;
  bool topology_approximate = false;
  std::vector<Junction> junctions;   // sorted lexicographically by id
  std::vector<RoadLink> links;
  std::vector<Entrance> entrances;

  const Junction* find_junction(const std::string& id) const;
  bool is_entrance(const std::string& id) const;
};

/// Inclusive integer bounds on every phase duration, in seconds.
struct PlanBounds {
  int lower = 20;
  int upper = 50;
};

/// Phase durations for the whole network, ordered by junction id
/// (lexicographic) and then by phase index within the junction.
using SignalPlan = std::vector<int>;

/// Index map from junctions to their slice of a SignalPlan.
struct PlanLayout {
  struct Slot {
    std::string junction_id;
    int offset = 0;
    int phases = 0;
  };
  std::vector<Slot> slots;  // lexicographic junction-id order
  int total_dims = 0;

  const Slot& slot_for(const std::string& junction_id) const;
  int index_of(const std::string& junction_id) const;  // position in `slots`
};

/// Throws ValidationError naming the offending element if any model
/// invariant is violated. Called by load_scenario after parsing.
void validate_scenario(const TrafficScenario& s);

TrafficScenario load_scenario(const std::string& path);
void write_scenario(const TrafficScenario& s, const std::string& path);

PlanLayout build_layout(const TrafficScenario& s);

/// Plan with every duration at round((lower+upper)/2), halves away from zero.
SignalPlan midpoint_plan(const PlanLayout& layout, const PlanBounds& bounds);

}  // namespace scso
