#include "scso/net_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "scso/errors.hpp"
#include "json.hpp"

namespace scso {

using nlohmann::json;

Dir opposite(Dir d) { return static_cast<Dir>((static_cast<int>(d) + 2) % 4); }

Dir exit_arm(Dir a, Turn turn) {
  const int i = static_cast<int>(a);
  switch (turn) {
    case Turn::Left: return static_cast<Dir>((i + 1) % 4);
    case Turn::Through: return static_cast<Dir>((i + 2) % 4);
    case Turn::Right: return static_cast<Dir>((i + 3) % 4);
  }
  return a;
}

const char* dir_name(Dir d) {
  switch (d) {
    case Dir::N: return "N";
    case Dir::E: return "E";
    case Dir::S: return "S";
    case Dir::W: return "W";
  }
  return "?";
}

const char* turn_name(Turn t) {
  switch (t) {
    case Turn::Left: return "left";
    case Turn::Through: return "through";
    case Turn::Right: return "right";
  }
  return "?";
}

Dir parse_dir(const std::string& s) {
  if (s == "N") return Dir::N;
  if (s == "E") return Dir::E;
  if (s == "S") return Dir::S;
  if (s == "W") return Dir::W;
  throw ParseError("unknown direction '" + s + "'");
}

int phase_count(JunctionKind kind) {
  return kind == JunctionKind::Crossroad ? 4 : 3;
}

bool Junction::has_approach(Dir d) const {
  return std::find(approaches.begin(), approaches.end(), d) != approaches.end();
}

const Junction* TrafficScenario::find_junction(const std::string& id) const {
  for (const auto& j : junctions)
    if (j.id == id) return &j;
  return nullptr;
}

bool TrafficScenario::is_entrance(const std::string& id) const {
  for (const auto& e : entrances)
    if (e.id == id) return true;
  return false;
}

const PlanLayout::Slot& PlanLayout::slot_for(const std::string& junction_id) const {
  for (const auto& s : slots)
    if (s.junction_id == junction_id) return s;
  throw IndexError("unknown junction '" + junction_id + "' in layout");
}

int PlanLayout::index_of(const std::string& junction_id) const {
  for (std::size_t i = 0; i < slots.size(); ++i)
    if (slots[i].junction_id == junction_id) return static_cast<int>(i);
  throw IndexError("unknown junction '" + junction_id + "' in layout");
}

namespace {

// Outgoing arms of a junction: a link (from=j, to=k, approach_dir=D)
// departs j through arm opposite(D).
std::set<Dir> out_arms(const TrafficScenario& s, const std::string& jid) {
  std::set<Dir> arms;
  for (const auto& l : s.links)
    if (l.from == jid) arms.insert(opposite(l.approach_dir));
  return arms;
}

}  // namespace

void validate_scenario(const TrafficScenario& s) {
  if (s.free_speed_mps <= 0)
    throw ValidationError("free_speed_mps must be positive");

  std::set<std::string> jids;
  for (const auto& j : s.junctions) {
    if (!jids.insert(j.id).second)
      throw ValidationError("duplicate junction id '" + j.id + "'");
  }
  std::set<std::string> eids;
  for (const auto& e : s.entrances) {
    if (!eids.insert(e.id).second)
      throw ValidationError("duplicate entrance id '" + e.id + "'");
    if (jids.count(e.id))
      throw ValidationError("id '" + e.id + "' is both a junction and an entrance");
    if (e.demand_vph < 0)
      throw ValidationError("entrance '" + e.id + "' has negative demand");
  }

  for (const auto& l : s.links) {
    if (l.length_m < 10.0) {
      std::ostringstream os;
      os << "link " << l.from << "->" << l.to << " is shorter than 10 m";
      throw ValidationError(os.str());
    }
    for (const auto* end : {&l.from, &l.to})
      if (!jids.count(*end) && !eids.count(*end))
        throw ValidationError("link endpoint '" + *end + "' is neither a junction nor an entrance");
    if (!jids.count(l.from) && !jids.count(l.to))
      throw ValidationError("link " + l.from + "->" + l.to + " connects two entrances");
  }

  for (const auto& j : s.junctions) {
    const std::size_t want = j.kind == JunctionKind::Crossroad ? 4u : 3u;
    if (j.approaches.size() != want)
      throw ValidationError("junction " + j.id + " has " + std::to_string(j.approaches.size()) +
                            " approaches, expected " + std::to_string(want));
    std::set<Dir> uniq(j.approaches.begin(), j.approaches.end());
    if (uniq.size() != j.approaches.size())
      throw ValidationError("junction " + j.id + " has duplicate approaches");

    const auto outs = out_arms(s, j.id);
    std::size_t incident = 0;
    for (const auto& l : s.links)
      incident += (l.from == j.id) + (l.to == j.id);
    if (incident < 2)
      throw ValidationError("junction " + j.id + " has fewer than 2 incident links");

    for (Dir a : j.approaches) {
      auto it = j.turn_rates.find(a);
      if (it == j.turn_rates.end())
        throw ValidationError("junction " + j.id + " approach " + dir_name(a) +
                              " has no turn rates");
      const TurnRates& tr = it->second;
      double sum = 0.0;
      int present = 0;
      for (Turn t : {Turn::Left, Turn::Through, Turn::Right}) {
        if (!tr[t].has_value()) continue;
        const double r = *tr[t];
        if (r < 0.0 || r > 1.0)
          throw ValidationError("junction " + j.id + " approach " + dir_name(a) + " " +
                                turn_name(t) + " rate out of [0,1]");
        sum += r;
        ++present;
        if (r > 0.0 && !outs.count(exit_arm(a, t)))
          throw ValidationError("junction " + j.id + " approach " + dir_name(a) + " " +
                                turn_name(t) + " turn exits through absent arm " +
                                dir_name(exit_arm(a, t)));
      }
      if (present == 0)
        throw ValidationError("junction " + j.id + " approach " + dir_name(a) +
                              " has no available turns");
      if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("junction " + j.id + " approach " + dir_name(a) +
                              " turn rates sum to " + std::to_string(sum) + ", expected 1");
    }
    for (const auto& [d, tr] : j.turn_rates)
      if (!j.has_approach(d))
        throw ValidationError("junction " + j.id + " has turn rates for absent approach " +
                              dir_name(d));
  }

  for (const auto& e : s.entrances) {
    int outbound = 0;
    for (const auto& l : s.links)
      if (l.from == e.id) ++outbound;
    if (outbound != 1)
      throw ValidationError("entrance " + e.id + " has " + std::to_string(outbound) +
                            " outbound links, expected exactly 1");
  }

  // Junction graph connectivity (entrances excluded; single junction is fine).
  if (!s.junctions.empty()) {
    std::unordered_map<std::string, std::vector<std::string>> adj;
    for (const auto& l : s.links)
      if (jids.count(l.from) && jids.count(l.to)) {
        adj[l.from].push_back(l.to);
        adj[l.to].push_back(l.from);
      }
    std::set<std::string> seen;
    std::vector<std::string> stack{s.junctions.front().id};
    seen.insert(stack.front());
    while (!stack.empty()) {
      const std::string cur = stack.back();
      stack.pop_back();
      for (const auto& nb : adj[cur])
        if (seen.insert(nb).second) stack.push_back(nb);
    }
    if (seen.size() != s.junctions.size())
      throw ValidationError("junction graph is not connected");
  }
}

namespace {

TurnRates parse_turn_rates(const json& node, const std::string& jid, const std::string& arm) {
  TurnRates tr;
  const std::array<const char*, 3> names{"left", "through", "right"};
  for (int i = 0; i < 3; ++i) {
    if (!node.contains(names[i]))
      throw ParseError("junction " + jid + " approach " + arm + " is missing '" + names[i] + "'");
    const auto& v = node.at(names[i]);
    if (v.is_null())
      continue;
    if (!v.is_number())
      throw ParseError("junction " + jid + " approach " + arm + " '" + names[i] +
                       "' must be a number or null");
    tr.rate[i] = v.get<double>();
  }
  return tr;
}

}  // namespace

TrafficScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open scenario file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("scenario '" + path + "': " + e.what());
  }

  TrafficScenario s;
  try {
    s.name = doc.value("name", "");
    s.free_speed_mps = doc.value("free_speed_mps", 13.89);
    s.topology_approximate = doc.value("topology_approximate", false);

    for (const auto& jn : doc.at("junctions")) {
      Junction j;
      j.id = jn.at("id").get<std::string>();
      const std::string kind = jn.at("kind").get<std::string>();
      if (kind == "crossroad")
        j.kind = JunctionKind::Crossroad;
      else if (kind == "tjunction")
        j.kind = JunctionKind::TJunction;
      else
        throw ParseError("junction " + j.id + " has unknown kind '" + kind + "'");
      for (const auto& a : jn.at("approaches"))
        j.approaches.push_back(parse_dir(a.get<std::string>()));
      std::sort(j.approaches.begin(), j.approaches.end(),
                [](Dir a, Dir b) { return static_cast<int>(a) < static_cast<int>(b); });
      for (const auto& [arm, rates] : jn.at("turn_rates").items())
        j.turn_rates[parse_dir(arm)] = parse_turn_rates(rates, j.id, arm);
      s.junctions.push_back(std::move(j));
    }

    for (const auto& ln : doc.at("links")) {
      RoadLink l;
      l.from = ln.at("from").get<std::string>();
      l.to = ln.at("to").get<std::string>();
      l.length_m = ln.at("length_m").get<double>();
      l.approach_dir = parse_dir(ln.at("approach_dir").get<std::string>());
      s.links.push_back(std::move(l));
    }

    for (const auto& en : doc.at("entrances")) {
      Entrance e;
      e.id = en.at("id").get<std::string>();
      e.demand_vph = en.at("demand_vph").get<double>();
      s.entrances.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw ParseError("scenario '" + path + "': " + e.what());
  }

  std::sort(s.junctions.begin(), s.junctions.end(),
            [](const Junction& a, const Junction& b) { return a.id < b.id; });
  validate_scenario(s);
  return s;
}

void write_scenario(const TrafficScenario& s, const std::string& path) {
  json doc;
  doc["name"] = s.name;
  doc["free_speed_mps"] = s.free_speed_mps;
  if (s.topology_approximate)
    doc["topology_approximate"] = true;

  doc["junctions"] = json::array();
  for (const auto& j : s.junctions) {
    json jn;
    jn["id"] = j.id;
    jn["kind"] = j.kind == JunctionKind::Crossroad ? "crossroad" : "tjunction";
    jn["approaches"] = json::array();
    for (Dir a : j.approaches)
      jn["approaches"].push_back(dir_name(a));
    json rates = json::object();
    for (Dir a : j.approaches) {
      const TurnRates& tr = j.turn_rates.at(a);
      json r;
      r["left"] = tr[Turn::Left] ? json(*tr[Turn::Left]) : json(nullptr);
      r["through"] = tr[Turn::Through] ? json(*tr[Turn::Through]) : json(nullptr);
      r["right"] = tr[Turn::Right] ? json(*tr[Turn::Right]) : json(nullptr);
      rates[dir_name(a)] = r;
    }
    jn["turn_rates"] = rates;
    doc["junctions"].push_back(jn);
  }

  doc["links"] = json::array();
  for (const auto& l : s.links) {
    json ln;
    ln["from"] = l.from;
    ln["to"] = l.to;
    ln["length_m"] = l.length_m;
    ln["approach_dir"] = dir_name(l.approach_dir);
    doc["links"].push_back(ln);
  }

  doc["entrances"] = json::array();
  for (const auto& e : s.entrances) {
    json en;
    en["id"] = e.id;
    en["demand_vph"] = e.demand_vph;
    doc["entrances"].push_back(en);
  }

  std::ofstream out(path);
  if (!out)
    throw ParseError("cannot write scenario file '" + path + "'");
  out << doc.dump(2) << "\n";
}

PlanLayout build_layout(const TrafficScenario& s) {
  PlanLayout layout;
  int offset = 0;
  for (const auto& j : s.junctions) {  // already sorted lexicographically
    PlanLayout::Slot slot;
    slot.junction_id = j.id;
    slot.offset = offset;
    slot.phases = phase_count(j.kind);
    offset += slot.phases;
    layout.slots.push_back(std::move(slot));
  }
  layout.total_dims = offset;
  return layout;
}

SignalPlan midpoint_plan(const PlanLayout& layout, const PlanBounds& bounds) {
  const double mid = (static_cast<double>(bounds.lower) + bounds.upper) / 2.0;
  const int v = static_cast<int>(std::round(mid));
  return SignalPlan(static_cast<std::size_t>(layout.total_dims), v);
}

}  // namespace scso
