#include "scso/decomposer.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "scso/errors.hpp"
#include "json.hpp"

namespace scso {

int JunctionGraph::index_of(const std::string& id) const {
  const auto it = std::lower_bound(node_ids.begin(), node_ids.end(), id);
  if (it == node_ids.end() || *it != id)
    throw IndexError("junction '" + id + "' is not in the graph");
  return static_cast<int>(it - node_ids.begin());
}

JunctionGraph build_junction_graph(const TrafficScenario& s) {
  JunctionGraph g;
  for (const auto& j : s.junctions)
    g.node_ids.push_back(j.id);
  std::sort(g.node_ids.begin(), g.node_ids.end());

  std::set<std::pair<int, int>> edges;
  for (const auto& l : s.links) {
    if (s.is_entrance(l.from) || s.is_entrance(l.to)) continue;
    const int a = g.index_of(l.from);
    const int b = g.index_of(l.to);
    if (a == b) continue;
    edges.insert({std::min(a, b), std::max(a, b)});
  }
  g.edges.assign(edges.begin(), edges.end());
  return g;
}

double modularity(const JunctionGraph& g, const std::vector<int>& group) {
  if (static_cast<int>(group.size()) != g.node_count())
    throw DimensionMismatch("group assignment covers " + std::to_string(group.size()) +
                            " nodes, graph has " + std::to_string(g.node_count()));
  const int m = g.edge_count();
  if (m == 0) return 0.0;

  int ngroups = 0;
  for (int gi : group) ngroups = std::max(ngroups, gi + 1);

  // e_gg as within fractions; a_g as half-edge fractions per group.
  std::vector<double> within(static_cast<std::size_t>(ngroups), 0.0);
  std::vector<double> half(static_cast<std::size_t>(ngroups), 0.0);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (const auto& [u, v] : g.edges) {
    const int gu = group[static_cast<std::size_t>(u)];
    const int gv = group[static_cast<std::size_t>(v)];
    if (gu == gv) within[static_cast<std::size_t>(gu)] += inv_m;
    half[static_cast<std::size_t>(gu)] += 0.5 * inv_m;
    half[static_cast<std::size_t>(gv)] += 0.5 * inv_m;
  }
  double q = 0.0;
  for (int gi = 0; gi < ngroups; ++gi)
    q += within[static_cast<std::size_t>(gi)] - half[static_cast<std::size_t>(gi)] * half[static_cast<std::size_t>(gi)];
  return q;
}

Partition newman_fast(const JunctionGraph& g) {
  const int n = g.node_count();
  if (g.edge_count() == 0)
    throw NoEdges("junction graph has no edges to decompose");

  // Dense symmetric e-matrix over group labels; label = original node index.
  const double inv_m = 1.0 / static_cast<double>(g.edge_count());
  std::vector<std::vector<double>> e(static_cast<std::size_t>(n),
                                     std::vector<double>(static_cast<std::size_t>(n), 0.0));
  std::vector<double> a(static_cast<std::size_t>(n), 0.0);
  for (const auto& [u, v] : g.edges) {
    e[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] += 0.5 * inv_m;
    e[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] += 0.5 * inv_m;
    a[static_cast<std::size_t>(u)] += 0.5 * inv_m;
    a[static_cast<std::size_t>(v)] += 0.5 * inv_m;
  }

  std::vector<bool> active(static_cast<std::size_t>(n), true);
  std::vector<int> label(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) label[static_cast<std::size_t>(i)] = i;

  double q = 0.0;
  for (int i = 0; i < n; ++i)
    q -= a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(i)];

  std::vector<std::vector<int>> states{label};
  std::vector<double> qs{q};

  while (true) {
    double best_dq = 0.0;
    int bi = -1, bj = -1;
    for (int i = 0; i < n; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      for (int j = i + 1; j < n; ++j) {
        if (!active[static_cast<std::size_t>(j)]) continue;
        if (e[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] <= 0.0) continue;
        const double dq = 2.0 * (e[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
                                 a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(j)]);
        if (bi < 0 || dq > best_dq) {
          best_dq = dq;
          bi = i;
          bj = j;
        }
        // Equal gains fall through: the scan order already visits the
        // lowest (i, j) pair first.
      }
    }
    if (bi < 0) break;  // no connected pair left

    for (int k = 0; k < n; ++k) {
      if (!active[static_cast<std::size_t>(k)] || k == bi || k == bj) continue;
      e[static_cast<std::size_t>(bi)][static_cast<std::size_t>(k)] +=
          e[static_cast<std::size_t>(bj)][static_cast<std::size_t>(k)];
      e[static_cast<std::size_t>(k)][static_cast<std::size_t>(bi)] =
          e[static_cast<std::size_t>(bi)][static_cast<std::size_t>(k)];
    }
    e[static_cast<std::size_t>(bi)][static_cast<std::size_t>(bi)] +=
        e[static_cast<std::size_t>(bj)][static_cast<std::size_t>(bj)] +
        2.0 * e[static_cast<std::size_t>(bi)][static_cast<std::size_t>(bj)];
    a[static_cast<std::size_t>(bi)] += a[static_cast<std::size_t>(bj)];
    active[static_cast<std::size_t>(bj)] = false;
    for (int k = 0; k < n; ++k)
      if (label[static_cast<std::size_t>(k)] == bj) label[static_cast<std::size_t>(k)] = bi;

    q += best_dq;
    states.push_back(label);
    qs.push_back(q);
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < states.size(); ++i)
    if (qs[i] > qs[best]) best = i;

  std::map<std::string, int> assignment;
  for (int i = 0; i < n; ++i)
    assignment[g.node_ids[static_cast<std::size_t>(i)]] = states[best][static_cast<std::size_t>(i)];
  Partition p = make_partition(assignment);

  std::vector<int> canonical(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    canonical[static_cast<std::size_t>(i)] = p.group_of.at(g.node_ids[static_cast<std::size_t>(i)]);
  p.modularity_q = modularity(g, canonical);
  return p;
}

Partition load_partition(const std::string& path, const TrafficScenario& s) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open partition file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("partition '" + path + "': " + e.what());
  }
  if (!doc.is_object())
    throw ParseError("partition '" + path + "' must be a JSON object");

  std::map<std::string, std::string> labels;
  for (const auto& [jid, label] : doc.items()) {
    if (!s.find_junction(jid))
      throw ValidationError("partition names unknown junction '" + jid + "'");
    labels[jid] = label.is_string() ? label.get<std::string>() : label.dump();
  }
  for (const auto& j : s.junctions)
    if (!labels.count(j.id))
      throw ValidationError("partition does not cover junction '" + j.id + "'");

  std::map<std::string, int> raw;
  std::map<std::string, int> label_ids;
  for (const auto& [jid, label] : labels) {
    auto [it, fresh] = label_ids.try_emplace(label, static_cast<int>(label_ids.size()));
    raw[jid] = it->second;
    (void)fresh;
  }
  Partition p = make_partition(raw);

  const JunctionGraph g = build_junction_graph(s);
  if (g.edge_count() > 0) {
    std::vector<int> group(static_cast<std::size_t>(g.node_count()));
    for (int i = 0; i < g.node_count(); ++i)
      group[static_cast<std::size_t>(i)] = p.group_of.at(g.node_ids[static_cast<std::size_t>(i)]);
    p.modularity_q = modularity(g, group);
  }
  p.bind_layout(build_layout(s));
  return p;
}

void write_partition(const Partition& p, const std::string& path) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [jid, group] : p.group_of)
    doc[jid] = group;
  std::ofstream out(path);
  if (!out)
    throw ParseError("cannot write partition file '" + path + "'");
  out << doc.dump(2) << "\n";
}

}  // namespace scso
