#pragma once

#include <string>
#include <vector>

#include "scso/net_model.hpp"
#include "scso/partition.hpp"

namespace scso {

/// Undirected, unweighted junction adjacency. Entrances and parallel links
/// are collapsed: any number of road links between two junctions becomes a
/// single edge.
struct JunctionGraph {
  std::vector<std::string> node_ids;        // lexicographic
  std::vector<std::pair<int, int>> edges;   // (a, b) with a < b, deduplicated

  int node_count() const { return static_cast<int>(node_ids.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }
  int index_of(const std::string& id) const;
};

JunctionGraph build_junction_graph(const TrafficScenario& s);

/// Newman modularity of a grouping: Q = sum_g (e_gg - a_g^2), where e is the
/// edge-fraction matrix (off-diagonal entries split symmetrically) and a_g
/// its row sums. `group` maps node index to group id; returns 0 for a graph
/// with no edges.
double modularity(const JunctionGraph& g, const std::vector<int>& group);

/// Greedy agglomerative modularity maximization. Starts from singletons,
/// repeatedly merges the connected pair with the largest modularity gain
/// (ties to the lowest label pair), and returns the recorded state with the
/// highest Q, the singleton start included. Throws NoEdges when the graph
/// has no edges.
Partition newman_fast(const JunctionGraph& g);

/// Reads a JSON object {junction_id: group_label} and canonicalizes it.
/// Labels may be strings or integers. Every junction of the scenario must
/// appear, and no unknown junction may appear.
Partition load_partition(const std::string& path, const TrafficScenario& s);

void write_partition(const Partition& p, const std::string& path);

}  // namespace scso
