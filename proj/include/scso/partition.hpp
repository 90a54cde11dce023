#pragma once

#include <map>
#include <string>
#include <vector>

#include "scso/net_model.hpp"

namespace scso {

/// Assignment of junctions to sub-networks, plus the induced index map for
/// slicing signal plans. Group ids are contiguous and ordered by first
/// appearance over the lexicographic junction order.
struct Partition {
  std::map<std::string, int> group_of;
  int group_count = 0;
  double modularity_q = 0.0;

  /// plan_indices[g] lists the positions of group g's phase durations in a
  /// full SignalPlan, ascending. Filled by bind_layout.
  std::vector<std::vector<int>> plan_indices;

  /// Computes plan_indices from a layout. Must be called before any plan
  /// slicing. Throws ValidationError if the layout and assignment disagree.
  void bind_layout(const PlanLayout& layout);

  bool bound() const { return !plan_indices.empty(); }
  int subplan_dims(int group) const;
};

/// Canonicalizes an arbitrary labeling into contiguous group ids, ordered by
/// first appearance over ascending junction id.
Partition make_partition(const std::map<std::string, int>& raw_assignment);

/// Phase durations of sub-network `group`, in plan order.
std::vector<int> extract_subplan(const SignalPlan& plan, const Partition& p, int group);

/// Returns a copy of `context` with sub-network `group`'s slice replaced.
/// The context itself is not mutated.
SignalPlan insert_subplan(const SignalPlan& context, const std::vector<int>& sub,
                          const Partition& p, int group);

}  // namespace scso
