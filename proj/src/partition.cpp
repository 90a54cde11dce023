#include "scso/partition.hpp"

#include <algorithm>

#include "scso/errors.hpp"

namespace scso {

void Partition::bind_layout(const PlanLayout& layout) {
  plan_indices.assign(static_cast<std::size_t>(group_count), {});
  for (const auto& slot : layout.slots) {
    auto it = group_of.find(slot.junction_id);
    if (it == group_of.end())
      throw ValidationError("partition does not cover junction '" + slot.junction_id + "'");
    auto& idx = plan_indices[static_cast<std::size_t>(it->second)];
    for (int k = 0; k < slot.phases; ++k)
      idx.push_back(slot.offset + k);
  }
  for (std::size_t g = 0; g < plan_indices.size(); ++g)
    if (plan_indices[g].empty())
      throw ValidationError("partition group " + std::to_string(g) +
                            " contains no junction from the layout");
}

int Partition::subplan_dims(int group) const {
  if (group < 0 || group >= group_count)
    throw IndexError("sub-network index " + std::to_string(group) + " out of range");
  if (!bound())
    throw ValidationError("partition has no bound layout");
  return static_cast<int>(plan_indices[static_cast<std::size_t>(group)].size());
}

Partition make_partition(const std::map<std::string, int>& raw_assignment) {
  Partition p;
  std::map<int, int> relabel;
  // std::map iterates junction ids in ascending order, which fixes the
  // first-appearance relabeling deterministically.
  for (const auto& [jid, raw] : raw_assignment) {
    auto [it, fresh] = relabel.try_emplace(raw, static_cast<int>(relabel.size()));
    p.group_of[jid] = it->second;
    (void)fresh;
  }
  p.group_count = static_cast<int>(relabel.size());
  return p;
}

std::vector<int> extract_subplan(const SignalPlan& plan, const Partition& p, int group) {
  const int n = p.subplan_dims(group);
  const auto& idx = p.plan_indices[static_cast<std::size_t>(group)];
  std::vector<int> sub;
  sub.reserve(static_cast<std::size_t>(n));
  for (int i : idx) {
    if (i < 0 || i >= static_cast<int>(plan.size()))
      throw DimensionMismatch("plan has " + std::to_string(plan.size()) +
                              " entries but the partition expects index " + std::to_string(i));
    sub.push_back(plan[static_cast<std::size_t>(i)]);
  }
  return sub;
}

SignalPlan insert_subplan(const SignalPlan& context, const std::vector<int>& sub,
                          const Partition& p, int group) {
  const int n = p.subplan_dims(group);
  if (static_cast<int>(sub.size()) != n)
    throw DimensionMismatch("sub-plan has " + std::to_string(sub.size()) +
                            " entries, sub-network needs " + std::to_string(n));
  const auto& idx = p.plan_indices[static_cast<std::size_t>(group)];
  SignalPlan out = context;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const int i = idx[k];
    if (i < 0 || i >= static_cast<int>(out.size()))
      throw DimensionMismatch("context plan has " + std::to_string(out.size()) +
                              " entries but the partition expects index " + std::to_string(i));
    out[static_cast<std::size_t>(i)] = sub[k];
  }
  return out;
}

}  // namespace scso
