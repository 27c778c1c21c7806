#pragma once

#include <set>

#include "stoplab/defs.hpp"

namespace stoplab {

class FiltrationTree;

/// A quasi-stopping plan on a scenario tree.
///
/// A node id in `opt_stops` means "stop at this node's slot t"; a
/// non-terminal node id in `pre_stops` means "stop at slot (t+1)- given this
/// node's history" (announced one tick ahead, so the decision is
/// F_t-measurable by construction). A path carrying no marker never stops and
/// collects reward 0. An ordinary stopping time is a QuasiStoppingTime with
/// empty `pre_stops`.
struct QuasiStoppingTime {
  std::set<NodeId> opt_stops;
  std::set<NodeId> pre_stops;

  bool empty() const { return opt_stops.empty() && pre_stops.empty(); }
  bool operator==(const QuasiStoppingTime&) const = default;
};

/// Throws ValidationError unless `q` marks known nodes, pre-stops only
/// non-terminal nodes, and no root-to-leaf path carries two markers.
void validate_policy(const FiltrationTree& tree, const QuasiStoppingTime& q);

}  // namespace stoplab
