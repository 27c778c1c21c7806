#include "stoplab/processes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stoplab {

void validate_reward(const FiltrationTree& tree, const LadlagReward& y) {
  for (NodeId id : tree.node_ids()) {
    if (!y.opt.contains(id))
      throw ValidationError("reward opt track missing node " + std::to_string(id));
    if (!std::isfinite(y.opt.at(id)))
      throw ValidationError("reward opt track not finite at node " + std::to_string(id));
    if (!tree.is_terminal(id)) {
      if (!y.pre.contains(id))
        throw ValidationError("reward pre track missing node " + std::to_string(id));
      if (!std::isfinite(y.pre.at(id)))
        throw ValidationError("reward pre track not finite at node " + std::to_string(id));
    }
  }
}

NodeFunction predictable_projection(const FiltrationTree& tree, const NodeFunction& opt) {
  NodeFunction out;
  for (NodeId id : tree.node_ids()) {
    if (tree.is_terminal(id)) continue;
    double acc = 0.0;
    for (NodeId c : tree.children_of(id)) acc += tree.cond_prob(c) * opt.at(c);
    out.set(id, acc);
  }
  return out;
}

NodeFunction predictable_projection(const FiltrationTree& tree, const LadlagReward& y) {
  return predictable_projection(tree, y.opt);
}

NodeFunction optional_projection(const FiltrationTree& tree, const PathProcess& z) {
  const auto& leaves = tree.leaves();
  if (z.values.size() != static_cast<std::size_t>(tree.horizon()) + 1)
    throw ValidationError("path process must cover times 0.." +
                          std::to_string(tree.horizon()));
  for (const auto& row : z.values)
    if (row.size() != leaves.size())
      throw ValidationError("path process row does not cover all " +
                            std::to_string(leaves.size()) + " leaf paths");

  // Leaf ordinals under each node, accumulated bottom-up over the reverse
  // (time, id) order so children are complete before their parent.
  NodeFunction out;
  std::unordered_map<NodeId, std::vector<std::size_t>> under;
  for (std::size_t i = 0; i < leaves.size(); ++i) under[leaves[i]] = {i};
  const auto& ids = tree.node_ids();
  for (auto it = ids.rbegin(); it != ids.rend(); ++it) {
    NodeId id = *it;
    if (!tree.is_terminal(id)) {
      auto& mine = under[id];
      for (NodeId c : tree.children_of(id)) {
        const auto& cs = under[c];
        mine.insert(mine.end(), cs.begin(), cs.end());
      }
    }
    int t = tree.time_of(id);
    double p_node = tree.atom_probability(id);
    double acc = 0.0;
    for (std::size_t li : under[id])
      acc += tree.atom_probability(leaves[li]) / p_node * z.values[t][li];
    out.set(id, acc);
  }
  return out;
}

RegularityReport classify_regularity(const FiltrationTree& tree, const LadlagReward& y,
                                     double tol) {
  if (tol < 0) throw ValidationError("tolerance must be nonnegative");
  validate_reward(tree, y);
  NodeFunction proj = predictable_projection(tree, y);
  RegularityReport report;
  report.is_subregular = true;
  report.is_regular = true;
  for (NodeId id : tree.node_ids()) {
    if (tree.is_terminal(id)) continue;
    double pre = y.pre.at(id);
    double pp = proj.at(id);
    if (pre > pp + tol) report.is_subregular = false;
    if (std::abs(pre - pp) > tol) {
      report.is_regular = false;
      report.violations.push_back({id, pre, pp});
    }
  }
  return report;
}

PiecewiseLinearConvex::PiecewiseLinearConvex(double anchor_x, double anchor_y,
                                             std::vector<double> breakpoints,
                                             std::vector<double> slopes)
    : anchor_x_(anchor_x),
      anchor_y_(anchor_y),
      breakpoints_(std::move(breakpoints)),
      slopes_(std::move(slopes)) {
  if (slopes_.size() != breakpoints_.size() + 1)
    throw ValidationError("need one slope per segment (breakpoints+1)");
  if (!std::is_sorted(breakpoints_.begin(), breakpoints_.end()))
    throw ValidationError("breakpoints must be sorted");
  for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i)
    if (breakpoints_[i] == breakpoints_[i + 1])
      throw ValidationError("breakpoints must be distinct");
  for (std::size_t i = 0; i + 1 < slopes_.size(); ++i)
    if (slopes_[i + 1] < slopes_[i])
      throw ValidationError("slope decrease at breakpoint " + std::to_string(i) +
                            ": function is not convex");
}

double PiecewiseLinearConvex::operator()(double x) const {
  // Integrate the slope from the anchor to x, segment by segment.
  double lo = std::min(anchor_x_, x);
  double hi = std::max(anchor_x_, x);
  double sign = x >= anchor_x_ ? 1.0 : -1.0;
  double acc = anchor_y_;
  std::size_t nseg = slopes_.size();
  for (std::size_t s = 0; s < nseg; ++s) {
    double seg_lo = s == 0 ? -std::numeric_limits<double>::infinity() : breakpoints_[s - 1];
    double seg_hi = s + 1 == nseg ? std::numeric_limits<double>::infinity() : breakpoints_[s];
    double a = std::max(lo, seg_lo);
    double b = std::min(hi, seg_hi);
    if (b > a) acc += sign * slopes_[s] * (b - a);
  }
  return acc;
}

PiecewiseLinearConvex PiecewiseLinearConvex::identity() {
  return PiecewiseLinearConvex(0.0, 0.0, {}, {1.0});
}

PiecewiseLinearConvex PiecewiseLinearConvex::absolute_value() {
  return PiecewiseLinearConvex(0.0, 0.0, {0.0}, {-1.0, 1.0});
}

PiecewiseLinearConvex PiecewiseLinearConvex::positive_part() {
  return PiecewiseLinearConvex(0.0, 0.0, {0.0}, {0.0, 1.0});
}

ConvexCompositionResult compose_convex(const FiltrationTree& tree, const LadlagReward& y,
                                       const PiecewiseLinearConvex& g, bool increasing,
                                       double tol) {
  validate_reward(tree, y);
  if (increasing) {
    if (!g.increasing())
      throw ValidationError("composition flagged increasing but g has a negative slope");
  } else {
    RegularityReport base = classify_regularity(tree, y, tol);
    if (!base.is_regular)
      throw ValidationError("composing a non-increasing convex function requires a regular reward");
  }
  ConvexCompositionResult result;
  for (NodeId id : tree.node_ids()) {
    result.reward.opt.set(id, g(y.opt.at(id)));
    if (!tree.is_terminal(id)) result.reward.pre.set(id, g(y.pre.at(id)));
  }
  result.report = classify_regularity(tree, result.reward, tol);
  return result;
}

}  // namespace stoplab
