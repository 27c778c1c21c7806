#pragma once

#include <vector>

#include "stoplab/filtration.hpp"

namespace stoplab {

/// Reward process with two tracks. `opt` holds R_t on every node's atom;
/// `pre` holds the value collected by a predictable stop at slot (t+1)-,
/// stored on the announcing time-t node so it is F_t-measurable. The reward
/// at T+ is the constant 0 and is never stored.
struct LadlagReward {
  NodeFunction opt;  // on all nodes
  NodeFunction pre;  // on all non-terminal nodes
};

/// Throws ValidationError unless opt covers every node, pre covers every
/// non-terminal node, and all values are finite.
void validate_reward(const FiltrationTree& tree, const LadlagReward& y);

/// Not-necessarily-adapted process indexed by (time, leaf path). Leaf order
/// follows FiltrationTree::leaves().
struct PathProcess {
  std::vector<std::vector<double>> values;  // values[t][leaf ordinal]
};

/// E[R_{t+1} | F_t] of the opt track, on non-terminal nodes: the value the
/// predictable projection assigns to slot t+1, attached to the time-t node.
NodeFunction predictable_projection(const FiltrationTree& tree, const LadlagReward& y);
NodeFunction predictable_projection(const FiltrationTree& tree, const NodeFunction& opt);

/// Optional projection of a path-indexed process: at node n,
/// sum over leaves under n of P(leaf|n) * z[t_n][leaf].
NodeFunction optional_projection(const FiltrationTree& tree, const PathProcess& z);

struct RegularityViolation {
  NodeId node;
  double pre_value;
  double projection_value;
};

struct RegularityReport {
  bool is_subregular = false;  // pre <= projection + tol everywhere
  bool is_regular = false;     // |pre - projection| <= tol everywhere
  std::vector<RegularityViolation> violations;  // all non-terminal mismatches
};

RegularityReport classify_regularity(const FiltrationTree& tree, const LadlagReward& y,
                                     double tol = kDefaultTol);

/// Convex piecewise-linear function of one variable, given by an anchor
/// point, sorted breakpoints and per-segment slopes (one more slope than
/// breakpoints). Construction rejects any slope decrease.
class PiecewiseLinearConvex {
 public:
  PiecewiseLinearConvex(double anchor_x, double anchor_y, std::vector<double> breakpoints,
                        std::vector<double> slopes);

  double operator()(double x) const;
  bool increasing() const { return slopes_.front() >= 0.0; }

  static PiecewiseLinearConvex identity();
  static PiecewiseLinearConvex absolute_value();
  static PiecewiseLinearConvex positive_part();  // max(x, 0)

 private:
  double anchor_x_;
  double anchor_y_;
  std::vector<double> breakpoints_;
  std::vector<double> slopes_;
};

struct ConvexCompositionResult {
  LadlagReward reward;
  RegularityReport report;  // regularity of the composed reward
};

/// Applies g to both tracks of y. With increasing = false, y must be regular
/// (checked to `tol`); with increasing = true, g must be nondecreasing.
ConvexCompositionResult compose_convex(const FiltrationTree& tree, const LadlagReward& y,
                                       const PiecewiseLinearConvex& g, bool increasing,
                                       double tol = kDefaultTol);

}  // namespace stoplab
