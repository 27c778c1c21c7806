#pragma once

#include "stoplab/processes.hpp"
#include "stoplab/stopping.hpp"

namespace stoplab {

/// Backward-induction solution of an optimal (quasi-)stopping problem.
///
/// W is the value at slot t on each node; C the value at slot (t+1)-,
/// attached to the announcing time-t node. At the horizon W = max(opt, 0)
/// (the never-stop option pays 0); below it
///   C(p) = max(pre(p), E[W_{t+1} | F_t](p)),  W(p) = max(opt(p), C(p)).
/// The policy is the first-hit rule: walking slots in order 0, 1-, 1, 2-, ...
/// stop at the earliest slot where stopping is weakly optimal.
struct SnellSolution {
  NodeFunction w;  // on all nodes
  NodeFunction c;  // on all non-terminal nodes
  double value = 0.0;
  QuasiStoppingTime policy;
};

SnellSolution quasi_snell(const FiltrationTree& tree, const LadlagReward& y);

/// Pure-stopping problem: the recursion above with predictable stops
/// disabled, so C(p) = E[W_{t+1} | F_t](p) and the policy has no pre stops.
SnellSolution solve_os(const FiltrationTree& tree, const LadlagReward& y);

/// E[R_tau + pre-track collected at tau~] under the given plan.
double evaluate_policy(const FiltrationTree& tree, const LadlagReward& y,
                       const QuasiStoppingTime& q);

/// Doob decomposition W = M - A of the Snell value process: M a martingale
/// with M(root) = W(root), A nonnegative, nondecreasing along paths,
/// predictable increments.
struct DoobDecomposition {
  NodeFunction m;
  NodeFunction a;
};

DoobDecomposition doob(const FiltrationTree& tree, const SnellSolution& s);

}  // namespace stoplab
