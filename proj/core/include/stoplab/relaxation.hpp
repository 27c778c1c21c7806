#pragma once

#include <map>

#include "stoplab/lp.hpp"
#include "stoplab/processes.hpp"
#include "stoplab/snell.hpp"

namespace stoplab {

/// Randomized quasi-stopping plan: nonnegative stopping mass per slot,
/// total mass along every root-to-leaf path at most one. `a` carries the
/// optional mass at slot t per node, `b` the predictable mass at slot (t+1)-
/// per non-terminal node. Pure plans are the 0/1 elements.
struct RandomizedQuasiStopping {
  std::map<NodeId, double> a;
  std::map<NodeId, double> b;

  double a_at(NodeId id) const;
  double b_at(NodeId id) const;
};

/// Feasibility: weights >= -1e-12, every path mass <= 1 + 1e-9, masses only
/// on known nodes (b only on non-terminal ones). Throws ValidationError.
void validate_randomized(const FiltrationTree& tree, const RandomizedQuasiStopping& x);

/// Objective value sum_n P(n) opt(n) a_n + sum_p P(p) pre(p) b_p.
double randomized_objective(const FiltrationTree& tree, const LadlagReward& y,
                            const RandomizedQuasiStopping& x);

RandomizedQuasiStopping to_randomized(const QuasiStoppingTime& q);

/// One variable per slot, one mass-budget constraint per leaf path:
///   maximize  sum P(n) opt(n) a_n [+ sum P(p) pre(p) b_p]
///   s.t.      sum_{slots on path} mass <= 1 per leaf,  all masses >= 0.
/// With quasi = false the predictable slots are dropped.
LinearProgram build_primal_lp(const FiltrationTree& tree, const LadlagReward& y, bool quasi);

/// Maps an optimal solution of build_primal_lp back to node masses.
RandomizedQuasiStopping from_lp_solution(const LinearProgram& lp, const LpSolution& sol);

/// True iff every weight is within tol of {0,1} and every path mass is
/// within tol of {0,1}. Throws on infeasible input.
bool is_extreme(const FiltrationTree& tree, const RandomizedQuasiStopping& x,
                double tol = kDefaultTol);

struct SplitResult {
  RandomizedQuasiStopping x1;
  RandomizedQuasiStopping x2;
  double weight1 = 0.0;  // x = weight1 * x1 + weight2 * x2
  double weight2 = 0.0;
};

/// Splits a non-extreme plan at threshold s in (0,1) by clipping the
/// cumulative path mass: x1 = (x ^ s)/s, x2 = ((x - s) v 0)/(1-s),
/// re-differenced to node masses. Throws if s does not separate.
SplitResult split_nonextreme(const FiltrationTree& tree, const RandomizedQuasiStopping& x,
                             double s);

/// Sweeps the level-crossing policies tau_s over the finite set of cumulative
/// mass thresholds of x and returns the best one. The objective of x is the
/// threshold-average of the swept values, so the result never scores below x.
QuasiStoppingTime purify(const FiltrationTree& tree, const LadlagReward& y,
                         const RandomizedQuasiStopping& x);

}  // namespace stoplab
