#pragma once

#include <string>
#include <vector>

#include "stoplab/lp.hpp"
#include "stoplab/modelio.hpp"
#include "stoplab/relaxation.hpp"
#include "stoplab/snell.hpp"

namespace stoplab {

/// Dual feasible point: a martingale M dominating the reward. The value of M
/// at the predictable slot (t+1)- is M at the announcing node (martingales
/// gain nothing between ticks), so domination on the pre track is the
/// explicit constraint M(p) >= pre(p).
struct MartingaleCertificate {
  NodeFunction m;
  double objective = 0.0;  // M(root)
};

/// Per-leaf-path dual of the randomized stopping problem:
///   minimize  sum_w P(w) y_w
///   s.t.      E[y | F_t](n) >= opt(n) at every node,
///             E[y | F_t](p) >= pre(p) at every non-terminal p,  y >= 0.
/// The optimal M(n) = E[y | F_t](n) is a dominating martingale.
LinearProgram build_dual_lp(const FiltrationTree& tree, const LadlagReward& y);

/// The martingale induced by per-path values: M(n) = sum_{w under n} P(w|n) y_w.
/// `path_values` follows the order of build_dual_lp's variables (tree.leaves()).
MartingaleCertificate certificate_from_path_values(const FiltrationTree& tree,
                                                   const std::vector<double>& path_values);

/// Reads the path multipliers off an optimal primal LP solution
/// (dual of path constraint w, rescaled by 1/P(w)) and builds the martingale.
MartingaleCertificate certificate_from_primal_duals(const FiltrationTree& tree,
                                                    const LinearProgram& primal,
                                                    const LpSolution& sol);

/// Doob martingale part of the Snell solution; dual optimal by construction,
/// with objective equal to the primal value.
MartingaleCertificate dual_from_snell(const FiltrationTree& tree, const SnellSolution& s);

struct CertificateViolation {
  std::string kind;  // martingale | domination_opt | domination_pre |
                     // terminal_sign | oc1_term | oc2_path
  NodeId node = -1;
  double amount = 0.0;
};

struct CertificateReport {
  bool feasible = false;
  bool optimal = false;
  double gap = 0.0;           // M(root) - objective(x)
  double oc1_residual = 0.0;  // mass-weighted slack of M over the reward
  double oc2_residual = 0.0;  // unstopped mass times M_T, aggregated
  std::vector<CertificateViolation> violations;
};

/// Checks the complementary-slackness optimality conditions of the pair
/// (x, M): oc1 = sum P(n) a_n (M(n)-opt(n)) + sum P(p) b_p (M(p)-pre(p)),
/// oc2 = sum_w P(w) (1 - path mass) M_T(w). Optimal iff M is feasible and
/// both residuals vanish to tol. Per-path oc2 failures are listed
/// individually; the per-path form is the authoritative one.
CertificateReport check_certificate(const FiltrationTree& tree, const LadlagReward& y,
                                    const RandomizedQuasiStopping& x,
                                    const MartingaleCertificate& cert,
                                    double tol = kDefaultTol);

/// Exact tree expectation of the pathwise maximum of (reward + M_T - M) over
/// the slots 0, 1-, 1, ..., T-, T, T+ (reward 0 and increment 0 at T+; at a
/// predictable slot M takes the announcing node's value). An upper bound on
/// the quasi-stopping value for every martingale M, tight at the Snell-Doob
/// martingale. Throws if M fails the martingale check.
double rogers_bound(const FiltrationTree& tree, const LadlagReward& y,
                    const NodeFunction& m, double tol = kDefaultTol);

enum class DualMartingale { snell_doob, zero };

struct McDualResult {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo Rogers bound on a binomial lattice: mean and standard error
/// of the pathwise penalty M_0 + max over slots of (R_t - M_t) across
/// n_paths independent lattice paths. Per-path RNG substreams are derived
/// from (seed, path index) by a SplitMix64 mix, so results do not depend on
/// evaluation order; the reduction is pairwise in fixed index order, making
/// the estimate bitwise independent of the worker count.
McDualResult mc_dual_bound(const LatticeModel& lattice, DualMartingale martingale,
                           std::int64_t n_paths, std::uint64_t seed, int threads = 1);

}  // namespace stoplab
