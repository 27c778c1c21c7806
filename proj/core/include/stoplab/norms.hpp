#pragma once

#include <utility>

#include "stoplab/processes.hpp"

namespace stoplab {

struct NormReport {
  double sup_norm = 0.0;   // sup over stopping times of E|y_tau|
  double proj_norm = 0.0;  // min E ||z||_sup over lifts z with optional projection y
  PathProcess witness_z;   // a lift attaining proj_norm
};

/// sup_{tau} E|y_tau|, computed as the pure-stopping value of |opt|.
/// The pre track of y is ignored; never-stop contributes 0 and never binds.
double sup_norm(const FiltrationTree& tree, const LadlagReward& y);

/// Solves  min sum_w P(w) s_w  over lifts z_{t,w} with
/// E[z_t | F_t] = opt on every node and |z_{t,w}| <= s_w,
/// and reports it next to sup_norm. The two agree on every finite model.
NormReport proj_norm(const FiltrationTree& tree, const LadlagReward& y);

/// For nonnegative opt tracks: (relaxed pure-stopping LP value, sup_norm).
/// The two components coincide; the caller asserts equality.
std::pair<double, double> nonneg_norm_identity(const FiltrationTree& tree,
                                               const LadlagReward& y);

}  // namespace stoplab
