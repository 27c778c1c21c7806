#include "stoplab/norms.hpp"

#include <cmath>

#include "stoplab/lp.hpp"
#include "stoplab/relaxation.hpp"
#include "stoplab/snell.hpp"

namespace stoplab {

double sup_norm(const FiltrationTree& tree, const LadlagReward& y) {
  validate_reward(tree, y);
  LadlagReward abs_y;
  for (NodeId id : tree.node_ids()) {
    abs_y.opt.set(id, std::abs(y.opt.at(id)));
    if (!tree.is_terminal(id)) abs_y.pre.set(id, kNoPredictableStop);
  }
  return solve_os(tree, abs_y).value;
}

NormReport proj_norm(const FiltrationTree& tree, const LadlagReward& y) {
  validate_reward(tree, y);
  const auto& leaves = tree.leaves();
  const int horizon = tree.horizon();
  const std::size_t n_leaves = leaves.size();

  // Variables: z_{t,w} free for t = 0..T per leaf, then s_w >= 0.
  LinearProgram lp;
  lp.direction = LpDirection::minimize;
  auto z_col = [n_leaves](int t, std::size_t leaf_ord) {
    return static_cast<std::size_t>(t) * n_leaves + leaf_ord;
  };
  for (int t = 0; t <= horizon; ++t)
    for (std::size_t w = 0; w < n_leaves; ++w) {
      lp.vars.push_back({"z_" + std::to_string(t) + "_" + std::to_string(leaves[w]),
                         VarKind::aux, leaves[w], false});
      lp.objective.push_back(0.0);
    }
  const std::size_t s_base = lp.vars.size();
  for (std::size_t w = 0; w < n_leaves; ++w) {
    lp.vars.push_back({"s_" + std::to_string(leaves[w]), VarKind::aux, leaves[w], true});
    lp.objective.push_back(tree.atom_probability(leaves[w]));
  }
  const std::size_t n_cols = lp.vars.size();

  std::unordered_map<NodeId, std::size_t> leaf_ord;
  for (std::size_t w = 0; w < n_leaves; ++w) leaf_ord[leaves[w]] = w;

  // E[z_t | F_t] = opt at every node.
  for (NodeId id : tree.node_ids()) {
    std::vector<double> row(n_cols, 0.0);
    int t = tree.time_of(id);
    double p_node = tree.atom_probability(id);
    for (NodeId leaf : leaves) {
      // leaf lies under id iff id is on its path
      bool below = false;
      for (NodeId n : tree.path_to(leaf))
        if (n == id) { below = true; break; }
      if (below) row[z_col(t, leaf_ord[leaf])] = tree.atom_probability(leaf) / p_node;
    }
    lp.rows.push_back(std::move(row));
    lp.senses.push_back(RowSense::equal);
    lp.rhs.push_back(y.opt.at(id));
    lp.row_names.push_back("proj_" + std::to_string(id));
  }

  // |z_{t,w}| <= s_w.
  for (int t = 0; t <= horizon; ++t)
    for (std::size_t w = 0; w < n_leaves; ++w) {
      std::vector<double> up(n_cols, 0.0);
      up[z_col(t, w)] = 1.0;
      up[s_base + w] = -1.0;
      lp.rows.push_back(std::move(up));
      lp.senses.push_back(RowSense::less_eq);
      lp.rhs.push_back(0.0);
      lp.row_names.push_back("abs_up_" + std::to_string(t) + "_" + std::to_string(leaves[w]));

      std::vector<double> dn(n_cols, 0.0);
      dn[z_col(t, w)] = -1.0;
      dn[s_base + w] = -1.0;
      lp.rows.push_back(std::move(dn));
      lp.senses.push_back(RowSense::less_eq);
      lp.rhs.push_back(0.0);
      lp.row_names.push_back("abs_dn_" + std::to_string(t) + "_" + std::to_string(leaves[w]));
    }

  LpSolution sol = solve_lp(lp);

  NormReport report;
  report.sup_norm = sup_norm(tree, y);
  report.proj_norm = sol.objective;
  report.witness_z.values.assign(static_cast<std::size_t>(horizon) + 1,
                                 std::vector<double>(n_leaves, 0.0));
  for (int t = 0; t <= horizon; ++t)
    for (std::size_t w = 0; w < n_leaves; ++w)
      report.witness_z.values[static_cast<std::size_t>(t)][w] = sol.primal[z_col(t, w)];
  return report;
}

std::pair<double, double> nonneg_norm_identity(const FiltrationTree& tree,
                                               const LadlagReward& y) {
  validate_reward(tree, y);
  for (NodeId id : tree.node_ids())
    if (y.opt.at(id) < 0.0)
      throw ValidationError("nonnegative identity needs opt >= 0, node " +
                            std::to_string(id) + " has " + std::to_string(y.opt.at(id)));
  LpSolution sol = solve_lp(build_primal_lp(tree, y, /*quasi=*/false));
  return {sol.objective, sup_norm(tree, y)};
}

}  // namespace stoplab
