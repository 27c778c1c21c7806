#include "stoplab/duality.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace stoplab {

namespace {

// Worst martingale defect E[M_{t+1}|F_t] - M_t over non-terminal nodes.
std::pair<NodeId, double> worst_martingale_defect(const FiltrationTree& tree,
                                                  const NodeFunction& m) {
  NodeId worst = tree.root();
  double worst_abs = 0.0;
  for (NodeId id : tree.node_ids()) {
    if (tree.is_terminal(id)) continue;
    double e = 0.0;
    for (NodeId c : tree.children_of(id)) e += tree.cond_prob(c) * m.at(c);
    double defect = e - m.at(id);
    if (std::abs(defect) > worst_abs) {
      worst_abs = std::abs(defect);
      worst = id;
    }
  }
  return {worst, worst_abs};
}

}  // namespace

LinearProgram build_dual_lp(const FiltrationTree& tree, const LadlagReward& y) {
  validate_reward(tree, y);
  const auto& leaves = tree.leaves();

  LinearProgram lp;
  lp.direction = LpDirection::minimize;
  std::map<NodeId, std::size_t> leaf_col;
  for (NodeId leaf : leaves) {
    leaf_col[leaf] = lp.vars.size();
    lp.vars.push_back({"y_" + std::to_string(leaf), VarKind::aux, leaf, true});
    lp.objective.push_back(tree.atom_probability(leaf));
  }

  // Leaf ordinals under each node (reverse level order).
  std::unordered_map<NodeId, std::vector<NodeId>> under;
  for (NodeId leaf : leaves) under[leaf] = {leaf};
  const auto& ids = tree.node_ids();
  for (auto it = ids.rbegin(); it != ids.rend(); ++it) {
    if (tree.is_terminal(*it)) continue;
    auto& mine = under[*it];
    for (NodeId c : tree.children_of(*it)) {
      const auto& cs = under[c];
      mine.insert(mine.end(), cs.begin(), cs.end());
    }
  }

  auto add_row = [&](NodeId node, double bound, const std::string& prefix) {
    std::vector<double> row(lp.vars.size(), 0.0);
    double p_node = tree.atom_probability(node);
    for (NodeId leaf : under[node])
      row[leaf_col[leaf]] = tree.atom_probability(leaf) / p_node;
    lp.rows.push_back(std::move(row));
    lp.senses.push_back(RowSense::greater_eq);
    lp.rhs.push_back(bound);
    lp.row_names.push_back(prefix + std::to_string(node));
  };
  for (NodeId id : tree.node_ids()) add_row(id, y.opt.at(id), "dom_opt_");
  for (NodeId id : tree.node_ids())
    if (!tree.is_terminal(id)) add_row(id, y.pre.at(id), "dom_pre_");
  return lp;
}

MartingaleCertificate certificate_from_path_values(const FiltrationTree& tree,
                                                   const std::vector<double>& path_values) {
  const auto& leaves = tree.leaves();
  if (path_values.size() != leaves.size())
    throw ValidationError("expected one value per leaf path");
  MartingaleCertificate cert;
  for (std::size_t i = 0; i < leaves.size(); ++i) cert.m.set(leaves[i], path_values[i]);
  for (int t = tree.horizon() - 1; t >= 0; --t) {
    for (NodeId p : tree.nodes_at_time(t)) {
      double acc = 0.0;
      for (NodeId c : tree.children_of(p)) acc += tree.cond_prob(c) * cert.m.at(c);
      cert.m.set(p, acc);
    }
  }
  cert.objective = cert.m.at(tree.root());
  return cert;
}

MartingaleCertificate certificate_from_primal_duals(const FiltrationTree& tree,
                                                    const LinearProgram& primal,
                                                    const LpSolution& sol) {
  const auto& leaves = tree.leaves();
  if (primal.num_rows() != leaves.size() || sol.duals.size() != leaves.size())
    throw ValidationError("primal program does not have one path row per leaf");
  std::vector<double> path_values(leaves.size());
  for (std::size_t i = 0; i < leaves.size(); ++i)
    path_values[i] = sol.duals[i] / tree.atom_probability(leaves[i]);
  return certificate_from_path_values(tree, path_values);
}

MartingaleCertificate dual_from_snell(const FiltrationTree& tree, const SnellSolution& s) {
  DoobDecomposition d = doob(tree, s);
  MartingaleCertificate cert;
  cert.m = std::move(d.m);
  cert.objective = cert.m.at(tree.root());
  return cert;
}

CertificateReport check_certificate(const FiltrationTree& tree, const LadlagReward& y,
                                    const RandomizedQuasiStopping& x,
                                    const MartingaleCertificate& cert, double tol) {
  validate_reward(tree, y);
  validate_randomized(tree, x);
  for (NodeId id : tree.node_ids())
    if (!cert.m.contains(id))
      throw ValidationError("certificate missing martingale value at node " +
                            std::to_string(id));

  CertificateReport report;
  report.feasible = true;

  for (NodeId id : tree.node_ids()) {
    if (!tree.is_terminal(id)) {
      double e = 0.0;
      for (NodeId c : tree.children_of(id)) e += tree.cond_prob(c) * cert.m.at(c);
      double defect = e - cert.m.at(id);
      if (std::abs(defect) > tol) {
        report.feasible = false;
        report.violations.push_back({"martingale", id, defect});
      }
      double pre_gap = y.pre.at(id) - cert.m.at(id);
      if (pre_gap > tol) {
        report.feasible = false;
        report.violations.push_back({"domination_pre", id, pre_gap});
      }
    } else if (cert.m.at(id) < -tol) {
      report.feasible = false;
      report.violations.push_back({"terminal_sign", id, cert.m.at(id)});
    }
    double opt_gap = y.opt.at(id) - cert.m.at(id);
    if (opt_gap > tol) {
      report.feasible = false;
      report.violations.push_back({"domination_opt", id, opt_gap});
    }
  }

  bool oc_ok = true;
  for (const auto& [id, w] : x.a) {
    double term = tree.atom_probability(id) * w * (cert.m.at(id) - y.opt.at(id));
    report.oc1_residual += term;
    if (term > tol) {
      oc_ok = false;
      report.violations.push_back({"oc1_term", id, term});
    }
    if (term < -tol) oc_ok = false;  // infeasible pairing; already reported above
  }
  for (const auto& [id, w] : x.b) {
    double term = tree.atom_probability(id) * w * (cert.m.at(id) - y.pre.at(id));
    report.oc1_residual += term;
    if (term > tol) {
      oc_ok = false;
      report.violations.push_back({"oc1_term", id, term});
    }
    if (term < -tol) oc_ok = false;
  }

  for (NodeId leaf : tree.leaves()) {
    double mass = 0.0;
    for (NodeId n : tree.path_to(leaf)) {
      mass += x.a_at(n);
      if (!tree.is_terminal(n)) mass += x.b_at(n);
    }
    double term = tree.atom_probability(leaf) * (1.0 - mass) * cert.m.at(leaf);
    report.oc2_residual += term;
    if (std::abs(term) > tol) {
      oc_ok = false;
      report.violations.push_back({"oc2_path", leaf, term});
    }
  }

  double objective = randomized_objective(tree, y, x);
  report.gap = cert.m.at(tree.root()) - objective;
  report.optimal = report.feasible && oc_ok && report.oc1_residual <= tol &&
                   std::abs(report.oc2_residual) <= tol;
  return report;
}

double rogers_bound(const FiltrationTree& tree, const LadlagReward& y, const NodeFunction& m,
                    double tol) {
  validate_reward(tree, y);
  auto [worst_node, defect] = worst_martingale_defect(tree, m);
  if (defect > tol)
    throw ValidationError("not a martingale: defect " + std::to_string(defect) +
                          " at node " + std::to_string(worst_node));

  double acc = 0.0;
  for (NodeId leaf : tree.leaves()) {
    double m_t = m.at(leaf);
    double best = 0.0;  // the T+ slot: reward 0, increment M_T - M_T
    for (NodeId n : tree.path_to(leaf)) {
      best = std::max(best, y.opt.at(n) + m_t - m.at(n));
      if (!tree.is_terminal(n)) best = std::max(best, y.pre.at(n) + m_t - m.at(n));
    }
    acc += tree.atom_probability(leaf) * best;
  }
  return acc;
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Path substream: mix(seed, index) seeds a small counter-based generator.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t index)
      : state_(splitmix64(seed ^ splitmix64(index + 1))) {}

  double uniform() {
    state_ = splitmix64(state_);
    return (state_ >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo <= 8) {
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += v[i];
    return acc;
  }
  std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

}  // namespace

McDualResult mc_dual_bound(const LatticeModel& lattice, DualMartingale martingale,
                           std::int64_t n_paths, std::uint64_t seed, int threads) {
  validate_lattice(lattice);
  if (n_paths < 2)
    throw ValidationError("need at least 2 paths for a standard error");
  if (threads < 1) throw ValidationError("threads must be >= 1");

  const LatticeSnell snell = lattice_snell(lattice);
  const int steps = lattice.steps;

  // Discounted exercise rewards per (t, up-count), reused by every path.
  std::vector<std::vector<double>> reward(static_cast<std::size_t>(steps) + 1);
  for (int t = 0; t <= steps; ++t) {
    reward[t].resize(static_cast<std::size_t>(t) + 1);
    double disc = std::pow(lattice.discount, t);
    for (int j = 0; j <= t; ++j) {
      double s = lattice.s0 * std::pow(lattice.up, j) * std::pow(lattice.down, t - j);
      reward[t][static_cast<std::size_t>(j)] = disc * lattice_payoff(lattice, s);
    }
  }

  const bool use_doob = martingale == DualMartingale::snell_doob;
  const double m0 = use_doob ? snell.value : 0.0;

  std::vector<double> penalty(static_cast<std::size_t>(n_paths));
  auto run_block = [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      PathRng rng(seed, static_cast<std::uint64_t>(i));
      int j = 0;
      double m = m0;
      double best = reward[0][0] - m;  // slot 0
      for (int t = 0; t < steps; ++t) {
        double e_next = lattice.prob * snell.y[t + 1][static_cast<std::size_t>(j) + 1] +
                        (1.0 - lattice.prob) * snell.y[t + 1][static_cast<std::size_t>(j)];
        bool up = rng.uniform() < lattice.prob;
        if (up) ++j;
        if (use_doob) m += snell.y[t + 1][static_cast<std::size_t>(j)] - e_next;
        best = std::max(best, reward[t + 1][static_cast<std::size_t>(j)] - m);
      }
      best = std::max(best, -m);  // the T+ slot: reward 0
      penalty[static_cast<std::size_t>(i)] = m0 + best;
    }
  };

  if (threads == 1) {
    run_block(0, n_paths);
  } else {
    std::vector<std::thread> pool;
    std::int64_t chunk = (n_paths + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      std::int64_t lo = w * chunk;
      std::int64_t hi = std::min<std::int64_t>(n_paths, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(run_block, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  double n = static_cast<double>(n_paths);
  double mean = pairwise_sum(penalty, 0, penalty.size()) / n;
  std::vector<double> sq(penalty.size());
  for (std::size_t i = 0; i < penalty.size(); ++i) {
    double d = penalty[i] - mean;
    sq[i] = d * d;
  }
  double var = pairwise_sum(sq, 0, sq.size()) / (n - 1.0);
  McDualResult out;
  out.estimate = mean;
  out.std_error = std::sqrt(std::max(var, 0.0) / n);
  return out;
}

}  // namespace stoplab
