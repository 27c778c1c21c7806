#include "stoplab/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace stoplab {

namespace {

constexpr double kMassTol = 1e-9;
constexpr double kWeightTol = 1e-12;

// Ordered slots along the path to a leaf: opt slot of each node, with the
// predictable slot of a non-terminal node between it and its child.
struct Slot {
  NodeId node;
  bool predictable;
};

std::vector<Slot> path_slots(const FiltrationTree& tree, NodeId leaf) {
  std::vector<Slot> slots;
  for (NodeId n : tree.path_to(leaf)) {
    slots.push_back({n, false});
    if (!tree.is_terminal(n)) slots.push_back({n, true});
  }
  return slots;
}

double mass_of(const RandomizedQuasiStopping& x, const Slot& s) {
  return s.predictable ? x.b_at(s.node) : x.a_at(s.node);
}

}  // namespace

double RandomizedQuasiStopping::a_at(NodeId id) const {
  auto it = a.find(id);
  return it == a.end() ? 0.0 : it->second;
}

double RandomizedQuasiStopping::b_at(NodeId id) const {
  auto it = b.find(id);
  return it == b.end() ? 0.0 : it->second;
}

void validate_randomized(const FiltrationTree& tree, const RandomizedQuasiStopping& x) {
  for (const auto& [id, w] : x.a) {
    if (!tree.contains(id))
      throw ValidationError("optional mass on unknown node " + std::to_string(id));
    if (w < -kWeightTol)
      throw ValidationError("negative optional mass at node " + std::to_string(id));
  }
  for (const auto& [id, w] : x.b) {
    if (!tree.contains(id) || tree.is_terminal(id))
      throw ValidationError("predictable mass must sit on a non-terminal node, got " +
                            std::to_string(id));
    if (w < -kWeightTol)
      throw ValidationError("negative predictable mass at node " + std::to_string(id));
  }
  for (NodeId leaf : tree.leaves()) {
    double total = 0.0;
    for (const Slot& s : path_slots(tree, leaf)) total += mass_of(x, s);
    if (total > 1.0 + kMassTol)
      throw ValidationError("path mass " + std::to_string(total) + " exceeds one at leaf " +
                            std::to_string(leaf));
  }
}

double randomized_objective(const FiltrationTree& tree, const LadlagReward& y,
                            const RandomizedQuasiStopping& x) {
  double acc = 0.0;
  for (const auto& [id, w] : x.a) acc += tree.atom_probability(id) * y.opt.at(id) * w;
  for (const auto& [id, w] : x.b) acc += tree.atom_probability(id) * y.pre.at(id) * w;
  return acc;
}

RandomizedQuasiStopping to_randomized(const QuasiStoppingTime& q) {
  RandomizedQuasiStopping x;
  for (NodeId n : q.opt_stops) x.a[n] = 1.0;
  for (NodeId p : q.pre_stops) x.b[p] = 1.0;
  return x;
}

LinearProgram build_primal_lp(const FiltrationTree& tree, const LadlagReward& y, bool quasi) {
  validate_reward(tree, y);
  LinearProgram lp;
  lp.direction = LpDirection::maximize;

  std::map<NodeId, std::size_t> a_col, b_col;
  for (NodeId id : tree.node_ids()) {
    a_col[id] = lp.vars.size();
    lp.vars.push_back({"a_" + std::to_string(id), VarKind::optional_mass, id, true});
    lp.objective.push_back(tree.atom_probability(id) * y.opt.at(id));
  }
  if (quasi) {
    for (NodeId id : tree.node_ids()) {
      if (tree.is_terminal(id)) continue;
      b_col[id] = lp.vars.size();
      lp.vars.push_back({"b_" + std::to_string(id), VarKind::predictable_mass, id, true});
      lp.objective.push_back(tree.atom_probability(id) * y.pre.at(id));
    }
  }

  for (NodeId leaf : tree.leaves()) {
    std::vector<double> row(lp.vars.size(), 0.0);
    for (NodeId n : tree.path_to(leaf)) {
      row[a_col[n]] = 1.0;
      if (quasi && !tree.is_terminal(n)) row[b_col[n]] = 1.0;
    }
    lp.rows.push_back(std::move(row));
    lp.senses.push_back(RowSense::less_eq);
    lp.rhs.push_back(1.0);
    lp.row_names.push_back("path_" + std::to_string(leaf));
  }
  return lp;
}

RandomizedQuasiStopping from_lp_solution(const LinearProgram& lp, const LpSolution& sol) {
  if (sol.primal.size() != lp.num_vars())
    throw ValidationError("solution does not match program");
  RandomizedQuasiStopping x;
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    const LpVariable& v = lp.vars[j];
    double w = sol.primal[j];
    if (w == 0.0) continue;
    if (v.kind == VarKind::optional_mass) x.a[v.node] = w;
    else if (v.kind == VarKind::predictable_mass) x.b[v.node] = w;
  }
  return x;
}

bool is_extreme(const FiltrationTree& tree, const RandomizedQuasiStopping& x, double tol) {
  validate_randomized(tree, x);
  auto near01 = [tol](double v) {
    return std::abs(v) <= tol || std::abs(v - 1.0) <= tol;
  };
  for (const auto& [id, w] : x.a)
    if (!near01(w)) return false;
  for (const auto& [id, w] : x.b)
    if (!near01(w)) return false;
  for (NodeId leaf : tree.leaves()) {
    double total = 0.0;
    for (const Slot& s : path_slots(tree, leaf)) total += mass_of(x, s);
    if (!near01(total)) return false;
  }
  return true;
}

SplitResult split_nonextreme(const FiltrationTree& tree, const RandomizedQuasiStopping& x,
                             double s) {
  validate_randomized(tree, x);
  if (!(s > 0.0) || !(s < 1.0))
    throw ValidationError("split threshold must lie in (0,1)");

  bool crossed = false;
  double max_total = 0.0;
  for (NodeId leaf : tree.leaves()) {
    double total = 0.0;
    for (const Slot& sl : path_slots(tree, leaf)) total += mass_of(x, sl);
    max_total = std::max(max_total, total);
    if (s <= total + kWeightTol) crossed = true;
  }
  if (!crossed)
    throw ValidationError("s does not separate: threshold " + std::to_string(s) +
                          " outside mass range (max path mass " +
                          std::to_string(max_total) + ")");

  // Clip the cumulative mass along every path and re-difference. Cumulative
  // mass before a slot depends only on the history up to that slot, so the
  // re-differenced node masses agree across paths through the same node.
  SplitResult out;
  out.weight1 = s;
  out.weight2 = 1.0 - s;
  auto low = [s](double v) { return std::min(v, s) / s; };
  auto high = [s](double v) { return std::max(v - s, 0.0) / (1.0 - s); };
  for (NodeId leaf : tree.leaves()) {
    double cum = 0.0;
    for (const Slot& sl : path_slots(tree, leaf)) {
      double next = cum + mass_of(x, sl);
      double m1 = low(next) - low(cum);
      double m2 = high(next) - high(cum);
      if (sl.predictable) {
        out.x1.b[sl.node] = m1;
        out.x2.b[sl.node] = m2;
      } else {
        out.x1.a[sl.node] = m1;
        out.x2.a[sl.node] = m2;
      }
      cum = next;
    }
  }

  double diff = 0.0;
  for (const auto& [id, w] : out.x1.a) diff = std::max(diff, std::abs(w - out.x2.a_at(id)));
  for (const auto& [id, w] : out.x2.a) diff = std::max(diff, std::abs(w - out.x1.a_at(id)));
  for (const auto& [id, w] : out.x1.b) diff = std::max(diff, std::abs(w - out.x2.b_at(id)));
  for (const auto& [id, w] : out.x2.b) diff = std::max(diff, std::abs(w - out.x1.b_at(id)));
  if (diff <= kWeightTol)
    throw ValidationError("s does not separate: x is extreme");
  return out;
}

QuasiStoppingTime purify(const FiltrationTree& tree, const LadlagReward& y,
                         const RandomizedQuasiStopping& x) {
  validate_randomized(tree, x);
  validate_reward(tree, y);

  // Candidate thresholds: every distinct cumulative mass value in (0,1].
  std::set<double> thresholds;
  double max_total = 0.0;
  for (NodeId leaf : tree.leaves()) {
    double cum = 0.0;
    for (const Slot& sl : path_slots(tree, leaf)) {
      cum += mass_of(x, sl);
      if (cum > kWeightTol && cum <= 1.0 + kWeightTol) thresholds.insert(std::min(cum, 1.0));
    }
    max_total = std::max(max_total, cum);
  }

  // The objective of x averages the swept values over s in (0,1]; thresholds
  // above the largest cumulative mass yield the never-stop plan, so that plan
  // only competes when some mass is left unplaced on every path.
  QuasiStoppingTime best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (double s : thresholds) {
    QuasiStoppingTime q;
    for (NodeId leaf : tree.leaves()) {
      double cum = 0.0;
      for (const Slot& sl : path_slots(tree, leaf)) {
        cum += mass_of(x, sl);
        if (cum >= s - kWeightTol) {
          if (sl.predictable) q.pre_stops.insert(sl.node);
          else q.opt_stops.insert(sl.node);
          break;
        }
      }
    }
    double value = evaluate_policy(tree, y, q);
    if (value > best_value) {
      best_value = value;
      best = std::move(q);
    }
  }
  if (thresholds.empty() || (max_total < 1.0 - kWeightTol && 0.0 > best_value)) {
    best = QuasiStoppingTime{};
  }
  return best;
}

}  // namespace stoplab
