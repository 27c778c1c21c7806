#include "stoplab/snell.hpp"

#include <algorithm>

namespace stoplab {

namespace {

SnellSolution snell_impl(const FiltrationTree& tree, const LadlagReward& y, bool quasi) {
  validate_reward(tree, y);
  SnellSolution s;
  const int horizon = tree.horizon();

  for (NodeId id : tree.nodes_at_time(horizon)) s.w.set(id, std::max(y.opt.at(id), 0.0));
  for (int t = horizon - 1; t >= 0; --t) {
    for (NodeId p : tree.nodes_at_time(t)) {
      double cont = 0.0;
      for (NodeId c : tree.children_of(p)) cont += tree.cond_prob(c) * s.w.at(c);
      double slot_pre = quasi ? std::max(y.pre.at(p), cont) : cont;
      s.c.set(p, slot_pre);
      s.w.set(p, std::max(y.opt.at(p), slot_pre));
    }
  }
  s.value = s.w.at(tree.root());

  // First-hit policy, slots walked in order t, (t+1)-, t+1; ties stop.
  std::vector<NodeId> alive{tree.root()};
  while (!alive.empty()) {
    std::vector<NodeId> next;
    for (NodeId n : alive) {
      if (y.opt.at(n) >= (tree.is_terminal(n) ? 0.0 : s.c.at(n))) {
        s.policy.opt_stops.insert(n);
        continue;
      }
      if (tree.is_terminal(n)) continue;  // never stop on this path
      double cont = 0.0;
      for (NodeId c : tree.children_of(n)) cont += tree.cond_prob(c) * s.w.at(c);
      if (quasi && y.pre.at(n) >= cont) {
        s.policy.pre_stops.insert(n);
        continue;
      }
      for (NodeId c : tree.children_of(n)) next.push_back(c);
    }
    alive = std::move(next);
  }
  return s;
}

}  // namespace

SnellSolution quasi_snell(const FiltrationTree& tree, const LadlagReward& y) {
  return snell_impl(tree, y, /*quasi=*/true);
}

SnellSolution solve_os(const FiltrationTree& tree, const LadlagReward& y) {
  return snell_impl(tree, y, /*quasi=*/false);
}

double evaluate_policy(const FiltrationTree& tree, const LadlagReward& y,
                       const QuasiStoppingTime& q) {
  validate_policy(tree, q);
  validate_reward(tree, y);
  double acc = 0.0;
  for (NodeId n : q.opt_stops) acc += tree.atom_probability(n) * y.opt.at(n);
  for (NodeId p : q.pre_stops) acc += tree.atom_probability(p) * y.pre.at(p);
  return acc;
}

DoobDecomposition doob(const FiltrationTree& tree, const SnellSolution& s) {
  DoobDecomposition d;
  NodeId root = tree.root();
  d.m.set(root, s.w.at(root));
  d.a.set(root, 0.0);
  for (NodeId id : tree.node_ids()) {
    if (tree.is_terminal(id)) continue;
    double cont = 0.0;
    for (NodeId c : tree.children_of(id)) cont += tree.cond_prob(c) * s.w.at(c);
    double m_parent = d.m.at(id);
    for (NodeId c : tree.children_of(id)) {
      double m_child = m_parent + s.w.at(c) - cont;
      d.m.set(c, m_child);
      d.a.set(c, m_child - s.w.at(c));
    }
  }
  return d;
}

}  // namespace stoplab
