#include "stoplab/filtration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stoplab {

namespace {

std::string node_str(NodeId id) { return std::to_string(id); }

constexpr std::uint64_t kCountSaturation = std::numeric_limits<std::uint64_t>::max() / 4;

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  if (a >= kCountSaturation || b >= kCountSaturation) return kCountSaturation;
  return std::min(a + b, kCountSaturation);
}

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a >= kCountSaturation / b) return kCountSaturation;
  return a * b;
}

}  // namespace

double NodeFunction::at(NodeId id) const {
  auto it = values_.find(id);
  if (it == values_.end())
    throw ValidationError("node function has no value at node " + node_str(id));
  return it->second;
}

FiltrationTree FiltrationTree::validate(const std::vector<RawNode>& raw, int horizon,
                                        bool renormalize) {
  if (horizon < 0) throw ValidationError("horizon must be nonnegative");
  if (raw.empty()) throw ValidationError("node list is empty");

  FiltrationTree tree;
  tree.horizon_ = horizon;
  tree.by_time_.assign(static_cast<std::size_t>(horizon) + 1, {});

  for (const RawNode& rn : raw) {
    if (tree.index_.count(rn.id))
      throw ValidationError("duplicate node id " + node_str(rn.id));
    if (rn.time < 0 || rn.time > horizon)
      throw ValidationError("node time outside [0," + std::to_string(horizon) +
                            "] at node " + node_str(rn.id));
    if (!(rn.cond_prob > 0.0) || rn.cond_prob > 1.0 + kProbSumTol || !std::isfinite(rn.cond_prob))
      throw ValidationError("probability out of range at node " + node_str(rn.id));
    Node n;
    n.id = rn.id;
    n.time = rn.time;
    n.parent = rn.parent.value_or(rn.id);
    n.cond_prob = rn.cond_prob;
    n.atom_prob = 0.0;
    tree.index_.emplace(rn.id, std::move(n));
  }

  // Root and parent wiring.
  NodeId root_id = 0;
  bool have_root = false;
  for (const RawNode& rn : raw) {
    if (!rn.parent) {
      if (have_root)
        throw ValidationError("multiple roots: node " + node_str(rn.id) +
                              " and node " + node_str(root_id));
      have_root = true;
      root_id = rn.id;
      if (rn.time != 0)
        throw ValidationError("root time must be 0 at node " + node_str(rn.id));
      if (std::abs(rn.cond_prob - 1.0) > kProbSumTol)
        throw ValidationError("root cond_prob must be 1 at node " + node_str(rn.id));
    } else {
      auto pit = tree.index_.find(*rn.parent);
      if (pit == tree.index_.end())
        throw ValidationError("unknown parent " + node_str(*rn.parent) +
                              " at node " + node_str(rn.id));
      if (rn.time != pit->second.time + 1)
        throw ValidationError("child time must be parent time+1 at node " + node_str(rn.id));
      pit->second.children.push_back(rn.id);
    }
  }
  if (!have_root) throw ValidationError("no root node (every node has a parent)");

  for (auto& [id, n] : tree.index_) {
    std::sort(n.children.begin(), n.children.end());
    if (n.children.empty()) {
      if (n.time != horizon)
        throw ValidationError("leaf at wrong depth at node " + node_str(id));
    } else {
      double sum = 0.0;
      for (NodeId c : n.children) sum += tree.index_.at(c).cond_prob;
      if (renormalize && sum > 0.0) {
        for (NodeId c : n.children) tree.index_.at(c).cond_prob /= sum;
        sum = 1.0;
      }
      if (std::abs(sum - 1.0) > kProbSumTol)
        throw ValidationError("probability sum mismatch at node " + node_str(id));
    }
  }

  // Atom probabilities and the (time, id) ordering. Child times are parent
  // time+1 and there is a single root, so walking by level also proves every
  // node reachable (no cycles possible).
  tree.index_.at(root_id).atom_prob = 1.0;
  tree.by_time_[0].push_back(root_id);
  std::size_t reached = 1;
  for (int t = 0; t < horizon; ++t) {
    for (NodeId p : tree.by_time_[t]) {
      const Node& pn = tree.index_.at(p);
      for (NodeId c : pn.children) {
        Node& cn = tree.index_.at(c);
        cn.atom_prob = pn.atom_prob * cn.cond_prob;
        tree.by_time_[t + 1].push_back(c);
        ++reached;
      }
    }
    std::sort(tree.by_time_[t + 1].begin(), tree.by_time_[t + 1].end());
  }
  if (reached != tree.index_.size()) {
    for (const RawNode& rn : raw) {
      NodeId cur = rn.id;
      bool ok = false;
      for (std::size_t hops = 0; hops <= tree.index_.size(); ++hops) {
        const Node& n = tree.index_.at(cur);
        if (n.parent == cur) { ok = (cur == root_id); break; }
        cur = n.parent;
      }
      if (!ok)
        throw ValidationError("node " + node_str(rn.id) + " is not reachable from the root");
    }
  }

  for (const auto& level : tree.by_time_)
    tree.ids_.insert(tree.ids_.end(), level.begin(), level.end());
  return tree;
}

const FiltrationTree::Node& FiltrationTree::node(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw ValidationError("unknown node id " + node_str(id));
  return it->second;
}

const std::vector<NodeId>& FiltrationTree::nodes_at_time(int t) const {
  if (t < 0 || t > horizon_)
    throw ValidationError("time " + std::to_string(t) + " outside [0," +
                          std::to_string(horizon_) + "]");
  return by_time_[static_cast<std::size_t>(t)];
}

std::optional<NodeId> FiltrationTree::parent_of(NodeId id) const {
  const Node& n = node(id);
  if (n.parent == id) return std::nullopt;
  return n.parent;
}

std::vector<NodeId> FiltrationTree::path_to(NodeId id) const {
  std::vector<NodeId> path;
  NodeId cur = id;
  path.push_back(cur);
  while (true) {
    const Node& n = node(cur);
    if (n.parent == cur) break;
    cur = n.parent;
    path.push_back(cur);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

FiltrationTree validate_tree(const std::vector<RawNode>& raw, int horizon, bool renormalize) {
  return FiltrationTree::validate(raw, horizon, renormalize);
}

double atom_probability(const FiltrationTree& tree, NodeId id) {
  return tree.atom_probability(id);
}

NodeFunction conditional_expectation(const FiltrationTree& tree, const NodeFunction& f) {
  if (f.empty()) throw ValidationError("conditional expectation of an empty function");
  int level = -1;
  for (const auto& [id, v] : f.values()) {
    int t = tree.time_of(id);
    if (level == -1) level = t;
    if (t != level)
      throw ValidationError("node function mixes times " + std::to_string(level) +
                            " and " + std::to_string(t));
    (void)v;
  }
  if (level == 0)
    throw ValidationError("conditional expectation needs a time level >= 1");

  NodeFunction out;
  for (NodeId p : tree.nodes_at_time(level - 1)) {
    double acc = 0.0;
    for (NodeId c : tree.children_of(p)) {
      if (!f.contains(c))
        throw ValidationError("node function missing child value at node " + node_str(c));
      acc += tree.cond_prob(c) * f.at(c);
    }
    out.set(p, acc);
  }
  return out;
}

void validate_policy(const FiltrationTree& tree, const QuasiStoppingTime& q) {
  for (NodeId id : q.opt_stops) (void)tree.time_of(id);
  for (NodeId id : q.pre_stops) {
    if (tree.is_terminal(id))
      throw ValidationError("predictable stop marker on terminal node " + node_str(id));
  }
  for (NodeId leaf : tree.leaves()) {
    int markers = 0;
    for (NodeId n : tree.path_to(leaf)) {
      if (q.opt_stops.count(n)) ++markers;
      if (q.pre_stops.count(n)) ++markers;
    }
    if (markers > 1)
      throw ValidationError("path to leaf " + node_str(leaf) + " carries " +
                            std::to_string(markers) + " stop markers");
  }
}

namespace {

std::uint64_t count_subtree(const FiltrationTree& tree, NodeId n, bool quasi) {
  if (tree.is_terminal(n)) return 2;  // stop here, or pass through
  std::uint64_t prod = 1;
  for (NodeId c : tree.children_of(n)) prod = sat_mul(prod, count_subtree(tree, c, quasi));
  return sat_add(quasi ? 2 : 1, prod);
}

// Marker placements for the subtree under n, covering paths still alive at n.
std::vector<QuasiStoppingTime> enumerate_subtree(const FiltrationTree& tree, NodeId n,
                                                 bool quasi) {
  std::vector<QuasiStoppingTime> out;
  QuasiStoppingTime stop_here;
  stop_here.opt_stops.insert(n);
  out.push_back(std::move(stop_here));
  if (tree.is_terminal(n)) {
    out.emplace_back();  // never stop on this path
    return out;
  }
  if (quasi) {
    QuasiStoppingTime pre_here;
    pre_here.pre_stops.insert(n);
    out.push_back(std::move(pre_here));
  }
  std::vector<QuasiStoppingTime> acc;
  acc.emplace_back();
  for (NodeId c : tree.children_of(n)) {
    auto child = enumerate_subtree(tree, c, quasi);
    std::vector<QuasiStoppingTime> next;
    next.reserve(acc.size() * child.size());
    for (const auto& a : acc)
      for (const auto& b : child) {
        QuasiStoppingTime merged = a;
        merged.opt_stops.insert(b.opt_stops.begin(), b.opt_stops.end());
        merged.pre_stops.insert(b.pre_stops.begin(), b.pre_stops.end());
        next.push_back(std::move(merged));
      }
    acc = std::move(next);
  }
  out.insert(out.end(), acc.begin(), acc.end());
  return out;
}

std::vector<QuasiStoppingTime> enumerate_impl(const FiltrationTree& tree, bool quasi,
                                              std::uint64_t cap) {
  std::uint64_t count = count_subtree(tree, tree.root(), quasi);
  if (count > cap)
    throw CapExceededError("stopping-time count " +
                           (count >= kCountSaturation ? std::string(">= 2^62")
                                                      : std::to_string(count)) +
                           " exceeds cap " + std::to_string(cap));
  return enumerate_subtree(tree, tree.root(), quasi);
}

}  // namespace

std::uint64_t count_stopping_times(const FiltrationTree& tree) {
  return count_subtree(tree, tree.root(), /*quasi=*/false);
}

std::uint64_t count_quasi_stopping_times(const FiltrationTree& tree) {
  return count_subtree(tree, tree.root(), /*quasi=*/true);
}

std::vector<QuasiStoppingTime> enumerate_stopping_times(const FiltrationTree& tree,
                                                        std::uint64_t cap) {
  return enumerate_impl(tree, /*quasi=*/false, cap);
}

std::vector<QuasiStoppingTime> enumerate_quasi_stopping_times(const FiltrationTree& tree,
                                                              std::uint64_t cap) {
  return enumerate_impl(tree, /*quasi=*/true, cap);
}

}  // namespace stoplab
