#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "stoplab/defs.hpp"
#include "stoplab/errors.hpp"
#include "stoplab/stopping.hpp"

namespace stoplab {

/// Node description as supplied by callers; validated into a FiltrationTree.
struct RawNode {
  NodeId id = 0;
  int time = 0;
  std::optional<NodeId> parent;  // empty for the root
  double cond_prob = 1.0;        // P(node | parent), in (0,1]
};

/// Real-valued function on a subset of tree nodes (all nodes, or all
/// non-terminal nodes, depending on the operation). Carrier for adapted
/// processes, value functions and martingales.
class NodeFunction {
 public:
  NodeFunction() = default;

  double at(NodeId id) const;
  void set(NodeId id, double value) { values_[id] = value; }
  bool contains(NodeId id) const { return values_.count(id) != 0; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  const std::unordered_map<NodeId, double>& values() const { return values_; }

 private:
  std::unordered_map<NodeId, double> values_;
};

/// Finite filtered probability space as a scenario tree.
///
/// Invariants established by validate(): a single root at time 0 with
/// cond_prob 1, child times increase by one, every leaf sits at the horizon,
/// sibling cond_probs sum to 1 within 1e-12, ids unique. The atom of F_t that
/// contains a path is the path's node at time t. Immutable after validation;
/// concurrent reads are safe.
class FiltrationTree {
 public:
  /// Validates and freezes a tree. With renormalize = true, sibling
  /// cond_probs are rescaled by their sum first; otherwise a sum off by more
  /// than 1e-12 is an error.
  static FiltrationTree validate(const std::vector<RawNode>& raw, int horizon,
                                 bool renormalize = false);

  int horizon() const { return horizon_; }
  std::size_t node_count() const { return ids_.size(); }
  NodeId root() const { return by_time_[0].front(); }

  /// All node ids, ordered by (time, id).
  const std::vector<NodeId>& node_ids() const { return ids_; }
  const std::vector<NodeId>& nodes_at_time(int t) const;
  const std::vector<NodeId>& leaves() const { return by_time_[horizon_]; }

  bool contains(NodeId id) const { return index_.count(id) != 0; }
  int time_of(NodeId id) const { return node(id).time; }
  std::optional<NodeId> parent_of(NodeId id) const;
  const std::vector<NodeId>& children_of(NodeId id) const { return node(id).children; }
  bool is_terminal(NodeId id) const { return node(id).time == horizon_; }
  double cond_prob(NodeId id) const { return node(id).cond_prob; }

  /// P of the F_t-atom: product of cond_prob along the root-to-node path.
  double atom_probability(NodeId id) const { return node(id).atom_prob; }

  /// Root-to-node path, inclusive.
  std::vector<NodeId> path_to(NodeId id) const;

 private:
  struct Node {
    NodeId id;
    int time;
    NodeId parent;  // == id for the root
    double cond_prob;
    double atom_prob;
    std::vector<NodeId> children;  // sorted by id
  };

  const Node& node(NodeId id) const;

  int horizon_ = 0;
  std::vector<NodeId> ids_;
  std::unordered_map<NodeId, Node> index_;
  std::vector<std::vector<NodeId>> by_time_;
};

/// Free-function form of FiltrationTree::validate.
FiltrationTree validate_tree(const std::vector<RawNode>& raw, int horizon,
                             bool renormalize = false);

/// Free-function form of FiltrationTree::atom_probability.
double atom_probability(const FiltrationTree& tree, NodeId id);

/// One-step conditional expectation E[f | F_t]. `f` must cover exactly one
/// full time level t+1 >= 1; the result lives on the time-t nodes.
NodeFunction conditional_expectation(const FiltrationTree& tree, const NodeFunction& f);

std::uint64_t count_stopping_times(const FiltrationTree& tree);
std::uint64_t count_quasi_stopping_times(const FiltrationTree& tree);

/// All adapted stopping times with values in {0,...,T,T+}, as decision sets
/// with empty pre_stops. Never-stop is included. Throws CapExceededError if
/// the count exceeds `cap`.
std::vector<QuasiStoppingTime> enumerate_stopping_times(
    const FiltrationTree& tree, std::uint64_t cap = kDefaultEnumerationCap);

/// All quasi-stopping times: at most one marker per path, predictable stops
/// indexed by the announcing (non-terminal) node.
std::vector<QuasiStoppingTime> enumerate_quasi_stopping_times(
    const FiltrationTree& tree, std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace stoplab
