#pragma once

#include <vector>

#include "stoplab/filtration.hpp"
#include "stoplab/processes.hpp"

namespace stoplab::testing {

struct Model {
  FiltrationTree tree;
  LadlagReward reward;
};

// Deterministic chain 0-1-2, opt = (1,3,2), pre = 0.
inline Model fixture_a() {
  std::vector<RawNode> raw{
      {0, 0, std::nullopt, 1.0}, {1, 1, 0, 1.0}, {2, 2, 1, 1.0}};
  Model m{FiltrationTree::validate(raw, 2), {}};
  m.reward.opt.set(0, 1.0);
  m.reward.opt.set(1, 3.0);
  m.reward.opt.set(2, 2.0);
  m.reward.pre.set(0, 0.0);
  m.reward.pre.set(1, 0.0);
  return m;
}

// Chain 0-1 with opt = (0.5, 0) and an attractive predictable slot,
// pre(0) = 1: the quasi problem strictly beats pure stopping here.
inline Model fixture_b() {
  std::vector<RawNode> raw{{0, 0, std::nullopt, 1.0}, {1, 1, 0, 1.0}};
  Model m{FiltrationTree::validate(raw, 1), {}};
  m.reward.opt.set(0, 0.5);
  m.reward.opt.set(1, 0.0);
  m.reward.pre.set(0, 1.0);
  return m;
}

// Root 0 with equally likely children 1 ("up") and 2 ("down"),
// opt = (0, 2, 1), pre = 0.
inline Model fixture_c() {
  std::vector<RawNode> raw{
      {0, 0, std::nullopt, 1.0}, {1, 1, 0, 0.5}, {2, 1, 0, 0.5}};
  Model m{FiltrationTree::validate(raw, 1), {}};
  m.reward.opt.set(0, 0.0);
  m.reward.opt.set(1, 2.0);
  m.reward.opt.set(2, 1.0);
  m.reward.pre.set(0, 0.0);
  return m;
}

// Small extra shapes used by exhaustive vertex checks (all <= 9 nodes).
inline std::vector<FiltrationTree> small_trees() {
  std::vector<FiltrationTree> trees;
  trees.push_back(fixture_a().tree);
  trees.push_back(fixture_b().tree);
  trees.push_back(fixture_c().tree);
  // depth-2 binary, 7 nodes
  trees.push_back(FiltrationTree::validate(
      {{0, 0, std::nullopt, 1.0},
       {1, 1, 0, 0.4},
       {2, 1, 0, 0.6},
       {3, 2, 1, 0.5},
       {4, 2, 1, 0.5},
       {5, 2, 2, 0.25},
       {6, 2, 2, 0.75}},
      2));
  // asymmetric: one branching, one straight arm, 6 nodes
  trees.push_back(FiltrationTree::validate(
      {{0, 0, std::nullopt, 1.0},
       {1, 1, 0, 0.3},
       {2, 1, 0, 0.7},
       {3, 2, 1, 1.0},
       {4, 2, 2, 0.5},
       {5, 2, 2, 0.5}},
      2));
  // wide: root with 4 children
  trees.push_back(FiltrationTree::validate(
      {{0, 0, std::nullopt, 1.0},
       {1, 1, 0, 0.25},
       {2, 1, 0, 0.25},
       {3, 1, 0, 0.25},
       {4, 1, 0, 0.25}},
      1));
  return trees;
}

}  // namespace stoplab::testing
