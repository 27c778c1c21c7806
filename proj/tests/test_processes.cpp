#include <doctest.h>

#include <random>

#include "stoplab/processes.hpp"
#include "support/fixtures.hpp"

using namespace stoplab;
using stoplab::testing::fixture_a;
using stoplab::testing::fixture_b;
using stoplab::testing::fixture_c;

TEST_SUITE_BEGIN("processes");

TEST_CASE("predictable projection") {
  auto b = fixture_b();
  NodeFunction pp = predictable_projection(b.tree, b.reward);
  CHECK(pp.at(0) == 0.0);  // deterministic child with opt 0

  auto c = fixture_c();
  CHECK(predictable_projection(c.tree, c.reward).at(0) == doctest::Approx(1.5));
}

TEST_CASE("predictable projection of a martingale recovers the parent value") {
  auto tree = stoplab::testing::small_trees()[3];
  // build a martingale by backward averaging of arbitrary leaf values
  NodeFunction m;
  double v = 1.0;
  for (NodeId id : tree.leaves()) m.set(id, v += 0.7);
  for (int t = tree.horizon() - 1; t >= 0; --t)
    for (NodeId p : tree.nodes_at_time(t)) {
      double acc = 0.0;
      for (NodeId c : tree.children_of(p)) acc += tree.cond_prob(c) * m.at(c);
      m.set(p, acc);
    }
  NodeFunction pp = predictable_projection(tree, m);
  for (NodeId id : tree.node_ids())
    if (!tree.is_terminal(id)) CHECK(pp.at(id) == doctest::Approx(m.at(id)).epsilon(1e-12));
}

TEST_CASE("optional projection") {
  auto c = fixture_c();
  SUBCASE("fixture values") {
    PathProcess z;
    z.values = {{1.0, 1.0}, {2.0, 0.0}};  // leaves ordered (1, 2)
    NodeFunction o = optional_projection(c.tree, z);
    CHECK(o.at(0) == doctest::Approx(1.0));
    CHECK(o.at(1) == doctest::Approx(2.0));
    CHECK(o.at(2) == doctest::Approx(0.0));
  }
  SUBCASE("idempotent on adapted processes") {
    PathProcess z;
    z.values = {{0.25, 0.25}, {-1.0, 4.0}};  // constant on atoms
    NodeFunction o = optional_projection(c.tree, z);
    CHECK(o.at(0) == doctest::Approx(0.25));
    CHECK(o.at(1) == doctest::Approx(-1.0));
    CHECK(o.at(2) == doctest::Approx(4.0));
  }
  SUBCASE("single-path indicator averages to its probability") {
    std::vector<RawNode> raw{{0, 0, std::nullopt, 1.0},
                             {1, 1, 0, 0.25},
                             {2, 1, 0, 0.75}};
    FiltrationTree tree = FiltrationTree::validate(raw, 1);
    PathProcess z;
    z.values = {{1.0, 0.0}, {0.0, 0.0}};
    CHECK(optional_projection(tree, z).at(0) == doctest::Approx(0.25));
  }
  SUBCASE("missing entries rejected") {
    PathProcess z;
    z.values = {{1.0}};
    CHECK_THROWS_AS(optional_projection(c.tree, z), ValidationError);
  }
}

TEST_CASE("classify regularity") {
  SUBCASE("fixture B is not subregular") {
    auto b = fixture_b();
    RegularityReport r = classify_regularity(b.tree, b.reward, 1e-9);
    CHECK_FALSE(r.is_subregular);
    CHECK_FALSE(r.is_regular);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].node == 0);
    CHECK(r.violations[0].pre_value == 1.0);
    CHECK(r.violations[0].projection_value == 0.0);
  }
  SUBCASE("pre := projection is regular by construction") {
    auto c = fixture_c();
    LadlagReward y = c.reward;
    y.pre = predictable_projection(c.tree, y);
    RegularityReport r = classify_regularity(c.tree, y, 1e-9);
    CHECK(r.is_regular);
    CHECK(r.is_subregular);
    CHECK(r.violations.empty());
  }
  SUBCASE("cadlag embedding checked instance by instance") {
    // pre(p) := opt(p) is subregular only when opt(p) <= E[opt_{t+1}|F_t](p)
    // happens to hold; here opt is a martingale, so it holds with equality.
    std::vector<RawNode> raw{{0, 0, std::nullopt, 1.0}, {1, 1, 0, 0.5}, {2, 1, 0, 0.5}};
    FiltrationTree tree = FiltrationTree::validate(raw, 1);
    LadlagReward y;
    y.opt.set(0, 1.5);
    y.opt.set(1, 2.0);
    y.opt.set(2, 1.0);
    y.pre.set(0, y.opt.at(0));  // cadlag embedding; projection is 1.5 here
    RegularityReport r = classify_regularity(tree, y, 1e-9);
    CHECK(r.is_subregular);
  }
}

TEST_CASE("piecewise linear convex functions") {
  auto abs_g = PiecewiseLinearConvex::absolute_value();
  CHECK(abs_g(-2.5) == doctest::Approx(2.5));
  CHECK(abs_g(3.0) == doctest::Approx(3.0));
  CHECK(abs_g(0.0) == 0.0);
  CHECK_FALSE(abs_g.increasing());

  auto relu = PiecewiseLinearConvex::positive_part();
  CHECK(relu(-1.0) == 0.0);
  CHECK(relu(2.0) == doctest::Approx(2.0));
  CHECK(relu.increasing());

  CHECK_THROWS_AS(PiecewiseLinearConvex(0, 0, {0.0}, {1.0, 0.5}), ValidationError);
}

TEST_CASE("compose_convex") {
  auto c = fixture_c();
  LadlagReward regular = c.reward;
  regular.pre = predictable_projection(c.tree, regular);

  SUBCASE("identity leaves the reward unchanged") {
    auto r = compose_convex(c.tree, regular, PiecewiseLinearConvex::identity(), true);
    for (NodeId id : c.tree.node_ids())
      CHECK(r.reward.opt.at(id) == doctest::Approx(regular.opt.at(id)));
    CHECK(r.report.is_regular);
  }
  SUBCASE("abs of a regular reward is subregular") {
    LadlagReward shifted = regular;
    shifted.opt.set(1, -2.0);  // make the sign flip matter
    shifted.pre = predictable_projection(c.tree, shifted);
    auto r = compose_convex(c.tree, shifted, PiecewiseLinearConvex::absolute_value(), false);
    CHECK(r.report.is_subregular);
  }
  SUBCASE("increasing convex of a subregular reward stays subregular") {
    LadlagReward sub = regular;
    sub.pre.set(0, sub.pre.at(0) - 0.25);
    REQUIRE(classify_regularity(c.tree, sub, 1e-9).is_subregular);
    auto r = compose_convex(c.tree, sub, PiecewiseLinearConvex::positive_part(), true);
    CHECK(r.report.is_subregular);
  }
  SUBCASE("non-increasing g on a non-regular reward is rejected") {
    auto b = fixture_b();
    CHECK_THROWS_AS(
        compose_convex(b.tree, b.reward, PiecewiseLinearConvex::absolute_value(), false),
        ValidationError);
  }
}

TEST_CASE("compose_convex keeps subregularity on randomized regular inputs") {
  // Jensen: for regular y and convex g, g(y) is subregular. 60 random trials.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  for (int trial = 0; trial < 60; ++trial) {
    auto tree = stoplab::testing::small_trees()[trial % 6];
    LadlagReward y;
    for (NodeId id : tree.node_ids()) y.opt.set(id, val(rng));
    y.pre = predictable_projection(tree, y);
    auto g = trial % 2 == 0 ? PiecewiseLinearConvex::absolute_value()
                            : PiecewiseLinearConvex(0.0, 0.5, {-1.0, 1.0}, {-2.0, 0.25, 3.0});
    auto r = compose_convex(tree, y, g, false);
    CHECK(r.report.is_subregular);
  }
}

TEST_SUITE_END();
