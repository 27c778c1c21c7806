#include <benchmark/benchmark.h>

#include "stoplab/duality.hpp"
#include "stoplab/modelio.hpp"
#include "stoplab/relaxation.hpp"
#include "stoplab/snell.hpp"

namespace {

using namespace stoplab;

GeneratedModel make_model(int depth, int branch) {
  RandomTreeSpec spec;
  spec.depth = depth;
  spec.max_branch = branch;
  spec.seed = 1234;
  spec.node_cap = 2'000'000;
  return gen_random_tree(spec);
}

void BM_QuasiSnell(benchmark::State& state) {
  GeneratedModel m = make_model(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(quasi_snell(m.tree, m.reward).value);
  }
  state.SetLabel(std::to_string(m.tree.node_count()) + " nodes");
}
BENCHMARK(BM_QuasiSnell)->Arg(6)->Arg(10)->Arg(14);

void BM_PrimalLp(benchmark::State& state) {
  GeneratedModel m = make_model(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) {
    LinearProgram lp = build_primal_lp(m.tree, m.reward, true);
    benchmark::DoNotOptimize(solve_lp(lp).objective);
  }
  state.SetLabel(std::to_string(m.tree.node_count()) + " nodes");
}
BENCHMARK(BM_PrimalLp)->Arg(4)->Arg(6)->Arg(8);

void BM_DualLp(benchmark::State& state) {
  GeneratedModel m = make_model(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) {
    LinearProgram lp = build_dual_lp(m.tree, m.reward);
    benchmark::DoNotOptimize(solve_lp(lp).objective);
  }
}
BENCHMARK(BM_DualLp)->Arg(4)->Arg(6);

void BM_McDualBound(benchmark::State& state) {
  LatticeModel put;
  put.steps = 10;
  put.prob = (1.0 - put.down) / (put.up - put.down);
  const auto paths = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        mc_dual_bound(put, DualMartingale::snell_doob, paths, 7).estimate);
  }
  state.SetItemsProcessed(state.iterations() * paths);
}
BENCHMARK(BM_McDualBound)->Arg(10000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
