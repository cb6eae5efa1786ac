#include <benchmark/benchmark.h>

#include "zqsync/estimators.hpp"
#include "zqsync/graphs.hpp"
#include "zqsync/inference.hpp"
#include "zqsync/information.hpp"
#include "zqsync/model.hpp"

namespace {

using namespace zqsync;

void BM_ExactMarginals(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const Graph g = gen_torus(2, L);
  const Kernel kernel = kernel_zq(2, 0.3);
  const Instance inst = sample_instance(g, kernel, 0.1, 7);
  for (auto _ : state) benchmark::DoNotOptimize(exact_posterior_marginals(g, kernel, inst));
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << g.n));
}
BENCHMARK(BM_ExactMarginals)->Arg(3)->Arg(4);

void BM_AllPairwise(benchmark::State& state) {
  const Graph g = gen_torus(2, 4);
  const Kernel kernel = kernel_zq(2, 0.7);
  const Instance inst = sample_instance(g, kernel, 0.1, 11);
  for (auto _ : state) benchmark::DoNotOptimize(all_pairwise_posteriors(g, kernel, inst));
}
BENCHMARK(BM_AllPairwise);

void BM_LocalMarginals(benchmark::State& state) {
  const Graph g = gen_torus(2, 6);
  const Kernel kernel = kernel_zq(2, 0.7);
  const Instance inst = sample_instance(g, kernel, 0.1, 3);
  const std::vector<Ball> balls = all_balls(g, static_cast<int>(state.range(0)));
  PosteriorEnumerator en;
  for (auto _ : state) benchmark::DoNotOptimize(local_marginals(balls, kernel, inst, en));
}
BENCHMARK(BM_LocalMarginals)->Arg(1)->Arg(2);

void BM_TreeBp(benchmark::State& state) {
  const Graph tree = gen_ary_tree(2, static_cast<int>(state.range(0)));
  const Kernel kernel = kernel_zq(3, 0.4);
  const Instance inst = sample_instance(tree, kernel, 0.05, 5);
  const BpPath path = state.range(1) ? BpPath::zq : BpPath::generic;
  for (auto _ : state) benchmark::DoNotOptimize(bp_tree_marginals(tree, kernel, inst, path));
  state.SetItemsProcessed(state.iterations() * tree.n);
}
BENCHMARK(BM_TreeBp)->Args({10, 0})->Args({10, 1});

void BM_RootMessagePass(benchmark::State& state) {
  const Graph tree = gen_ary_tree(2, 12);
  const Kernel kernel = kernel_zq(2, 0.4);
  const Instance inst = sample_instance(tree, kernel, 0.02, 9);
  RootMessagePass pass;
  for (auto _ : state) benchmark::DoNotOptimize(pass.run(tree, kernel, inst, tree.n));
  state.SetItemsProcessed(state.iterations() * tree.n);
}
BENCHMARK(BM_RootMessagePass);

void BM_TypicalSet(benchmark::State& state) {
  const Graph g = gen_random_regular(12, 4, 1);
  const Kernel kernel = kernel_zq(2, 0.2);
  const Instance inst = sample_instance(g, kernel, 0.0, 13);
  for (auto _ : state)
    benchmark::DoNotOptimize(typical_set_estimator(g, kernel, inst, 0.35, TypicalMode::best));
}
BENCHMARK(BM_TypicalSet);

void BM_PairwiseMI(benchmark::State& state) {
  const Graph g = gen_cycle(8);
  const Kernel kernel = kernel_zq(2, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(pairwise_conditional_mi(g, kernel, 0.2));
}
BENCHMARK(BM_PairwiseMI);

}  // namespace

BENCHMARK_MAIN();
