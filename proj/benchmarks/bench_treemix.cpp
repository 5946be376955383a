#include <benchmark/benchmark.h>

#include "treemix/concentration.hpp"
#include "treemix/generate.hpp"
#include "treemix/mixing.hpp"
#include "treemix/model.hpp"

namespace tx = treemix;

namespace {

// Binary-alphabet random tree with roughly `nodes` nodes.
tx::MarkovTreeModel bench_model(int nodes) {
  tx::Stream rng(1234, 0);
  tx::GenOptions g;
  g.depth = nodes;
  g.width = 3;
  g.max_nodes = nodes;
  return tx::generate_model(g, rng);
}

void BM_JointTable(benchmark::State& state) {
  const auto m = bench_model(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tx::joint_table(m));
}
BENCHMARK(BM_JointTable)->DenseRange(8, 16, 4);

void BM_EtaBarExact(benchmark::State& state) {
  const auto m = bench_model(static_cast<int>(state.range(0)));
  const tx::ExactMixing exact(m);
  const tx::Node n = m.size();
  for (auto _ : state) {
    double acc = 0.0;
    for (tx::Node i = 1; i < n; ++i) acc += exact.eta_bar(i, n);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_EtaBarExact)->Arg(8)->Arg(12);

void BM_MixingMatrices(benchmark::State& state) {
  const auto m = bench_model(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tx::build_mixing_matrices(m, tx::Source::level_bound));
}
BENCHMARK(BM_MixingMatrices)->Arg(16)->Arg(64)->Arg(128);

void BM_SpectralNorm(benchmark::State& state) {
  const auto m = bench_model(static_cast<int>(state.range(0)));
  const auto pair = tx::build_mixing_matrices(m, tx::Source::level_bound);
  for (auto _ : state) benchmark::DoNotOptimize(tx::gamma_l2_norm(pair.gamma));
}
BENCHMARK(BM_SpectralNorm)->Arg(16)->Arg(64)->Arg(128);

void BM_SamplePaths(benchmark::State& state) {
  const auto m = bench_model(32);
  const auto count = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(tx::sample_paths(m, 7, count));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SamplePaths)->Arg(1000)->Arg(100000);

}  // namespace
BENCHMARK_MAIN();
