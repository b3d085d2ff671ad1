// Copyright 2026 The quadaffine Authors.
// SPDX-License-Identifier: Apache-2.0
#include <quadaffine/definite.hpp>
#include <quadaffine/generate.hpp>
#include <quadaffine/indefinite.hpp>

#include <benchmark/benchmark.h>

namespace {

using namespace quadaffine;

// Hyperboloid refined by the argument; vertex count grows with its square.
std::map<std::string, double> refined(int k) { return {{"du", 2.0 / 50 / k}, {"dv", 2.0 / 51 / k}}; }

void BM_GenerateHyperboloid(benchmark::State& state) {
  const auto params = refined(int(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(generate_builtin("hyperboloid", params));
}
BENCHMARK(BM_GenerateHyperboloid)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_AnalyzeIndefinite(benchmark::State& state) {
  const AsymptoticNet net(generate_builtin("hyperboloid", refined(int(state.range(0)))).q);
  for (auto _ : state) benchmark::DoNotOptimize(analyze_indefinite(net));
  state.SetItemsProcessed(state.iterations() * int64_t(net.domain().vertex_count()));
}
BENCHMARK(BM_AnalyzeIndefinite)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_ReconstructIndefinite(benchmark::State& state) {
  const AsymptoticNet net(generate_builtin("hyperboloid", refined(int(state.range(0)))).q);
  const IndefiniteStructure s = structure_of(analyze_indefinite(net));
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct(s));
  state.SetItemsProcessed(state.iterations() * int64_t(net.domain().vertex_count()));
}
BENCHMARK(BM_ReconstructIndefinite)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_AnalyzeDefinite(benchmark::State& state) {
  const ConjugateNet net(generate_builtin("paraboloid-definite", {{"n", double(state.range(0))}}).q);
  for (auto _ : state) benchmark::DoNotOptimize(analyze_definite(net));
  state.SetItemsProcessed(state.iterations() * int64_t(net.domain().vertex_count()));
}
BENCHMARK(BM_AnalyzeDefinite)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_ReconstructDefinite(benchmark::State& state) {
  const ConjugateNet net(generate_builtin("definite-cubic").q);
  const DefiniteStructure s = structure_of(analyze_definite(net));
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct_definite(s));
}
BENCHMARK(BM_ReconstructDefinite)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
