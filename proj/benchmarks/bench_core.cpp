#include <benchmark/benchmark.h>

#include <vector>

#include "brainergm/netmetrics.hpp"
#include "brainergm/sampler.hpp"
#include "brainergm/terms.hpp"

using namespace brainergm;

namespace {

// Density near the 90-node brain networks the engine is tuned for.
Graph brain_sized(std::size_t n) { return bernoulli_graph(n, 0.055, 42); }

void BM_ChangeStatistics(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Graph g = brain_sized(n);
  const CompiledModel model(ModelSpec::parse("edges,twopath,gwesp:0.75,gwdsp:0.75,gwnsp:0.75,gwd:0.75"), n, nullptr);
  std::vector<double> out(model.size());
  Node i = 0, j = 1;
  for (auto _ : state) {
    model.change(g, i, j, out);
    benchmark::DoNotOptimize(out.data());
    if (++j == n) j = ++i + 1;
    if (i + 1 >= n) i = 0, j = 1;
  }
}
BENCHMARK(BM_ChangeStatistics)->Arg(30)->Arg(90)->Arg(200);

void BM_Evaluate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Graph g = brain_sized(n);
  const CompiledModel model(ModelSpec::best_assessment(), n, nullptr);
  for (auto _ : state) benchmark::DoNotOptimize(model.evaluate(g));
}
BENCHMARK(BM_Evaluate)->Arg(30)->Arg(90);

void BM_Sampler(benchmark::State& state) {
  const std::size_t n = 90;
  const CompiledModel model(ModelSpec::best_assessment(), n, nullptr);
  const std::vector<double> theta{-3.0, 0.8, -0.3};
  SamplerControl c;
  c.burn_in = static_cast<std::uint64_t>(state.range(0));
  c.interval = 1;
  c.sample_count = 1;
  c.threads = 1;
  c.keep_graphs = false;
  c.fail_on_degeneracy = false;
  for (auto _ : state) benchmark::DoNotOptimize(sample(model, theta, c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sampler)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_Metrics(benchmark::State& state) {
  const Graph g = brain_sized(90);
  for (auto _ : state) benchmark::DoNotOptimize(descriptive_metrics(g));
}
BENCHMARK(BM_Metrics);

}  // namespace

BENCHMARK_MAIN();
