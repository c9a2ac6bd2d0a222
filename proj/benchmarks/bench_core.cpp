#include <map>
#include <tuple>

#include <benchmark/benchmark.h>

#include "cohere/affinity.hpp"
#include "cohere/consensus.hpp"
#include "cohere/gridsim.hpp"
#include "cohere/pipeline.hpp"
#include "cohere/rng.hpp"
#include "cohere/spectral.hpp"

namespace {

cohere::GridModel grid(int areas, int per) {
  cohere::GridSpec spec;
  spec.areas = areas;
  spec.buses_per_area = per;
  spec.seed = 1;
  return cohere::build_network(spec);
}

const cohere::Dataset& dataset(int areas, int per, int outages) {
  static std::map<std::tuple<int, int, int>, cohere::Dataset> cache;
  auto& slot = cache[{areas, per, outages}];
  if (slot.records.empty()) {
    const auto m = grid(areas, per);
    slot = cohere::generate_scenario_suite(m, cohere::plan_outages(m, outages, 1.0, 1), 20.0, 0.01).dataset;
  }
  return slot;
}

Eigen::MatrixXd symmetric(Eigen::Index n) {
  cohere::Rng rng(7);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) m(i, j) = m(j, i) = rng.uniform(-1, 1);
  return m;
}

void BM_TopK(benchmark::State& state) {
  const Eigen::MatrixXd m = symmetric(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cohere::top_k_eigvecs(m, static_cast<int>(state.range(1))));
}
BENCHMARK(BM_TopK)->Args({24, 3})->Args({240, 10})->Args({240, 15})->Unit(benchmark::kMillisecond);

void BM_KMeans(benchmark::State& state) {
  cohere::Rng rng(3);
  Eigen::MatrixXd x(state.range(0), 10);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(cohere::kmeans(x, 10, 1));
}
BENCHMARK(BM_KMeans)->Arg(240)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  const auto m = grid(static_cast<int>(state.range(0)), 24);
  for (auto _ : state) benchmark::DoNotOptimize(cohere::simulate_outage(m, m.bus_ids[0], 1.0, 20.0, 0.01));
}
BENCHMARK(BM_Simulate)->Arg(3)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Correlation(benchmark::State& state) {
  const auto& d = dataset(10, 24, 1);
  for (auto _ : state) benchmark::DoNotOptimize(cohere::correlation_matrix(d.records[0]));
}
BENCHMARK(BM_Correlation)->Unit(benchmark::kMillisecond);

void BM_Consensus(benchmark::State& state) {
  const auto& d = dataset(10, 24, 10);
  const auto views =
      cohere::build_views(d, cohere::Transform::clip_negative, cohere::ViewMode::normalized_adjacency, 1).views;
  for (auto _ : state) benchmark::DoNotOptimize(cohere::run_consensus(views, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Consensus)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
