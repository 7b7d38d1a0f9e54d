#include <benchmark/benchmark.h>

#include <random>
#include <span>

#include "pcattn/analyzer/cost.hpp"
#include "pcattn/neighborhood/knn.hpp"
#include "pcattn/numerics/ops.hpp"

using namespace pcattn;
using numerics::Shape;
using numerics::Value;

namespace {

std::vector<double> random_data(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

void BM_MatmulForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Value a = Value::parameter(Shape{n, 128}, random_data(n * 128, 1));
  const Value b = Value::parameter(Shape{128, 128}, random_data(128 * 128, 2));
  for (auto _ : state) {
    const Value y = numerics::sum_all(numerics::matmul(a, b));
    numerics::backward(y);
    benchmark::DoNotOptimize(y.data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_MatmulForwardBackward)->Arg(256)->Arg(1024);

void BM_Softmax(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Value x = Value::constant(Shape{n, 32, 128}, random_data(n * 32 * 128, 3));
  for (auto _ : state) benchmark::DoNotOptimize(numerics::softmax(x, 1).data().data());
}
BENCHMARK(BM_Softmax)->Arg(256);

void BM_RankNeighbors(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto pts = random_data(n * 3, 4);
  for (auto _ : state) benchmark::DoNotOptimize(neighborhood::rank_neighbors(pts, n, 3, 32).ids.data());
}
BENCHMARK(BM_RankNeighbors)->Arg(256)->Arg(1024);

void BM_AnalyzeConfig(benchmark::State& state) {
  attention::AttentionConfig cfg;
  cfg.scales = {0, 1, 2};
  cfg.key_mode = neighborhood::KeyMode::separate;
  for (auto _ : state) benchmark::DoNotOptimize(analyzer::analyze(cfg));
}
BENCHMARK(BM_AnalyzeConfig);

}  // namespace
