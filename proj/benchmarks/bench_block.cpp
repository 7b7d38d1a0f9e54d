#include <benchmark/benchmark.h>

#include <random>

#include "pcattn/attention/block.hpp"
#include "pcattn/cli/presets.hpp"
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

// One attention block, forward and backward, for a shipped preset at N points.
void run_block(benchmark::State& state, const char* preset, attention::KeyRoute route) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto& cfg = cli::find_preset(preset).attention;
  numerics::Rng rng(0);
  const auto prm = attention::make_attention_params(cfg, rng);
  const Value coords = Value::constant(Shape{n, 3}, random_data(n * 3, 1));
  const Value x = Value::parameter(Shape{n, cfg.dim}, random_data(n * cfg.dim, 2));
  for (auto _ : state) {
    const Value y =
        numerics::sum_all(attention::attention_block(cfg, prm, x, coords, nullptr, attention::BlockOptions{route}));
    numerics::backward(y);
    benchmark::DoNotOptimize(y.data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void BM_ClsLocalFactored(benchmark::State& s) { run_block(s, "cls_local", attention::KeyRoute::factored); }
void BM_ClsLocalExpanded(benchmark::State& s) { run_block(s, "cls_local", attention::KeyRoute::expanded); }
void BM_ClsGlobal(benchmark::State& s) { run_block(s, "cls_global", attention::KeyRoute::factored); }
void BM_SegLocal(benchmark::State& s) { run_block(s, "seg_local", attention::KeyRoute::factored); }

BENCHMARK(BM_ClsLocalFactored)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClsLocalExpanded)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClsGlobal)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SegLocal)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
