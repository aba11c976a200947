#include <benchmark/benchmark.h>

#include "ucmar/metrics/metrics.hpp"
#include "ucmar/sim/phantom.hpp"
#include "ucmar/uncertainty/uncertainty.hpp"

using namespace ucmar;

namespace {

void BM_Psnr(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  const Image a = generate_phantom(0, grid);
  const Image b = generate_phantom(1, grid);
  for (auto _ : state) benchmark::DoNotOptimize(psnr(a, b));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Psnr)->Arg(64)->Arg(128);

void BM_Ssim(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  const Image a = generate_phantom(0, grid);
  const Image b = generate_phantom(1, grid);
  for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Ssim)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_ComputeUncertainty(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  std::vector<Image> stack;
  for (std::uint64_t s = 0; s < 5; ++s) stack.push_back(generate_phantom(s, grid));
  for (auto _ : state) {
    UncertaintyMap map = compute_uncertainty(stack);
    benchmark::DoNotOptimize(map.values.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ComputeUncertainty)->Arg(64)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
