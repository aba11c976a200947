#include <benchmark/benchmark.h>

#include "ucmar/sim/phantom.hpp"
#include "ucmar/sim/projection.hpp"
#include "ucmar/sim/synthesis.hpp"

using namespace ucmar;

namespace {

void BM_ForwardProject(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  const Image phantom = generate_phantom(0, grid);
  ScanGeometry geo;
  for (auto _ : state) {
    Sinogram s = forward_project(phantom, geo);
    benchmark::DoNotOptimize(s.values.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ForwardProject)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_FbpReconstruct(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  const Image phantom = generate_phantom(0, grid);
  ScanGeometry geo;
  const Sinogram sino = forward_project(phantom, geo);
  for (auto _ : state) {
    Image rec = fbp_reconstruct(sino, geo, grid);
    benchmark::DoNotOptimize(rec.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FbpReconstruct)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_SynthesizePair(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  const Image phantom = generate_phantom(0, grid);
  const MetalMask mask = generate_metal_mask(0, grid, 2);
  ScanGeometry geo;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    PairedSample pair = synthesize_pair(phantom, mask, geo, seed++);
    benchmark::DoNotOptimize(pair.corrupted.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SynthesizePair)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
