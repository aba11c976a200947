#include <benchmark/benchmark.h>

#include "ucmar/loss/loss.hpp"
#include "ucmar/model/unet.hpp"
#include "ucmar/sim/phantom.hpp"
#include "ucmar/train/adam.hpp"

using namespace ucmar;

namespace {

void BM_Restore(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  Unet<float> model({3, 16, grid}, 0);
  const Image input = generate_phantom(0, grid);
  for (auto _ : state) {
    Image out = model.restore(input);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Restore)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  // One forward/backward/update on a single sample: the inner-loop unit that
  // dominates end-to-end training time.
  const int grid = static_cast<int>(state.range(0));
  Unet<float> model({3, 16, grid}, 0);
  const Image input = generate_phantom(0, grid);
  const Image target = generate_phantom(1, grid);
  Adam opt(model.parameter_count(), 0.9, 0.999);
  Unet<float>::Workspace ws;
  std::vector<float> grad(model.parameter_count(), 0.0f);
  for (auto _ : state) {
    std::fill(grad.begin(), grad.end(), 0.0f);
    const Image pred = model.forward(input, ws);
    const LossGradient lg = loss_gradient(LossKind::rmse, pred, target);
    model.backward(lg.grad, ws, grad);
    opt.step(model.parameters(), grad, 1e-4);
    benchmark::DoNotOptimize(model.parameters().data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_TrainStep)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
