#include <benchmark/benchmark.h>

#include "mondi/geometry.h"
#include "mondi/losses.h"
#include "mondi/pipeline.h"
#include "mondi/solver.h"
#include "mondi/synthetic.h"

namespace {

using namespace mondi;

SceneBundle scene_of(int size) {
  SceneOptions options;
  options.size = size;
  return generate_bundle(options, "complementary", 1, 0);
}

void BM_Reproject(benchmark::State& state) {
  const SceneBundle s = scene_of(static_cast<int>(state.range(0)));
  const bool jac = state.range(1) != 0;
  for (auto _ : state) {
    Reprojection r = reproject_image(s.views[0].image, *s.ground_truth, s.intrinsics, s.views[0].pose, jac);
    benchmark::DoNotOptimize(r.image.data.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_Reproject)->ArgsProduct({{64, 128, 256}, {0, 1}});

void BM_MonitoredDistill(benchmark::State& state) {
  const SceneBundle s = scene_of(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(monitored_distill(s, {}));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_MonitoredDistill)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_TotalLoss(benchmark::State& state) {
  const SceneBundle s = scene_of(static_cast<int>(state.range(0)));
  const DistillationProduct p = monitored_distill(s, {});
  for (auto _ : state) benchmark::DoNotOptimize(total_loss(p.distilled, s, p, {}).total);
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_TotalLoss)->Arg(64)->Arg(128)->Arg(256);

void BM_Solve(benchmark::State& state) {
  const SceneBundle s = scene_of(64);
  const DistillationProduct p = monitored_distill(s, {});
  SolverConfig config;
  config.max_iters = static_cast<int>(state.range(0));
  config.log_every = config.max_iters;
  for (auto _ : state) benchmark::DoNotOptimize(solve(s, p, {}, config).depth.data.data());
}
BENCHMARK(BM_Solve)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
