// Serial reference vs OpenMP kernels on a synthetic batch.

#include <benchmark/benchmark.h>

#include <numeric>

#include "avvp/kernels.hpp"
#include "avvp/metrics.hpp"
#include "avvp/trainer.hpp"

using namespace avvp;

namespace {

struct Fixture {
  Dataset data;
  ModelParams params;
  std::vector<std::size_t> batch;
  std::vector<SnippetDecisions> decisions;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    SynthConfig cfg;
    cfg.n_videos = 64;
    cfg.classes = 25;
    cfg.d_audio = 128;
    cfg.d_visual = 512;
    cfg.seed = 1;
    Fixture out;
    out.data = synth_generate(cfg).data;
    ModelConfig m;
    m.d_audio = cfg.d_audio;
    m.d_visual = cfg.d_visual;
    m.width = 256;
    m.classes = cfg.classes;
    out.params = ModelParams::create(m, 1);
    out.batch.resize(16);
    std::iota(out.batch.begin(), out.batch.end(), 0);
    out.decisions = decide_all(out.params, out.data, 0.5);
    return out;
  }();
  return f;
}

void BM_BatchGradientSerial(benchmark::State& state) {
  const Fixture& f = fixture();
  ModelParams grads = f.params.zeros_like();
  const LossConfig loss;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::batch_gradient_serial(f.params, f.data, f.batch, loss, grads));
  }
}

void BM_BatchGradientParallel(benchmark::State& state) {
  const Fixture& f = fixture();
  ModelParams grads = f.params.zeros_like();
  kernels::GradientWorkspace ws;
  const LossConfig loss;
  kernels::set_thread_limit(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        kernels::batch_gradient_parallel(f.params, f.data, f.batch, loss, grads, ws));
  }
  kernels::set_thread_limit(0);
}

void BM_PredictSerial(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::predict_serial(f.params, f.data.bags));
}

void BM_PredictParallel(benchmark::State& state) {
  const Fixture& f = fixture();
  kernels::set_thread_limit(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::predict_parallel(f.params, f.data.bags));
  kernels::set_thread_limit(0);
}

void BM_EvaluateSerial(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_serial(f.decisions, f.data.dense));
}

void BM_EvaluateParallel(benchmark::State& state) {
  const Fixture& f = fixture();
  kernels::set_thread_limit(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_parallel(f.decisions, f.data.dense));
  kernels::set_thread_limit(0);
}

}  // namespace

BENCHMARK(BM_BatchGradientSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchGradientParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EvaluateParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
