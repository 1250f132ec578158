// Parallel kernels against their serial references.
#include <benchmark/benchmark.h>

#include "predictorlab/analysis.hpp"
#include "predictorlab/plant.hpp"
#include "predictorlab/predictor.hpp"
#include "predictorlab/scenario.hpp"

using namespace predictorlab;

namespace {

const StrictFeedbackPlant& example4() {
    static const StrictFeedbackPlant p = std::get<StrictFeedbackPlant>(catalog_get("example4"));
    return p;
}

SweepSpec t2_sweep() {
    SweepSpec s;
    s.base = load_scenario(PREDICTORLAB_CONFIG_DIR "/example4.toml").sim;
    s.base.t_end = 5.0;
    s.k_hat = 0.0734;
    s.axes = {{SweepAxis::T2, {0.01, 0.02, 0.03}}, {SweepAxis::Theta, {1.0, 1.5}}};
    return s;
}

void BM_EstimateK(benchmark::State& st) {
    const PredictorConfig cfg{1, 2, 256};
    const int trials = static_cast<int>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(estimate_K(example4(), cfg, trials, 0));
}

void BM_EstimateKSerial(benchmark::State& st) {
    const PredictorConfig cfg{1, 2, 256};
    const int trials = static_cast<int>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(estimate_K_serial(example4(), cfg, trials, 0));
}

void BM_Sweep(benchmark::State& st) {
    const SweepSpec s = t2_sweep();
    for (auto _ : st) benchmark::DoNotOptimize(run_sweep(s));
}

void BM_SweepSerial(benchmark::State& st) {
    const SweepSpec s = t2_sweep();
    for (auto _ : st) benchmark::DoNotOptimize(run_sweep_serial(s));
}

}  // namespace

BENCHMARK(BM_EstimateK)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EstimateKSerial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sweep)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
