#include "gpebo/cli.hpp"
#include "gpebo/excitation.hpp"

#include <benchmark/benchmark.h>

using namespace gpebo;

namespace {

const Trajectory& plant() {
    static const Trajectory tr = simulate(builtin_scenario(ScenarioId::C1, 1.0, EstimatorKind::Gradient));
    return tr;
}

cli::RunConfig sweep_config(double horizon) {
    auto cfg = cli::parse_run_config({{"scenario", "c3"}, {"gamma", "1,10,100"}});
    cfg.horizon = horizon;
    return cfg;
}

}  // namespace

static void BM_PeCheck(benchmark::State& state) {
    const auto src = excitation_source(plant());
    const double stride = 1.0 / static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(pe_check(src, 5.0, 1e-4, stride));
}
BENCHMARK(BM_PeCheck)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_PeCheckSerial(benchmark::State& state) {
    const auto src = excitation_source(plant());
    const double stride = 1.0 / static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(pe_check_serial(src, 5.0, 1e-4, stride));
}
BENCHMARK(BM_PeCheckSerial)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_RunSweep(benchmark::State& state) {
    const auto cfg = sweep_config(static_cast<double>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(cli::run_sweep(cfg));
}
BENCHMARK(BM_RunSweep)->Arg(5)->Arg(30)->Unit(benchmark::kMillisecond);

static void BM_RunSweepSerial(benchmark::State& state) {
    const auto cfg = sweep_config(static_cast<double>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(cli::run_sweep_serial(cfg));
}
BENCHMARK(BM_RunSweepSerial)->Arg(5)->Arg(30)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
