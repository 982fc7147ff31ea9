#include <benchmark/benchmark.h>

#include "cv2x/config.hpp"
#include "cv2x/engine.hpp"

namespace {

// One second of simulated time at the given flow rate.
void BM_EngineSecond(benchmark::State& state) {
  cv2x::ScenarioConfig config = cv2x::default_scenario();
  config.flow_rate_vps = static_cast<double>(state.range(0));
  config.sim_duration_ms = 1000;
  for (auto _ : state) {
    cv2x::Engine engine(config);
    benchmark::DoNotOptimize(engine.run().metrics.attempts_on_air);
  }
}
BENCHMARK(BM_EngineSecond)->Arg(1)->Arg(5)->Arg(15)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
