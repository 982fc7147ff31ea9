#include <benchmark/benchmark.h>

#include <vector>

#include "cv2x/mac.hpp"
#include "cv2x/phy.hpp"
#include "cv2x/rng.hpp"

namespace {

cv2x::SensingHistory busy_history(cv2x::Rng& rng) {
  cv2x::SensingHistory h(5, cv2x::dbm_to_mw(-104.0), cv2x::dbm_to_mw(-92.0));
  std::vector<double> cells(5);
  for (cv2x::Subframe sf = 0; sf < 100; ++sf) {
    for (auto& c : cells) c = cv2x::dbm_to_mw(cv2x::uniform_real(rng, -104.0, -70.0));
    h.record(sf, cells);
  }
  return h;
}

void BM_SelectResource(benchmark::State& state) {
  cv2x::Rng rng = cv2x::make_stream(3, "bench");
  const auto history = busy_history(rng);
  const cv2x::SelectionParams params;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cv2x::select_resource(history, 99, 2, params, rng));
  }
}
BENCHMARK(BM_SelectResource);

void BM_ComputeCbr(benchmark::State& state) {
  cv2x::Rng rng = cv2x::make_stream(4, "bench");
  const auto history = busy_history(rng);
  for (auto _ : state) benchmark::DoNotOptimize(cv2x::compute_cbr(history, -92.0));
}
BENCHMARK(BM_ComputeCbr);

void BM_SensingRecord(benchmark::State& state) {
  cv2x::Rng rng = cv2x::make_stream(5, "bench");
  auto history = busy_history(rng);
  const std::vector<double> cells(5, cv2x::dbm_to_mw(-95.0));
  cv2x::Subframe sf = 100;
  for (auto _ : state) history.record(sf++, cells);
}
BENCHMARK(BM_SensingRecord);

}  // namespace
