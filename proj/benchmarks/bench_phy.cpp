#include <benchmark/benchmark.h>

#include "cv2x/config.hpp"
#include "cv2x/phy.hpp"
#include "cv2x/rng.hpp"

namespace {

// n nodes spread along the default road, `attempts` of them transmitting.
void BM_ResolveSubframe(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto na = static_cast<std::size_t>(state.range(1));
  cv2x::ScenarioConfig config = cv2x::default_scenario();
  cv2x::Rng shadow = cv2x::make_stream(1, "shadowing");
  cv2x::PhyModel model(config, shadow);
  cv2x::Rng rng = cv2x::make_stream(1, "bench");

  cv2x::NodePositions nodes;
  for (std::size_t i = 0; i < n; ++i) {
    nodes.push(static_cast<cv2x::NodeId>(i), cv2x::uniform_real(rng, 0.0, config.road_length_m),
               cv2x::uniform_real(rng, 0.0, 16 * 3.7));
  }
  std::vector<cv2x::TransmissionAttempt> attempts(na);
  for (std::size_t a = 0; a < na; ++a) {
    attempts[a].tx_node = static_cast<cv2x::NodeId>(a * (n / na));
    attempts[a].packet = cv2x::make_packet(config, cv2x::PacketKind::Bsm, attempts[a].tx_node, 0, a);
    attempts[a].first_subchannel = static_cast<int>(a % 4);
    attempts[a].subchannel_count = 2;
  }
  cv2x::SubframeResolver resolver(model);
  for (auto _ : state) {
    resolver.resolve(nodes, attempts);
    benchmark::DoNotOptimize(resolver.rssi_mw(0, 0));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * na));
}
BENCHMARK(BM_ResolveSubframe)->Args({300, 6})->Args({1500, 30})->Args({3000, 40});

void BM_DecodeOnePair(benchmark::State& state) {
  cv2x::ScenarioConfig config = cv2x::default_scenario();
  cv2x::Rng shadow = cv2x::make_stream(1, "shadowing");
  cv2x::PhyModel model(config, shadow);
  cv2x::NodePositions nodes;
  for (int i = 0; i < 1000; ++i) nodes.push(static_cast<cv2x::NodeId>(i), 3.0 * i, 0.0);
  std::vector<cv2x::TransmissionAttempt> attempts(10);
  for (std::size_t a = 0; a < attempts.size(); ++a) {
    attempts[a].tx_node = static_cast<cv2x::NodeId>(a * 97);
    attempts[a].packet = cv2x::make_packet(config, cv2x::PacketKind::Bsm, attempts[a].tx_node, 0, a);
    attempts[a].subchannel_count = 2;
  }
  cv2x::SubframeResolver resolver(model);
  resolver.resolve(nodes, attempts);
  std::size_t r = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(resolver.decodes(r, 3));
    r = (r + 7) % 1000;
  }
}
BENCHMARK(BM_DecodeOnePair);

}  // namespace
