#pragma once

#include <vector>

#include "cv2x/engine.hpp"

// Three vehicles at 25 m/s on a lossless channel with every grant forced to
// now + 4 and ACK evaluations every 400 ms. Hand trace:
//   SAM  tx 4, 1004, 2004
//   v1 crosses 1150 -> SUM tx 1154, eval 1200 -> ACK tx 1204, SCT 54
//   v2 crosses 1450 -> SUM tx 1454, eval 1600 -> ACK tx 1604, SCT 154
//   v3 crosses 1460 -> SUM tx 1464, eval 1600 -> ACK tx 1605, SCT 145
namespace oracle {

struct Expected {
  std::vector<cv2x::Subframe> sam_tx{4, 1004, 2004};
  std::vector<cv2x::Subframe> sum_tx{1154, 1454, 1464};
  std::vector<cv2x::Subframe> ack_tx{1204, 1604, 1605};
  std::vector<cv2x::Subframe> sct{54, 154, 145};  // vehicles 1, 2, 3
};

inline cv2x::ScenarioConfig config() {
  auto c = cv2x::default_scenario();
  c.flow_rate_vps = 0.0;
  c.lossless_channel = true;
  c.pathloss.shadowing_sigma_db = 0.0;
  c.forced_grant_delay_ms = 4;
  c.harq_enabled = false;
  c.batchsize = 1;
  c.ack_dispatch = cv2x::AckDispatch::Interval;
  c.bsm_enabled = false;
  c.sim_duration_ms = 3000;
  return c;
}

inline cv2x::TrafficState traffic(const cv2x::ScenarioConfig& c) {
  cv2x::TrafficState t(c, cv2x::Rng(1));
  // x0 = 1500 - 25 m/s * crossing time
  t.add_vehicle(0, +1, 1471.25, 25.0, 0);
  t.add_vehicle(1, +1, 1463.75, 25.0, 0);
  t.add_vehicle(2, +1, 1463.5, 25.0, 0);
  t.stop_arrivals();
  return t;
}

inline cv2x::RunResult run() {
  const auto c = config();
  cv2x::RunOptions options;
  options.keep_tx_log = true;
  cv2x::Engine engine(c, traffic(c), options);
  return engine.run();
}

inline std::vector<cv2x::Subframe> tx_times(const cv2x::RunResult& r, cv2x::PacketKind kind) {
  std::vector<cv2x::Subframe> out;
  for (const auto& t : r.tx_log) {
    if (t.kind == kind) out.push_back(t.subframe);
  }
  return out;
}

}  // namespace oracle
