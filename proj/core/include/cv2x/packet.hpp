#pragma once

#include <cstdint>
#include <vector>

#include "cv2x/config.hpp"
#include "cv2x/types.hpp"

namespace cv2x {

struct Packet {
  std::uint64_t id = 0;
  PacketKind kind = PacketKind::Bsm;
  NodeId source = 0;
  int payload_b = 0;
  int mcs = 0;
  int priority = 0;  ///< PPPP, lower dequeues first
  Subframe created_ms = 0;
  std::vector<NodeId> ack_members;  ///< ACK only, 1..b entries
  int sum_attempt_no = 0;           ///< SUM only
  std::uint64_t batch_id = 0;       ///< ACK only

  bool operator==(const Packet&) const = default;
};

/// Packet of `kind` with payload, MCS and priority taken from the config.
Packet make_packet(const ScenarioConfig& config, PacketKind kind, NodeId source, Subframe created_ms,
                   std::uint64_t id);

}  // namespace cv2x

namespace cv2x {

/// Hands out run-unique, increasing packet ids.
class PacketFactory {
 public:
  explicit PacketFactory(const ScenarioConfig& config) : config_(&config) {}

  Packet make(PacketKind kind, NodeId source, Subframe created_ms) {
    return make_packet(*config_, kind, source, created_ms, next_id_++);
  }
  [[nodiscard]] std::uint64_t issued() const { return next_id_; }

 private:
  const ScenarioConfig* config_;
  std::uint64_t next_id_ = 0;
};

}  // namespace cv2x
