#include "cv2x/types.hpp"

namespace cv2x {

std::string_view to_string(PacketKind kind) {
  switch (kind) {
    case PacketKind::Bsm: return "BSM";
    case PacketKind::Sam: return "SAM";
    case PacketKind::Sum: return "SUM";
    case PacketKind::Ack: return "ACK";
  }
  return "?";
}

}  // namespace cv2x

#include "cv2x/packet.hpp"

namespace cv2x {

Packet make_packet(const ScenarioConfig& config, PacketKind kind, NodeId source, Subframe created_ms,
                   std::uint64_t id) {
  Packet p;
  p.id = id;
  p.kind = kind;
  p.source = source;
  p.payload_b = config.payload(kind);
  p.mcs = config.mcs(kind);
  p.priority = config.priority(kind);
  p.created_ms = created_ms;
  return p;
}

}  // namespace cv2x
