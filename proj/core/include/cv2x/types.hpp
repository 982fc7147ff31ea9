#pragma once

#include <cstdint>
#include <string_view>

namespace cv2x {

/// Simulation time in 1 ms subframes.
using Subframe = std::int64_t;

/// Node index. The RSU is always node 0; vehicles are numbered from 1 in creation order.
using NodeId = std::uint32_t;

inline constexpr NodeId kRsuNode = 0;

enum class PacketKind : std::uint8_t { Bsm, Sam, Sum, Ack };

std::string_view to_string(PacketKind kind);

}  // namespace cv2x
