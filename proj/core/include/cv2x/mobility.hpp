#pragma once

#include <array>
#include <vector>

#include "cv2x/config.hpp"
#include "cv2x/rng.hpp"
#include "cv2x/types.hpp"

namespace cv2x {

struct VehicleState {
  NodeId id = 0;
  int lane = 0;
  int direction = +1;  ///< +1 towards road_length_m, -1 towards 0
  double position_m = 0.0;
  double speed_mps = 0.0;
  bool active = true;

  // Positions are evaluated in closed form from the entry point so that
  // integer-valued speeds land on exact positions.
  Subframe entry_ms = 0;
  double entry_position_m = 0.0;
  bool crossed = false;
};

struct CrossingRecord {
  NodeId vehicle_id = 0;
  Subframe cross_time_ms = 0;
  int lane = 0;
  int direction = +1;

  bool operator==(const CrossingRecord&) const = default;
};

struct MobilityEvents {
  std::vector<NodeId> spawned;
  std::vector<CrossingRecord> crossings;
  std::vector<NodeId> departures;
};

/// Bidirectional multi-lane freeway with Poisson arrivals at both ends.
class TrafficState {
 public:
  TrafficState(const ScenarioConfig& config, Rng rng);

  /// Adds a vehicle at `now` (hand-built scenarios and the initial population).
  NodeId add_vehicle(int lane, int direction, double position_m, double speed_mps, Subframe now = 0);

  /// Moves every active vehicle to its position at `now`. Must be called for
  /// consecutive subframes (dt = 1 ms).
  MobilityEvents advance(Subframe now);

  [[nodiscard]] Subframe now() const { return now_; }
  [[nodiscard]] const std::vector<VehicleState>& vehicles() const { return vehicles_; }
  [[nodiscard]] const VehicleState& vehicle(NodeId id) const { return vehicles_.at(id - 1); }
  [[nodiscard]] const std::vector<CrossingRecord>& crossing_log() const { return crossings_; }
  [[nodiscard]] std::size_t active_count() const;

  /// Trigger line for a direction of travel.
  [[nodiscard]] double trigger_line(int direction) const;
  /// Lateral offset of a lane centre from the road edge.
  [[nodiscard]] double lateral_m(int lane) const;
  [[nodiscard]] double rsu_lateral_m() const;
  [[nodiscard]] double rsu_position_m() const { return rsu_position_m_; }
  [[nodiscard]] double road_length_m() const { return road_length_m_; }

  /// Disables the arrival processes (hand-built scenarios).
  void stop_arrivals();

 private:
  void schedule_next_arrival(int dir_index, double from_ms);
  int draw_lane(int direction);
  double draw_speed();

  double road_length_m_;
  double rsu_position_m_;
  double trigger_distance_m_;
  int lane_count_;
  double lane_width_m_;
  double flow_rate_vps_;
  double speed_min_mps_;
  double speed_max_mps_;

  Rng rng_;
  Subframe now_ = 0;
  std::vector<VehicleState> vehicles_;
  std::vector<CrossingRecord> crossings_;
  std::array<double, 2> next_arrival_ms_{};  // [0]: +1 direction, [1]: -1 direction
};

/// Initial uniform population plus per-direction Poisson arrivals at rate
/// flow_rate_vps / 2, so the trigger line sees flow_rate_vps from t = 0.
TrafficState init_traffic(const ScenarioConfig& config, Rng rng);

/// Crossings in the trailing window ending at traffic.now(), per second.
double measured_crossing_rate(const TrafficState& traffic, Subframe window_ms);

/// Planar distance from a vehicle to the RSU.
double distance_to_rsu(const TrafficState& traffic, const VehicleState& vehicle);

}  // namespace cv2x
