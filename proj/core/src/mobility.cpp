#include "cv2x/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cv2x {

namespace {
constexpr double kNever = std::numeric_limits<double>::infinity();
}

TrafficState::TrafficState(const ScenarioConfig& config, Rng rng)
    : road_length_m_(config.road_length_m),
      rsu_position_m_(config.rsu_position_m),
      trigger_distance_m_(config.trigger_distance_m),
      lane_count_(config.lane_count),
      lane_width_m_(config.lane_width_m),
      flow_rate_vps_(config.flow_rate_vps),
      speed_min_mps_(config.speed_min_mps),
      speed_max_mps_(config.speed_max_mps),
      rng_(std::move(rng)) {
  schedule_next_arrival(0, 0.0);
  schedule_next_arrival(1, 0.0);
}

void TrafficState::schedule_next_arrival(int dir_index, double from_ms) {
  if (flow_rate_vps_ <= 0.0) {
    next_arrival_ms_[dir_index] = kNever;
    return;
  }
  const double rate_per_ms = flow_rate_vps_ / 2.0 / 1000.0;
  next_arrival_ms_[dir_index] = from_ms + std::exponential_distribution<double>(rate_per_ms)(rng_);
}

void TrafficState::stop_arrivals() { next_arrival_ms_ = {kNever, kNever}; }

int TrafficState::draw_lane(int direction) {
  if (lane_count_ == 1) return 0;
  const int forward = (lane_count_ + 1) / 2;
  return direction > 0 ? uniform_int(rng_, 0, forward - 1) : uniform_int(rng_, forward, lane_count_ - 1);
}

double TrafficState::draw_speed() {
  return speed_min_mps_ == speed_max_mps_ ? speed_min_mps_ : uniform_real(rng_, speed_min_mps_, speed_max_mps_);
}

NodeId TrafficState::add_vehicle(int lane, int direction, double position_m, double speed_mps, Subframe now) {
  VehicleState v;
  v.id = static_cast<NodeId>(vehicles_.size() + 1);
  v.lane = lane;
  v.direction = direction >= 0 ? +1 : -1;
  v.position_m = position_m;
  v.speed_mps = speed_mps;
  v.entry_ms = now;
  v.entry_position_m = position_m;
  v.active = position_m >= 0.0 && position_m <= road_length_m_;
  vehicles_.push_back(v);
  return v.id;
}

double TrafficState::trigger_line(int direction) const {
  return direction > 0 ? rsu_position_m_ - trigger_distance_m_ : rsu_position_m_ + trigger_distance_m_;
}

double TrafficState::lateral_m(int lane) const { return (lane + 0.5) * lane_width_m_; }

double TrafficState::rsu_lateral_m() const { return lane_count_ * lane_width_m_ / 2.0; }

std::size_t TrafficState::active_count() const {
  std::size_t n = 0;
  for (const auto& v : vehicles_) n += v.active ? 1 : 0;
  return n;
}

MobilityEvents TrafficState::advance(Subframe now) {
  if (now != now_ + 1) throw std::logic_error("TrafficState::advance must be called once per subframe");
  now_ = now;
  MobilityEvents events;

  for (auto& v : vehicles_) {
    if (!v.active) continue;
    const double previous = v.position_m;
    const double elapsed_ms = static_cast<double>(now - v.entry_ms);
    v.position_m = v.entry_position_m + v.direction * (v.speed_mps * elapsed_ms) / 1000.0;

    if (!v.crossed) {
      const double line = trigger_line(v.direction);
      const bool crossed = v.direction > 0 ? (previous < line && v.position_m >= line)
                                           : (previous > line && v.position_m <= line);
      if (crossed) {
        v.crossed = true;
        CrossingRecord record{v.id, now, v.lane, v.direction};
        crossings_.push_back(record);
        events.crossings.push_back(record);
      }
    }
    if (v.position_m < 0.0 || v.position_m > road_length_m_) {
      v.active = false;
      v.position_m = std::clamp(v.position_m, 0.0, road_length_m_);
      events.departures.push_back(v.id);
    }
  }

  for (int d = 0; d < 2; ++d) {
    const int direction = d == 0 ? +1 : -1;
    while (next_arrival_ms_[d] <= static_cast<double>(now)) {
      const int lane = draw_lane(direction);
      const double speed = draw_speed();
      events.spawned.push_back(add_vehicle(lane, direction, direction > 0 ? 0.0 : road_length_m_, speed, now));
      schedule_next_arrival(d, next_arrival_ms_[d]);
    }
  }
  return events;
}

TrafficState init_traffic(const ScenarioConfig& config, Rng rng) {
  Rng placement = make_stream(rng(), "placement");
  TrafficState traffic(config, std::move(rng));
  if (config.flow_rate_vps <= 0.0) return traffic;

  const double mean_speed = (config.speed_min_mps + config.speed_max_mps) / 2.0;
  const auto count = static_cast<long>(std::llround(config.flow_rate_vps * config.road_length_m / mean_speed));
  const int forward = config.lane_count == 1 ? 1 : (config.lane_count + 1) / 2;
  for (long i = 0; i < count; ++i) {
    const int direction = uniform_int(placement, 0, 1) == 0 ? +1 : -1;
    int lane = 0;
    if (config.lane_count > 1) {
      lane = direction > 0 ? uniform_int(placement, 0, forward - 1) : uniform_int(placement, forward, config.lane_count - 1);
    }
    const double position = uniform_real(placement, 0.0, config.road_length_m);
    const double speed = config.speed_min_mps == config.speed_max_mps
                             ? config.speed_min_mps
                             : uniform_real(placement, config.speed_min_mps, config.speed_max_mps);
    traffic.add_vehicle(lane, direction, position, speed, 0);
  }
  return traffic;
}

double measured_crossing_rate(const TrafficState& traffic, Subframe window_ms) {
  if (window_ms <= 0 || window_ms > traffic.now() + 1) {
    throw std::invalid_argument("window must be positive and no longer than the elapsed time");
  }
  const Subframe from = traffic.now() - window_ms;
  std::size_t n = 0;
  for (const auto& c : traffic.crossing_log()) n += c.cross_time_ms > from ? 1 : 0;
  return static_cast<double>(n) / (static_cast<double>(window_ms) / 1000.0);
}

double distance_to_rsu(const TrafficState& traffic, const VehicleState& vehicle) {
  return std::hypot(vehicle.position_m - traffic.rsu_position_m(),
                    traffic.lateral_m(vehicle.lane) - traffic.rsu_lateral_m());
}

}  // namespace cv2x
