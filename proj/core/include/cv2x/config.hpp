#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cv2x/types.hpp"

namespace cv2x {

/// Log-distance path loss with per-link frozen log-normal shadowing.
struct PathlossParams {
  double reference_loss_db = 47.0;  ///< loss at 1 m
  double exponent = 2.75;
  double shadowing_sigma_db = 3.0;
  double tx_power_dbm = 23.0;
  double noise_floor_dbm = -104.0;  ///< per subchannel

  bool operator==(const PathlossParams&) const = default;
};

struct McsEntry {
  int mcs = 0;
  double sinr_threshold_db = 0.0;

  bool operator==(const McsEntry&) const = default;
};

/// One (CBR, ITT) point of the rate-control map.
struct IttAnchor {
  double cbr_percent = 0.0;
  double itt_ms = 0.0;

  bool operator==(const IttAnchor&) const = default;
};

/// When the RSU looks at its pending-request FIFO.
enum class AckDispatch {
  Immediate,  ///< every subframe, right after receptions are delivered
  Interval,   ///< only every ack_interval_ms
};

/// How many ACKs one dispatch evaluation may form.
enum class AckPolicy {
  MultiBatch,   ///< floor(pending / b) full batches
  SingleBatch,  ///< at most one full batch
};

/// Complete parameterization of one run. Defaults follow the reference
/// scenario: 3 km, 16-lane bidirectional freeway with the RSU in the middle.
struct ScenarioConfig {
  // road and traffic
  double road_length_m = 3000.0;
  int lane_count = 16;
  double lane_width_m = 3.7;
  double rsu_position_m = 1500.0;
  double flow_rate_vps = 1.0;
  double speed_min_mps = 25.0;
  double speed_max_mps = 35.0;
  std::int64_t sim_duration_ms = 50000;

  // radio
  double carrier_freq_ghz = 5.905;
  double bandwidth_mhz = 20.0;
  int subchannels_per_subframe = 5;
  PathlossParams pathloss;
  std::vector<McsEntry> mcs_table{{6, 3.0}, {7, 4.0}, {11, 8.0}};
  bool lossless_channel = false;

  // packets
  int bsm_payload_b = 300;
  int bsm_mcs = 7;
  int sam_payload_b = 700;
  int sam_mcs = 7;
  int sum_payload_b = 450;
  int sum_mcs = 11;
  int ack_payload_b = 300;
  int ack_mcs = 6;
  int footprint_bsm = 2;
  int footprint_sam = 3;
  int footprint_sum = 2;
  int footprint_ack = 1;
  int bsm_priority = 2;
  int service_priority = 6;

  // service protocol
  std::int64_t sam_period_ms = 1000;
  double trigger_distance_m = 0.0;
  std::int64_t sum_repeat_ms = 600;
  std::int64_t ack_interval_ms = 400;
  int batchsize = 1;
  AckDispatch ack_dispatch = AckDispatch::Immediate;
  AckPolicy ack_policy = AckPolicy::MultiBatch;

  // MAC
  double cbr_threshold_dbm = -92.0;
  bool harq_enabled = true;
  int harq_window_ms = 15;
  bool one_shot_bsm = true;
  int sps_window_min_ms = 4;
  int sps_window_max_ms = 100;
  double sps_exclusion_start_dbm = -110.0;
  double sps_exclusion_step_db = 3.0;
  double sps_shortlist_fraction = 0.2;
  int sps_counter_min = 5;
  int sps_counter_max = 15;
  double sps_keep_probability = 0.0;
  std::int64_t sps_period_ms = 100;
  /// Non-zero replaces sensing-based selection with a grant exactly this many
  /// subframes after enqueue (next free subframe), subchannel 0.
  std::int64_t forced_grant_delay_ms = 0;

  // BSM and congestion control
  bool bsm_enabled = true;
  bool rate_control_enabled = true;
  std::array<std::int64_t, 2> bsm_itt_bounds_ms{100, 600};
  double cbr_smoothing_weight = 0.5;
  std::int64_t cbr_sample_period_ms = 100;
  std::vector<IttAnchor> itt_map_anchors{{0.0, 100.0}, {35.0, 100.0}, {90.0, 110.0}, {100.0, 600.0}};

  // metrics and reproducibility
  double per_vicinity_m = 300.0;
  std::uint64_t rng_seed = 1;

  bool operator==(const ScenarioConfig&) const = default;

  [[nodiscard]] int footprint(PacketKind kind) const;
  [[nodiscard]] int mcs(PacketKind kind) const;
  [[nodiscard]] int payload(PacketKind kind) const;
  [[nodiscard]] int priority(PacketKind kind) const;
};

/// Parse, type, unknown-key, and validation failures.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Flow rates with a named traffic category.
inline constexpr std::array<double, 6> kFlowCategories{1.0, 5.0, 10.0, 15.0, 20.0, 30.0};

ScenarioConfig default_scenario();

/// Every invariant violation; empty means valid.
std::vector<std::string> validate(const ScenarioConfig& config);

/// Non-fatal observations (e.g. a flow rate outside the category table).
std::vector<std::string> config_warnings(const ScenarioConfig& config);

/// Throws ConfigError listing all violations.
const ScenarioConfig& require_valid(const ScenarioConfig& config);

/// Applies one `key = value` override. Throws ConfigError on unknown key or bad value.
void apply_setting(ScenarioConfig& config, std::string_view key, std::string_view value);

/// Flat `key = value` document, `#` comments. Result is defaults overridden
/// by the document, validated.
ScenarioConfig parse_scenario(std::string_view document);

ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Every key in a fixed order; parse_scenario(serialize(c)) == c.
std::string serialize(const ScenarioConfig& config);

std::vector<std::string> config_keys();

/// FNV-1a 64 of serialize(config), lower-case hex.
std::string config_hash(const ScenarioConfig& config);

}  // namespace cv2x
