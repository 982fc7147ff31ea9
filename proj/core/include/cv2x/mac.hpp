#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cv2x/config.hpp"
#include "cv2x/packet.hpp"
#include "cv2x/phy.hpp"
#include "cv2x/rng.hpp"
#include "cv2x/types.hpp"

namespace cv2x {

/// Rolling record of the last 100 subframes x all subchannels as seen by one
/// node: received power per cell (noise floor where nothing was heard) plus
/// the RSRP of any decoded reservation announcing that cell.
class SensingHistory {
 public:
  static constexpr int kWindow = 100;

  SensingHistory(int subchannels, double noise_mw, double cbr_threshold_mw);

  /// Stores the measurement of subframe `sf`. Subframes must be recorded
  /// consecutively.
  void record(Subframe sf, std::span<const double> rssi_mw);
  /// The node transmitted in `sf` and measured nothing (noise floor stored).
  void record_unmeasured(Subframe sf);
  /// A decoded attempt in `sf` reserving the same cells one `period` later.
  void record_reservation(Subframe sf, Subframe period, int first_subchannel, int count, double rsrp_mw);

  [[nodiscard]] int subchannels() const { return subchannels_; }
  [[nodiscard]] double noise_mw() const { return noise_mw_; }
  [[nodiscard]] double cbr_threshold_mw() const { return cbr_threshold_mw_; }
  /// Number of subframes in the window that hold a measurement (<= 100).
  [[nodiscard]] int measured_subframes() const { return measured_ < kWindow ? static_cast<int>(measured_) : kWindow; }
  [[nodiscard]] std::optional<Subframe> latest() const { return latest_; }

  /// The `subchannels()` cells of the ring slot that `sf` maps to.
  [[nodiscard]] const float* row(Subframe sf) const { return rssi_.data() + cell(sf, 0); }
  /// Most recent measurement of the ring slot that `sf` maps to (sf mod 100).
  [[nodiscard]] double rssi_mw(Subframe sf, int subchannel) const { return rssi_[cell(sf, subchannel)]; }
  /// 0 when no reservation is known for that cell.
  [[nodiscard]] double reservation_mw(Subframe sf, int subchannel) const {
    return reservations_.empty() ? 0.0 : reservations_[cell(sf, subchannel)];
  }

  [[nodiscard]] bool has_reservations() const { return !reservations_.empty(); }

  /// Busy-cell percentage, maintained incrementally against the threshold
  /// given at construction.
  [[nodiscard]] double busy_percent() const;

 private:
  [[nodiscard]] std::size_t cell(Subframe sf, int c) const {
    return static_cast<std::size_t>(((sf % kWindow) + kWindow) % kWindow) * static_cast<std::size_t>(subchannels_) +
           static_cast<std::size_t>(c);
  }
  bool begin_slot(Subframe sf);

  int subchannels_;
  double noise_mw_;
  double cbr_threshold_mw_;
  std::vector<float> rssi_;  // mW; single precision halves the per-node footprint
  std::vector<double> reservations_;
  std::int64_t busy_cells_ = 0;
  std::int64_t measured_ = 0;
  std::optional<Subframe> latest_;
};

struct CbrSample {
  double percent = 0.0;
  bool full_window = false;  ///< false: computed over a shorter prefix
};

/// 100 * (cells with RSSI above the threshold) / (cells in the window).
CbrSample compute_cbr(const SensingHistory& history, double threshold_dbm);

struct SelectionParams {
  int window_min_ms = 4;
  int window_max_ms = 100;
  double exclusion_start_dbm = -110.0;
  double exclusion_step_db = 3.0;
  double shortlist_fraction = 0.2;

  static SelectionParams from(const ScenarioConfig& config);
};

struct Grant {
  Subframe subframe = 0;
  int first_subchannel = 0;

  bool operator==(const Grant&) const = default;
};

/// Sensing-based one-shot selection over [now + window_min, now + window_max].
/// Candidates whose cells carry a decoded reservation above the exclusion
/// threshold are dropped; the threshold rises in steps while fewer than the
/// shortlist fraction of candidates survive. Survivors are ranked by mean
/// RSSI, and the choice is uniform among those at or below the
/// shortlist-fraction percentile. `unavailable` subframes (the node's own
/// commitments) are never candidates.
Grant select_resource(const SensingHistory& history, Subframe now, int footprint, const SelectionParams& params,
                      Rng& rng, const std::function<bool(Subframe)>& unavailable = {});

struct SpsReservation {
  Subframe offset = 0;  ///< subframe mod period
  int first_subchannel = 0;
  int subchannel_count = 1;
  Subframe period = 100;

  /// First reserved subframe at or after `from`.
  [[nodiscard]] Subframe next_at_or_after(Subframe from) const;
};

struct SpsProcess {
  NodeId node = 0;
  std::optional<SpsReservation> reservation;
  int counter = 0;
  double keep_probability = 0.0;
};

/// Called when the counter reaches 0: keep the reservation (with probability
/// keep_probability) and redraw the counter, or drop it.
SpsProcess reselection_tick(SpsProcess sps, int counter_min, int counter_max, Rng& rng);

/// Packet waiting in a node's transmit queue together with its grant state.
struct QueuedPacket {
  Packet packet;
  Subframe enqueued_ms = 0;
  std::uint64_t seq = 0;

  bool granted = false;
  Grant grant;
  int subchannel_count = 1;
  Subframe reservation_period = 0;
  bool reserved = false;  ///< grant taken from the SPS reservation
  std::optional<Subframe> harq_subframe;
  bool original_sent = false;
  bool copy_sent = false;
};

/// Ordered by (priority ascending, enqueue order ascending).
class TxQueue {
 public:
  void push(Packet packet, Subframe now);
  std::optional<Packet> pop();

  [[nodiscard]] bool empty() const { return items_.empty(); }
  [[nodiscard]] std::size_t size() const { return items_.size(); }
  [[nodiscard]] const std::vector<QueuedPacket>& items() const { return items_; }
  std::vector<QueuedPacket>& items() { return items_; }

 private:
  std::vector<QueuedPacket> items_;
  std::uint64_t next_seq_ = 0;
};

struct MacParams {
  SelectionParams selection;
  std::array<int, 4> footprint{2, 3, 2, 1};  ///< indexed by PacketKind
  bool harq_enabled = true;
  int harq_window = 15;
  bool one_shot_bsm = true;
  int counter_min = 5;
  int counter_max = 15;
  double keep_probability = 0.0;
  Subframe sps_period = 100;
  Subframe forced_grant_delay = 0;

  static MacParams from(const ScenarioConfig& config);
  [[nodiscard]] int footprint_of(PacketKind kind) const { return footprint[static_cast<std::size_t>(kind)]; }
};

/// One node's MAC: transmit queue, grants, HARQ copies, SPS state and sensing.
/// A node never holds two transmissions in the same subframe.
class MacEntity {
 public:
  MacEntity(NodeId node, MacParams params, SensingHistory history);

  void enqueue(Packet packet, Subframe now);
  /// Grants every queued packet that has none yet, in queue order.
  void assign_grants(Subframe now, Rng& sps_rng, Rng& harq_rng);
  /// The attempt this node sends in `now`, if any. Call once per subframe.
  std::optional<TransmissionAttempt> next_transmission(Subframe now, Rng& sps_rng);
  /// Drops matching packets together with any pending HARQ copy.
  std::size_t cancel_if(const std::function<bool(const Packet&)>& predicate);

  [[nodiscard]] bool committed(Subframe sf) const;
  [[nodiscard]] NodeId node() const { return node_; }
  [[nodiscard]] const TxQueue& queue() const { return queue_; }
  [[nodiscard]] const SpsProcess& sps() const { return sps_; }
  [[nodiscard]] SensingHistory& history() { return history_; }
  [[nodiscard]] const SensingHistory& history() const { return history_; }
  [[nodiscard]] bool has_pending_grants() const { return ungranted_ > 0; }

 private:
  Grant one_shot(Subframe now, int footprint, Rng& rng) const;

  NodeId node_;
  MacParams params_;
  SensingHistory history_;
  TxQueue queue_;
  SpsProcess sps_;
  std::size_t ungranted_ = 0;
};

}  // namespace cv2x
