#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cv2x/config.hpp"
#include "cv2x/packet.hpp"
#include "cv2x/rng.hpp"
#include "cv2x/types.hpp"

namespace cv2x {

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

/// tx_power - (reference_loss + 10 * exponent * log10(d)) + shadowing, in dBm.
/// Requires distance_m >= 1.
double received_power(const PathlossParams& params, double distance_m, double link_shadowing_db);

/// MCS index -> minimum SINR for a successful decode.
class McsTable {
 public:
  explicit McsTable(std::vector<McsEntry> entries);

  /// Throws std::out_of_range for an MCS not in the table.
  [[nodiscard]] double sinr_threshold(int mcs) const;

 private:
  std::vector<McsEntry> entries_;
};

/// Uniform draw from [t - window, t + window] excluding t. Requires t >= window.
Subframe harq_schedule(Subframe initial_subframe, int window, Rng& rng);

/// harq_schedule, with draws before `earliest` mirrored to the far side of
/// the original (t - k becomes t + k), so a copy never precedes the point at
/// which the packet could first have been sent.
Subframe harq_schedule_causal(Subframe initial_subframe, Subframe earliest, int window, Rng& rng);

struct TransmissionAttempt {
  Packet packet;
  NodeId tx_node = 0;
  Subframe subframe = 0;
  int first_subchannel = 0;
  int subchannel_count = 1;
  bool is_harq_copy = false;
  int total_copies = 1;                ///< transmissions this packet gets (1 or 2)
  Subframe reservation_period_ms = 0;  ///< announced SPS period, 0 for one-shot

  [[nodiscard]] bool overlaps(const TransmissionAttempt& other) const {
    return first_subchannel < other.first_subchannel + other.subchannel_count &&
           other.first_subchannel < first_subchannel + subchannel_count;
  }
};

enum class FailureCause : std::uint8_t { None, HalfDuplex, Sinr, CollisionTie };

std::string_view to_string(FailureCause cause);

struct ReceptionOutcome {
  NodeId rx_node = 0;
  std::size_t attempt_index = 0;
  Packet packet;
  bool success = false;
  FailureCause failure_cause = FailureCause::None;
  double rx_power_dbm = 0.0;
  double sinr_db = 0.0;
};

/// Link budget of a run: path loss, per-link frozen shadowing, MCS thresholds
/// and noise. Shadowing is a pure function of the unordered node pair.
class PhyModel {
 public:
  PhyModel(const ScenarioConfig& config, Rng& shadowing_rng);

  [[nodiscard]] const PathlossParams& params() const { return params_; }
  [[nodiscard]] double shadowing_db(NodeId a, NodeId b) const;
  /// Exact received power in dBm (distance clamped to >= 1 m).
  [[nodiscard]] double rx_power_dbm(NodeId tx, NodeId rx, double distance_m) const;
  /// Table-interpolated received power in mW; agrees with rx_power_dbm to
  /// well under 0.1 dB.
  [[nodiscard]] double rx_power_mw(NodeId tx, NodeId rx, double distance_m) const {
    return tx_power_mw_ * path_gain(distance_m) * shadow_linear(a_b_index(tx, rx));
  }
  /// rx_power_mw for a link given by node_hash keys and a displacement.
  [[nodiscard]] double link_mw(std::uint32_t tx_hash, std::uint32_t rx_hash, double dx, double dy) const {
    return tx_power_mw_ * path_gain(std::sqrt(dx * dx + dy * dy)) * shadow_linear_[(tx_hash + rx_hash) & kShadowMask];
  }
  /// rx_power_mw from one transmitter to n receivers given by coordinates
  /// and node_hash values.
  void rx_power_row(NodeId tx, double tx_x, double tx_y, const double* xs, const double* ys,
                    const std::uint32_t* hashes, std::size_t n, double* out) const;
  /// Per-node key of the shadowing lookup.
  [[nodiscard]] std::uint32_t node_hash(NodeId id) const {
    return static_cast<std::uint32_t>(mix64(shadow_seed_ ^ id) >> 32);
  }
  [[nodiscard]] double sinr_threshold_db(int mcs) const { return mcs_.sinr_threshold(mcs); }
  [[nodiscard]] double noise_mw() const { return noise_mw_; }
  [[nodiscard]] bool lossless() const { return lossless_; }
  [[nodiscard]] int subchannels() const { return subchannels_; }

 private:
  // Symmetric in (a, b): the link draws a table entry by its two node keys.
  [[nodiscard]] std::size_t a_b_index(NodeId a, NodeId b) const {
    return (node_hash(a) + node_hash(b)) & kShadowMask;
  }
  [[nodiscard]] double shadow_linear(std::size_t index) const { return shadow_linear_[index]; }
  [[nodiscard]] double path_gain(double distance_m) const {
    const double f = distance_m * kInvTableStepM;
    const auto i = static_cast<std::size_t>(f);
    if (i + 1 >= gain_table_.size()) return path_gain_exact(distance_m);
    const double t = f - static_cast<double>(i);
    return gain_table_[i] + t * (gain_table_[i + 1] - gain_table_[i]);
  }
  [[nodiscard]] double path_gain_exact(double distance_m) const;

  static constexpr int kShadowBits = 12;
  static constexpr std::uint32_t kShadowMask = (1u << kShadowBits) - 1;
  static constexpr double kTableStepM = 0.1;
  static constexpr double kInvTableStepM = 10.0;

  PathlossParams params_;
  McsTable mcs_;
  double tx_power_mw_;
  double noise_mw_;
  bool lossless_;
  int subchannels_;
  std::uint64_t shadow_seed_;
  std::vector<double> shadow_db_;
  std::vector<double> shadow_linear_;
  std::vector<double> gain_table_;
};

/// Active nodes of one subframe, structure-of-arrays, ids ascending.
struct NodePositions {
  std::vector<NodeId> ids;
  std::vector<double> x;
  std::vector<double> y;

  void clear() {
    ids.clear();
    x.clear();
    y.clear();
  }
  void push(NodeId id, double px, double py) {
    ids.push_back(id);
    x.push_back(px);
    y.push_back(py);
  }
  [[nodiscard]] std::size_t size() const { return ids.size(); }
  /// Index of `id`, or size() when absent.
  [[nodiscard]] std::size_t index_of(NodeId id) const;
};

/// Evaluates one subframe. Each attempt's received power is spread evenly
/// over its subchannels; the SINR of attempt a at receiver r is its
/// per-subchannel power over noise plus the mean (over a's subchannels) of
/// the per-subchannel power of every other overlapping attempt. A node that
/// transmits in the subframe receives nothing.
class SubframeResolver {
 public:
  explicit SubframeResolver(const PhyModel& model);

  void resolve(const NodePositions& nodes, std::span<const TransmissionAttempt> attempts);

  [[nodiscard]] std::size_t node_count() const { return n_; }
  [[nodiscard]] std::size_t attempt_count() const { return attempts_.size(); }
  [[nodiscard]] const TransmissionAttempt& attempt(std::size_t a) const { return attempts_[a]; }
  /// Index (into the node list) of the transmitter of attempt a.
  [[nodiscard]] std::size_t tx_index(std::size_t a) const { return tx_index_[a]; }
  [[nodiscard]] bool transmitting(std::size_t r) const { return transmitting_[r] != 0; }
  [[nodiscard]] double rx_mw(std::size_t r, std::size_t a) const {
    return power_[a * n_ + r];
  }
  /// Noise plus everything received on subchannel c.
  [[nodiscard]] double rssi_mw(std::size_t r, int c) const { return noise_mw_ + load_[c * n_ + r]; }
  [[nodiscard]] double sinr_linear(std::size_t r, std::size_t a) const {
    const auto& att = attempts_[a];
    const double own = rx_mw(r, a) * spread_[a];
    double interference = 0.0;
    for (int c = att.first_subchannel; c < att.first_subchannel + att.subchannel_count; ++c) {
      const double other = load_[static_cast<std::size_t>(c) * n_ + r] - own;
      interference += other > 0.0 ? other : 0.0;
    }
    interference /= att.subchannel_count;
    return own / (noise_mw_ + interference);
  }
  [[nodiscard]] double sinr_db(std::size_t r, std::size_t a) const { return mw_to_dbm(sinr_linear(r, a)); }
  [[nodiscard]] bool decodes(std::size_t r, std::size_t a) const {
    if (transmitting_[r] != 0 || r == tx_index_[a]) return false;
    if (lossless_) return true;
    return sinr_linear(r, a) >= thresholds_linear_[a];
  }
  [[nodiscard]] ReceptionOutcome outcome(std::size_t r, std::size_t a) const;

 private:
  const PhyModel& model_;
  double noise_mw_;
  int subchannels_;
  bool lossless_;
  std::size_t n_ = 0;
  const NodePositions* nodes_ = nullptr;
  std::vector<TransmissionAttempt> attempts_;
  std::vector<std::uint32_t> hashes_;
  std::vector<std::size_t> tx_index_;
  std::vector<double> thresholds_db_;
  std::vector<double> thresholds_linear_;
  std::vector<std::uint8_t> transmitting_;
  std::vector<double> spread_;  // 1 / subchannel_count per attempt
  std::vector<double> power_;  // [attempt][node], 0 at the transmitter
  std::vector<double> load_;   // [subchannel][node], per-subchannel received power
};

/// Every (receiver, attempt) outcome of one subframe. Attempts must share a
/// subframe; receivers are all listed nodes except each attempt's transmitter.
std::vector<ReceptionOutcome> resolve_subframe(std::span<const TransmissionAttempt> attempts,
                                               const NodePositions& nodes, const PhyModel& model);

}  // namespace cv2x
