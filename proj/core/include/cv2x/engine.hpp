#pragma once

#include <memory>
#include <optional>
#include <ostream>
#include <unordered_map>
#include <vector>

#include "cv2x/config.hpp"
#include "cv2x/congestion.hpp"
#include "cv2x/mac.hpp"
#include "cv2x/metrics.hpp"
#include "cv2x/mobility.hpp"
#include "cv2x/phy.hpp"
#include "cv2x/rng.hpp"
#include "cv2x/service.hpp"

namespace cv2x {

struct RunOptions {
  /// `subframe,tx,rx,packet_kind,success,cause,rx_dbm` rows for every link
  /// received at or above the noise floor.
  std::ostream* reception_trace = nullptr;
  /// `node,subframe,cbr_percent` rows at every rate-control sample.
  std::ostream* cbr_trace = nullptr;
  bool keep_tx_log = false;
  bool keep_bsm_trace = false;
};

/// One over-the-air attempt.
struct TxRecord {
  Subframe subframe = 0;
  NodeId tx = 0;
  PacketKind kind = PacketKind::Bsm;
  std::uint64_t packet_id = 0;
  Subframe created_ms = 0;
  bool harq_copy = false;
  int first_subchannel = 0;
  int subchannel_count = 0;
  int sum_attempt_no = 0;
  std::vector<NodeId> ack_members;
};

struct RunResult {
  ScenarioConfig config;
  MetricsBundle metrics;
  std::vector<CrossingRecord> crossings;
  std::vector<TxRecord> tx_log;
  std::vector<BsmReception> bsm_trace;
};

/// Subframe loop: mobility, application timers, MAC grants, PHY, delivery to
/// the state machines, sensing and metrics, in that order.
class Engine {
 public:
  /// Random traffic drawn from the mobility substream of config.rng_seed.
  explicit Engine(const ScenarioConfig& config, RunOptions options = {});
  /// Caller-built traffic (e.g. hand-placed vehicles with arrivals stopped).
  Engine(const ScenarioConfig& config, TrafficState traffic, RunOptions options = {});
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  /// Executes subframe now() and advances the clock by one.
  void step();
  /// Steps until sim_duration_ms subframes have run, then finish().
  RunResult run();
  /// Censors outstanding requests and assembles the result.
  RunResult finish();

  [[nodiscard]] Subframe now() const { return now_; }
  [[nodiscard]] const TrafficState& traffic() const { return traffic_; }
  [[nodiscard]] const RsuServiceState& rsu() const { return rsu_; }
  [[nodiscard]] const VueServiceState& vue(NodeId id) const;
  [[nodiscard]] const MacEntity& mac(NodeId id) const;

 private:
  struct NodeState {
    NodeId id = 0;
    bool active = false;
    std::optional<MacEntity> mac;
    VueServiceState vue;
    RateControlState rate;
    Subframe spawn_ms = 0;
    Subframe next_bsm_ms = 0;
    Subframe next_cbr_ms = 0;
    std::optional<Subframe> last_bsm_ms;
    RunningStats itt;
  };
  /// In-vicinity receivers of one BSM, open until every copy has been sent.
  struct PerEntry {
    int copies_total = 1;
    int copies_seen = 0;
    std::vector<BsmReception> pairs;
  };

  void init();
  void spawn(NodeId id);
  void retire(NodeId id);
  void run_timers();
  void deliver(const std::vector<TransmissionAttempt>& attempts);
  void track_bsm(std::size_t a, const TransmissionAttempt& attempt);
  void close_per(PerEntry& entry);
  bool received(std::size_t r, std::size_t a);
  void record_sensing(bool any_attempts);
  void record_reservations(const std::vector<TransmissionAttempt>& attempts);
  void build_positions();
  [[nodiscard]] std::size_t slot(NodeId id) const { return id < slot_of_.size() ? slot_of_[id] : kNoSlot; }

  static constexpr std::size_t kNoSlot = static_cast<std::size_t>(-1);

  ScenarioConfig config_;
  RunOptions options_;
  RngStreams rngs_;
  TrafficState traffic_;
  PhyModel phy_;
  SubframeResolver resolver_;
  MacParams mac_params_;
  PacketFactory packets_;
  Subframe now_ = 0;
  bool finished_ = false;

  std::vector<std::unique_ptr<NodeState>> nodes_;  // indexed by NodeId
  std::vector<NodeId> active_;  // ascending, RSU first
  NodePositions positions_;
  std::vector<std::size_t> slot_of_;  // NodeId -> index in positions_, or npos
  std::vector<NodeId> by_x_;          // active vehicles ordered by position
  std::vector<double> sorted_x_;
  RsuServiceState rsu_;
  std::unordered_map<std::uint64_t, PerEntry> per_open_;

  MetricsBundle metrics_;
  std::vector<TxRecord> tx_log_;
  std::vector<BsmReception> bsm_trace_;
  std::vector<std::uint8_t> transmitted_;  // by position index, this subframe
  std::vector<double> cells_;
  std::vector<double> noise_cells_;
  std::vector<RunningStats> cbr_buckets_;
};

/// Runs one scenario with the given seed.
RunResult run_scenario(ScenarioConfig config, std::uint64_t seed, const RunOptions& options = {});

}  // namespace cv2x
