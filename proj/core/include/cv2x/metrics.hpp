#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cv2x/types.hpp"

namespace cv2x {

/// One row of the per-vehicle service log.
struct ServiceRecord {
  NodeId vehicle_id = 0;
  std::optional<Subframe> cross_ms;
  std::optional<Subframe> first_sum_ms;
  std::optional<Subframe> first_sum_tx_ms;
  int attempts = 0;
  std::optional<Subframe> complete_ms;
  std::string status;  ///< complete | censored | ineligible | idle
  std::optional<std::uint64_t> completion_event;
  std::uint64_t batch_id = 0;
};

struct SctRecord {
  NodeId vehicle_id = 0;
  Subframe first_sum_ms = 0;
  Subframe sct_ms = 0;
  int attempts = 0;
  std::uint64_t batch_id = 0;
  std::uint64_t completion_event = 0;
};

struct SctDistribution {
  std::vector<SctRecord> records;  ///< completed vehicles, vehicle id order
  std::size_t censored = 0;
  std::size_t ineligible = 0;
};

/// sct = complete - first SUM for every completed vehicle; censored vehicles
/// are counted, not included.
SctDistribution compute_sct(const std::vector<ServiceRecord>& log);

/// attempts -> percent of completed vehicles. Empty when nothing completed.
std::map<int, double> attempt_histogram(const std::vector<ServiceRecord>& log);

/// One BSM (transmitter, receiver) pair inside the vicinity.
struct BsmReception {
  std::uint64_t packet_id = 0;
  NodeId tx = 0;
  NodeId rx = 0;
  double distance_m = 0.0;  ///< at the first copy
  bool decoded = false;     ///< any copy decoded
};

struct PerCounter {
  std::uint64_t expected = 0;
  std::uint64_t decoded = 0;

  [[nodiscard]] double per_percent() const {
    return expected == 0 ? 0.0 : 100.0 * (1.0 - static_cast<double>(decoded) / static_cast<double>(expected));
  }
};

struct PerResult {
  PerCounter total;
  double bin_m = 50.0;
  std::vector<PerCounter> bins;  ///< bins[i] covers [i * bin_m, (i + 1) * bin_m)
};

/// Accumulates a reception record (pairs beyond the vicinity are ignored).
void add_reception(PerResult& per, const BsmReception& r, double vicinity_m);

/// PER over BSM pairs no farther apart than vicinity_m. Records of the same
/// (packet, receiver) are merged: decoded if any copy decoded.
PerResult compute_per(const std::vector<BsmReception>& trace, double vicinity_m, double bin_m = 50.0);

/// Welford accumulator.
class RunningStats {
 public:
  void add(double x);
  [[nodiscard]] std::uint64_t count() const { return n_; }
  [[nodiscard]] double mean() const { return mean_; }
  /// Population variance; 0 for fewer than two samples.
  [[nodiscard]] double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_) : 0.0; }
  [[nodiscard]] double min() const { return min_; }
  [[nodiscard]] double max() const { return max_; }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double min_ = 0.0;
  double max_ = 0.0;
};

inline constexpr std::array<double, 5> kSummaryPercentiles{50.0, 80.0, 90.0, 95.0, 99.0};

/// Nearest-rank percentile of an unsorted sample; nullopt when empty.
std::optional<double> percentile(std::vector<double> values, double p);

struct Summary {
  std::uint64_t count = 0;
  double mean = 0.0;
  double variance = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::array<double, 5> percentiles{};  ///< kSummaryPercentiles order
};

/// Empty input gives count 0 and zeros elsewhere.
Summary summarize(const std::vector<double>& values);

struct CbrBucket {
  Subframe window_start_ms = 0;
  RunningStats stats;
};

struct IttNodeStats {
  NodeId node = 0;
  RunningStats stats;
};

/// Everything a run produces besides the raw traces.
struct MetricsBundle {
  std::vector<ServiceRecord> service_log;
  SctDistribution sct;
  std::map<int, double> attempts;
  PerResult per;
  std::vector<double> cbr_samples;
  std::vector<CbrBucket> cbr_buckets;
  std::vector<double> itt_samples;
  std::vector<IttNodeStats> itt_nodes;

  std::uint64_t vehicles = 0;
  std::uint64_t sums_sent = 0;
  std::uint64_t acks_formed = 0;
  std::uint64_t sams_sent = 0;
  std::uint64_t bsms_generated = 0;
  std::uint64_t attempts_on_air = 0;
  std::uint64_t half_duplex_violations = 0;
  std::uint64_t causality_violations = 0;
};

/// SCT, attempt histogram and ordering fields derived from service_log.
void finalize(MetricsBundle& bundle);

}  // namespace cv2x
