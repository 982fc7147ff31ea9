#include "cv2x/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace cv2x {

SctDistribution compute_sct(const std::vector<ServiceRecord>& log) {
  SctDistribution out;
  for (const auto& r : log) {
    if (r.status == "censored") {
      ++out.censored;
      continue;
    }
    if (r.status == "ineligible") ++out.ineligible;
    if (r.status != "complete" || !r.complete_ms || !r.first_sum_ms) continue;
    out.records.push_back({r.vehicle_id, *r.first_sum_ms, *r.complete_ms - *r.first_sum_ms, r.attempts, r.batch_id,
                           r.completion_event.value_or(0)});
  }
  std::sort(out.records.begin(), out.records.end(),
            [](const SctRecord& a, const SctRecord& b) { return a.vehicle_id < b.vehicle_id; });
  return out;
}

std::map<int, double> attempt_histogram(const std::vector<ServiceRecord>& log) {
  std::map<int, std::uint64_t> counts;
  std::uint64_t total = 0;
  for (const auto& r : log) {
    if (r.status != "complete") continue;
    ++counts[r.attempts];
    ++total;
  }
  std::map<int, double> out;
  for (const auto& [attempts, n] : counts) out[attempts] = 100.0 * static_cast<double>(n) / static_cast<double>(total);
  return out;
}

void add_reception(PerResult& per, const BsmReception& r, double vicinity_m) {
  if (r.distance_m > vicinity_m) return;
  const auto bin = static_cast<std::size_t>(r.distance_m / per.bin_m);
  if (per.bins.size() <= bin) per.bins.resize(bin + 1);
  ++per.total.expected;
  ++per.bins[bin].expected;
  if (r.decoded) {
    ++per.total.decoded;
    ++per.bins[bin].decoded;
  }
}

PerResult compute_per(const std::vector<BsmReception>& trace, double vicinity_m, double bin_m) {
  struct Key {
    std::uint64_t packet;
    NodeId rx;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const { return std::hash<std::uint64_t>()(k.packet * 1000003ULL ^ k.rx); }
  };
  std::unordered_map<Key, std::size_t, KeyHash> index;
  std::vector<BsmReception> merged;
  for (const auto& r : trace) {
    const auto [it, fresh] = index.try_emplace(Key{r.packet_id, r.rx}, merged.size());
    if (fresh) {
      merged.push_back(r);
    } else {
      merged[it->second].decoded = merged[it->second].decoded || r.decoded;
    }
  }
  PerResult out;
  out.bin_m = bin_m;
  for (const auto& r : merged) add_reception(out, r, vicinity_m);
  return out;
}

void RunningStats::add(double x) {
  ++n_;
  if (n_ == 1) {
    min_ = max_ = x;
  } else {
    min_ = std::min(min_, x);
    max_ = std::max(max_, x);
  }
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

std::optional<double> percentile(std::vector<double> values, double p) {
  if (values.empty()) return std::nullopt;
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) / 100.0));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1), values.end());
  return values[rank - 1];
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  RunningStats stats;
  for (double v : values) stats.add(v);
  s.count = stats.count();
  s.mean = stats.mean();
  s.variance = stats.variance();
  s.min = stats.min();
  s.max = stats.max();
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < kSummaryPercentiles.size(); ++i) {
    auto rank = static_cast<std::size_t>(std::ceil(kSummaryPercentiles[i] * static_cast<double>(sorted.size()) / 100.0));
    s.percentiles[i] = sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
  }
  return s;
}

void finalize(MetricsBundle& bundle) {
  bundle.sct = compute_sct(bundle.service_log);
  bundle.attempts = attempt_histogram(bundle.service_log);
}

}  // namespace cv2x
