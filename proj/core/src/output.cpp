#include "cv2x/output.hpp"

#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "json.hpp"

namespace cv2x {

namespace {

using nlohmann::ordered_json;

ordered_json summary_block(const Summary& s) {
  ordered_json j;
  j["count"] = s.count;
  j["mean"] = s.mean;
  j["var"] = s.variance;
  j["min"] = s.min;
  j["max"] = s.max;
  for (std::size_t i = 0; i < kSummaryPercentiles.size(); ++i) {
    j[fmt::format("p{}", static_cast<int>(kSummaryPercentiles[i]))] = s.percentiles[i];
  }
  return j;
}

std::string opt(const std::optional<Subframe>& v) { return v ? std::to_string(*v) : std::string(); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

std::string summary_json(const RunResult& result) {
  const auto& m = result.metrics;
  ordered_json j;
  j["config_hash"] = config_hash(result.config);
  j["seed"] = result.config.rng_seed;
  j["flow_rate_vps"] = result.config.flow_rate_vps;
  j["batchsize"] = result.config.batchsize;
  j["vehicles"] = m.vehicles;
  j["crossings"] = result.crossings.size();
  j["sams_sent"] = m.sams_sent;
  j["sums_generated"] = m.sums_sent;
  j["acks_formed"] = m.acks_formed;
  j["bsms_generated"] = m.bsms_generated;
  j["attempts_on_air"] = m.attempts_on_air;
  j["completed"] = m.sct.records.size();
  j["censored"] = m.sct.censored;
  j["ineligible"] = m.sct.ineligible;

  std::vector<double> sct;
  sct.reserve(m.sct.records.size());
  for (const auto& r : m.sct.records) sct.push_back(static_cast<double>(r.sct_ms));
  j["sct_ms"] = summary_block(summarize(sct));

  ordered_json hist = ordered_json::object();
  for (const auto& [attempts, pct] : m.attempts) hist[std::to_string(attempts)] = pct;
  j["attempt_percent"] = hist;

  j["per"] = {{"expected", m.per.total.expected},
              {"decoded", m.per.total.decoded},
              {"per_percent", m.per.total.per_percent()}};
  j["cbr_percent"] = summary_block(summarize(m.cbr_samples));
  j["itt_ms"] = summary_block(summarize(m.itt_samples));
  j["audit"] = {{"half_duplex_violations", m.half_duplex_violations},
                {"causality_violations", m.causality_violations}};
  return j.dump(2) + "\n";
}

void write_run_outputs(const std::filesystem::path& dir, const RunResult& result) {
  std::filesystem::create_directories(dir);
  const auto& m = result.metrics;

  write_file(dir / "effective_config.txt", serialize(result.config));
  write_file(dir / "summary.json", summary_json(result));

  std::string text = "vehicle_id,cross_ms,first_sum_ms,attempts,complete_ms,sct_ms,status\n";
  for (const auto& r : m.service_log) {
    const std::string sct =
        r.status == "complete" && r.first_sum_ms && r.complete_ms ? std::to_string(*r.complete_ms - *r.first_sum_ms)
                                                                   : std::string();
    text += fmt::format("{},{},{},{},{},{},{}\n", r.vehicle_id, opt(r.cross_ms), opt(r.first_sum_ms), r.attempts,
                        opt(r.complete_ms), sct, r.status);
  }
  write_file(dir / "service_log.csv", text);

  text = "vehicle_id,first_sum_ms,sct_ms,attempts,batch_id,completion_event\n";
  for (const auto& r : m.sct.records) {
    text += fmt::format("{},{},{},{},{},{}\n", r.vehicle_id, r.first_sum_ms, r.sct_ms, r.attempts, r.batch_id,
                        r.completion_event);
  }
  write_file(dir / "sct.csv", text);

  text = "attempts,percent\n";
  for (const auto& [attempts, pct] : m.attempts) text += fmt::format("{},{}\n", attempts, pct);
  write_file(dir / "attempts.csv", text);

  text = "bin_start_m,bin_end_m,expected,decoded,per_percent\n";
  for (std::size_t i = 0; i < m.per.bins.size(); ++i) {
    const auto& b = m.per.bins[i];
    text += fmt::format("{},{},{},{},{}\n", static_cast<double>(i) * m.per.bin_m,
                        static_cast<double>(i + 1) * m.per.bin_m, b.expected, b.decoded, b.per_percent());
  }
  text += fmt::format("all,,{},{},{}\n", m.per.total.expected, m.per.total.decoded, m.per.total.per_percent());
  write_file(dir / "per.csv", text);

  text = "window_start_ms,samples,mean,var\n";
  for (const auto& b : m.cbr_buckets) {
    text += fmt::format("{},{},{},{}\n", b.window_start_ms, b.stats.count(), b.stats.mean(), b.stats.variance());
  }
  write_file(dir / "cbr.csv", text);

  text = "node,count,mean,min,max\n";
  for (const auto& n : m.itt_nodes) {
    text += fmt::format("{},{},{},{},{}\n", n.node, n.stats.count(), n.stats.mean(), n.stats.min(), n.stats.max());
  }
  write_file(dir / "itt.csv", text);

  text = "vehicle_id,cross_time_ms,lane,direction\n";
  for (const auto& c : result.crossings) {
    text += fmt::format("{},{},{},{}\n", c.vehicle_id, c.cross_time_ms, c.lane, c.direction);
  }
  write_file(dir / "crossings.csv", text);
}

}  // namespace cv2x
