#include "cv2x/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace cv2x {

int ScenarioConfig::footprint(PacketKind kind) const {
  switch (kind) {
    case PacketKind::Bsm: return footprint_bsm;
    case PacketKind::Sam: return footprint_sam;
    case PacketKind::Sum: return footprint_sum;
    case PacketKind::Ack: return footprint_ack;
  }
  return 1;
}

int ScenarioConfig::mcs(PacketKind kind) const {
  switch (kind) {
    case PacketKind::Bsm: return bsm_mcs;
    case PacketKind::Sam: return sam_mcs;
    case PacketKind::Sum: return sum_mcs;
    case PacketKind::Ack: return ack_mcs;
  }
  return 0;
}

int ScenarioConfig::payload(PacketKind kind) const {
  switch (kind) {
    case PacketKind::Bsm: return bsm_payload_b;
    case PacketKind::Sam: return sam_payload_b;
    case PacketKind::Sum: return sum_payload_b;
    case PacketKind::Ack: return ack_payload_b;
  }
  return 0;
}

int ScenarioConfig::priority(PacketKind kind) const {
  return kind == PacketKind::Bsm ? bsm_priority : service_priority;
}

ScenarioConfig default_scenario() { return ScenarioConfig{}; }

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct TypeMismatch {
  std::string expected;
};

template <typename T>
T parse_number(std::string_view text, const char* expected) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) throw TypeMismatch{expected};
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw TypeMismatch{expected};
  }
  return value;
}

double parse_double(std::string_view t) { return parse_number<double>(t, "number"); }
std::int64_t parse_int(std::string_view t) { return parse_number<std::int64_t>(t, "integer"); }

int parse_int32(std::string_view t) {
  const auto v = parse_int(t);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw TypeMismatch{"32-bit integer"};
  }
  return static_cast<int>(v);
}

bool parse_bool(std::string_view t) {
  if (t == "true" || t == "1" || t == "on" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "off" || t == "no") return false;
  throw TypeMismatch{"boolean"};
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }
std::string fmt_double(double d) { return fmt::format("{}", d); }

std::vector<std::pair<double, double>> parse_pairs(std::string_view t) {
  std::vector<std::pair<double, double>> out;
  if (t.empty()) return out;
  for (auto item : split(t, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 2) throw TypeMismatch{"list of a:b pairs"};
    out.emplace_back(parse_number<double>(parts[0], "list of a:b pairs"),
                     parse_number<double>(parts[1], "list of a:b pairs"));
  }
  return out;
}

struct Field {
  std::string name;
  std::function<std::string(const ScenarioConfig&)> get;
  std::function<void(ScenarioConfig&, std::string_view)> set;
};

template <typename M>
Field num_field(std::string name, M ScenarioConfig::*member) {
  using T = std::remove_reference_t<decltype(std::declval<ScenarioConfig>().*member)>;
  return Field{
      std::move(name),
      [member](const ScenarioConfig& c) {
        if constexpr (std::is_same_v<T, bool>) return fmt_bool(c.*member);
        else if constexpr (std::is_floating_point_v<T>) return fmt_double(c.*member);
        else return fmt::format("{}", c.*member);
      },
      [member](ScenarioConfig& c, std::string_view v) {
        if constexpr (std::is_same_v<T, bool>) c.*member = parse_bool(v);
        else if constexpr (std::is_floating_point_v<T>) c.*member = parse_double(v);
        else if constexpr (std::is_same_v<T, int>) c.*member = parse_int32(v);
        else if constexpr (std::is_same_v<T, std::uint64_t>) c.*member = parse_number<std::uint64_t>(v, "unsigned integer");
        else c.*member = parse_int(v);
      }};
}

Field pathloss_field(std::string name, double PathlossParams::*member) {
  return Field{std::move(name),
               [member](const ScenarioConfig& c) { return fmt_double(c.pathloss.*member); },
               [member](ScenarioConfig& c, std::string_view v) { c.pathloss.*member = parse_double(v); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(num_field("road_length_m", &ScenarioConfig::road_length_m));
    f.push_back(num_field("lane_count", &ScenarioConfig::lane_count));
    f.push_back(num_field("lane_width_m", &ScenarioConfig::lane_width_m));
    f.push_back(num_field("rsu_position_m", &ScenarioConfig::rsu_position_m));
    f.push_back(num_field("flow_rate_vps", &ScenarioConfig::flow_rate_vps));
    f.push_back(num_field("speed_min_mps", &ScenarioConfig::speed_min_mps));
    f.push_back(num_field("speed_max_mps", &ScenarioConfig::speed_max_mps));
    f.push_back(num_field("sim_duration_ms", &ScenarioConfig::sim_duration_ms));
    f.push_back(num_field("carrier_freq_ghz", &ScenarioConfig::carrier_freq_ghz));
    f.push_back(num_field("bandwidth_mhz", &ScenarioConfig::bandwidth_mhz));
    f.push_back(num_field("subchannels_per_subframe", &ScenarioConfig::subchannels_per_subframe));
    f.push_back(pathloss_field("pathloss_reference_db", &PathlossParams::reference_loss_db));
    f.push_back(pathloss_field("pathloss_exponent", &PathlossParams::exponent));
    f.push_back(pathloss_field("shadowing_sigma_db", &PathlossParams::shadowing_sigma_db));
    f.push_back(pathloss_field("tx_power_dbm", &PathlossParams::tx_power_dbm));
    f.push_back(pathloss_field("noise_floor_dbm", &PathlossParams::noise_floor_dbm));
    f.push_back(Field{"mcs_sinr_table",
                      [](const ScenarioConfig& c) {
                        std::string out;
                        for (const auto& e : c.mcs_table) {
                          if (!out.empty()) out += ',';
                          out += fmt::format("{}:{}", e.mcs, e.sinr_threshold_db);
                        }
                        return out;
                      },
                      [](ScenarioConfig& c, std::string_view v) {
                        std::vector<McsEntry> table;
                        for (auto [m, t] : parse_pairs(v)) {
                          if (m != std::floor(m)) throw TypeMismatch{"list of mcs:threshold pairs"};
                          table.push_back({static_cast<int>(m), t});
                        }
                        c.mcs_table = std::move(table);
                      }});
    f.push_back(num_field("lossless_channel", &ScenarioConfig::lossless_channel));
    f.push_back(num_field("bsm_payload_b", &ScenarioConfig::bsm_payload_b));
    f.push_back(num_field("bsm_mcs", &ScenarioConfig::bsm_mcs));
    f.push_back(num_field("sam_payload_b", &ScenarioConfig::sam_payload_b));
    f.push_back(num_field("sam_mcs", &ScenarioConfig::sam_mcs));
    f.push_back(num_field("sum_payload_b", &ScenarioConfig::sum_payload_b));
    f.push_back(num_field("sum_mcs", &ScenarioConfig::sum_mcs));
    f.push_back(num_field("ack_payload_b", &ScenarioConfig::ack_payload_b));
    f.push_back(num_field("ack_mcs", &ScenarioConfig::ack_mcs));
    f.push_back(num_field("footprint_bsm", &ScenarioConfig::footprint_bsm));
    f.push_back(num_field("footprint_sam", &ScenarioConfig::footprint_sam));
    f.push_back(num_field("footprint_sum", &ScenarioConfig::footprint_sum));
    f.push_back(num_field("footprint_ack", &ScenarioConfig::footprint_ack));
    f.push_back(num_field("bsm_priority", &ScenarioConfig::bsm_priority));
    f.push_back(num_field("service_priority", &ScenarioConfig::service_priority));
    f.push_back(num_field("sam_period_ms", &ScenarioConfig::sam_period_ms));
    f.push_back(num_field("trigger_distance_m", &ScenarioConfig::trigger_distance_m));
    f.push_back(num_field("sum_repeat_ms", &ScenarioConfig::sum_repeat_ms));
    f.push_back(num_field("ack_interval_ms", &ScenarioConfig::ack_interval_ms));
    f.push_back(num_field("batchsize", &ScenarioConfig::batchsize));
    f.push_back(Field{"ack_dispatch",
                      [](const ScenarioConfig& c) {
                        return std::string(c.ack_dispatch == AckDispatch::Immediate ? "immediate" : "interval");
                      },
                      [](ScenarioConfig& c, std::string_view v) {
                        if (v == "immediate") c.ack_dispatch = AckDispatch::Immediate;
                        else if (v == "interval") c.ack_dispatch = AckDispatch::Interval;
                        else throw TypeMismatch{"one of immediate|interval"};
                      }});
    f.push_back(Field{"ack_policy",
                      [](const ScenarioConfig& c) {
                        return std::string(c.ack_policy == AckPolicy::MultiBatch ? "multi_batch" : "single_batch");
                      },
                      [](ScenarioConfig& c, std::string_view v) {
                        if (v == "multi_batch") c.ack_policy = AckPolicy::MultiBatch;
                        else if (v == "single_batch") c.ack_policy = AckPolicy::SingleBatch;
                        else throw TypeMismatch{"one of multi_batch|single_batch"};
                      }});
    f.push_back(num_field("cbr_threshold_dbm", &ScenarioConfig::cbr_threshold_dbm));
    f.push_back(num_field("harq_enabled", &ScenarioConfig::harq_enabled));
    f.push_back(num_field("harq_window_ms", &ScenarioConfig::harq_window_ms));
    f.push_back(num_field("one_shot_bsm", &ScenarioConfig::one_shot_bsm));
    f.push_back(num_field("sps_window_min_ms", &ScenarioConfig::sps_window_min_ms));
    f.push_back(num_field("sps_window_max_ms", &ScenarioConfig::sps_window_max_ms));
    f.push_back(num_field("sps_exclusion_start_dbm", &ScenarioConfig::sps_exclusion_start_dbm));
    f.push_back(num_field("sps_exclusion_step_db", &ScenarioConfig::sps_exclusion_step_db));
    f.push_back(num_field("sps_shortlist_fraction", &ScenarioConfig::sps_shortlist_fraction));
    f.push_back(num_field("sps_counter_min", &ScenarioConfig::sps_counter_min));
    f.push_back(num_field("sps_counter_max", &ScenarioConfig::sps_counter_max));
    f.push_back(num_field("sps_keep_probability", &ScenarioConfig::sps_keep_probability));
    f.push_back(num_field("sps_period_ms", &ScenarioConfig::sps_period_ms));
    f.push_back(num_field("forced_grant_delay_ms", &ScenarioConfig::forced_grant_delay_ms));
    f.push_back(num_field("bsm_enabled", &ScenarioConfig::bsm_enabled));
    f.push_back(num_field("rate_control_enabled", &ScenarioConfig::rate_control_enabled));
    f.push_back(Field{"bsm_itt_bounds_ms",
                      [](const ScenarioConfig& c) {
                        return fmt::format("{},{}", c.bsm_itt_bounds_ms[0], c.bsm_itt_bounds_ms[1]);
                      },
                      [](ScenarioConfig& c, std::string_view v) {
                        const auto parts = split(v, ',');
                        if (parts.size() != 2) throw TypeMismatch{"two integers lo,hi"};
                        c.bsm_itt_bounds_ms = {parse_int(parts[0]), parse_int(parts[1])};
                      }});
    f.push_back(num_field("cbr_smoothing_weight", &ScenarioConfig::cbr_smoothing_weight));
    f.push_back(num_field("cbr_sample_period_ms", &ScenarioConfig::cbr_sample_period_ms));
    f.push_back(Field{"itt_map_anchors",
                      [](const ScenarioConfig& c) {
                        std::string out;
                        for (const auto& a : c.itt_map_anchors) {
                          if (!out.empty()) out += ',';
                          out += fmt::format("{}:{}", a.cbr_percent, a.itt_ms);
                        }
                        return out;
                      },
                      [](ScenarioConfig& c, std::string_view v) {
                        std::vector<IttAnchor> anchors;
                        for (auto [cbr, itt] : parse_pairs(v)) anchors.push_back({cbr, itt});
                        c.itt_map_anchors = std::move(anchors);
                      }});
    f.push_back(num_field("per_vicinity_m", &ScenarioConfig::per_vicinity_m));
    f.push_back(num_field("rng_seed", &ScenarioConfig::rng_seed));
    return f;
  }();
  return table;
}

const Field* find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (f.name == key) return &f;
  }
  return nullptr;
}

}  // namespace

std::vector<std::string> validate(const ScenarioConfig& c) {
  std::vector<std::string> errors;
  auto require = [&errors](bool ok, std::string message) {
    if (!ok) errors.push_back(std::move(message));
  };

  require(c.road_length_m > 0, "road_length_m must be > 0");
  require(c.lane_count > 0, "lane_count must be > 0");
  require(c.lane_width_m > 0, "lane_width_m must be > 0");
  require(c.rsu_position_m >= 0 && c.rsu_position_m <= c.road_length_m,
          fmt::format("rsu_position_m must lie in [0, road_length_m={}]", c.road_length_m));
  require(c.flow_rate_vps >= 0, "flow_rate_vps must be >= 0");
  require(c.speed_min_mps > 0 && c.speed_min_mps <= c.speed_max_mps,
          "speeds must satisfy 0 < speed_min_mps <= speed_max_mps");
  require(c.sim_duration_ms > 0, "sim_duration_ms must be > 0");
  require(c.carrier_freq_ghz > 0, "carrier_freq_ghz must be > 0");
  require(c.bandwidth_mhz > 0, "bandwidth_mhz must be > 0");
  require(c.subchannels_per_subframe > 0, "subchannels_per_subframe must be > 0");

  require(c.pathloss.exponent >= 1.5 && c.pathloss.exponent <= 4.5, "pathloss_exponent must lie in [1.5, 4.5]");
  require(c.pathloss.shadowing_sigma_db >= 0, "shadowing_sigma_db must be >= 0");

  require(!c.mcs_table.empty(), "mcs_sinr_table must not be empty");
  for (std::size_t i = 1; i < c.mcs_table.size(); ++i) {
    require(c.mcs_table[i - 1].mcs < c.mcs_table[i].mcs, "mcs_sinr_table must be sorted by strictly increasing MCS");
    require(c.mcs_table[i - 1].sinr_threshold_db <= c.mcs_table[i].sinr_threshold_db,
            "mcs_sinr_table thresholds must be non-decreasing in MCS");
  }
  auto has_mcs = [&c](int m) {
    return std::any_of(c.mcs_table.begin(), c.mcs_table.end(), [m](const McsEntry& e) { return e.mcs == m; });
  };
  for (auto kind : {PacketKind::Bsm, PacketKind::Sam, PacketKind::Sum, PacketKind::Ack}) {
    const std::string name{to_string(kind)};
    require(c.payload(kind) > 0, fmt::format("{} payload must be > 0", name));
    require(has_mcs(c.mcs(kind)), fmt::format("{} MCS {} missing from mcs_sinr_table", name, c.mcs(kind)));
    require(c.footprint(kind) > 0 && c.footprint(kind) <= c.subchannels_per_subframe,
            fmt::format("{} footprint must lie in [1, subchannels_per_subframe]", name));
  }
  require(c.bsm_priority > 0 && c.service_priority > 0, "priorities must be > 0");

  require(c.sam_period_ms > 0, "sam_period_ms must be > 0");
  require(c.trigger_distance_m >= 0, "trigger_distance_m must be >= 0");
  require(c.sum_repeat_ms > 0, "sum_repeat_ms must be > 0");
  require(c.ack_interval_ms > 0, "ack_interval_ms must be > 0");
  require(c.batchsize >= 1, "batchsize >= 1");

  require(c.harq_window_ms > 0, "harq_window_ms must be > 0");
  require(c.sps_window_min_ms > 0 && c.sps_window_min_ms <= c.sps_window_max_ms,
          "sps window must satisfy 0 < sps_window_min_ms <= sps_window_max_ms");
  require(c.sps_exclusion_step_db > 0, "sps_exclusion_step_db must be > 0");
  require(c.sps_shortlist_fraction > 0 && c.sps_shortlist_fraction <= 1, "sps_shortlist_fraction must lie in (0, 1]");
  require(c.sps_counter_min > 0 && c.sps_counter_min <= c.sps_counter_max,
          "sps counter must satisfy 0 < sps_counter_min <= sps_counter_max");
  require(c.sps_keep_probability >= 0 && c.sps_keep_probability <= 1, "sps_keep_probability must lie in [0, 1]");
  require(c.sps_period_ms > 0 && c.sps_period_ms <= 100, "sps_period_ms must lie in [1, 100] (the sensing window)");
  require(c.forced_grant_delay_ms >= 0, "forced_grant_delay_ms must be >= 0");

  const auto [itt_lo, itt_hi] = c.bsm_itt_bounds_ms;
  require(itt_lo > 0 && itt_lo <= itt_hi, "bsm_itt_bounds_ms must satisfy 0 < lower <= upper");
  require(c.cbr_smoothing_weight > 0 && c.cbr_smoothing_weight <= 1, "cbr_smoothing_weight must lie in (0, 1]");
  require(c.cbr_sample_period_ms > 0, "cbr_sample_period_ms must be > 0");
  require(!c.itt_map_anchors.empty(), "itt_map_anchors must not be empty");
  for (std::size_t i = 0; i < c.itt_map_anchors.size(); ++i) {
    const auto& a = c.itt_map_anchors[i];
    require(a.cbr_percent >= 0 && a.cbr_percent <= 100, "itt_map_anchors CBR values must lie in [0, 100]");
    require(a.itt_ms >= static_cast<double>(itt_lo) && a.itt_ms <= static_cast<double>(itt_hi),
            "itt_map_anchors ITT values must lie within bsm_itt_bounds_ms");
    if (i > 0) {
      require(c.itt_map_anchors[i - 1].cbr_percent < a.cbr_percent,
              "itt_map_anchors must be sorted by strictly increasing CBR");
    }
  }

  require(c.per_vicinity_m > 0, "per_vicinity_m must be > 0");
  return errors;
}

std::vector<std::string> config_warnings(const ScenarioConfig& c) {
  std::vector<std::string> warnings;
  if (std::find(kFlowCategories.begin(), kFlowCategories.end(), c.flow_rate_vps) == kFlowCategories.end()) {
    warnings.push_back(fmt::format("flow_rate_vps={} is outside the category table {{1, 5, 10, 15, 20, 30}}",
                                   c.flow_rate_vps));
  }
  return warnings;
}

const ScenarioConfig& require_valid(const ScenarioConfig& config) {
  const auto errors = validate(config);
  if (!errors.empty()) {
    std::string message = "invalid scenario:";
    for (const auto& e : errors) message += "\n  - " + e;
    throw ConfigError(message);
  }
  return config;
}

void apply_setting(ScenarioConfig& config, std::string_view key, std::string_view value) {
  const auto* field = find_field(trim(key));
  if (field == nullptr) throw ConfigError(fmt::format("unknown key '{}'", trim(key)));
  try {
    field->set(config, trim(value));
  } catch (const TypeMismatch& e) {
    throw ConfigError(fmt::format("type mismatch for key '{}': expected {}, got '{}'", field->name, e.expected,
                                  trim(value)));
  }
}

ScenarioConfig parse_scenario(std::string_view document) {
  ScenarioConfig config = default_scenario();
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= document.size()) {
    const auto end = document.find('\n', start);
    std::string_view line = document.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError(fmt::format("line {}: parse error: expected 'key = value'", line_no));
      }
      try {
        apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
      } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("line {}: {}", line_no, e.what()));
      }
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  require_valid(config);
  return config;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize(const ScenarioConfig& config) {
  std::string out;
  for (const auto& f : fields()) {
    out += f.name;
    out += " = ";
    out += f.get(config);
    out += '\n';
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.push_back(f.name);
  return keys;
}

std::string config_hash(const ScenarioConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace cv2x
