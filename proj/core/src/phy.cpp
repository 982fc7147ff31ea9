#include "cv2x/phy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cv2x {

double received_power(const PathlossParams& params, double distance_m, double link_shadowing_db) {
  if (!(distance_m >= 1.0)) throw std::invalid_argument("received_power: distance must be >= 1 m");
  return params.tx_power_dbm - (params.reference_loss_db + 10.0 * params.exponent * std::log10(distance_m)) +
         link_shadowing_db;
}

McsTable::McsTable(std::vector<McsEntry> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(), [](const McsEntry& a, const McsEntry& b) { return a.mcs < b.mcs; });
}

double McsTable::sinr_threshold(int mcs) const {
  for (const auto& e : entries_) {
    if (e.mcs == mcs) return e.sinr_threshold_db;
  }
  throw std::out_of_range("unknown MCS index " + std::to_string(mcs));
}

Subframe harq_schedule(Subframe initial_subframe, int window, Rng& rng) {
  if (initial_subframe < window) throw std::invalid_argument("harq_schedule: initial subframe precedes window");
  auto offset = uniform_int<int>(rng, -window, window - 1);
  if (offset >= 0) ++offset;
  return initial_subframe + offset;
}

Subframe harq_schedule_causal(Subframe initial_subframe, Subframe earliest, int window, Rng& rng) {
  auto offset = uniform_int<int>(rng, -window, window - 1);
  if (offset >= 0) ++offset;
  Subframe copy = initial_subframe + offset;
  if (copy < earliest) copy = initial_subframe - offset;
  return copy;
}

std::string_view to_string(FailureCause cause) {
  switch (cause) {
    case FailureCause::None: return "none";
    case FailureCause::HalfDuplex: return "half_duplex";
    case FailureCause::Sinr: return "sinr";
    case FailureCause::CollisionTie: return "collision_tie";
  }
  return "?";
}

PhyModel::PhyModel(const ScenarioConfig& config, Rng& shadowing_rng)
    : params_(config.pathloss),
      mcs_(config.mcs_table),
      tx_power_mw_(dbm_to_mw(config.pathloss.tx_power_dbm)),
      noise_mw_(dbm_to_mw(config.pathloss.noise_floor_dbm)),
      lossless_(config.lossless_channel),
      subchannels_(config.subchannels_per_subframe),
      shadow_seed_(shadowing_rng()) {
  const std::size_t size = std::size_t{1} << kShadowBits;
  shadow_db_.resize(size);
  shadow_linear_.resize(size);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < size; ++i) {
    const double z = normal(shadowing_rng);
    shadow_db_[i] = params_.shadowing_sigma_db > 0.0 ? params_.shadowing_sigma_db * z : 0.0;
    shadow_linear_[i] = dbm_to_mw(shadow_db_[i]);
  }

  const double max_distance = std::hypot(config.road_length_m, config.lane_count * config.lane_width_m) + 2.0;
  const auto entries = static_cast<std::size_t>(max_distance / kTableStepM) + 2;
  gain_table_.resize(entries);
  for (std::size_t i = 0; i < entries; ++i) {
    const double d = std::max(1.0, static_cast<double>(i) * kTableStepM);
    gain_table_[i] = dbm_to_mw(-(params_.reference_loss_db + 10.0 * params_.exponent * std::log10(d)));
  }
}

double PhyModel::shadowing_db(NodeId a, NodeId b) const { return shadow_db_[a_b_index(a, b)]; }

double PhyModel::rx_power_dbm(NodeId tx, NodeId rx, double distance_m) const {
  return received_power(params_, std::max(1.0, distance_m), shadowing_db(tx, rx));
}

double PhyModel::path_gain_exact(double distance_m) const {
  return dbm_to_mw(-(params_.reference_loss_db + 10.0 * params_.exponent * std::log10(std::max(1.0, distance_m))));
}

void PhyModel::rx_power_row(NodeId tx, double tx_x, double tx_y, const double* xs, const double* ys,
                            const std::uint32_t* hashes, std::size_t n, double* out) const {
  const std::uint32_t h = node_hash(tx);
  for (std::size_t r = 0; r < n; ++r) out[r] = link_mw(h, hashes[r], xs[r] - tx_x, ys[r] - tx_y);
}

std::size_t NodePositions::index_of(NodeId id) const {
  const auto it = std::lower_bound(ids.begin(), ids.end(), id);
  return it != ids.end() && *it == id ? static_cast<std::size_t>(it - ids.begin()) : ids.size();
}

SubframeResolver::SubframeResolver(const PhyModel& model)
    : model_(model), noise_mw_(model.noise_mw()), subchannels_(model.subchannels()), lossless_(model.lossless()) {}

void SubframeResolver::resolve(const NodePositions& nodes, std::span<const TransmissionAttempt> attempts) {
  nodes_ = &nodes;
  n_ = nodes.size();
  attempts_.assign(attempts.begin(), attempts.end());
  const std::size_t na = attempts_.size();

  transmitting_.assign(n_, 0);
  tx_index_.resize(na);
  thresholds_db_.resize(na);
  thresholds_linear_.resize(na);
  for (std::size_t a = 0; a < na; ++a) {
    const auto& att = attempts_[a];
    if (att.first_subchannel < 0 || att.subchannel_count < 1 ||
        att.first_subchannel + att.subchannel_count > subchannels_) {
      throw std::invalid_argument("attempt subchannel range outside the grid");
    }
    if (a > 0 && att.subframe != attempts_[0].subframe) {
      throw std::invalid_argument("resolve: attempts must share one subframe");
    }
    tx_index_[a] = nodes.index_of(att.tx_node);
    if (tx_index_[a] == n_) throw std::invalid_argument("resolve: transmitter not among listed nodes");
    if (transmitting_[tx_index_[a]] != 0) {
      throw std::invalid_argument("resolve: a node has at most one attempt per subframe");
    }
    transmitting_[tx_index_[a]] = 1;
    thresholds_db_[a] = model_.sinr_threshold_db(att.packet.mcs);
    thresholds_linear_[a] = dbm_to_mw(thresholds_db_[a]);
  }

  spread_.resize(na);
  power_.resize(na * n_);
  load_.assign(static_cast<std::size_t>(subchannels_) * n_, 0.0);
  hashes_.resize(n_);
  for (std::size_t r = 0; r < n_; ++r) hashes_[r] = model_.node_hash(nodes.ids[r]);
  const double* xs = nodes.x.data();
  const double* ys = nodes.y.data();
  for (std::size_t a = 0; a < na; ++a) {
    const auto& att = attempts_[a];
    const std::size_t t = tx_index_[a];
    const double spread = 1.0 / att.subchannel_count;
    spread_[a] = spread;
    double* p = power_.data() + a * n_;
    model_.rx_power_row(att.tx_node, xs[t], ys[t], xs, ys, hashes_.data(), n_, p);
    p[t] = 0.0;
    for (int c = att.first_subchannel; c < att.first_subchannel + att.subchannel_count; ++c) {
      double* load = load_.data() + static_cast<std::size_t>(c) * n_;
      for (std::size_t r = 0; r < n_; ++r) load[r] += p[r] * spread;
    }
  }
}

ReceptionOutcome SubframeResolver::outcome(std::size_t r, std::size_t a) const {
  ReceptionOutcome out;
  out.rx_node = nodes_->ids[r];
  out.attempt_index = a;
  out.packet = attempts_[a].packet;
  const double p = rx_mw(r, a);
  out.rx_power_dbm = mw_to_dbm(p);
  out.sinr_db = sinr_db(r, a);
  if (transmitting_[r] != 0) {
    out.failure_cause = FailureCause::HalfDuplex;
    return out;
  }
  out.success = model_.lossless() || sinr_linear(r, a) >= thresholds_linear_[a];
  if (out.success) return out;

  out.failure_cause = FailureCause::Sinr;
  for (std::size_t b = 0; b < attempts_.size(); ++b) {
    if (b == a || !attempts_[b].overlaps(attempts_[a])) continue;
    const double q = rx_mw(r, b);
    if (std::abs(mw_to_dbm(q) - out.rx_power_dbm) < 1e-9) {
      out.failure_cause = FailureCause::CollisionTie;
      break;
    }
  }
  return out;
}

std::vector<ReceptionOutcome> resolve_subframe(std::span<const TransmissionAttempt> attempts,
                                               const NodePositions& nodes, const PhyModel& model) {
  SubframeResolver resolver(model);
  resolver.resolve(nodes, attempts);
  std::vector<ReceptionOutcome> outcomes;
  for (std::size_t r = 0; r < nodes.size(); ++r) {
    for (std::size_t a = 0; a < attempts.size(); ++a) {
      if (r == resolver.tx_index(a)) continue;
      outcomes.push_back(resolver.outcome(r, a));
    }
  }
  return outcomes;
}

}  // namespace cv2x
