#include "cv2x/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace cv2x {

Engine::Engine(const ScenarioConfig& config, RunOptions options)
    : config_(require_valid(config)),
      options_(options),
      rngs_(config.rng_seed),
      traffic_(init_traffic(config_, rngs_.mobility)),
      phy_(config_, rngs_.shadowing),
      resolver_(phy_),
      mac_params_(MacParams::from(config_)),
      packets_(config_) {
  init();
}

Engine::Engine(const ScenarioConfig& config, TrafficState traffic, RunOptions options)
    : config_(require_valid(config)),
      options_(options),
      rngs_(config.rng_seed),
      traffic_(std::move(traffic)),
      phy_(config_, rngs_.shadowing),
      resolver_(phy_),
      mac_params_(MacParams::from(config_)),
      packets_(config_) {
  init();
}

Engine::~Engine() = default;

void Engine::init() {
  if (traffic_.now() != 0) throw std::invalid_argument("Engine: traffic must start at subframe 0");
  rsu_ = make_rsu_state(config_);
  noise_cells_.assign(static_cast<std::size_t>(config_.subchannels_per_subframe), phy_.noise_mw());
  cells_.resize(noise_cells_.size());
  spawn(kRsuNode);
  for (const auto& v : traffic_.vehicles()) {
    if (v.active) spawn(v.id);
  }
  if (options_.reception_trace) *options_.reception_trace << "subframe,tx,rx,packet_kind,success,cause,rx_dbm\n";
  if (options_.cbr_trace) *options_.cbr_trace << "node,subframe,cbr_percent\n";
}

const VueServiceState& Engine::vue(NodeId id) const { return nodes_.at(id)->vue; }

const MacEntity& Engine::mac(NodeId id) const {
  const auto& node = nodes_.at(id);
  if (!node->mac) throw std::out_of_range("node has left the road");
  return *node->mac;
}

void Engine::spawn(NodeId id) {
  if (nodes_.size() <= id) nodes_.resize(id + 1);
  auto node = std::make_unique<NodeState>();
  node->id = id;
  node->active = true;
  node->mac.emplace(id, mac_params_,
                    SensingHistory(config_.subchannels_per_subframe, phy_.noise_mw(), dbm_to_mw(config_.cbr_threshold_dbm)));
  node->vue.vehicle = id;
  node->rate = make_rate_control(config_);
  node->spawn_ms = now_;
  node->next_cbr_ms = now_ + config_.cbr_sample_period_ms;
  if (id != kRsuNode) {
    node->next_bsm_ms = now_ + uniform_int<Subframe>(rngs_.app, 0, config_.bsm_itt_bounds_ms[0] - 1);
    ++metrics_.vehicles;
  }
  nodes_[id] = std::move(node);
  active_.push_back(id);
  if (id != kRsuNode) by_x_.push_back(id);
}

void Engine::retire(NodeId id) {
  auto& node = *nodes_.at(id);
  vue_censor(node.vue);
  node.active = false;
  node.mac.reset();
  active_.erase(std::lower_bound(active_.begin(), active_.end(), id));
  by_x_.erase(std::find(by_x_.begin(), by_x_.end(), id));
}

void Engine::run_timers() {
  auto& rsu_node = *nodes_[kRsuNode];
  if (auto sam = rsu_sam_due(rsu_, config_, now_, packets_)) {
    rsu_node.mac->enqueue(std::move(*sam), now_);
    ++metrics_.sams_sent;
  }
  for (const NodeId id : active_) {
    if (id == kRsuNode) continue;
    auto& node = *nodes_[id];
    if (auto sum = vue_retry_due(node.vue, now_, config_.sum_repeat_ms, packets_)) {
      node.mac->enqueue(std::move(*sum), now_);
      ++metrics_.sums_sent;
    }
    if (now_ >= node.next_cbr_ms) {
      const double cbr = node.mac->history().busy_percent();
      node.rate = update(node.rate, std::clamp(cbr, 0.0, 100.0));
      metrics_.cbr_samples.push_back(cbr);
      const auto bucket = static_cast<std::size_t>(now_ / config_.cbr_sample_period_ms);
      if (cbr_buckets_.size() <= bucket) cbr_buckets_.resize(bucket + 1);
      cbr_buckets_[bucket].add(cbr);
      if (options_.cbr_trace) fmt::print(*options_.cbr_trace, "{},{},{}\n", id, now_, cbr);
      node.next_cbr_ms += config_.cbr_sample_period_ms;
    }
    if (config_.bsm_enabled && now_ >= node.next_bsm_ms) {
      node.mac->enqueue(packets_.make(PacketKind::Bsm, id, now_), now_);
      ++metrics_.bsms_generated;
      if (node.last_bsm_ms) {
        const auto itt = static_cast<double>(now_ - *node.last_bsm_ms);
        node.itt.add(itt);
        metrics_.itt_samples.push_back(itt);
      }
      node.last_bsm_ms = now_;
      node.next_bsm_ms = next_bsm_time(now_, node.rate);
    }
  }
}

void Engine::build_positions() {
  for (const NodeId id : positions_.ids) slot_of_[id] = kNoSlot;
  positions_.clear();
  slot_of_.resize(nodes_.size(), kNoSlot);
  for (const NodeId id : active_) {
    slot_of_[id] = positions_.size();
    if (id == kRsuNode) {
      positions_.push(id, traffic_.rsu_position_m(), traffic_.rsu_lateral_m());
    } else {
      const auto& v = traffic_.vehicle(id);
      positions_.push(id, v.position_m, traffic_.lateral_m(v.lane));
    }
  }
  // Orders barely change between subframes, so insertion sort is linear.
  auto x_of = [&](NodeId id) { return positions_.x[slot_of_[id]]; };
  for (std::size_t i = 1; i < by_x_.size(); ++i) {
    const NodeId id = by_x_[i];
    const double x = x_of(id);
    std::size_t j = i;
    while (j > 0 && (x_of(by_x_[j - 1]) > x || (x_of(by_x_[j - 1]) == x && by_x_[j - 1] > id))) {
      by_x_[j] = by_x_[j - 1];
      --j;
    }
    by_x_[j] = id;
  }
  sorted_x_.resize(by_x_.size());
  for (std::size_t i = 0; i < by_x_.size(); ++i) sorted_x_[i] = x_of(by_x_[i]);
}

bool Engine::received(std::size_t r, std::size_t a) {
  const bool ok = resolver_.decodes(r, a);
  if (ok && transmitted_[r] != 0) ++metrics_.half_duplex_violations;
  return ok;
}

void Engine::close_per(PerEntry& entry) {
  for (const auto& pair : entry.pairs) {
    add_reception(metrics_.per, pair, config_.per_vicinity_m);
    if (options_.keep_bsm_trace) bsm_trace_.push_back(pair);
  }
}

void Engine::track_bsm(std::size_t a, const TransmissionAttempt& attempt) {
  auto [it, fresh] = per_open_.try_emplace(attempt.packet.id);
  PerEntry& entry = it->second;
  if (fresh) {
    entry.copies_total = attempt.total_copies;
    const std::size_t t = resolver_.tx_index(a);
    const double tx = positions_.x[t];
    const double ty = positions_.y[t];
    const double vicinity2 = config_.per_vicinity_m * config_.per_vicinity_m;
    entry.pairs.reserve(64);
    const auto first = std::lower_bound(sorted_x_.begin(), sorted_x_.end(), tx - config_.per_vicinity_m);
    for (auto i = static_cast<std::size_t>(first - sorted_x_.begin()); i < by_x_.size(); ++i) {
      if (sorted_x_[i] > tx + config_.per_vicinity_m) break;
      const std::size_t r = slot_of_[by_x_[i]];
      if (r == t) continue;
      const double dx = positions_.x[r] - tx;
      const double dy = positions_.y[r] - ty;
      const double d2 = dx * dx + dy * dy;
      if (d2 > vicinity2) continue;
      entry.pairs.push_back({attempt.packet.id, attempt.tx_node, positions_.ids[r], std::sqrt(d2), received(r, a)});
    }
  } else {
    for (auto& pair : entry.pairs) {
      if (pair.decoded) continue;
      const std::size_t r = slot(pair.rx);
      if (r != kNoSlot && received(r, a)) pair.decoded = true;
    }
  }
  if (++entry.copies_seen >= entry.copies_total) {
    close_per(entry);
    per_open_.erase(it);
  }
}

void Engine::deliver(const std::vector<TransmissionAttempt>& attempts) {
  const std::size_t n = positions_.size();
  for (std::size_t a = 0; a < attempts.size(); ++a) {
    const auto& attempt = attempts[a];
    const Packet& packet = attempt.packet;
    switch (packet.kind) {
      case PacketKind::Bsm:
        track_bsm(a, attempt);
        break;
      case PacketKind::Sam:
        for (std::size_t r = 0; r < n; ++r) {
          const NodeId id = positions_.ids[r];
          if (id == kRsuNode) continue;
          auto& vue = nodes_[id]->vue;
          if (!vue.sam_heard && received(r, a)) vue_on_sam(vue);
        }
        break;
      case PacketKind::Sum: {
        const std::size_t r = slot(kRsuNode);
        if (r != kNoSlot && received(r, a)) rsu_on_sum(rsu_, packet, now_);
        break;
      }
      case PacketKind::Ack: {
        const std::uint64_t event = packet.id * 2 + (attempt.is_harq_copy ? 1 : 0);
        for (const NodeId member : packet.ack_members) {
          const std::size_t r = slot(member);
          if (r == kNoSlot || !received(r, a)) continue;
          auto& node = *nodes_[member];
          if (vue_on_ack(node.vue, packet, now_, event)) {
            node.mac->cancel_if([](const Packet& p) { return p.kind == PacketKind::Sum; });
          }
        }
        break;
      }
    }

    if (options_.reception_trace) {
      const double noise = phy_.noise_mw();
      for (std::size_t r = 0; r < n; ++r) {
        if (r == resolver_.tx_index(a) || resolver_.rx_mw(r, a) < noise) continue;
        const auto out = resolver_.outcome(r, a);
        fmt::print(*options_.reception_trace, "{},{},{},{},{},{},{:.3f}\n", now_, attempt.tx_node, out.rx_node,
                   to_string(packet.kind), out.success ? 1 : 0, to_string(out.failure_cause), out.rx_power_dbm);
      }
    }
  }
}

// After record_sensing: a reservation one window ahead shares the ring slot
// of the current subframe, which recording resets.
void Engine::record_reservations(const std::vector<TransmissionAttempt>& attempts) {
  for (std::size_t a = 0; a < attempts.size(); ++a) {
    const auto& attempt = attempts[a];
    if (attempt.reservation_period_ms <= 0) continue;
    for (std::size_t r = 0; r < positions_.size(); ++r) {
      if (!received(r, a)) continue;
      nodes_[positions_.ids[r]]->mac->history().record_reservation(
          now_, attempt.reservation_period_ms, attempt.first_subchannel, attempt.subchannel_count,
          resolver_.rx_mw(r, a) / attempt.subchannel_count);
    }
  }
}

void Engine::record_sensing(bool any_attempts) {
  for (std::size_t r = 0; r < positions_.size(); ++r) {
    auto& history = nodes_[positions_.ids[r]]->mac->history();
    if (transmitted_[r] != 0) {
      history.record_unmeasured(now_);
    } else if (!any_attempts) {
      history.record(now_, noise_cells_);
    } else {
      for (int c = 0; c < config_.subchannels_per_subframe; ++c) {
        cells_[static_cast<std::size_t>(c)] = resolver_.rssi_mw(r, c);
      }
      history.record(now_, cells_);
    }
  }
}

void Engine::step() {
  if (finished_) throw std::logic_error("Engine: step after finish");
  if (now_ > 0) {
    auto events = traffic_.advance(now_);
    for (const auto& crossing : events.crossings) {
      auto& node = *nodes_.at(crossing.vehicle_id);
      if (auto sum = vue_on_trigger(node.vue, now_, config_.sum_repeat_ms, packets_)) {
        node.mac->enqueue(std::move(*sum), now_);
        ++metrics_.sums_sent;
      }
    }
    for (const NodeId id : events.departures) retire(id);
    for (const NodeId id : events.spawned) spawn(id);
  }

  run_timers();
  for (const NodeId id : active_) {
    auto& mac = *nodes_[id]->mac;
    if (mac.has_pending_grants()) mac.assign_grants(now_, rngs_.sps, rngs_.harq);
  }

  std::vector<TransmissionAttempt> attempts;
  for (const NodeId id : active_) {
    auto& node = *nodes_[id];
    auto attempt = node.mac->next_transmission(now_, rngs_.sps);
    if (!attempt) continue;
    if (attempt->subframe < attempt->packet.created_ms) ++metrics_.causality_violations;
    if (attempt->packet.kind == PacketKind::Sum && !attempt->is_harq_copy) vue_on_sum_tx(node.vue, now_);
    if (options_.keep_tx_log) {
      tx_log_.push_back({now_, id, attempt->packet.kind, attempt->packet.id, attempt->packet.created_ms,
                         attempt->is_harq_copy, attempt->first_subchannel, attempt->subchannel_count,
                         attempt->packet.sum_attempt_no, attempt->packet.ack_members});
    }
    attempts.push_back(std::move(*attempt));
  }
  metrics_.attempts_on_air += attempts.size();

  build_positions();
  transmitted_.assign(positions_.size(), 0);
  for (const auto& attempt : attempts) transmitted_[slot(attempt.tx_node)] = 1;
  if (!attempts.empty()) {
    resolver_.resolve(positions_, attempts);
    deliver(attempts);
  }
  record_sensing(!attempts.empty());
  if (!attempts.empty()) record_reservations(attempts);

  if (rsu_ack_eval_due(rsu_, config_, now_)) {
    auto acks = rsu_ack_dispatch(rsu_, config_, now_, packets_);
    if (!acks.empty()) {
      auto& mac = *nodes_[kRsuNode]->mac;
      metrics_.acks_formed += acks.size();
      for (auto& ack : acks) mac.enqueue(std::move(ack), now_);
      mac.assign_grants(now_, rngs_.sps, rngs_.harq);
    }
  }
  ++now_;
}

RunResult Engine::run() {
  while (now_ < config_.sim_duration_ms) step();
  return finish();
}

RunResult Engine::finish() {
  if (finished_) throw std::logic_error("Engine: finish called twice");
  finished_ = true;

  std::vector<std::uint64_t> open;
  open.reserve(per_open_.size());
  for (const auto& [id, entry] : per_open_) open.push_back(id);
  std::sort(open.begin(), open.end());
  for (const auto id : open) close_per(per_open_.at(id));
  per_open_.clear();

  RunResult result;
  result.config = config_;
  auto& m = metrics_;
  for (std::size_t id = 1; id < nodes_.size(); ++id) {
    if (!nodes_[id]) continue;
    auto& node = *nodes_[id];
    vue_censor(node.vue);
    const auto& vue = node.vue;
    ServiceRecord rec;
    rec.vehicle_id = static_cast<NodeId>(id);
    rec.cross_ms = vue.cross_ms;
    rec.first_sum_ms = vue.first_sum_ms;
    rec.first_sum_tx_ms = vue.first_sum_tx_ms;
    rec.attempts = vue.attempts;
    rec.complete_ms = vue.complete_ms;
    rec.completion_event = vue.completion_event;
    rec.batch_id = vue.completion_batch;
    switch (vue.phase) {
      case ServicePhase::Complete: rec.status = "complete"; break;
      case ServicePhase::Censored: rec.status = "censored"; break;
      default: rec.status = vue.crossed_ineligible ? "ineligible" : "idle"; break;
    }
    m.service_log.push_back(std::move(rec));
    if (node.itt.count() > 0) m.itt_nodes.push_back({static_cast<NodeId>(id), node.itt});
  }
  for (std::size_t b = 0; b < cbr_buckets_.size(); ++b) {
    if (cbr_buckets_[b].count() == 0) continue;
    m.cbr_buckets.push_back({static_cast<Subframe>(b) * config_.cbr_sample_period_ms, cbr_buckets_[b]});
  }
  finalize(m);
  result.metrics = std::move(m);
  result.crossings = traffic_.crossing_log();
  result.tx_log = std::move(tx_log_);
  result.bsm_trace = std::move(bsm_trace_);
  return result;
}

RunResult run_scenario(ScenarioConfig config, std::uint64_t seed, const RunOptions& options) {
  config.rng_seed = seed;
  Engine engine(config, options);
  return engine.run();
}

}  // namespace cv2x
