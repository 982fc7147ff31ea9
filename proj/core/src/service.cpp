#include "cv2x/service.hpp"

#include <algorithm>

namespace cv2x {

std::string_view to_string(ServicePhase phase) {
  switch (phase) {
    case ServicePhase::Ineligible: return "ineligible";
    case ServicePhase::Eligible: return "eligible";
    case ServicePhase::Requesting: return "requesting";
    case ServicePhase::Complete: return "complete";
    case ServicePhase::Censored: return "censored";
  }
  return "?";
}

void vue_on_sam(VueServiceState& state) {
  state.sam_heard = true;
  if (state.phase == ServicePhase::Ineligible && !state.cross_ms) state.phase = ServicePhase::Eligible;
}

std::optional<Packet> vue_on_trigger(VueServiceState& state, Subframe now, Subframe repeat_ms, PacketFactory& packets) {
  if (state.cross_ms) return std::nullopt;
  state.cross_ms = now;
  if (state.phase != ServicePhase::Eligible) {
    state.crossed_ineligible = state.phase == ServicePhase::Ineligible;
    return std::nullopt;
  }
  state.phase = ServicePhase::Requesting;
  state.first_sum_ms = now;
  state.attempts = 1;
  state.next_retry_ms = now + repeat_ms;
  Packet sum = packets.make(PacketKind::Sum, state.vehicle, now);
  sum.sum_attempt_no = 1;
  return sum;
}

std::optional<Packet> vue_retry_due(VueServiceState& state, Subframe now, Subframe repeat_ms, PacketFactory& packets) {
  if (state.phase != ServicePhase::Requesting || !state.next_retry_ms) return std::nullopt;
  if (now < *state.next_retry_ms) return std::nullopt;
  state.next_retry_ms = now + repeat_ms;
  ++state.attempts;
  Packet sum = packets.make(PacketKind::Sum, state.vehicle, now);
  sum.sum_attempt_no = state.attempts;
  return sum;
}

void vue_on_sum_tx(VueServiceState& state, Subframe now) {
  if (!state.first_sum_tx_ms) state.first_sum_tx_ms = now;
}

bool vue_on_ack(VueServiceState& state, const Packet& ack, Subframe now, std::uint64_t event_id) {
  if (state.phase != ServicePhase::Requesting) return false;
  if (std::find(ack.ack_members.begin(), ack.ack_members.end(), state.vehicle) == ack.ack_members.end()) return false;
  state.phase = ServicePhase::Complete;
  state.complete_ms = now;
  state.next_retry_ms.reset();
  state.completion_event = event_id;
  state.completion_batch = ack.batch_id;
  return true;
}

void vue_censor(VueServiceState& state) {
  if (state.phase == ServicePhase::Requesting) {
    state.phase = ServicePhase::Censored;
    state.next_retry_ms.reset();
  }
}

RsuServiceState make_rsu_state(const ScenarioConfig& config) {
  RsuServiceState s;
  s.next_sam_ms = 0;
  s.next_ack_eval_ms = config.ack_dispatch == AckDispatch::Interval ? config.ack_interval_ms : 0;
  return s;
}

void rsu_on_sum(RsuServiceState& state, const Packet& sum, Subframe now) {
  const NodeId v = sum.source;
  if (state.pending_set.contains(v)) return;
  if (const auto it = state.served.find(v); it != state.served.end() && sum.sum_attempt_no <= it->second) return;
  state.pending.push_back({v, now, sum.sum_attempt_no});
  state.pending_set.insert(v);
}

bool rsu_ack_eval_due(const RsuServiceState& state, const ScenarioConfig& config, Subframe now) {
  return config.ack_dispatch == AckDispatch::Immediate || now >= state.next_ack_eval_ms;
}

std::vector<Packet> rsu_ack_dispatch(RsuServiceState& state, const ScenarioConfig& config, Subframe now,
                                     PacketFactory& packets) {
  std::vector<Packet> acks;
  if (config.ack_dispatch == AckDispatch::Interval) {
    if (now < state.next_ack_eval_ms) return acks;
    state.next_ack_eval_ms = now + config.ack_interval_ms;
  }
  const auto b = static_cast<std::size_t>(config.batchsize);
  while (state.pending.size() >= b) {
    Packet ack = packets.make(PacketKind::Ack, kRsuNode, now);
    ack.batch_id = state.next_batch_id++;
    for (std::size_t i = 0; i < b; ++i) {
      const PendingRequest req = state.pending.front();
      state.pending.pop_front();
      state.pending_set.erase(req.vehicle);
      int& served = state.served[req.vehicle];
      served = std::max(served, req.attempt);
      ack.ack_members.push_back(req.vehicle);
    }
    acks.push_back(std::move(ack));
    if (config.ack_policy == AckPolicy::SingleBatch) break;
  }
  return acks;
}

std::optional<Packet> rsu_sam_due(RsuServiceState& state, const ScenarioConfig& config, Subframe now,
                                  PacketFactory& packets) {
  if (now < state.next_sam_ms) return std::nullopt;
  state.next_sam_ms = now + config.sam_period_ms;
  return packets.make(PacketKind::Sam, kRsuNode, now);
}

}  // namespace cv2x
