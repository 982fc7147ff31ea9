#pragma once

#include <deque>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cv2x/config.hpp"
#include "cv2x/packet.hpp"
#include "cv2x/types.hpp"

namespace cv2x {

enum class ServicePhase : std::uint8_t { Ineligible, Eligible, Requesting, Complete, Censored };

std::string_view to_string(ServicePhase phase);

/// Vehicle side of the transaction. Times are subframes on the vehicle clock.
struct VueServiceState {
  NodeId vehicle = 0;
  ServicePhase phase = ServicePhase::Ineligible;
  bool sam_heard = false;
  std::optional<Subframe> cross_ms;
  /// Generation of the first SUM (the trigger crossing); SCT counts from here.
  std::optional<Subframe> first_sum_ms;
  /// Subframe in which the first SUM actually went on air.
  std::optional<Subframe> first_sum_tx_ms;
  int attempts = 0;
  std::optional<Subframe> next_retry_ms;
  std::optional<Subframe> complete_ms;
  /// Identifies the ACK reception that completed the service.
  std::optional<std::uint64_t> completion_event;
  std::uint64_t completion_batch = 0;
  /// Crossed the trigger line without having heard a SAM.
  bool crossed_ineligible = false;
};

void vue_on_sam(VueServiceState& state);
/// SUM attempt 1 when eligible; the vehicle becomes REQUESTING.
std::optional<Packet> vue_on_trigger(VueServiceState& state, Subframe now, Subframe repeat_ms, PacketFactory& packets);
/// Next SUM once the repeat interval has elapsed.
std::optional<Packet> vue_retry_due(VueServiceState& state, Subframe now, Subframe repeat_ms, PacketFactory& packets);
void vue_on_sum_tx(VueServiceState& state, Subframe now);
/// True when this ACK completed the service.
bool vue_on_ack(VueServiceState& state, const Packet& ack, Subframe now, std::uint64_t event_id);
/// A still-requesting vehicle is censored (run end or road exit).
void vue_censor(VueServiceState& state);

struct PendingRequest {
  NodeId vehicle = 0;
  Subframe first_seen_ms = 0;
  int attempt = 0;
};

/// RSU side: periodic SAM, SUM intake with dedupe, FIFO of pending requests
/// and batch formation.
struct RsuServiceState {
  std::deque<PendingRequest> pending;
  std::unordered_set<NodeId> pending_set;
  /// vehicle -> newest SUM attempt already acknowledged
  std::unordered_map<NodeId, int> served;
  Subframe next_sam_ms = 0;
  Subframe next_ack_eval_ms = 0;
  std::uint64_t next_batch_id = 0;
};

RsuServiceState make_rsu_state(const ScenarioConfig& config);

/// Appends an unseen request. Duplicates of a pending vehicle and SUM attempts
/// no newer than the one already acknowledged are dropped; a newer attempt
/// from a served vehicle (its ACK was lost) re-enters the FIFO tail.
void rsu_on_sum(RsuServiceState& state, const Packet& sum, Subframe now);

/// Whether a dispatch evaluation happens in `now`.
bool rsu_ack_eval_due(const RsuServiceState& state, const ScenarioConfig& config, Subframe now);

/// Forms ACKs from the oldest pending requests, b members each; a remainder
/// smaller than b keeps waiting. Single-batch policy forms at most one.
std::vector<Packet> rsu_ack_dispatch(RsuServiceState& state, const ScenarioConfig& config, Subframe now,
                                     PacketFactory& packets);

std::optional<Packet> rsu_sam_due(RsuServiceState& state, const ScenarioConfig& config, Subframe now,
                                  PacketFactory& packets);

}  // namespace cv2x
