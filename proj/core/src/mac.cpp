#include "cv2x/mac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cv2x {

SensingHistory::SensingHistory(int subchannels, double noise_mw, double cbr_threshold_mw)
    : subchannels_(subchannels),
      noise_mw_(noise_mw),
      cbr_threshold_mw_(cbr_threshold_mw),
      rssi_(static_cast<std::size_t>(kWindow * subchannels), static_cast<float>(noise_mw)) {
  if (subchannels <= 0) throw std::invalid_argument("SensingHistory needs at least one subchannel");
}

bool SensingHistory::begin_slot(Subframe sf) {
  if (latest_ && sf != *latest_ + 1) throw std::logic_error("SensingHistory: subframes must be recorded consecutively");
  latest_ = sf;
  ++measured_;
  if (!reservations_.empty()) {
    for (int c = 0; c < subchannels_; ++c) reservations_[cell(sf, c)] = 0.0;
  }
  return measured_ > kWindow;  // the slot held a counted measurement
}

void SensingHistory::record(Subframe sf, std::span<const double> rssi_mw) {
  if (static_cast<int>(rssi_mw.size()) != subchannels_) throw std::invalid_argument("record: wrong cell count");
  const bool reused = begin_slot(sf);
  float* row = rssi_.data() + cell(sf, 0);
  for (int c = 0; c < subchannels_; ++c) {
    if (reused) busy_cells_ -= static_cast<double>(row[c]) > cbr_threshold_mw_ ? 1 : 0;
    row[c] = static_cast<float>(rssi_mw[static_cast<std::size_t>(c)]);
    busy_cells_ += static_cast<double>(row[c]) > cbr_threshold_mw_ ? 1 : 0;
  }
}

void SensingHistory::record_unmeasured(Subframe sf) {
  const bool reused = begin_slot(sf);
  float* row = rssi_.data() + cell(sf, 0);
  for (int c = 0; c < subchannels_; ++c) {
    if (reused) busy_cells_ -= static_cast<double>(row[c]) > cbr_threshold_mw_ ? 1 : 0;
    row[c] = static_cast<float>(noise_mw_);
    busy_cells_ += static_cast<double>(row[c]) > cbr_threshold_mw_ ? 1 : 0;
  }
}

void SensingHistory::record_reservation(Subframe sf, Subframe period, int first_subchannel, int count,
                                        double rsrp_mw) {
  if (reservations_.empty()) reservations_.assign(rssi_.size(), 0.0);
  const Subframe target = sf + period;
  for (int c = first_subchannel; c < first_subchannel + count; ++c) {
    double& r = reservations_[cell(target, c)];
    r = std::max(r, rsrp_mw);
  }
}

double SensingHistory::busy_percent() const {
  const int window = measured_subframes();
  if (window == 0) return 0.0;
  return 100.0 * static_cast<double>(busy_cells_) / static_cast<double>(window * subchannels_);
}

CbrSample compute_cbr(const SensingHistory& history, double threshold_dbm) {
  CbrSample out;
  const int window = history.measured_subframes();
  out.full_window = window >= SensingHistory::kWindow;
  if (window == 0 || !history.latest()) return out;
  const double threshold_mw = dbm_to_mw(threshold_dbm);
  const Subframe last = *history.latest();
  long busy = 0;
  for (Subframe sf = last - window + 1; sf <= last; ++sf) {
    for (int c = 0; c < history.subchannels(); ++c) busy += history.rssi_mw(sf, c) > threshold_mw ? 1 : 0;
  }
  out.percent = 100.0 * static_cast<double>(busy) / static_cast<double>(window * history.subchannels());
  return out;
}

SelectionParams SelectionParams::from(const ScenarioConfig& c) {
  return SelectionParams{c.sps_window_min_ms, c.sps_window_max_ms, c.sps_exclusion_start_dbm, c.sps_exclusion_step_db,
                         c.sps_shortlist_fraction};
}

Grant select_resource(const SensingHistory& history, Subframe now, int footprint, const SelectionParams& params,
                      Rng& rng, const std::function<bool(Subframe)>& unavailable) {
  const int width = history.subchannels();
  if (footprint < 1 || footprint > width) throw std::invalid_argument("select_resource: footprint does not fit grid");

  thread_local std::vector<Grant> grants;
  thread_local std::vector<double> means;
  thread_local std::vector<double> reservations;
  thread_local std::vector<double> ranked;
  grants.clear();
  means.clear();
  reservations.clear();

  const bool sensed_reservations = history.has_reservations();
  double cells[64];
  if (width > 64) throw std::invalid_argument("select_resource: at most 64 subchannels");
  for (Subframe sf = now + params.window_min_ms; sf <= now + params.window_max_ms; ++sf) {
    if (unavailable && unavailable(sf)) continue;
    const float* row = history.row(sf);
    for (int c = 0; c < width; ++c) cells[c] = row[c];
    for (int start = 0; start + footprint <= width; ++start) {
      double sum = 0.0;
      double reservation = 0.0;
      for (int c = start; c < start + footprint; ++c) {
        sum += cells[c];
        if (sensed_reservations) reservation = std::max(reservation, history.reservation_mw(sf, c));
      }
      grants.push_back({sf, start});
      means.push_back(sum / footprint);
      if (sensed_reservations) reservations.push_back(reservation);
    }
  }
  if (grants.empty()) throw std::logic_error("select_resource: every subframe in the window is unavailable");

  // Exclusion threshold escalation. Only candidates at or below the final
  // threshold remain.
  double threshold_mw = std::numeric_limits<double>::infinity();
  if (sensed_reservations) {
    const double needed = params.shortlist_fraction * static_cast<double>(grants.size());
    const double step = dbm_to_mw(params.exclusion_step_db);
    const double max_reservation = *std::max_element(reservations.begin(), reservations.end());
    threshold_mw = dbm_to_mw(params.exclusion_start_dbm);
    while (threshold_mw < max_reservation) {
      const auto kept = std::count_if(reservations.begin(), reservations.end(),
                                      [&](double r) { return r <= threshold_mw; });
      if (static_cast<double>(kept) >= needed) break;
      threshold_mw *= step;
    }
  }
  auto remains = [&](std::size_t i) { return !sensed_reservations || reservations[i] <= threshold_mw; };

  ranked.clear();
  for (std::size_t i = 0; i < grants.size(); ++i) {
    if (remains(i)) ranked.push_back(means[i]);
  }
  const auto k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(params.shortlist_fraction * static_cast<double>(ranked.size()) - 1e-9)));
  std::nth_element(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k - 1), ranked.end());
  const double cutoff = ranked[k - 1];

  std::size_t shortlisted = 0;
  for (std::size_t i = 0; i < grants.size(); ++i) shortlisted += remains(i) && means[i] <= cutoff ? 1 : 0;
  auto pick = uniform_int<std::size_t>(rng, 0, shortlisted - 1);
  for (std::size_t i = 0; i < grants.size(); ++i) {
    if (!remains(i) || means[i] > cutoff) continue;
    if (pick-- == 0) return grants[i];
  }
  throw std::logic_error("select_resource: shortlist bookkeeping");
}

Subframe SpsReservation::next_at_or_after(Subframe from) const {
  const Subframe phase = ((from % period) + period) % period;
  const Subframe delta = ((offset - phase) % period + period) % period;
  return from + delta;
}

SpsProcess reselection_tick(SpsProcess sps, int counter_min, int counter_max, Rng& rng) {
  if (sps.counter != 0) throw std::logic_error("reselection_tick: counter has not expired");
  const bool keep = sps.reservation.has_value() && sps.keep_probability > 0.0 &&
                    uniform_real(rng, 0.0, 1.0) < sps.keep_probability;
  if (keep) {
    sps.counter = uniform_int(rng, counter_min, counter_max);
  } else {
    sps.reservation.reset();
  }
  return sps;
}

void TxQueue::push(Packet packet, Subframe now) {
  QueuedPacket item;
  item.packet = std::move(packet);
  item.enqueued_ms = now;
  item.seq = next_seq_++;
  const auto pos = std::upper_bound(items_.begin(), items_.end(), item, [](const QueuedPacket& a, const QueuedPacket& b) {
    return a.packet.priority != b.packet.priority ? a.packet.priority < b.packet.priority : a.seq < b.seq;
  });
  items_.insert(pos, std::move(item));
}

std::optional<Packet> TxQueue::pop() {
  if (items_.empty()) return std::nullopt;
  Packet p = std::move(items_.front().packet);
  items_.erase(items_.begin());
  return p;
}

MacParams MacParams::from(const ScenarioConfig& c) {
  MacParams p;
  p.selection = SelectionParams::from(c);
  p.footprint = {c.footprint_bsm, c.footprint_sam, c.footprint_sum, c.footprint_ack};
  p.harq_enabled = c.harq_enabled;
  p.harq_window = c.harq_window_ms;
  p.one_shot_bsm = c.one_shot_bsm;
  p.counter_min = c.sps_counter_min;
  p.counter_max = c.sps_counter_max;
  p.keep_probability = c.sps_keep_probability;
  p.sps_period = c.sps_period_ms;
  p.forced_grant_delay = c.forced_grant_delay_ms;
  return p;
}

MacEntity::MacEntity(NodeId node, MacParams params, SensingHistory history)
    : node_(node), params_(params), history_(std::move(history)) {
  sps_.node = node;
  sps_.keep_probability = params_.keep_probability;
}

void MacEntity::enqueue(Packet packet, Subframe now) {
  queue_.push(std::move(packet), now);
  ++ungranted_;
}

bool MacEntity::committed(Subframe sf) const {
  for (const auto& q : queue_.items()) {
    if (!q.granted) continue;
    if (!q.original_sent && q.grant.subframe == sf) return true;
    if (q.harq_subframe && !q.copy_sent && *q.harq_subframe == sf) return true;
  }
  return false;
}

Grant MacEntity::one_shot(Subframe now, int footprint, Rng& rng) const {
  if (params_.forced_grant_delay > 0) {
    Subframe sf = now + params_.forced_grant_delay;
    while (committed(sf)) ++sf;
    return {sf, 0};
  }
  return select_resource(history_, now, footprint, params_.selection, rng, [this](Subframe sf) { return committed(sf); });
}

void MacEntity::assign_grants(Subframe now, Rng& sps_rng, Rng& harq_rng) {
  if (ungranted_ == 0) return;
  for (auto& q : queue_.items()) {
    if (q.granted) continue;
    const int footprint = params_.footprint_of(q.packet.kind);
    q.subchannel_count = footprint;
    Subframe earliest = now + (params_.forced_grant_delay > 0 ? params_.forced_grant_delay : params_.selection.window_min_ms);

    const bool use_sps = q.packet.kind == PacketKind::Bsm && !params_.one_shot_bsm && params_.forced_grant_delay == 0;
    bool placed = false;
    if (use_sps) {
      if (!sps_.reservation) {
        const Grant g = one_shot(now, footprint, sps_rng);
        sps_.reservation = SpsReservation{g.subframe % params_.sps_period, g.first_subchannel, footprint,
                                          params_.sps_period};
        sps_.counter = uniform_int(sps_rng, params_.counter_min, params_.counter_max);
      }
      const Subframe sf = sps_.reservation->next_at_or_after(now);
      if (!committed(sf)) {
        q.grant = {sf, sps_.reservation->first_subchannel};
        q.reserved = true;
        q.reservation_period = sps_.reservation->period;
        earliest = now;
        placed = true;
      }
    }
    if (!placed) q.grant = one_shot(now, footprint, sps_rng);
    q.granted = true;
    --ungranted_;

    if (params_.harq_enabled) {
      for (int attempt = 0; attempt < 8; ++attempt) {
        const Subframe copy = harq_schedule_causal(q.grant.subframe, earliest, params_.harq_window, harq_rng);
        if (!committed(copy)) {
          q.harq_subframe = copy;
          break;
        }
      }
    }
  }
}

std::optional<TransmissionAttempt> MacEntity::next_transmission(Subframe now, Rng& sps_rng) {
  auto& items = queue_.items();
  for (auto it = items.begin(); it != items.end(); ++it) {
    if (!it->granted) continue;
    const bool original = !it->original_sent && it->grant.subframe == now;
    const bool copy = !original && it->harq_subframe && !it->copy_sent && *it->harq_subframe == now;
    if (!original && !copy) continue;

    TransmissionAttempt attempt;
    attempt.packet = it->packet;
    attempt.tx_node = node_;
    attempt.subframe = now;
    attempt.first_subchannel = it->grant.first_subchannel;
    attempt.subchannel_count = it->subchannel_count;
    attempt.is_harq_copy = copy;
    attempt.total_copies = it->harq_subframe ? 2 : 1;
    attempt.reservation_period_ms = it->reservation_period;

    if (original) {
      it->original_sent = true;
      if (it->reserved && sps_.counter > 0 && --sps_.counter == 0) {
        sps_ = reselection_tick(sps_, params_.counter_min, params_.counter_max, sps_rng);
      }
    } else {
      it->copy_sent = true;
    }
    if (it->original_sent && (!it->harq_subframe || it->copy_sent)) items.erase(it);
    return attempt;
  }
  return std::nullopt;
}

std::size_t MacEntity::cancel_if(const std::function<bool(const Packet&)>& predicate) {
  auto& items = queue_.items();
  std::size_t removed = 0;
  for (auto it = items.begin(); it != items.end();) {
    if (predicate(it->packet)) {
      if (!it->granted) --ungranted_;
      it = items.erase(it);
      ++removed;
    } else {
      ++it;
    }
  }
  return removed;
}

}  // namespace cv2x
