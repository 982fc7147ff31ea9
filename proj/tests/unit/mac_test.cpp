#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "cv2x/mac.hpp"
#include "gen.hpp"

namespace cv2x {
namespace {

constexpr double kNoiseDbm = -104.0;
constexpr double kThresholdDbm = -92.0;

SensingHistory empty_history(int subchannels = 5) {
  return SensingHistory(subchannels, dbm_to_mw(kNoiseDbm), dbm_to_mw(kThresholdDbm));
}

// Fills subframes 0..99; busy(sf, c) decides which cells sit above threshold.
template <typename Busy>
SensingHistory filled_history(Busy busy) {
  auto h = empty_history();
  std::vector<double> cells(5);
  for (Subframe sf = 0; sf < 100; ++sf) {
    for (int c = 0; c < 5; ++c) cells[static_cast<std::size_t>(c)] = dbm_to_mw(busy(sf, c) ? -80.0 : kNoiseDbm);
    h.record(sf, cells);
  }
  return h;
}

TEST(ComputeCbr, SilentChannelIsZero) {
  const auto h = filled_history([](Subframe, int) { return false; });
  const auto cbr = compute_cbr(h, kThresholdDbm);
  EXPECT_EQ(cbr.percent, 0.0);
  EXPECT_TRUE(cbr.full_window);
  EXPECT_EQ(h.busy_percent(), 0.0);
}

TEST(ComputeCbr, QuarterBusy) {
  // 125 of 500 cells: every subframe's cell 0 plus a quarter of the cell 1s
  const auto h = filled_history([](Subframe sf, int c) { return c == 0 || (c == 1 && sf % 4 == 0); });
  const auto cbr = compute_cbr(h, kThresholdDbm);
  EXPECT_EQ(cbr.percent, 25.0);
  EXPECT_EQ(h.busy_percent(), 25.0);
}

TEST(ComputeCbr, AllBusy) {
  const auto h = filled_history([](Subframe, int) { return true; });
  EXPECT_EQ(compute_cbr(h, kThresholdDbm).percent, 100.0);
  EXPECT_EQ(h.busy_percent(), 100.0);
}

TEST(ComputeCbr, ShortHistoryIsFlagged) {
  auto h = empty_history();
  std::vector<double> busy(5, dbm_to_mw(-80.0));
  std::vector<double> idle(5, dbm_to_mw(kNoiseDbm));
  for (Subframe sf = 0; sf < 10; ++sf) h.record(sf, sf < 5 ? busy : idle);
  const auto cbr = compute_cbr(h, kThresholdDbm);
  EXPECT_FALSE(cbr.full_window);
  EXPECT_EQ(cbr.percent, 50.0);
  EXPECT_EQ(h.busy_percent(), 50.0);
  EXPECT_EQ(compute_cbr(empty_history(), kThresholdDbm).percent, 0.0);
}

TEST(ComputeCbr, WindowSlidesAndUnmeasuredCountsIdle) {
  auto h = filled_history([](Subframe, int) { return true; });
  for (Subframe sf = 100; sf < 150; ++sf) h.record_unmeasured(sf);
  EXPECT_EQ(compute_cbr(h, kThresholdDbm).percent, 50.0);
  EXPECT_EQ(h.busy_percent(), 50.0);
}

TEST(SensingHistory, RejectsGapsAndWrongWidth) {
  auto h = empty_history();
  std::vector<double> cells(5, dbm_to_mw(kNoiseDbm));
  h.record(0, cells);
  EXPECT_THROW(h.record(2, cells), std::logic_error);
  EXPECT_THROW(h.record(1, std::vector<double>(4, 0.0)), std::invalid_argument);
}

TEST(CbrProperty, IncrementalMatchesFullScanAndStaysInRange) {
  gen::for_all(40, 12, [](gen::Gen& g, std::uint64_t seed) {
    const int width = g.integer(1, 8);
    SensingHistory h(width, dbm_to_mw(kNoiseDbm), dbm_to_mw(kThresholdDbm));
    std::vector<double> cells(static_cast<std::size_t>(width));
    const double p_busy = g.real(0, 1);
    for (Subframe sf = 0; sf < 400; ++sf) {
      if (g.coin(0.1)) {
        h.record_unmeasured(sf);
      } else {
        for (auto& c : cells) c = dbm_to_mw(g.coin(p_busy) ? g.real(-91.5, -50) : g.real(-110, -92.5));
        h.record(sf, cells);
      }
      const auto full = compute_cbr(h, kThresholdDbm);
      ASSERT_GE(full.percent, 0.0);
      ASSERT_LE(full.percent, 100.0);
      ASSERT_NEAR(h.busy_percent(), full.percent, 1e-9) << "seed " << seed << " sf " << sf;
    }
  });
}

SelectionParams toy_params(int lo, int hi, double fraction = 0.2) {
  SelectionParams p;
  p.window_min_ms = lo;
  p.window_max_ms = hi;
  p.shortlist_fraction = fraction;
  return p;
}

TEST(SelectResource, EmptyHistoryCoversWholeWindowUniformly) {
  const auto h = empty_history();
  const SelectionParams params;
  Rng rng = make_stream(1, "sps");
  std::map<Subframe, int> by_delay;
  const int draws = 48500;
  for (int i = 0; i < draws; ++i) {
    const Grant g = select_resource(h, 1000, 2, params, rng);
    const Subframe delay = g.subframe - 1000;
    ASSERT_GE(delay, 4);
    ASSERT_LE(delay, 100);
    ASSERT_GE(g.first_subchannel, 0);
    ASSERT_LE(g.first_subchannel, 3);
    ++by_delay[delay];
  }
  ASSERT_EQ(by_delay.size(), 97u);
  for (const auto& [delay, n] : by_delay) EXPECT_NEAR(n, draws / 97, 130) << delay;
}

TEST(SelectResource, DeterministicForSeedAndHistory) {
  gen::Gen g(4);
  auto h = empty_history();
  std::vector<double> cells(5);
  for (Subframe sf = 0; sf < 100; ++sf) {
    for (auto& c : cells) c = dbm_to_mw(g.real(-104, -70));
    h.record(sf, cells);
  }
  Rng a = make_stream(9, "sps");
  Rng b = make_stream(9, "sps");
  for (int i = 0; i < 100; ++i) EXPECT_EQ(select_resource(h, 99, 2, SelectionParams{}, a), select_resource(h, 99, 2, SelectionParams{}, b));
}

TEST(SelectResource, FootprintMustFit) {
  Rng rng(1);
  EXPECT_THROW(select_resource(empty_history(), 0, 6, SelectionParams{}, rng), std::invalid_argument);
  EXPECT_THROW(select_resource(empty_history(), 0, 0, SelectionParams{}, rng), std::invalid_argument);
}

TEST(SelectResource, UnavailableSubframesSkipped) {
  Rng rng(2);
  for (int i = 0; i < 2000; ++i) {
    const Grant g = select_resource(empty_history(), 0, 1, SelectionParams{}, rng,
                                    [](Subframe sf) { return sf % 2 == 0; });
    ASSERT_EQ(g.subframe % 2, 1);
  }
  EXPECT_THROW(select_resource(empty_history(), 0, 1, SelectionParams{}, rng, [](Subframe) { return true; }),
               std::logic_error);
}

// Independent re-implementation of the selection rule on small grids: the
// set of candidates the selector may return.
std::set<std::pair<Subframe, int>> allowed_candidates(const SensingHistory& h, Subframe now, int footprint,
                                                      const SelectionParams& p) {
  struct Cand {
    Subframe sf;
    int start;
    double mean;
    double reservation;
  };
  std::vector<Cand> cands;
  for (Subframe sf = now + p.window_min_ms; sf <= now + p.window_max_ms; ++sf) {
    for (int s = 0; s + footprint <= h.subchannels(); ++s) {
      double sum = 0, res = 0;
      for (int c = s; c < s + footprint; ++c) {
        sum += h.rssi_mw(sf, c);
        res = std::max(res, h.reservation_mw(sf, c));
      }
      cands.push_back({sf, s, sum / footprint, res});
    }
  }
  double threshold_dbm = p.exclusion_start_dbm;
  auto survivors = [&](double t_dbm) {
    std::vector<Cand> out;
    for (const auto& c : cands) {
      if (c.reservation <= 0 || 10 * std::log10(c.reservation) <= t_dbm + 1e-9) out.push_back(c);
    }
    return out;
  };
  auto kept = survivors(threshold_dbm);
  while (static_cast<double>(kept.size()) < p.shortlist_fraction * static_cast<double>(cands.size())) {
    threshold_dbm += p.exclusion_step_db;
    kept = survivors(threshold_dbm);
  }
  std::vector<double> means;
  for (const auto& c : kept) means.push_back(c.mean);
  std::sort(means.begin(), means.end());
  const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(p.shortlist_fraction * static_cast<double>(means.size()) - 1e-9)));
  const double cutoff = means[k - 1];
  std::set<std::pair<Subframe, int>> allowed;
  for (const auto& c : kept) {
    if (c.mean <= cutoff) allowed.insert({c.sf, c.start});
  }
  return allowed;
}

TEST(SelectResource, SingleFreeCandidateOnToyGrid) {
  // 10 subframes x 1 candidate; nine carry a strong reservation and a busy
  // measurement. With a 10% shortlist the free one is the only choice.
  SensingHistory h(1, dbm_to_mw(kNoiseDbm), dbm_to_mw(kThresholdDbm));
  const Subframe free_sf = 107;
  for (Subframe sf = 0; sf < 100; ++sf) {
    const bool occupied = sf >= 3 && sf <= 12 && sf + 100 != free_sf;
    h.record(sf, std::vector<double>{dbm_to_mw(occupied ? -70.0 : kNoiseDbm)});
    if (occupied) h.record_reservation(sf, 100, 0, 1, dbm_to_mw(-70.0));
  }
  const auto params = toy_params(4, 13, 0.1);
  const auto allowed = allowed_candidates(h, 99, 1, params);
  ASSERT_EQ(allowed.size(), 1u);
  ASSERT_EQ(allowed.begin()->first, free_sf);
  Rng rng(3);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(select_resource(h, 99, 1, params, rng).subframe, free_sf);
}

TEST(SelectResource, EscalationKeepsTwentyPercent) {
  // every candidate reserved at increasing strength: escalation must stop as
  // soon as two of ten survive
  SensingHistory h(1, dbm_to_mw(kNoiseDbm), dbm_to_mw(kThresholdDbm));
  for (Subframe sf = 0; sf < 100; ++sf) {
    h.record(sf, std::vector<double>{dbm_to_mw(kNoiseDbm)});
    if (sf >= 3 && sf <= 12) h.record_reservation(sf, 100, 0, 1, dbm_to_mw(-109.0 + 4.0 * static_cast<double>(sf - 3)));
  }
  const auto params = toy_params(4, 13);
  const auto allowed = allowed_candidates(h, 99, 1, params);
  EXPECT_EQ(allowed.size(), 2u);
  Rng rng(4);
  std::set<Subframe> chosen;
  for (int i = 0; i < 400; ++i) {
    const auto g = select_resource(h, 99, 1, params, rng);
    ASSERT_TRUE(allowed.count({g.subframe, g.first_subchannel})) << g.subframe;
    chosen.insert(g.subframe);
  }
  EXPECT_EQ(chosen, (std::set<Subframe>{103, 104}));
}

TEST(SelectProperty, MatchesBruteForceOnToyGrids) {
  gen::for_all(120, 13, [](gen::Gen& g, std::uint64_t seed) {
    const int width = g.integer(1, 5);
    const int footprint = g.integer(1, width);
    SensingHistory h(width, dbm_to_mw(kNoiseDbm), dbm_to_mw(kThresholdDbm));
    std::vector<double> cells(static_cast<std::size_t>(width));
    const bool with_reservations = g.coin(0.7);
    const std::vector<double> levels{kNoiseDbm, -95.0, -88.0, -80.0, -70.0};
    for (Subframe sf = 0; sf < 100; ++sf) {
      for (auto& c : cells) c = dbm_to_mw(g.coin(0.5) ? g.pick(levels) : g.real(-104, -60));
      h.record(sf, cells);
      if (with_reservations && g.coin(0.4)) {
        const int count = g.integer(1, width);
        h.record_reservation(sf, 100, g.integer(0, width - count), count, dbm_to_mw(g.real(-115, -60)));
      }
    }
    const int span = g.integer(1, 10);
    const int lo = g.integer(1, 4);
    const auto params = toy_params(lo, lo + span - 1, g.pick(std::vector<double>{0.1, 0.2, 0.5, 1.0}));
    const auto allowed = allowed_candidates(h, 99, footprint, params);
    Rng rng(seed);
    std::set<std::pair<Subframe, int>> seen;
    for (int i = 0; i < 60 * static_cast<int>(allowed.size()); ++i) {
      const auto grant = select_resource(h, 99, footprint, params, rng);
      ASSERT_TRUE(allowed.count({grant.subframe, grant.first_subchannel})) << "seed " << seed;
      ASSERT_GE(grant.subframe, 99 + params.window_min_ms);
      ASSERT_LE(grant.subframe, 99 + params.window_max_ms);
      seen.insert({grant.subframe, grant.first_subchannel});
    }
    EXPECT_EQ(seen, allowed) << "seed " << seed;
  });
}

TEST(SelectProperty, ChoiceAtOrBelowTwentiethPercentile) {
  gen::for_all(60, 14, [](gen::Gen& g, std::uint64_t seed) {
    auto h = empty_history();
    std::vector<double> cells(5);
    for (Subframe sf = 0; sf < 100; ++sf) {
      for (auto& c : cells) c = dbm_to_mw(g.real(-104, -60));
      h.record(sf, cells);
    }
    const int footprint = g.integer(1, 3);
    std::vector<double> means;
    for (Subframe sf = 103; sf <= 199; ++sf) {
      for (int s = 0; s + footprint <= 5; ++s) {
        double sum = 0;
        for (int c = s; c < s + footprint; ++c) sum += h.rssi_mw(sf, c);
        means.push_back(sum / footprint);
      }
    }
    std::sort(means.begin(), means.end());
    const double p20 = means[static_cast<std::size_t>(std::ceil(0.2 * static_cast<double>(means.size()) - 1e-9)) - 1];
    Rng rng(seed);
    for (int i = 0; i < 50; ++i) {
      const auto grant = select_resource(h, 99, footprint, SelectionParams{}, rng);
      double sum = 0;
      for (int c = grant.first_subchannel; c < grant.first_subchannel + footprint; ++c) sum += h.rssi_mw(grant.subframe, c);
      ASSERT_LE(sum / footprint, p20) << "seed " << seed;
    }
  });
}

Packet pkt(PacketKind kind, int priority, std::uint64_t id, Subframe created = 0) {
  Packet p;
  p.kind = kind;
  p.priority = priority;
  p.id = id;
  p.created_ms = created;
  return p;
}

TEST(TxQueue, BsmOvertakesQueuedSum) {
  TxQueue q;
  q.push(pkt(PacketKind::Sum, 6, 1), 10);
  q.push(pkt(PacketKind::Bsm, 2, 2), 11);
  EXPECT_EQ(q.pop()->kind, PacketKind::Bsm);
  EXPECT_EQ(q.pop()->kind, PacketKind::Sum);
  EXPECT_FALSE(q.pop());
}

TEST(TxQueue, EqualPriorityIsFifo) {
  TxQueue q;
  q.push(pkt(PacketKind::Sum, 6, 1), 10);
  q.push(pkt(PacketKind::Sum, 6, 2), 10);
  q.push(pkt(PacketKind::Ack, 6, 3), 12);
  EXPECT_EQ(q.pop()->id, 1u);
  EXPECT_EQ(q.pop()->id, 2u);
  EXPECT_EQ(q.pop()->id, 3u);
}

TEST(TxQueue, SingletonInsert) {
  TxQueue q;
  q.push(pkt(PacketKind::Sam, 6, 7), 0);
  EXPECT_EQ(q.size(), 1u);
  EXPECT_EQ(q.pop()->id, 7u);
  EXPECT_TRUE(q.empty());
}

TEST(TxQueueProperty, DequeueSortedByPriorityThenArrival) {
  gen::for_all(200, 15, [](gen::Gen& g, std::uint64_t seed) {
    TxQueue q;
    std::vector<std::pair<int, std::uint64_t>> pushed;
    const int n = g.integer(0, 40);
    for (int i = 0; i < n; ++i) {
      const int prio = g.pick(std::vector<int>{2, 6, 6, 2, 4});
      q.push(pkt(prio == 2 ? PacketKind::Bsm : PacketKind::Sum, prio, static_cast<std::uint64_t>(i)), i);
      pushed.push_back({prio, static_cast<std::uint64_t>(i)});
    }
    std::stable_sort(pushed.begin(), pushed.end(), [](auto& a, auto& b) { return a.first < b.first; });
    for (const auto& [prio, id] : pushed) {
      const auto p = q.pop();
      ASSERT_TRUE(p);
      ASSERT_EQ(p->id, id) << "seed " << seed;
    }
    ASSERT_TRUE(q.empty());
  });
}

TEST(Reselection, KeepZeroClears) {
  SpsProcess sps;
  sps.reservation = SpsReservation{5, 0, 2, 100};
  sps.keep_probability = 0.0;
  Rng rng(1);
  EXPECT_FALSE(reselection_tick(sps, 5, 15, rng).reservation);
}

TEST(Reselection, KeepOneRetainsAndRedraws) {
  SpsProcess sps;
  sps.reservation = SpsReservation{5, 0, 2, 100};
  sps.keep_probability = 1.0;
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto next = reselection_tick(sps, 5, 15, rng);
    ASSERT_TRUE(next.reservation);
    ASSERT_GE(next.counter, 5);
    ASSERT_LE(next.counter, 15);
  }
}

TEST(Reselection, CounterCoversExactlyFiveToFifteen) {
  SpsProcess sps;
  sps.reservation = SpsReservation{};
  sps.keep_probability = 1.0;
  Rng rng = make_stream(2, "sps");
  std::set<int> seen;
  for (int i = 0; i < 10000; ++i) seen.insert(reselection_tick(sps, 5, 15, rng).counter);
  std::set<int> expected;
  for (int k = 5; k <= 15; ++k) expected.insert(k);
  EXPECT_EQ(seen, expected);
}

TEST(Reselection, RequiresExpiredCounter) {
  SpsProcess sps;
  sps.counter = 3;
  Rng rng(1);
  EXPECT_THROW(reselection_tick(sps, 5, 15, rng), std::logic_error);
}

TEST(SpsReservation, NextAtOrAfter) {
  SpsReservation r{37, 0, 2, 100};
  EXPECT_EQ(r.next_at_or_after(0), 37);
  EXPECT_EQ(r.next_at_or_after(37), 37);
  EXPECT_EQ(r.next_at_or_after(38), 137);
  EXPECT_EQ(r.next_at_or_after(1237), 1237);
}

MacParams params_of(const ScenarioConfig& c) { return MacParams::from(c); }

// Steps a MAC through subframes [from, to), returning what it sent.
std::vector<TransmissionAttempt> drive(MacEntity& mac, Subframe from, Subframe to, Rng& sps, Rng& harq) {
  std::vector<TransmissionAttempt> out;
  for (Subframe t = from; t < to; ++t) {
    if (mac.has_pending_grants()) mac.assign_grants(t, sps, harq);
    if (auto a = mac.next_transmission(t, sps)) out.push_back(*a);
  }
  return out;
}

TEST(MacEntity, EmptyQueueSendsNothing) {
  MacEntity mac(1, params_of(default_scenario()), empty_history());
  Rng sps(1), harq(2);
  EXPECT_TRUE(drive(mac, 0, 500, sps, harq).empty());
}

TEST(MacEntity, ReservedBsmDecrementsCounter) {
  auto c = default_scenario();
  c.one_shot_bsm = false;
  c.harq_enabled = false;
  MacEntity mac(1, params_of(c), empty_history());
  Rng sps(1), harq(2);
  mac.enqueue(make_packet(c, PacketKind::Bsm, 1, 0, 1), 0);
  mac.assign_grants(0, sps, harq);
  ASSERT_TRUE(mac.sps().reservation);
  const int counter = mac.sps().counter;
  ASSERT_GE(counter, 5);
  ASSERT_LE(counter, 15);
  const Subframe when = mac.queue().items().front().grant.subframe;
  for (Subframe t = 0; t < when; ++t) EXPECT_FALSE(mac.next_transmission(t, sps));
  const auto a = mac.next_transmission(when, sps);
  ASSERT_TRUE(a);
  EXPECT_EQ(a->reservation_period_ms, 100);
  EXPECT_EQ(mac.sps().counter, counter - 1);

  // the next BSM reuses the reservation one period later
  mac.enqueue(make_packet(c, PacketKind::Bsm, 1, when + 10, 2), when + 10);
  mac.assign_grants(when + 10, sps, harq);
  EXPECT_EQ(mac.queue().items().front().grant.subframe, when + 100);
}

TEST(MacEntity, ReservationDroppedWhenCounterExpires) {
  auto c = default_scenario();
  c.one_shot_bsm = false;
  c.harq_enabled = false;
  MacEntity mac(1, params_of(c), empty_history());
  Rng sps(5), harq(6);
  std::vector<TransmissionAttempt> sent;
  for (int i = 0; i < 16; ++i) {
    mac.enqueue(make_packet(c, PacketKind::Bsm, 1, 100 * i, static_cast<std::uint64_t>(i)), 100 * i);
    auto part = drive(mac, 100 * i, 100 * (i + 1), sps, harq);
    sent.insert(sent.end(), part.begin(), part.end());
    if (!mac.sps().reservation) break;
  }
  EXPECT_FALSE(mac.sps().reservation);
  EXPECT_GE(sent.size(), 5u);
  EXPECT_LE(sent.size(), 15u);
}

TEST(MacEntity, GrantedSumGoesWhileLateBsmWaits) {
  auto c = default_scenario();
  c.harq_enabled = false;
  c.forced_grant_delay_ms = 4;
  MacEntity mac(1, params_of(c), empty_history());
  Rng sps(1), harq(2);
  mac.enqueue(make_packet(c, PacketKind::Sum, 1, 10, 1), 10);
  mac.assign_grants(10, sps, harq);  // SUM granted at 14
  for (Subframe t = 10; t < 14; ++t) EXPECT_FALSE(mac.next_transmission(t, sps));
  mac.enqueue(make_packet(c, PacketKind::Bsm, 1, 14, 2), 14);
  mac.assign_grants(14, sps, harq);  // BSM gets its own grant at 18
  const auto first = mac.next_transmission(14, sps);
  ASSERT_TRUE(first);
  EXPECT_EQ(first->packet.kind, PacketKind::Sum);
  for (Subframe t = 15; t < 18; ++t) EXPECT_FALSE(mac.next_transmission(t, sps));
  const auto second = mac.next_transmission(18, sps);
  ASSERT_TRUE(second);
  EXPECT_EQ(second->packet.kind, PacketKind::Bsm);
}

TEST(MacEntity, ForcedDelaySerializesSameSubframeRequests) {
  auto c = default_scenario();
  c.harq_enabled = false;
  c.forced_grant_delay_ms = 4;
  MacEntity mac(0, params_of(c), empty_history());
  Rng sps(1), harq(2);
  for (std::uint64_t i = 0; i < 3; ++i) mac.enqueue(make_packet(c, PacketKind::Ack, 0, 1600, i), 1600);
  mac.assign_grants(1600, sps, harq);
  const auto sent = drive(mac, 1600, 1700, sps, harq);
  ASSERT_EQ(sent.size(), 3u);
  EXPECT_EQ(sent[0].subframe, 1604);
  EXPECT_EQ(sent[1].subframe, 1605);
  EXPECT_EQ(sent[2].subframe, 1606);
}

TEST(MacEntity, CancelDropsPendingCopies) {
  auto c = default_scenario();
  MacEntity mac(1, params_of(c), empty_history());
  Rng sps(1), harq(2);
  mac.enqueue(make_packet(c, PacketKind::Sum, 1, 0, 1), 0);
  mac.enqueue(make_packet(c, PacketKind::Bsm, 1, 0, 2), 0);
  mac.assign_grants(0, sps, harq);
  EXPECT_EQ(mac.cancel_if([](const Packet& p) { return p.kind == PacketKind::Sum; }), 1u);
  const auto sent = drive(mac, 0, 300, sps, harq);
  for (const auto& a : sent) EXPECT_EQ(a.packet.kind, PacketKind::Bsm);
  EXPECT_FALSE(sent.empty());
}

// Random traffic into one MAC: one attempt per subframe, every packet sent
// inside its window, copies distinct and within the HARQ window, queue drains.
TEST(MacProperty, GrantsHonourWindowsAndDrain) {
  gen::for_all(60, 16, [](gen::Gen& g, std::uint64_t seed) {
    auto c = default_scenario();
    c.one_shot_bsm = g.coin(0.7);
    c.harq_enabled = g.coin(0.8);
    c.sps_keep_probability = g.real(0, 1);
    MacEntity mac(1, params_of(c), empty_history());
    Rng sps(seed), harq(seed + 1);
    std::map<std::uint64_t, Subframe> created;
    std::map<std::uint64_t, std::vector<TransmissionAttempt>> sent;
    std::set<Subframe> busy;
    std::uint64_t next_id = 0;
    std::vector<double> noise(5, dbm_to_mw(kNoiseDbm));
    for (Subframe t = 0; t < 3000; ++t) {
      if (t < 2500 && g.coin(0.02)) {
        const auto kind = g.coin(0.6) ? PacketKind::Bsm : PacketKind::Sum;
        mac.enqueue(make_packet(c, kind, 1, t, next_id), t);
        created[next_id++] = t;
      }
      if (mac.has_pending_grants()) mac.assign_grants(t, sps, harq);
      if (auto a = mac.next_transmission(t, sps)) {
        ASSERT_TRUE(busy.insert(t).second);
        sent[a->packet.id].push_back(*a);
      }
      mac.history().record(t, noise);
    }
    ASSERT_TRUE(mac.queue().empty()) << "seed " << seed;
    for (const auto& [id, attempts] : sent) {
      const Subframe born = created.at(id);
      ASSERT_LE(attempts.size(), 2u);
      const auto& original = attempts[0].is_harq_copy ? attempts[1] : attempts[0];
      ASSERT_FALSE(original.is_harq_copy);
      ASSERT_GE(original.subframe, born);  // a reservation may fall inside [t, t+4)
      ASSERT_LE(original.subframe, born + 100) << "seed " << seed;
      if (original.reservation_period_ms == 0) ASSERT_GE(original.subframe, born + 4);
      if (attempts.size() == 2) {
        const auto& copy = attempts[0].is_harq_copy ? attempts[0] : attempts[1];
        ASSERT_TRUE(c.harq_enabled);
        ASSERT_NE(copy.subframe, original.subframe);
        ASSERT_LE(std::abs(copy.subframe - original.subframe), 15);
        ASSERT_GE(copy.subframe, born);
      }
    }
    ASSERT_EQ(sent.size(), created.size()) << "seed " << seed;
  });
}

}  // namespace
}  // namespace cv2x
