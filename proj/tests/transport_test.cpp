// Copyright 2026 The netreduce Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <deque>
#include <map>
#include <random>
#include <vector>

#include "netreduce/dataplane.hpp"
#include "netreduce/transport.hpp"

namespace netreduce {
namespace {

std::deque<Packet> pending(std::size_t n) {
  std::deque<Packet> q;
  for (std::size_t i = 0; i < n; ++i) {
    Packet p;
    p.flags.cpa = true;
    p.kvs.push_back({Key("k" + std::to_string(i)), 1});
    q.push_back(p);
  }
  return q;
}

SenderConfig config(double cwnd) {
  SenderConfig c;
  c.initial_cwnd = cwnd;
  c.max_cwnd = 64;
  c.rtt_estimate = 1000;
  c.min_rto = 10'000;
  return c;
}

TEST(Transport, WindowLimitsFirstBurst) {
  SenderState s(5, config(4));
  std::deque<Packet> q = pending(10);
  const std::vector<Packet> burst = s.send_window(q, 0);
  ASSERT_EQ(burst.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(burst[i].seq, i + 1);
    EXPECT_EQ(burst[i].flow, 5u);
  }
  EXPECT_TRUE(s.send_window(q, 0).empty());
  EXPECT_EQ(q.size(), 6u);
}

TEST(Transport, AdditiveIncreaseAfterFullWindow) {
  SenderState s(0, config(4));
  std::deque<Packet> q = pending(20);
  s.send_window(q, 0);
  for (SeqNo seq = 1; seq <= 4; ++seq) EXPECT_TRUE(s.on_ack(seq, 100).fresh);
  EXPECT_DOUBLE_EQ(s.cwnd(), 5);
  EXPECT_EQ(s.send_window(q, 100).size(), 5u);
}

TEST(Transport, AckBookkeeping) {
  SenderState s(0, config(2));
  std::deque<Packet> q = pending(2);
  s.send_window(q, 0);
  const AckResult first = s.on_ack(1, 10);
  EXPECT_TRUE(first.fresh);
  EXPECT_EQ(first.payload_bytes, kPairBytes);
  ASSERT_EQ(s.unacked().size(), 1u);
  EXPECT_EQ(s.unacked().begin()->first, 2u);

  EXPECT_FALSE(s.on_ack(1, 11).fresh);
  EXPECT_EQ(s.dup_acks(), 1u);
  EXPECT_EQ(s.unacked().size(), 1u);

  EXPECT_FALSE(s.on_ack(99, 12).fresh);
  EXPECT_EQ(s.unknown_acks(), 1u);
}

TEST(Transport, GapTriggersSingleRetransmit) {
  SenderState s(0, config(4));
  std::deque<Packet> q = pending(4);
  const std::vector<Packet> sent = s.send_window(q, 0);
  s.on_ack(1, 10);
  s.on_ack(2, 10);
  s.on_ack(4, 10);
  const std::vector<Packet> again = s.detect_and_retransmit(20);
  ASSERT_EQ(again.size(), 1u);
  EXPECT_EQ(again[0], sent[2]);  // byte-identical, original seq
  EXPECT_TRUE(s.detect_and_retransmit(21).empty());  // fires once per hole
}

TEST(Transport, NothingToDoWithoutGapsOrTimeouts) {
  SenderState s(0, config(4));
  std::deque<Packet> q = pending(4);
  s.send_window(q, 0);
  s.on_ack(1, 10);
  EXPECT_TRUE(s.detect_and_retransmit(20).empty());
}

TEST(Transport, TimeoutResendsWholeWindowAndBacksOff) {
  SenderState s(0, config(4));
  std::deque<Packet> q = pending(4);
  s.send_window(q, 0);
  const SimTime rto = s.rto();
  EXPECT_EQ(rto, 10'000);  // min_rto floor over 3 x estimate
  EXPECT_TRUE(s.detect_and_retransmit(rto - 1).empty());
  EXPECT_EQ(s.detect_and_retransmit(rto).size(), 4u);
  EXPECT_EQ(s.timeouts(), 1u);
  EXPECT_EQ(s.rto(), 2 * rto);
  EXPECT_DOUBLE_EQ(s.cwnd(), 2);
}

TEST(Transport, OverflowNoticeHalvesWithFloor) {
  SenderState a(0, config(8));
  a.on_overflow_notice();
  EXPECT_DOUBLE_EQ(a.cwnd(), 4);

  SenderState b(0, config(1));
  b.on_overflow_notice();
  EXPECT_DOUBLE_EQ(b.cwnd(), 1);

  SenderState c(0, config(8));
  for (int i = 0; i < 3; ++i) c.on_overflow_notice();
  EXPECT_DOUBLE_EQ(c.cwnd(), 1);
  EXPECT_EQ(c.backoff_signals(), 3u);
  EXPECT_EQ(c.halvings(), 3u);
}

TEST(Transport, ReceiverTracksContiguity) {
  ReceiverState r;
  EXPECT_TRUE(r.accept(1));
  EXPECT_TRUE(r.accept(3));
  EXPECT_EQ(r.contiguous(), 1u);
  EXPECT_FALSE(r.accept(3));
  EXPECT_TRUE(r.accept(2));
  EXPECT_EQ(r.contiguous(), 3u);
  EXPECT_TRUE(r.out_of_order().empty());
  EXPECT_FALSE(r.accept(1));
}

TEST(Transport, RetransmitReplayLeavesRegistersUnchanged) {
  SwitchConfig cfg;
  cfg.reducer = 2;
  cfg.routes.set_default(2, 0);
  cfg.routes.set_default(1, 1);
  RegisterStore store = RegisterStore::for_config(cfg, 1);
  SenderState s(0, config(4));
  std::deque<Packet> q = pending(3);
  for (Packet& p : q) {
    p.src = 1;
    p.dst = 2;
  }
  const std::vector<Packet> sent = s.send_window(q, 0);
  for (const Packet& p : sent) process_packet(cfg, store, p, 1);
  const RegisterStore after_first = store;
  process_packet(cfg, store, sent[1], 1);
  process_packet(cfg, store, sent[1], 1);
  EXPECT_EQ(store, after_first);
}

// Property: over random ACK orders, losses and timeouts, cwnd stays in
// [1, max], unacked seqs are strictly increasing, and every packet is
// eventually acknowledged exactly once.
TEST(TransportProperty, InvariantsUnderRandomAcks) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    SenderConfig c = config(1 + static_cast<double>(rng() % 10));
    c.max_cwnd = 16;
    SenderState s(0, c);
    std::deque<Packet> q = pending(200);
    std::vector<SeqNo> in_flight;
    std::map<SeqNo, int> acked;
    SimTime now = 0;
    for (int step = 0; step < 20000 && !(q.empty() && s.idle()); ++step) {
      now += 100;
      for (const Packet& p : s.send_window(q, now)) in_flight.push_back(p.seq);
      for (const Packet& p : s.detect_and_retransmit(now)) in_flight.push_back(p.seq);
      if (!in_flight.empty()) {
        const std::size_t i = rng() % in_flight.size();
        const SeqNo seq = in_flight[i];
        in_flight.erase(in_flight.begin() + static_cast<std::ptrdiff_t>(i));
        if (rng() % 5 != 0 && s.on_ack(seq, now).fresh) ++acked[seq];
      }
      ASSERT_GE(s.cwnd(), 1.0);
      ASSERT_LE(s.cwnd(), 16.0);
      SeqNo prev = 0;
      for (const auto& [seq, o] : s.unacked()) {
        ASSERT_GT(seq, prev);
        prev = seq;
      }
    }
    EXPECT_TRUE(s.idle());
    EXPECT_EQ(acked.size(), 200u);
    for (const auto& [seq, n] : acked) EXPECT_EQ(n, 1);
  }
}

}  // namespace
}  // namespace netreduce
