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

#ifndef NETREDUCE_TRANSPORT_HPP_
#define NETREDUCE_TRANSPORT_HPP_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "netreduce/codec.hpp"

namespace netreduce {

// Simulated time in integer nanoseconds.
using SimTime = std::int64_t;

struct SenderConfig {
  double initial_cwnd = 10;
  double max_cwnd = 64;
  SimTime rtt_estimate = 100'000;  // seeds the RTO before any sample
  SimTime min_rto = 2'000'000;
  SimTime max_rto = 200'000'000;
};

struct Outstanding {
  Packet packet;
  SimTime sent_at = 0;
  SimTime deadline = 0;
  bool retransmitted = false;
  bool gap_fired = false;
};

struct AckResult {
  bool fresh = false;
  std::size_t payload_bytes = 0;  // application bytes newly acknowledged
};

// Window-limited reliable sender for one flow. AIMD: +1 packet per fully
// acknowledged window, halved per loss event or overflow notice, floor 1.
class SenderState {
 public:
  SenderState(FlowId flow, SenderConfig cfg);

  FlowId flow() const { return flow_; }
  SeqNo next_seq() const { return next_seq_; }
  double cwnd() const { return cwnd_; }
  SimTime rto() const;
  SimTime srtt() const { return srtt_; }
  const std::map<SeqNo, Outstanding>& unacked() const { return unacked_; }
  bool idle() const { return unacked_.empty(); }

  // Pops up to floor(cwnd) - |unacked| packets from `queue`, stamping flow
  // and fresh sequence numbers, and arms their retransmission deadlines.
  std::vector<Packet> send_window(std::deque<Packet>& queue, SimTime now);

  // Individual acknowledgement of `seq`.
  AckResult on_ack(SeqNo seq, SimTime now);

  // Resends, byte-identically and with their original seq, every packet
  // that is behind an acknowledged successor or whose deadline passed. A
  // timeout resends the whole outstanding window (go-back-N) because the
  // in-order aggregation stage discards everything past a hole.
  std::vector<Packet> detect_and_retransmit(SimTime now);

  void on_overflow_notice();

  std::optional<SimTime> next_deadline() const;

  std::size_t dup_acks() const { return dup_acks_; }
  std::size_t unknown_acks() const { return unknown_acks_; }
  std::size_t retransmits() const { return retransmits_; }
  std::size_t timeouts() const { return timeouts_; }
  std::size_t loss_events() const { return loss_events_; }
  std::size_t backoff_signals() const { return backoff_signals_; }
  std::size_t halvings() const { return halvings_; }

 private:
  void halve();

  FlowId flow_;
  SenderConfig cfg_;
  SeqNo next_seq_ = 1;
  std::map<SeqNo, Outstanding> unacked_;
  double cwnd_;
  std::size_t acked_in_window_ = 0;
  SeqNo highest_acked_ = 0;
  SeqNo recovery_point_ = 0;
  SimTime srtt_ = 0;
  int backoff_shift_ = 0;

  std::size_t dup_acks_ = 0;
  std::size_t unknown_acks_ = 0;
  std::size_t retransmits_ = 0;
  std::size_t timeouts_ = 0;
  std::size_t loss_events_ = 0;
  std::size_t backoff_signals_ = 0;
  std::size_t halvings_ = 0;
};

// Receiver-side continuity tracking for one flow.
class ReceiverState {
 public:
  // True when `seq` has not been seen before.
  bool accept(SeqNo seq);
  SeqNo contiguous() const { return contiguous_; }
  const std::set<SeqNo>& out_of_order() const { return out_of_order_; }
  bool seen(SeqNo seq) const { return seq <= contiguous_ || out_of_order_.contains(seq); }

 private:
  SeqNo contiguous_ = 0;
  std::set<SeqNo> out_of_order_;
};

// ReceiverState per flow.
class ReceiverTable {
 public:
  bool accept(FlowId flow, SeqNo seq) { return flows_[flow].accept(seq); }
  const ReceiverState* find(FlowId flow) const;

 private:
  std::unordered_map<FlowId, ReceiverState> flows_;
};

// The slice of a simulation a node needs: clock, timers and egress.
class EndpointIo {
 public:
  virtual ~EndpointIo() = default;
  virtual SimTime now() const = 0;
  virtual void transmit(Packet packet) = 0;
  virtual void schedule(SimTime at, std::function<void()> fn) = 0;
};

// SenderState plus its send queue and retransmission timer.
class ReliableFlow {
 public:
  ReliableFlow(EndpointIo& io, FlowId flow, SenderConfig cfg);
  ReliableFlow(const ReliableFlow&) = delete;
  ReliableFlow& operator=(const ReliableFlow&) = delete;

  void enqueue(Packet packet);
  AckResult on_ack(SeqNo seq);
  void on_overflow_notice() { state_.on_overflow_notice(); }

  // Queue empty and everything acknowledged.
  bool drained() const { return queue_.empty() && state_.idle(); }
  const SenderState& state() const { return state_; }
  std::size_t queued() const { return queue_.size(); }

 private:
  void pump();
  void arm_timer();
  void on_timer(SimTime at);

  EndpointIo& io_;
  SenderState state_;
  std::deque<Packet> queue_;
  std::optional<SimTime> timer_at_;
};

}  // namespace netreduce

#endif  // NETREDUCE_TRANSPORT_HPP_
