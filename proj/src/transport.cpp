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

#include "netreduce/transport.hpp"

#include <algorithm>
#include <cmath>

namespace netreduce {

SenderState::SenderState(FlowId flow, SenderConfig cfg)
    : flow_(flow), cfg_(cfg), cwnd_(std::max(1.0, cfg.initial_cwnd)) {}

SimTime SenderState::rto() const {
  SimTime base = 3 * (srtt_ > 0 ? srtt_ : cfg_.rtt_estimate);
  base = std::max(base, cfg_.min_rto);
  for (int i = 0; i < backoff_shift_ && base < cfg_.max_rto; ++i) base *= 2;
  return std::min(base, cfg_.max_rto);
}

std::vector<Packet> SenderState::send_window(std::deque<Packet>& queue, SimTime now) {
  std::vector<Packet> out;
  const auto window = static_cast<std::size_t>(std::floor(cwnd_));
  const SimTime timeout = rto();
  while (!queue.empty() && unacked_.size() < window) {
    Packet p = std::move(queue.front());
    queue.pop_front();
    p.flow = flow_;
    p.seq = next_seq_++;
    Outstanding entry;
    entry.packet = p;
    entry.sent_at = now;
    entry.deadline = now + timeout;
    unacked_.emplace(p.seq, std::move(entry));
    out.push_back(std::move(p));
  }
  return out;
}

AckResult SenderState::on_ack(SeqNo seq, SimTime now) {
  AckResult result;
  auto it = unacked_.find(seq);
  if (it == unacked_.end()) {
    if (seq >= 1 && seq < next_seq_) {
      ++dup_acks_;
    } else {
      ++unknown_acks_;
    }
    return result;
  }
  if (!it->second.retransmitted) {
    const SimTime sample = now - it->second.sent_at;
    srtt_ = srtt_ == 0 ? sample : srtt_ + (sample - srtt_) / 8;
  }
  result.fresh = true;
  result.payload_bytes = kPairBytes * it->second.packet.kvs.size();
  unacked_.erase(it);
  highest_acked_ = std::max(highest_acked_, seq);
  backoff_shift_ = 0;

  if (++acked_in_window_ >= static_cast<std::size_t>(std::floor(cwnd_))) {
    cwnd_ = std::min(cfg_.max_cwnd, cwnd_ + 1);
    acked_in_window_ = 0;
  }
  return result;
}

std::vector<Packet> SenderState::detect_and_retransmit(SimTime now) {
  bool timed_out = false;
  for (const auto& [seq, entry] : unacked_) {
    if (entry.deadline <= now) {
      timed_out = true;
      break;
    }
  }

  std::vector<SeqNo> resend;
  for (auto& [seq, entry] : unacked_) {
    if (timed_out) {
      resend.push_back(seq);
    } else if (seq < highest_acked_ && !entry.gap_fired) {
      entry.gap_fired = true;
      resend.push_back(seq);
    }
  }
  if (resend.empty()) return {};

  if (timed_out) {
    ++timeouts_;
    if (rto() < cfg_.max_rto) ++backoff_shift_;
  }
  const SimTime timeout = rto();
  std::vector<Packet> out;
  out.reserve(resend.size());
  for (SeqNo seq : resend) {
    Outstanding& entry = unacked_.at(seq);
    entry.retransmitted = true;
    entry.sent_at = now;
    entry.deadline = now + timeout;
    out.push_back(entry.packet);
  }
  retransmits_ += out.size();

  if (resend.back() > recovery_point_) {
    ++loss_events_;
    halve();
    recovery_point_ = next_seq_ - 1;
  }
  return out;
}

void SenderState::on_overflow_notice() {
  ++backoff_signals_;
  halve();
}

void SenderState::halve() {
  cwnd_ = std::max(1.0, cwnd_ / 2);
  acked_in_window_ = 0;
  ++halvings_;
}

std::optional<SimTime> SenderState::next_deadline() const {
  std::optional<SimTime> earliest;
  for (const auto& [seq, entry] : unacked_) {
    if (!earliest || entry.deadline < *earliest) earliest = entry.deadline;
  }
  return earliest;
}

bool ReceiverState::accept(SeqNo seq) {
  if (seq <= contiguous_ || out_of_order_.contains(seq)) return false;
  if (seq == contiguous_ + 1) {
    ++contiguous_;
    while (!out_of_order_.empty() && *out_of_order_.begin() == contiguous_ + 1) {
      out_of_order_.erase(out_of_order_.begin());
      ++contiguous_;
    }
  } else {
    out_of_order_.insert(seq);
  }
  return true;
}

const ReceiverState* ReceiverTable::find(FlowId flow) const {
  auto it = flows_.find(flow);
  return it == flows_.end() ? nullptr : &it->second;
}

ReliableFlow::ReliableFlow(EndpointIo& io, FlowId flow, SenderConfig cfg)
    : io_(io), state_(flow, cfg) {}

void ReliableFlow::enqueue(Packet packet) {
  queue_.push_back(std::move(packet));
  pump();
}

AckResult ReliableFlow::on_ack(SeqNo seq) {
  AckResult result = state_.on_ack(seq, io_.now());
  if (!result.fresh) return result;
  // A fresh ACK past a hole resends the hole right away.
  for (Packet& p : state_.detect_and_retransmit(io_.now())) io_.transmit(std::move(p));
  pump();
  return result;
}

void ReliableFlow::pump() {
  for (Packet& p : state_.send_window(queue_, io_.now())) io_.transmit(std::move(p));
  arm_timer();
}

void ReliableFlow::arm_timer() {
  const std::optional<SimTime> deadline = state_.next_deadline();
  if (!deadline) return;
  const SimTime at = std::max(*deadline, io_.now());
  if (timer_at_ && *timer_at_ <= at) return;
  timer_at_ = at;
  io_.schedule(at, [this, at] { on_timer(at); });
}

void ReliableFlow::on_timer(SimTime at) {
  if (timer_at_ != at) return;  // superseded by an earlier timer
  timer_at_.reset();
  for (Packet& p : state_.detect_and_retransmit(io_.now())) io_.transmit(std::move(p));
  pump();
}

}  // namespace netreduce
