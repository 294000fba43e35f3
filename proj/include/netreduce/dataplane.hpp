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

// Switch data-plane emulation: register-backed key/value aggregation with
// per-flow duplicate suppression, switch-generated ACKs and bounded memory.

#ifndef NETREDUCE_DATAPLANE_HPP_
#define NETREDUCE_DATAPLANE_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "netreduce/codec.hpp"

namespace netreduce {

using PortId = std::uint32_t;

// Forwarding state for one node: per-destination defaults plus
// flow-specific overrides that steer a flow through its aggregation site.
class RouteTable {
 public:
  void set_default(NodeId dst, PortId port) { defaults_[dst] = port; }
  void set_flow(FlowId flow, NodeId dst, PortId port) { flow_rules_[{flow, dst}] = port; }
  void clear_flow_rules() { flow_rules_.clear(); }

  std::optional<PortId> lookup(FlowId flow, NodeId dst) const;
  std::optional<PortId> lookup_default(NodeId dst) const;
  // Acknowledgements ignore flow rules: a mapper that shares a host with its
  // reducer would otherwise have its ACKs steered back to the site.
  std::optional<PortId> route(const Packet& pkt) const {
    return pkt.flags.cpa && pkt.flags.cpk ? lookup_default(pkt.dst) : lookup(pkt.flow, pkt.dst);
  }

  const std::map<NodeId, PortId>& defaults() const { return defaults_; }
  const std::map<std::pair<FlowId, NodeId>, PortId>& flow_rules() const { return flow_rules_; }

  friend bool operator==(const RouteTable&, const RouteTable&) = default;

 private:
  std::map<NodeId, PortId> defaults_;
  std::map<std::pair<FlowId, NodeId>, PortId> flow_rules_;
};

enum class SwitchRole { kAggregating, kForwardingOnly };

// What to do with a pair whose probed slots are all taken.
enum class NoSlotPolicy { kFallback, kDrop };

struct SwitchConfig {
  NodeId self = 0;
  SwitchRole role = SwitchRole::kAggregating;
  std::size_t bound_B = 1024;
  std::size_t num_slots = 2048;
  std::size_t num_hash = 2;
  std::vector<std::uint64_t> hash_seeds;  // size num_hash; empty = defaults
  NodeId reducer = 0;                     // flush destination
  std::optional<NodeId> master;           // header-copy destination
  FlowId flush_flow = 0;                  // flow stamped on flush/fallback packets
  NoSlotPolicy no_slot = NoSlotPolicy::kFallback;
  std::vector<FlowId> flows;  // sorted; flows aggregated here, empty accepts all
  RouteTable routes;

  // Throws std::invalid_argument unless bound_B <= num_slots and num_hash >= 1.
  void validate() const;
  std::vector<std::uint64_t> effective_seeds() const;
};

std::vector<std::uint64_t> default_hash_seeds(std::size_t count);

// Seeded 64-bit hash over the full 64-octet key.
std::uint64_t key_hash(const Key& key, std::uint64_t seed);

struct Slot {
  bool occupied = false;
  Key key;
  std::int32_t value = 0;
  friend bool operator==(const Slot&, const Slot&) = default;
};

enum class MergeResult { kUpdated, kInserted, kNoSlot };

class RegisterStore {
 public:
  RegisterStore(std::size_t num_slots, std::size_t bound_B,
                std::vector<std::uint64_t> hash_seeds, std::size_t num_flows);
  static RegisterStore for_config(const SwitchConfig& cfg, std::size_t num_flows);

  std::size_t num_slots() const { return slots_.size(); }
  std::size_t kv_size() const { return kv_size_; }
  std::size_t bound() const { return bound_B_; }
  std::size_t num_hash() const { return seeds_.size(); }
  std::size_t num_flows() const { return m_states_.size(); }
  const Slot& slot(std::size_t i) const { return slots_.at(i); }
  const std::vector<Slot>& slots() const { return slots_; }

  // Slot probed by the i-th hash function.
  std::size_t probe_index(const Key& key, std::size_t i) const;

  // Highest in-order sequence processed for `flow`; 0 before any packet.
  SeqNo m_state(FlowId flow) const { return m_states_.at(flow); }
  // Throws std::logic_error if `seq` would move the state backwards.
  void advance_m_state(FlowId flow, SeqNo seq);

  MergeResult merge(OpCode op, const KeyValue& kv);

  // Occupied pairs in slot order; leaves every slot empty and kv_size 0.
  std::vector<KeyValue> take_all();

  bool check_invariants() const;

  friend bool operator==(const RegisterStore&, const RegisterStore&) = default;

 private:
  std::vector<Slot> slots_;
  std::size_t kv_size_ = 0;
  std::size_t bound_B_;
  std::vector<std::uint64_t> seeds_;
  std::vector<SeqNo> m_states_;
};

enum class Verdict {
  kAggregated,
  kFlushed,
  kDuplicateDropped,
  kOutOfOrderDropped,
  kPassedThrough,
  kAcked,
  kRejected,  // unknown flow at an aggregating stage
};

const char* verdict_name(Verdict v);

enum class EmitKind { kForward, kAck, kHeaderCopy, kFlush, kFallback };

struct Emission {
  PortId port = 0;
  Packet packet;
  EmitKind kind = EmitKind::kForward;
};

struct StoreDelta {
  std::size_t inserted = 0;
  std::size_t updated = 0;
  std::size_t no_slot = 0;
  std::size_t fallback_pairs = 0;
  std::size_t dropped_pairs = 0;  // NoSlotPolicy::kDrop
  std::size_t flushes = 0;        // flush events, not packets
  std::size_t overflow_flushes = 0;
  std::size_t flushed_pairs = 0;
  bool m_state_advanced = false;

  bool empty() const {
    return inserted == 0 && updated == 0 && no_slot == 0 && flushes == 0 &&
           !m_state_advanced;
  }
};

struct PipelineOutcome {
  std::vector<Emission> emitted;
  StoreDelta store_delta;
  Verdict verdict = Verdict::kPassedThrough;
  std::size_t unroutable = 0;  // emissions suppressed for lack of a route
};

// One pass of the aggregation pipeline.
//   cpa=0            forward unmodified
//   cpk=1            forward the ACK toward its destination (the mapper)
//   foreign          forward: not addressed to cfg.reducer, a flow outside
//                    cfg.flows, or a header copy / fallback in transit
//   data, cpd=0      dedupe, header copy + ACK, merge pairs, flush on overflow
//   data, cpd=1      dedupe, header copy + ACK, flush the store
// A data packet is accepted only when seq == m_state + 1. Anything at or
// below m_state is a duplicate (re-ACKed, store untouched); anything beyond
// is out of order and dropped silently so the sender retransmits in order.
PipelineOutcome process_packet(const SwitchConfig& cfg, RegisterStore& store,
                               const Packet& pkt, PortId in_port);

MergeResult merge_pair(RegisterStore& store, OpCode op, const KeyValue& kv);

// Flushes every stored pair toward cfg.reducer in ceil(kv_size / 20)
// packets (one empty packet when the store is empty) and clears the store.
// `pkt` must have cpa=1 and cpd=1; its tag is carried as the flush reason.
PipelineOutcome handle_collection_signal(const SwitchConfig& cfg, RegisterStore& store,
                                         const Packet& pkt);

// Re-encapsulates pairs that found no slot into a pass-through data packet
// addressed to the reducer.
Emission no_slot_fallback(const SwitchConfig& cfg, OpCode op, std::vector<KeyValue> pairs);

// Flush fragments for `pairs`: flow/seq are left for the caller to stamp.
std::vector<Packet> make_flush_packets(const SwitchConfig& cfg, OpCode op,
                                       const std::vector<KeyValue>& pairs,
                                       std::uint8_t reason);

}  // namespace netreduce

#endif  // NETREDUCE_DATAPLANE_HPP_
