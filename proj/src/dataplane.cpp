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

#include "netreduce/dataplane.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "netreduce/rng.hpp"

namespace netreduce {

namespace {

Packet make_ack(const Packet& pkt) {
  Packet ack;
  ack.src = pkt.dst;
  ack.dst = pkt.src;
  ack.flow = pkt.flow;
  ack.seq = pkt.seq;
  ack.flags = CpFlags{.cpa = true, .cpk = true, .cpd = false};
  ack.op = pkt.op;
  return ack;
}

// Emits `packet` toward its destination or counts it unroutable.
void emit(const SwitchConfig& cfg, PipelineOutcome& out, Packet packet, EmitKind kind) {
  auto port = cfg.routes.route(packet);
  if (!port) {
    ++out.unroutable;
    return;
  }
  out.emitted.push_back(Emission{*port, std::move(packet), kind});
}

void flush_into(const SwitchConfig& cfg, RegisterStore& store, OpCode op,
                std::uint8_t reason, PipelineOutcome& out) {
  std::vector<KeyValue> pairs = store.take_all();
  out.store_delta.flushes += 1;
  if (reason == tag::kFlushOverflow) out.store_delta.overflow_flushes += 1;
  out.store_delta.flushed_pairs += pairs.size();
  for (Packet& p : make_flush_packets(cfg, op, pairs, reason)) {
    emit(cfg, out, std::move(p), EmitKind::kFlush);
  }
}

}  // namespace

std::optional<PortId> RouteTable::lookup(FlowId flow, NodeId dst) const {
  if (!flow_rules_.empty()) {
    auto it = flow_rules_.find({flow, dst});
    if (it != flow_rules_.end()) return it->second;
  }
  return lookup_default(dst);
}

std::optional<PortId> RouteTable::lookup_default(NodeId dst) const {
  auto it = defaults_.find(dst);
  if (it == defaults_.end()) return std::nullopt;
  return it->second;
}

void SwitchConfig::validate() const {
  if (num_hash < 1) throw std::invalid_argument("num_hash must be >= 1");
  if (num_slots < 1) throw std::invalid_argument("num_slots must be >= 1");
  if (bound_B > num_slots) {
    throw std::invalid_argument("bound_B (" + std::to_string(bound_B) +
                                ") exceeds num_slots (" + std::to_string(num_slots) + ")");
  }
  if (!hash_seeds.empty() && hash_seeds.size() != num_hash) {
    throw std::invalid_argument("hash_seeds size differs from num_hash");
  }
}

std::vector<std::uint64_t> SwitchConfig::effective_seeds() const {
  return hash_seeds.empty() ? default_hash_seeds(num_hash) : hash_seeds;
}

std::vector<std::uint64_t> default_hash_seeds(std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  std::uint64_t state = 0x243f6a8885a308d3ULL;
  for (auto& s : seeds) {
    state = splitmix64(state);
    s = state;
  }
  return seeds;
}

std::uint64_t key_hash(const Key& key, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (std::uint8_t b : key.bytes()) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h);
}

RegisterStore::RegisterStore(std::size_t num_slots, std::size_t bound_B,
                             std::vector<std::uint64_t> hash_seeds, std::size_t num_flows)
    : slots_(num_slots), bound_B_(bound_B), seeds_(std::move(hash_seeds)),
      m_states_(num_flows, 0) {
  if (seeds_.empty()) throw std::invalid_argument("at least one hash seed required");
  if (bound_B_ > slots_.size()) throw std::invalid_argument("bound_B exceeds slot count");
}

RegisterStore RegisterStore::for_config(const SwitchConfig& cfg, std::size_t num_flows) {
  cfg.validate();
  return RegisterStore(cfg.num_slots, cfg.bound_B, cfg.effective_seeds(), num_flows);
}

std::size_t RegisterStore::probe_index(const Key& key, std::size_t i) const {
  return static_cast<std::size_t>(key_hash(key, seeds_.at(i)) % slots_.size());
}

void RegisterStore::advance_m_state(FlowId flow, SeqNo seq) {
  SeqNo& state = m_states_.at(flow);
  if (seq < state) throw std::logic_error("m_state must be non-decreasing");
  state = seq;
}

MergeResult RegisterStore::merge(OpCode op, const KeyValue& kv) {
  std::size_t first_free = slots_.size();
  for (std::size_t i = 0; i < seeds_.size(); ++i) {
    const std::size_t idx = probe_index(kv.key, i);
    Slot& s = slots_[idx];
    if (s.occupied && s.key == kv.key) {
      s.value = combine(op, s.value, kv.value);
      return MergeResult::kUpdated;
    }
    if (!s.occupied && first_free == slots_.size()) first_free = idx;
  }
  if (first_free == slots_.size()) return MergeResult::kNoSlot;
  Slot& s = slots_[first_free];
  s.occupied = true;
  s.key = kv.key;
  s.value = kv.value;
  ++kv_size_;
  return MergeResult::kInserted;
}

std::vector<KeyValue> RegisterStore::take_all() {
  std::vector<KeyValue> pairs;
  pairs.reserve(kv_size_);
  for (Slot& s : slots_) {
    if (!s.occupied) continue;
    pairs.push_back(KeyValue{s.key, s.value});
    s = Slot{};
  }
  kv_size_ = 0;
  return pairs;
}

bool RegisterStore::check_invariants() const {
  std::size_t occupied = 0;
  for (const Slot& s : slots_) occupied += s.occupied ? 1 : 0;
  return occupied == kv_size_ && kv_size_ <= slots_.size();
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kAggregated: return "aggregated";
    case Verdict::kFlushed: return "flushed";
    case Verdict::kDuplicateDropped: return "duplicate-dropped";
    case Verdict::kOutOfOrderDropped: return "out-of-order-dropped";
    case Verdict::kPassedThrough: return "passed-through";
    case Verdict::kAcked: return "acked";
    case Verdict::kRejected: return "rejected";
  }
  return "?";
}

MergeResult merge_pair(RegisterStore& store, OpCode op, const KeyValue& kv) {
  return store.merge(op, kv);
}

std::vector<Packet> make_flush_packets(const SwitchConfig& cfg, OpCode op,
                                       const std::vector<KeyValue>& pairs,
                                       std::uint8_t reason) {
  const std::size_t count =
      pairs.empty() ? 1 : (pairs.size() + kMaxPairsPerPacket - 1) / kMaxPairsPerPacket;
  std::vector<Packet> packets;
  packets.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Packet p;
    p.src = cfg.self;
    p.dst = cfg.reducer;
    p.flow = cfg.flush_flow;
    p.flags = CpFlags{.cpa = true, .cpk = false, .cpd = true};
    p.tag = reason;
    p.aux = static_cast<std::uint32_t>(pairs.size());
    p.frag_index = static_cast<std::uint16_t>(i);
    p.frag_count = static_cast<std::uint16_t>(count);
    p.op = op;
    const std::size_t begin = i * kMaxPairsPerPacket;
    const std::size_t end = std::min(pairs.size(), begin + kMaxPairsPerPacket);
    p.kvs.assign(pairs.begin() + static_cast<std::ptrdiff_t>(begin),
                 pairs.begin() + static_cast<std::ptrdiff_t>(end));
    packets.push_back(std::move(p));
  }
  return packets;
}

Emission no_slot_fallback(const SwitchConfig& cfg, OpCode op, std::vector<KeyValue> pairs) {
  Emission e;
  e.kind = EmitKind::kFallback;
  e.packet.src = cfg.self;
  e.packet.dst = cfg.reducer;
  e.packet.flow = cfg.flush_flow;
  e.packet.flags = CpFlags{.cpa = true, .cpk = false, .cpd = false};
  e.packet.tag = tag::kFallback;
  e.packet.op = op;
  e.packet.kvs = std::move(pairs);
  if (auto port = cfg.routes.route(e.packet)) e.port = *port;
  return e;
}

PipelineOutcome handle_collection_signal(const SwitchConfig& cfg, RegisterStore& store,
                                         const Packet& pkt) {
  PipelineOutcome out;
  out.verdict = Verdict::kFlushed;
  flush_into(cfg, store, pkt.op, pkt.tag, out);
  return out;
}

PipelineOutcome process_packet(const SwitchConfig& cfg, RegisterStore& store,
                               const Packet& pkt, PortId /*in_port*/) {
  PipelineOutcome out;

  if (!pkt.flags.cpa) {
    emit(cfg, out, pkt, EmitKind::kForward);
    out.verdict = Verdict::kPassedThrough;
    return out;
  }
  if (pkt.flags.cpk) {
    emit(cfg, out, pkt, EmitKind::kAck);
    out.verdict = Verdict::kAcked;
    return out;
  }
  const bool foreign_flow =
      !cfg.flows.empty() && !std::binary_search(cfg.flows.begin(), cfg.flows.end(), pkt.flow);
  const bool in_transit = !pkt.flags.cpd && pkt.tag != tag::kMapperData;
  if (cfg.role == SwitchRole::kForwardingOnly || pkt.dst != cfg.reducer || foreign_flow ||
      in_transit) {
    emit(cfg, out, pkt, EmitKind::kForward);
    out.verdict = Verdict::kPassedThrough;
    return out;
  }
  if (pkt.flow >= store.num_flows()) {
    out.verdict = Verdict::kRejected;
    return out;
  }

  const SeqNo state = store.m_state(pkt.flow);
  if (pkt.seq <= state) {
    emit(cfg, out, make_ack(pkt), EmitKind::kAck);
    out.verdict = Verdict::kDuplicateDropped;
    return out;
  }
  if (pkt.seq != state + 1) {
    out.verdict = Verdict::kOutOfOrderDropped;
    return out;
  }
  store.advance_m_state(pkt.flow, pkt.seq);
  out.store_delta.m_state_advanced = true;

  Packet header = pkt;
  header.kvs.clear();
  header.tag = tag::kHeaderCopy;
  if (cfg.master) header.dst = *cfg.master;
  emit(cfg, out, std::move(header), EmitKind::kHeaderCopy);
  emit(cfg, out, make_ack(pkt), EmitKind::kAck);

  if (pkt.flags.cpd) {
    flush_into(cfg, store, pkt.op, pkt.tag, out);
    out.verdict = Verdict::kFlushed;
    return out;
  }

  std::vector<KeyValue> leftovers;
  for (const KeyValue& kv : pkt.kvs) {
    switch (store.merge(pkt.op, kv)) {
      case MergeResult::kUpdated:
        ++out.store_delta.updated;
        break;
      case MergeResult::kInserted:
        ++out.store_delta.inserted;
        if (store.kv_size() > store.bound()) {
          flush_into(cfg, store, pkt.op, tag::kFlushOverflow, out);
        }
        break;
      case MergeResult::kNoSlot:
        ++out.store_delta.no_slot;
        leftovers.push_back(kv);
        break;
    }
  }
  if (!leftovers.empty()) {
    if (cfg.no_slot == NoSlotPolicy::kFallback) {
      out.store_delta.fallback_pairs += leftovers.size();
      emit(cfg, out, no_slot_fallback(cfg, pkt.op, std::move(leftovers)).packet,
           EmitKind::kFallback);
    } else {
      out.store_delta.dropped_pairs += leftovers.size();
    }
  }
  out.verdict = out.store_delta.flushes > 0 ? Verdict::kFlushed : Verdict::kAggregated;
  return out;
}

}  // namespace netreduce
