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

#include "netreduce/hosts.hpp"

#include <charconv>
#include <limits>
#include <stdexcept>
#include <utility>

#include "netreduce/dataplane.hpp"

namespace netreduce {

namespace {

constexpr std::uint64_t kPartitionSeed = 0x6a09e667f3bcc909ULL;
constexpr FlowId kControlBit = 0x80000000u;
constexpr NodeId kMaxControlNode = 1u << 15;

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

void wordcount_map(std::string_view line, std::vector<Record>& out) {
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) {
      std::string_view token = line.substr(i, std::min<std::size_t>(j - i, kKeyBytes));
      out.push_back(Record{std::string(token), 1});
    }
    i = j;
  }
}

void keyvalue_map(std::string_view line, std::vector<Record>& out) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
  if (line.empty()) return;
  const std::size_t tab = line.find('\t');
  if (tab == std::string_view::npos || tab == 0) {
    throw std::invalid_argument("expected key<TAB>value: " + std::string(line));
  }
  std::string_view text = line.substr(tab + 1);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() ||
      value < std::numeric_limits<std::int32_t>::min() ||
      value > std::numeric_limits<std::int32_t>::max()) {
    throw std::invalid_argument("bad value: " + std::string(line));
  }
  out.push_back(Record{std::string(line.substr(0, tab)), static_cast<std::int32_t>(value)});
}

MapFn map_fn_for(InputFormat format) {
  switch (format) {
    case InputFormat::kWordCount:
      return wordcount_map;
    case InputFormat::kKeyValue:
      return keyvalue_map;
  }
  throw std::invalid_argument("unknown input format");
}

void fold_into(Table& table, OpCode op, const Record& record) {
  auto [it, inserted] = table.try_emplace(record.key, record.value);
  if (!inserted) it->second = combine(op, it->second, record.value);
}

void run_map(MapperState& m, OpCode op, const MapFn& map_fn) {
  std::vector<Record> records;
  for (const std::string& source : m.partition) {
    records.clear();
    map_fn(source, records);
    for (const Record& r : records) fold_into(m.local_table, op, r);
  }
}

Packet make_collection_signal(NodeId src, NodeId dst, OpCode op, std::uint8_t reason) {
  Packet p;
  p.src = src;
  p.dst = dst;
  p.flags.cpa = true;
  p.flags.cpd = true;
  p.tag = reason;
  p.op = op;
  return p;
}

std::optional<Packet> maybe_trigger_collection(MapperState& m, const std::string& key,
                                               OpCode op) {
  m.key_heap.insert(key);
  if (m.key_heap.size() < m.heap_limit) return std::nullopt;
  m.key_heap.clear();
  ++m.signals_emitted;
  return make_collection_signal(m.host, m.reducer, op, tag::kFlushSignal);
}

std::vector<Packet> shim_assemble(MapperState& m, OpCode op) {
  std::vector<Packet> out;
  Packet current;
  auto reset = [&] {
    current = Packet{};
    current.src = m.host;
    current.dst = m.reducer;
    current.flags.cpa = true;
    current.tag = tag::kMapperData;
    current.op = op;
  };
  reset();
  for (const auto& [key, value] : m.local_table) {
    current.kvs.push_back(KeyValue{Key(key), value});
    std::optional<Packet> signal = maybe_trigger_collection(m, key, op);
    if (current.kvs.size() == kMaxPairsPerPacket || signal) {
      out.push_back(std::move(current));
      reset();
    }
    if (signal) out.push_back(std::move(*signal));
  }
  if (!current.kvs.empty()) out.push_back(std::move(current));
  return out;
}

void final_reduce(ReducerState& r, const Packet& pkt) {
  if (!pkt.flags.cpa) throw std::invalid_argument("final_reduce needs a cpa packet");
  for (const KeyValue& kv : pkt.kvs) fold_into(r.final_table, pkt.op, {kv.key.text(), kv.value});
}

std::vector<SimTime> periodic_signal_times(SimTime interval, SimTime job_length) {
  std::vector<SimTime> out;
  if (interval <= 0) return out;
  for (SimTime t = interval; t <= job_length; t += interval) out.push_back(t);
  return out;
}

const char* job_status_name(JobStatus s) {
  switch (s) {
    case JobStatus::kPending:
      return "pending";
    case JobStatus::kRunning:
      return "running";
    case JobStatus::kCompleted:
      return "completed";
    case JobStatus::kStalled:
      return "stalled";
    case JobStatus::kHorizonExceeded:
      return "horizon-exceeded";
  }
  return "?";
}

const char* run_mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::kBaseline:
      return "baseline";
    case RunMode::kInNetwork:
      return "p4com";
    case RunMode::kNoMemoryMgmt:
      return "no-mem";
  }
  return "?";
}

RunMode parse_run_mode(std::string_view text) {
  if (text == "baseline") return RunMode::kBaseline;
  if (text == "p4com") return RunMode::kInNetwork;
  if (text == "no-mem") return RunMode::kNoMemoryMgmt;
  throw std::invalid_argument("unknown mode: " + std::string(text));
}

FlowId control_flow_id(NodeId src, NodeId dst) {
  if (src >= kMaxControlNode || dst >= kMaxControlNode) {
    throw std::out_of_range("node id too large for a control flow");
  }
  return kControlBit | (src << 15) | dst;
}

bool is_control_flow(FlowId flow) { return (flow & kControlBit) != 0; }

HostAgent::HostAgent(HostContext& ctx, const JobLayout& layout) : ctx_(ctx), layout_(layout) {}

void HostAgent::add_mapper(std::size_t mapper_index, std::vector<std::string> partition,
                           MapFn map_fn) {
  MapperRole& role = mappers_[mapper_index];
  role.index = mapper_index;
  role.partition = std::move(partition);
  role.map_fn = std::move(map_fn);
  for (const JobLayout::MapperFlow& f : layout_.mappers.at(mapper_index).flows) {
    streams_[f.flow] = StreamRole{mapper_index, f.group, false};
  }
}

void HostAgent::add_reducer(std::size_t group) {
  const JobLayout::Group& g = layout_.groups.at(group);
  ReducerState& r = reducers_[group];
  r.expected_flows.insert(g.mapper_flows.begin(), g.mapper_flows.end());
  drains_[group];
  flow_group_[g.switch_flow] = group;
  for (FlowId f : g.mapper_flows) flow_group_[f] = group;
}

void HostAgent::make_master() {
  master_.emplace();
  for (std::size_t g = 0; g < layout_.groups.size(); ++g) {
    for (FlowId f : layout_.groups[g].mapper_flows) master_->flow_group[f] = g;
  }
}

std::vector<const SenderState*> HostAgent::senders() const {
  std::vector<const SenderState*> out;
  for (const auto& [flow, rf] : flows_) out.push_back(&rf->state());
  return out;
}

std::map<FlowId, SeqNo> HostAgent::header_progress() const {
  std::map<FlowId, SeqNo> out;
  if (!master_) return out;
  for (FlowId f : master_->header_flows) out[f] = master_->header_copies.find(f)->contiguous();
  return out;
}

ReliableFlow& HostAgent::flow_for(FlowId flow) {
  std::unique_ptr<ReliableFlow>& slot = flows_[flow];
  if (!slot) slot = std::make_unique<ReliableFlow>(ctx_, flow, layout_.sender);
  return *slot;
}

void HostAgent::send_control(NodeId dst, std::uint8_t kind, std::uint32_t aux) {
  if (dst == ctx_.self()) {
    ctx_.schedule(ctx_.now(), [this, kind, aux] { dispatch_control(kind, aux); });
    return;
  }
  Packet p;
  p.src = ctx_.self();
  p.dst = dst;
  p.tag = kind;
  p.aux = aux;
  flow_for(control_flow_id(ctx_.self(), dst)).enqueue(std::move(p));
}

void HostAgent::send_ack(const Packet& pkt) {
  Packet ack;
  ack.src = ctx_.self();
  ack.dst = pkt.src;
  ack.flow = pkt.flow;
  ack.seq = pkt.seq;
  ack.flags.cpa = true;
  ack.flags.cpk = true;
  ack.op = pkt.flags.cpa ? pkt.op : OpCode::kAdd;
  ctx_.transmit(std::move(ack));
}

void HostAgent::start() {
  if (!master_) throw std::logic_error("start() on a host without the master role");
  for (std::size_t i = 0; i < layout_.mappers.size(); ++i) {
    send_control(layout_.mappers[i].host, tag::kCtlStart, static_cast<std::uint32_t>(i));
  }
  for (std::size_t g = 0; g < layout_.groups.size(); ++g) master_check_group(g);
  bool any_aggregated = false;
  for (const JobLayout::Group& g : layout_.groups) any_aggregated |= g.aggregated;
  if (layout_.collect_interval > 0 && any_aggregated) {
    ctx_.schedule(ctx_.now() + layout_.collect_interval, [this] { master_periodic(); });
  }
  master_finish_if_done();
}

void HostAgent::receive(const Packet& pkt) {
  if (pkt.flags.cpk) {
    on_ack(pkt);
  } else if (!pkt.flags.cpa) {
    on_control(pkt);
  } else {
    on_data(pkt);
  }
}

void HostAgent::on_ack(const Packet& pkt) {
  auto it = flows_.find(pkt.flow);
  if (it == flows_.end()) {
    ++ctx_.metrics().counters.unknown_acks;
    return;
  }
  const AckResult result = it->second->on_ack(pkt.seq);
  if (!result.fresh) return;
  if (result.payload_bytes > 0 || is_control_flow(pkt.flow)) ctx_.note_progress();
  auto s = streams_.find(pkt.flow);
  if (s != streams_.end()) {
    ctx_.metrics().add_goodput(s->second.mapper, ctx_.now(), result.payload_bytes);
    maybe_complete_stream(pkt.flow);
  }
}

void HostAgent::on_control(const Packet& pkt) {
  if (!is_control_flow(pkt.flow)) {
    ++ctx_.metrics().counters.rejected;
    return;
  }
  send_ack(pkt);
  if (!control_rx_.accept(pkt.flow, pkt.seq)) {
    ++ctx_.metrics().counters.duplicates_dropped;
    return;
  }
  ctx_.note_progress();
  dispatch_control(pkt.tag, pkt.aux);
}

void HostAgent::dispatch_control(std::uint8_t kind, std::uint32_t aux) {
  ++ctx_.metrics().counters.control_messages;
  switch (kind) {
    case tag::kCtlStart:
      start_mapper(aux);
      break;
    case tag::kCtlSendComplete:
      master_on_send_complete(aux);
      break;
    case tag::kCtlAllSent:
      if (drains_.contains(aux)) {
        drains_[aux].all_sent = true;
        maybe_finish_reducer(aux);
      }
      break;
    case tag::kCtlOverflowReport:
      if (master_ && aux < layout_.groups.size()) {
        for (FlowId f : layout_.groups[aux].mapper_flows) {
          for (const JobLayout::Mapper& m : layout_.mappers) {
            for (const JobLayout::MapperFlow& mf : m.flows) {
              if (mf.flow == f) send_control(m.host, tag::kCtlOverflowNotice, f);
            }
          }
        }
      }
      break;
    case tag::kCtlOverflowNotice: {
      auto it = flows_.find(aux);
      if (layout_.overflow_backoff && it != flows_.end()) it->second->on_overflow_notice();
      break;
    }
    case tag::kCtlFin:
      if (master_) {
        master_->fins.insert(aux);
        master_finish_if_done();
      }
      break;
    default:
      ++ctx_.metrics().counters.rejected;
      break;
  }
}

void HostAgent::on_data(const Packet& pkt) {
  if (!pkt.flags.cpd && pkt.tag == tag::kHeaderCopy) {
    if (master_) {
      master_->header_copies.accept(pkt.flow, pkt.seq);
      master_->header_flows.insert(pkt.flow);
      ++ctx_.metrics().counters.header_copies;
    }
    return;
  }
  auto g = flow_group_.find(pkt.flow);
  if (g == flow_group_.end()) {
    ++ctx_.metrics().counters.rejected;
    return;
  }
  const std::size_t group = g->second;
  send_ack(pkt);
  if (!data_rx_.accept(pkt.flow, pkt.seq)) {
    ++ctx_.metrics().counters.duplicates_dropped;
    return;
  }
  if (!pkt.kvs.empty() || pkt.tag == tag::kFlushDrain) ctx_.note_progress();
  final_reduce(reducers_.at(group), pkt);
  if (pkt.flags.cpd && pkt.flow == layout_.groups[group].switch_flow) {
    if (pkt.tag == tag::kFlushDrain) {
      DrainTracker& d = drains_[group];
      d.seqs.insert(pkt.seq);
      d.expected = pkt.frag_count;
    } else if (pkt.tag == tag::kFlushOverflow && pkt.frag_index == 0 &&
               layout_.overflow_backoff) {
      send_control(layout_.master, tag::kCtlOverflowReport, static_cast<std::uint32_t>(group));
    }
  }
  maybe_finish_reducer(group);
}

void HostAgent::start_mapper(std::size_t mapper_index) {
  auto it = mappers_.find(mapper_index);
  if (it == mappers_.end() || it->second.started) return;
  MapperRole& role = it->second;
  role.started = true;

  MapperState full;
  full.host = ctx_.self();
  full.partition = std::move(role.partition);
  run_map(full, layout_.op, role.map_fn);

  const std::vector<JobLayout::MapperFlow>& flows = layout_.mappers.at(mapper_index).flows;
  std::vector<MapperState> parts(flows.size());
  for (std::size_t i = 0; i < flows.size(); ++i) {
    parts[i].host = ctx_.self();
    parts[i].reducer = layout_.groups.at(flows[i].group).reducer;
    parts[i].heap_limit = layout_.heap_limit;
  }
  if (flows.size() == 1) {
    parts[0].local_table = std::move(full.local_table);
  } else if (!flows.empty()) {
    for (auto& [key, value] : full.local_table) {
      const std::size_t i = key_hash(Key(key), kPartitionSeed) % flows.size();
      parts[i].local_table.emplace(key, value);
    }
  }
  for (std::size_t i = 0; i < flows.size(); ++i) {
    std::vector<Packet> packets = shim_assemble(parts[i], layout_.op);
    ctx_.metrics().counters.heap_signals += parts[i].signals_emitted;
    ReliableFlow& rf = flow_for(flows[i].flow);
    for (Packet& p : packets) rf.enqueue(std::move(p));
    maybe_complete_stream(flows[i].flow);
  }
}

void HostAgent::maybe_complete_stream(FlowId flow) {
  auto s = streams_.find(flow);
  if (s == streams_.end() || s->second.complete_sent) return;
  if (!mappers_.at(s->second.mapper).started || !flow_for(flow).drained()) return;
  s->second.complete_sent = true;
  send_control(layout_.master, tag::kCtlSendComplete, flow);
}

void HostAgent::maybe_finish_reducer(std::size_t group) {
  DrainTracker& d = drains_.at(group);
  if (d.fin_sent) return;
  const JobLayout::Group& g = layout_.groups[group];
  bool done = false;
  if (g.aggregated) {
    const ReceiverState* rx = data_rx_.find(g.switch_flow);
    done = d.expected > 0 && d.seqs.size() == d.expected && rx != nullptr &&
           rx->contiguous() >= *d.seqs.rbegin();
  } else {
    done = d.all_sent;
  }
  if (!done) return;
  d.fin_sent = true;
  ReducerState& r = reducers_.at(group);
  r.fins_received = r.expected_flows;
  send_control(layout_.master, tag::kCtlFin, static_cast<std::uint32_t>(group));
}

void HostAgent::master_on_send_complete(FlowId flow) {
  if (!master_) return;
  master_->complete_flows.insert(flow);
  auto it = master_->flow_group.find(flow);
  if (it != master_->flow_group.end()) master_check_group(it->second);
}

void HostAgent::master_check_group(std::size_t group) {
  if (master_->drained_groups.contains(group)) return;
  const JobLayout::Group& g = layout_.groups[group];
  for (FlowId f : g.mapper_flows) {
    if (!master_->complete_flows.contains(f)) return;
  }
  master_->drained_groups.insert(group);
  if (g.aggregated) {
    flow_for(g.master_flow)
        .enqueue(make_collection_signal(ctx_.self(), g.reducer, layout_.op, tag::kFlushDrain));
  } else {
    send_control(g.reducer, tag::kCtlAllSent, static_cast<std::uint32_t>(group));
  }
}

void HostAgent::master_periodic() {
  bool pending = false;
  for (std::size_t i = 0; i < layout_.groups.size(); ++i) {
    const JobLayout::Group& g = layout_.groups[i];
    if (!g.aggregated || master_->drained_groups.contains(i)) continue;
    pending = true;
    flow_for(g.master_flow)
        .enqueue(make_collection_signal(ctx_.self(), g.reducer, layout_.op, tag::kFlushSignal));
    ++ctx_.metrics().counters.periodic_signals;
  }
  if (pending) {
    ctx_.schedule(ctx_.now() + layout_.collect_interval, [this] { master_periodic(); });
  }
}

void HostAgent::master_finish_if_done() {
  if (master_->finished || master_->fins.size() < layout_.groups.size()) return;
  master_->finished = true;
  ctx_.job_finished();
}

}  // namespace netreduce
