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

#include "netreduce/netsim.hpp"

#include <algorithm>
#include <chrono>
#include <memory>
#include <optional>
#include <set>
#include <utility>

#include "netreduce/codec.hpp"
#include "netreduce/dataplane.hpp"
#include "netreduce/rng.hpp"

namespace netreduce {

SimTime serialization_ns(std::size_t bytes, std::uint64_t rate_bps) {
  if (rate_bps == 0) throw std::invalid_argument("zero link rate");
  const unsigned __int128 bit_ns = static_cast<unsigned __int128>(bytes) * 8 * 1'000'000'000ULL;
  return static_cast<SimTime>((bit_ns + rate_bps - 1) / rate_bps);
}

void EventQueue::schedule(SimTime at, std::function<void()> fn) {
  if (at < now_) throw std::logic_error("event scheduled in the past");
  heap_.push_back(Event{at, next_order_++, std::move(fn)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
}

SimTime EventQueue::next_time() const {
  if (heap_.empty()) throw std::logic_error("no pending events");
  return heap_.front().at;
}

void EventQueue::run_next() {
  if (heap_.empty()) throw std::logic_error("no pending events");
  std::pop_heap(heap_.begin(), heap_.end(), Later{});
  Event ev = std::move(heap_.back());
  heap_.pop_back();
  now_ = ev.at;
  ev.fn();
}

Channel::Channel(std::uint64_t rate_bps, SimTime delay_ns, std::size_t queue_pkts, double loss,
                 double dup_prob, std::uint64_t rng_seed)
    : rate_bps_(rate_bps),
      delay_ns_(delay_ns),
      queue_pkts_(queue_pkts),
      loss_(loss),
      dup_prob_(dup_prob),
      rng_(rng_seed) {}

std::size_t Channel::occupancy(SimTime now) {
  while (!departures_.empty() && departures_.front() <= now) departures_.pop_front();
  return departures_.size();
}

ChannelVerdict Channel::offer(std::size_t bytes, SimTime now) {
  ChannelVerdict v;
  if (occupancy(now) >= queue_pkts_) {
    v.fate = Fate::kTailDropped;
    return v;
  }
  const SimTime depart = std::max(now, busy_until_) + serialization_ns(bytes, rate_bps_);
  busy_until_ = depart;
  departures_.push_back(depart);
  v.arrival = depart + delay_ns_;
  const bool lost = unit_double(rng_) < loss_;
  if (dup_prob_ > 0) v.duplicated = unit_double(rng_) < dup_prob_;
  if (lost) {
    v.fate = Fate::kLost;
    v.duplicated = false;
  }
  return v;
}

SimTime estimate_mean_rtt(const CompiledJob& job, RunMode mode) {
  const Topology& topo = job.topo;
  auto leg = [&](const std::vector<NodeId>& path, std::size_t bytes) {
    SimTime t = 0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      const Link& l = topo.links()[topo.ports(path[i])[*topo.port_to(path[i], path[i + 1])].link];
      t += serialization_ns(bytes, l.rate_bps) + l.delay_ns;
    }
    return t;
  };
  SimTime total = 0;
  std::size_t count = 0;
  for (const FlowAssignment& f : job.flows.flows) {
    if (f.kind != FlowKind::kMapper) continue;
    const NodeId src = job.mapper_host(f.mapper);
    const NodeId dst =
        mode == RunMode::kBaseline ? job.reducer_host(f.group) : job.placement.site.at(f.group);
    const std::vector<NodeId> out = topo.path(src, dst);
    const std::vector<NodeId> back = topo.path(dst, src);
    total += leg(out, kHeaderBytes + 2 + kPairBytes * kMaxPairsPerPacket) +
             leg(back, kHeaderBytes + 2);
    ++count;
  }
  return count == 0 ? 100'000 : std::max<SimTime>(1, total / static_cast<SimTime>(count));
}

std::uint64_t measure_last_hop(const MetricsLedger& ledger) { return ledger.last_hop_bytes(); }

namespace {

class Simulation;

class HostIo : public HostContext {
 public:
  HostIo(Simulation& sim, NodeId self) : sim_(sim), self_(self) {}
  SimTime now() const override;
  void transmit(Packet packet) override;
  void schedule(SimTime at, std::function<void()> fn) override;
  NodeId self() const override { return self_; }
  void note_progress() override;
  void job_finished() override;
  MetricsLedger& metrics() override;

 private:
  Simulation& sim_;
  NodeId self_;
};

class SwitchIo : public EndpointIo {
 public:
  SwitchIo(Simulation& sim, NodeId self) : sim_(sim), self_(self) {}
  SimTime now() const override;
  void transmit(Packet packet) override;
  void schedule(SimTime at, std::function<void()> fn) override;

 private:
  Simulation& sim_;
  NodeId self_;
};

struct Site {
  std::size_t group = 0;
  SwitchConfig cfg;
  RegisterStore store;
  std::unique_ptr<ReliableFlow> emitter;  // flush and fallback toward the reducer
};

struct SwitchNode {
  std::size_t index = 0;  // position among switches
  SwitchConfig forward;
  RegisterStore idle_store{1, 1, {0}, 0};
  std::vector<std::unique_ptr<Site>> sites;
  std::unique_ptr<SwitchIo> io;
};

class Simulation {
 public:
  Simulation(const CompiledJob& job, const ScenarioConfig& cfg,
             const std::vector<MapperInput>& inputs);
  SimulationResult run();

  EventQueue& queue() { return queue_; }
  MetricsLedger& ledger() { return ledger_; }
  void note_progress() { last_progress_ = queue_.now(); }
  void finish() {
    if (!finished_) {
      finished_ = true;
      end_ = queue_.now();
    }
  }
  void route_and_send(NodeId from, Packet pkt, bool local_ok);

 private:
  std::size_t channel_of(NodeId node, PortId port) const;
  void send(NodeId from, PortId port, Packet pkt);
  void arrive(std::size_t channel, const std::vector<std::uint8_t>& bytes);
  void deliver(NodeId node, const Packet& pkt, PortId in_port);
  void switch_receive(SwitchNode& sw, NodeId node, const Packet& pkt, PortId in_port);

  const CompiledJob& job_;
  const ScenarioConfig& cfg_;
  JobLayout layout_;
  std::vector<RouteTable> routes_;
  EventQueue queue_;
  MetricsLedger ledger_;
  std::vector<Channel> channels_;
  std::vector<NodeId> channel_to_;
  std::vector<PortId> channel_in_port_;
  std::vector<std::unique_ptr<HostIo>> host_io_;
  std::vector<std::unique_ptr<HostAgent>> hosts_;
  std::vector<std::unique_ptr<SwitchNode>> switches_;
  SimTime mean_rtt_ = 0;
  SimTime last_progress_ = 0;
  bool finished_ = false;
  SimTime end_ = 0;
  std::uint64_t events_ = 0;
};

SimTime HostIo::now() const { return sim_.queue().now(); }
void HostIo::transmit(Packet packet) { sim_.route_and_send(self_, std::move(packet), true); }
void HostIo::schedule(SimTime at, std::function<void()> fn) {
  sim_.queue().schedule(at, std::move(fn));
}
void HostIo::note_progress() { sim_.note_progress(); }
void HostIo::job_finished() { sim_.finish(); }
MetricsLedger& HostIo::metrics() { return sim_.ledger(); }

SimTime SwitchIo::now() const { return sim_.queue().now(); }
void SwitchIo::transmit(Packet packet) { sim_.route_and_send(self_, std::move(packet), false); }
void SwitchIo::schedule(SimTime at, std::function<void()> fn) {
  sim_.queue().schedule(at, std::move(fn));
}

Simulation::Simulation(const CompiledJob& job, const ScenarioConfig& cfg,
                       const std::vector<MapperInput>& inputs)
    : job_(job), cfg_(cfg) {
  if (inputs.size() != job.spec.mappers.size()) {
    throw std::invalid_argument("one input per mapper required");
  }
  const Topology& topo = job.topo;
  const std::size_t n = topo.nodes().size();
  mean_rtt_ = estimate_mean_rtt(job, cfg.mode);
  layout_ = job.layout(cfg, cfg.collect_interval.value_or(10 * mean_rtt_));
  layout_.sender.rtt_estimate = mean_rtt_;

  routes_ = job.routes;
  if (cfg.mode == RunMode::kBaseline) {
    for (RouteTable& r : routes_) r.clear_flow_rules();
  }

  // Channels: link l yields 2l (a to b) and 2l + 1 (b to a).
  std::set<NodeId> reducer_hosts;
  for (std::size_t g = 0; g < job.spec.reducers.size(); ++g) {
    reducer_hosts.insert(job.reducer_host(g));
  }
  const std::vector<Link>& links = topo.links();
  channel_to_.resize(2 * links.size());
  channel_in_port_.resize(2 * links.size());
  for (std::size_t l = 0; l < links.size(); ++l) {
    const Link& link = links[l];
    const double p = 1 - (1 - link.loss) * (1 - cfg.loss);
    for (int dir = 0; dir < 2; ++dir) {
      const std::size_t c = 2 * l + dir;
      const NodeId from = dir == 0 ? link.a : link.b;
      const NodeId to = dir == 0 ? link.b : link.a;
      channels_.emplace_back(link.rate_bps, link.delay_ns, link.queue_pkts, p, cfg.dup_prob,
                             stream_seed(cfg.seed, c));
      channel_to_[c] = to;
      const std::vector<Port>& back = topo.ports(to);
      for (PortId i = 0; i < back.size(); ++i) {
        if (back[i].link == l) channel_in_port_[c] = i;
      }
      ledger_.link_names.push_back(topo.node(from).name + "->" + topo.node(to).name);
      ledger_.last_hop.push_back(reducer_hosts.contains(to));
    }
  }
  ledger_.links.resize(channels_.size());
  for (const MapperDecl& m : job.spec.mappers) ledger_.mapper_names.push_back(m.id);
  ledger_.goodput.resize(job.spec.mappers.size());
  ledger_.goodput_window = cfg.goodput_window;

  host_io_.resize(n);
  hosts_.resize(n);
  switches_.resize(n);
  for (NodeId id = 0; id < n; ++id) {
    if (topo.node(id).is_host) {
      host_io_[id] = std::make_unique<HostIo>(*this, id);
      hosts_[id] = std::make_unique<HostAgent>(*host_io_[id], layout_);
    } else {
      auto sw = std::make_unique<SwitchNode>();
      sw->index = ledger_.switch_names.size();
      sw->forward.self = id;
      sw->forward.role = SwitchRole::kForwardingOnly;
      sw->forward.routes = routes_[id];
      sw->io = std::make_unique<SwitchIo>(*this, id);
      switches_[id] = std::move(sw);
      ledger_.switch_names.push_back(topo.node(id).name);
    }
  }
  ledger_.peak_kv_size.assign(ledger_.switch_names.size(), 0);

  hosts_.at(job.master)->make_master();
  for (std::size_t m = 0; m < inputs.size(); ++m) {
    hosts_.at(job.mapper_host(m))->add_mapper(m, inputs[m].partition, inputs[m].map_fn);
  }
  for (std::size_t g = 0; g < job.spec.reducers.size(); ++g) {
    hosts_.at(job.reducer_host(g))->add_reducer(g);
  }

  if (cfg.mode != RunMode::kBaseline) {
    const bool no_mem = cfg.mode == RunMode::kNoMemoryMgmt;
    for (std::size_t g = 0; g < job.spec.reducers.size(); ++g) {
      const NodeId at = job.placement.site.at(g);
      SwitchNode& sw = *switches_.at(at);
      auto site = std::make_unique<Site>(Site{g, SwitchConfig{}, RegisterStore(1, 1, {0}, 0), {}});
      SwitchConfig& c = site->cfg;
      c.self = at;
      c.role = SwitchRole::kAggregating;
      c.num_slots = cfg.num_slots;
      c.bound_B = no_mem ? cfg.num_slots : cfg.bound_B;
      c.num_hash = cfg.num_hash;
      c.reducer = job.reducer_host(g);
      c.master = job.master;
      c.flush_flow = job.flows.switch_flow(g);
      c.no_slot = no_mem ? NoSlotPolicy::kDrop : NoSlotPolicy::kFallback;
      c.flows = layout_.groups[g].mapper_flows;
      c.flows.push_back(job.flows.master_flow(g));
      std::sort(c.flows.begin(), c.flows.end());
      c.routes = routes_[at];
      c.validate();
      site->store = RegisterStore::for_config(c, job.flows.size());
      site->emitter = std::make_unique<ReliableFlow>(*sw.io, c.flush_flow, layout_.sender);
      sw.sites.push_back(std::move(site));
    }
  }
}

std::size_t Simulation::channel_of(NodeId node, PortId port) const {
  const Port& p = job_.topo.ports(node).at(port);
  return 2 * p.link + (job_.topo.links()[p.link].a == node ? 0 : 1);
}

void Simulation::route_and_send(NodeId from, Packet pkt, bool local_ok) {
  std::optional<PortId> port = routes_[from].route(pkt);
  if (!port) {
    if (local_ok && pkt.dst == from) {
      queue_.schedule(queue_.now(), [this, from, pkt = std::move(pkt)] { deliver(from, pkt, 0); });
    } else {
      ++ledger_.counters.unroutable;
    }
    return;
  }
  send(from, *port, std::move(pkt));
}

void Simulation::send(NodeId from, PortId port, Packet pkt) {
  const std::size_t c = channel_of(from, port);
  std::vector<std::uint8_t> bytes = encode(pkt);
  LinkCounters& lc = ledger_.links[c];
  const ChannelVerdict v = channels_[c].offer(bytes.size(), queue_.now());
  ++lc.packets_offered;
  lc.bytes_offered += bytes.size();
  switch (v.fate) {
    case Fate::kTailDropped:
      ++lc.tail_drops;
      lc.bytes_dropped += bytes.size();
      return;
    case Fate::kLost:
      ++lc.loss_drops;
      lc.bytes_dropped += bytes.size();
      return;
    case Fate::kDelivered:
      break;
  }
  if (v.duplicated) {
    ++lc.duplicates_injected;
    ++lc.packets_offered;
    lc.bytes_offered += bytes.size();
    queue_.schedule(v.arrival, [this, c, bytes] { arrive(c, bytes); });
  }
  queue_.schedule(v.arrival, [this, c, bytes = std::move(bytes)] { arrive(c, bytes); });
}

void Simulation::arrive(std::size_t channel, const std::vector<std::uint8_t>& bytes) {
  LinkCounters& lc = ledger_.links[channel];
  ++lc.packets_delivered;
  lc.bytes_delivered += bytes.size();
  lc.payload_bytes_delivered += peek_payload_bytes(bytes);
  Packet pkt;
  try {
    pkt = decode(bytes);
  } catch (const Malformed&) {
    ++ledger_.counters.malformed;
    return;
  }
  deliver(channel_to_[channel], pkt, channel_in_port_[channel]);
}

void Simulation::deliver(NodeId node, const Packet& pkt, PortId in_port) {
  if (hosts_[node]) {
    if (pkt.dst != node) {
      ++ledger_.counters.unroutable;
      return;
    }
    hosts_[node]->receive(pkt);
    return;
  }
  switch_receive(*switches_[node], node, pkt, in_port);
}

void Simulation::switch_receive(SwitchNode& sw, NodeId node, const Packet& pkt, PortId in_port) {
  if (pkt.dst == node) {
    for (auto& site : sw.sites) {
      if (pkt.flags.cpk && site->cfg.flush_flow == pkt.flow) {
        const AckResult r = site->emitter->on_ack(pkt.seq);
        if (r.fresh && r.payload_bytes > 0) note_progress();
        return;
      }
    }
    ++ledger_.counters.rejected;
    return;
  }
  Site* site = nullptr;
  for (auto& s : sw.sites) {
    if (s->cfg.reducer == pkt.dst) {
      site = s.get();
      break;
    }
  }
  const PipelineOutcome out = site ? process_packet(site->cfg, site->store, pkt, in_port)
                                   : process_packet(sw.forward, sw.idle_store, pkt, in_port);
  RunCounters& rc = ledger_.counters;
  switch (out.verdict) {
    case Verdict::kDuplicateDropped:
      ++rc.duplicates_dropped;
      break;
    case Verdict::kOutOfOrderDropped:
      ++rc.out_of_order_dropped;
      break;
    case Verdict::kRejected:
      ++rc.rejected;
      break;
    default:
      break;
  }
  const StoreDelta& d = out.store_delta;
  rc.flushes += d.flushes;
  rc.overflow_flushes += d.overflow_flushes;
  rc.fallback_pairs += d.fallback_pairs;
  rc.dropped_pairs += d.dropped_pairs;
  rc.unroutable += out.unroutable;
  // Periodic signals advance m_state too, but only pairs count as progress.
  if (d.m_state_advanced && !pkt.kvs.empty()) note_progress();

  for (const Emission& e : out.emitted) {
    if (e.kind == EmitKind::kFlush || e.kind == EmitKind::kFallback) {
      if (e.kind == EmitKind::kFlush) ++rc.flush_packets;
      site->emitter->enqueue(e.packet);
    } else {
      send(node, e.port, e.packet);
    }
  }
  std::size_t kv = 0;
  for (auto& s : sw.sites) kv += s->store.kv_size();
  ledger_.peak_kv_size[sw.index] = std::max(ledger_.peak_kv_size[sw.index], kv);
}

SimulationResult Simulation::run() {
  const NodeId master = job_.master;
  queue_.schedule(0, [this, master] { hosts_[master]->start(); });
  const auto wall_start = std::chrono::steady_clock::now();
  while (!finished_ && !queue_.empty()) {
    const SimTime t = queue_.next_time();
    if (t > cfg_.max_sim_time) {
      throw HorizonExceeded("simulated time limit reached", queue_.now());
    }
    if (t - last_progress_ > cfg_.stall_timeout) {
      throw Stalled("no progress for " + std::to_string(t - last_progress_) + " ns", t);
    }
    queue_.run_next();
    ++events_;
    if ((events_ & 4095) == 0) {
      const std::chrono::duration<double> spent = std::chrono::steady_clock::now() - wall_start;
      if (spent.count() > cfg_.wall_clock_limit_s) {
        throw HorizonExceeded("wall-clock limit reached", queue_.now());
      }
    }
  }
  if (!finished_) throw Stalled("no pending events but the job is unfinished", queue_.now());

  SimulationResult result;
  result.run.op = job_.spec.op;
  for (const MapperDecl& m : job_.spec.mappers) result.run.mappers.push_back(m.id);
  for (const ReducerDecl& r : job_.spec.reducers) result.run.reducers.push_back(r.id);
  result.run.start = 0;
  result.run.end = end_;
  result.run.status = JobStatus::kCompleted;
  result.mean_rtt = mean_rtt_;
  result.collect_interval = layout_.collect_interval;
  result.events = events_;

  for (std::size_t g = 0; g < job_.spec.reducers.size(); ++g) {
    const Table& t = hosts_[job_.reducer_host(g)]->reducers().at(g).final_table;
    result.group_tables.push_back(t);
    for (const auto& [k, v] : t) fold_into(result.final_table, job_.spec.op, {k, v});
  }

  RunCounters& rc = ledger_.counters;
  auto add_sender = [&rc](const SenderState& s) {
    rc.retransmits += s.retransmits();
    rc.timeouts += s.timeouts();
    rc.dup_acks += s.dup_acks();
    rc.unknown_acks += s.unknown_acks();
    rc.backoff_signals += s.backoff_signals();
    rc.halvings += s.halvings();
  };
  for (const auto& h : hosts_) {
    if (!h) continue;
    for (const SenderState* s : h->senders()) add_sender(*s);
  }
  for (const auto& sw : switches_) {
    if (!sw) continue;
    for (const auto& site : sw->sites) {
      add_sender(site->emitter->state());
      result.residual_kv_size.push_back(site->store.kv_size());
    }
  }
  for (const LinkCounters& lc : ledger_.links) {
    rc.losses += lc.loss_drops;
    rc.tail_drops += lc.tail_drops;
    rc.duplicates_injected += lc.duplicates_injected;
  }
  ledger_.jct = result.run.jct();
  result.metrics = std::move(ledger_);
  return result;
}

}  // namespace

SimulationResult simulate(const CompiledJob& job, const ScenarioConfig& cfg,
                          const std::vector<MapperInput>& inputs) {
  Simulation sim(job, cfg, inputs);
  return sim.run();
}

}  // namespace netreduce
