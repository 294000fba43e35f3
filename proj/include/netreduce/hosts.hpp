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

// Master, mapper and reducer roles. The free functions are the per-role
// building blocks; HostAgent wires them to packets and timers.

#ifndef NETREDUCE_HOSTS_HPP_
#define NETREDUCE_HOSTS_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "netreduce/codec.hpp"
#include "netreduce/metrics.hpp"
#include "netreduce/transport.hpp"

namespace netreduce {

struct Record {
  std::string key;
  std::int32_t value = 0;
  friend bool operator==(const Record&, const Record&) = default;
};

using Table = std::map<std::string, std::int32_t>;

// Turns one input source (a text line) into records.
using MapFn = std::function<void(std::string_view source, std::vector<Record>& out)>;

// Whitespace tokens, each counted once. Tokens longer than 64 octets are
// truncated to fit the key field.
void wordcount_map(std::string_view line, std::vector<Record>& out);
// "key<TAB>value" lines; blank lines are skipped. Throws std::invalid_argument.
void keyvalue_map(std::string_view line, std::vector<Record>& out);

enum class InputFormat { kWordCount, kKeyValue };
MapFn map_fn_for(InputFormat format);

// Reference fold used for local reduction and as the single-machine oracle.
void fold_into(Table& table, OpCode op, const Record& record);

struct MapperState {
  NodeId host = 0;
  NodeId reducer = 0;
  std::vector<std::string> partition;
  Table local_table;
  std::unordered_set<std::string> key_heap;
  std::size_t heap_limit = 100'000;
  std::size_t signals_emitted = 0;
};

// Map plus local reduce of the whole partition into local_table.
void run_map(MapperState& m, OpCode op, const MapFn& map_fn);

// Records `key` in the heap; returns a collection signal when the heap
// reaches its limit, clearing it.
std::optional<Packet> maybe_trigger_collection(MapperState& m, const std::string& key,
                                               OpCode op);

Packet make_collection_signal(NodeId src, NodeId dst, OpCode op, std::uint8_t reason);

// Data packets in sorted key order, at most 20 pairs each, with any
// heap-triggered collection signals placed after the packet that filled
// the heap. Throws KeyTooLong.
std::vector<Packet> shim_assemble(MapperState& m, OpCode op);

struct ReducerState {
  Table final_table;
  std::set<FlowId> expected_flows;
  std::set<FlowId> fins_received;
  bool complete() const { return fins_received == expected_flows; }
};

// Merges every pair carried by `pkt` under pkt.op. Requires pkt.flags.cpa.
void final_reduce(ReducerState& r, const Packet& pkt);

// Signal instants k * interval (k >= 1) not after job_length.
std::vector<SimTime> periodic_signal_times(SimTime interval, SimTime job_length);

enum class JobStatus { kPending, kRunning, kCompleted, kStalled, kHorizonExceeded };
const char* job_status_name(JobStatus s);

struct JobRun {
  OpCode op = OpCode::kAdd;
  std::vector<std::string> mappers;
  std::vector<std::string> reducers;
  SimTime start = 0;
  SimTime end = 0;
  JobStatus status = JobStatus::kPending;
  SimTime jct() const { return end - start; }
};

enum class RunMode { kBaseline, kInNetwork, kNoMemoryMgmt };
const char* run_mode_name(RunMode mode);
RunMode parse_run_mode(std::string_view text);  // baseline | p4com | no-mem

// Flow id used for reliable control messages from `src` to `dst`.
FlowId control_flow_id(NodeId src, NodeId dst);
bool is_control_flow(FlowId flow);

// What the agents need to know about a compiled job.
struct JobLayout {
  struct MapperFlow {
    FlowId flow = 0;
    std::size_t group = 0;
  };
  struct Mapper {
    std::string name;
    NodeId host = 0;
    std::vector<MapperFlow> flows;
  };
  struct Group {
    std::string name;
    NodeId reducer = 0;
    bool aggregated = false;  // an in-network site handles this group
    FlowId master_flow = 0;
    FlowId switch_flow = 0;
    std::vector<FlowId> mapper_flows;
  };

  OpCode op = OpCode::kAdd;
  NodeId master = 0;
  std::vector<Mapper> mappers;
  std::vector<Group> groups;
  SenderConfig sender;
  std::size_t heap_limit = 100'000;
  SimTime collect_interval = 0;  // 0 disables periodic signals
  bool overflow_backoff = true;
};

// Host-side view of the simulation.
class HostContext : public EndpointIo {
 public:
  virtual NodeId self() const = 0;
  virtual void note_progress() = 0;
  virtual void job_finished() = 0;
  virtual MetricsLedger& metrics() = 0;
};

// All roles hosted on one node. Owns its state exclusively; talks to the
// rest of the job only through packets.
class HostAgent {
 public:
  HostAgent(HostContext& ctx, const JobLayout& layout);
  HostAgent(const HostAgent&) = delete;
  HostAgent& operator=(const HostAgent&) = delete;

  void add_mapper(std::size_t mapper_index, std::vector<std::string> partition, MapFn map_fn);
  void add_reducer(std::size_t group);
  void make_master();

  // Master only: launches the job.
  void start();
  void receive(const Packet& pkt);

  // Reducer tables hosted here, keyed by group index.
  const std::map<std::size_t, ReducerState>& reducers() const { return reducers_; }
  // Senders owned here, for end-of-run accounting.
  std::vector<const SenderState*> senders() const;
  // Flows the master saw header copies for, with their highest contiguous seq.
  std::map<FlowId, SeqNo> header_progress() const;

 private:
  struct MapperRole {
    std::size_t index = 0;
    MapFn map_fn;
    std::vector<std::string> partition;
    bool started = false;
  };
  struct StreamRole {  // one mapper flow
    std::size_t mapper = 0;
    std::size_t group = 0;
    bool complete_sent = false;
  };
  struct DrainTracker {
    std::set<SeqNo> seqs;
    std::size_t expected = 0;
    bool all_sent = false;  // baseline completion signal
    bool fin_sent = false;
  };
  struct MasterRole {
    std::set<FlowId> complete_flows;
    std::set<std::size_t> drained_groups;  // drain signal or ALL_SENT issued
    std::set<std::size_t> fins;
    ReceiverTable header_copies;
    std::set<FlowId> header_flows;
    std::unordered_map<FlowId, std::size_t> flow_group;
    bool finished = false;
  };

  ReliableFlow& flow_for(FlowId flow);
  void send_control(NodeId dst, std::uint8_t kind, std::uint32_t aux);
  void on_control(const Packet& pkt);
  void dispatch_control(std::uint8_t kind, std::uint32_t aux);
  void on_ack(const Packet& pkt);
  void on_data(const Packet& pkt);
  void send_ack(const Packet& pkt);

  void start_mapper(std::size_t mapper_index);
  void maybe_complete_stream(FlowId flow);
  void maybe_finish_reducer(std::size_t group);
  void master_on_send_complete(FlowId flow);
  void master_check_group(std::size_t group);
  void master_periodic();
  void master_finish_if_done();

  HostContext& ctx_;
  const JobLayout& layout_;
  std::map<FlowId, std::unique_ptr<ReliableFlow>> flows_;
  ReceiverTable control_rx_;
  ReceiverTable data_rx_;

  std::map<std::size_t, MapperRole> mappers_;
  std::map<FlowId, StreamRole> streams_;
  std::map<std::size_t, ReducerState> reducers_;
  std::map<std::size_t, DrainTracker> drains_;
  std::unordered_map<FlowId, std::size_t> flow_group_;  // flows a reducer here accepts
  std::optional<MasterRole> master_;
};

}  // namespace netreduce

#endif  // NETREDUCE_HOSTS_HPP_
