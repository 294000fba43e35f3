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

#include <string>
#include <vector>

#include "netreduce/hosts.hpp"

namespace netreduce {
namespace {

MapperState mapper_with(std::size_t distinct, std::size_t heap_limit = 100'000) {
  MapperState m;
  m.host = 1;
  m.reducer = 2;
  m.heap_limit = heap_limit;
  for (std::size_t i = 0; i < distinct; ++i) m.local_table["k" + std::to_string(1000 + i)] = 1;
  return m;
}

TEST(Hosts, WordCountOverTinyCorpus) {
  MapperState m;
  m.partition = {"a b a"};
  run_map(m, OpCode::kAdd, wordcount_map);
  EXPECT_EQ(m.local_table, (Table{{"a", 2}, {"b", 1}}));
}

TEST(Hosts, EmptyPartitionGivesEmptyTable) {
  MapperState m;
  run_map(m, OpCode::kAdd, wordcount_map);
  EXPECT_TRUE(m.local_table.empty());
}

TEST(Hosts, KeyValueMapParsesAndRejects) {
  std::vector<Record> out;
  keyvalue_map("w3\t-17", out);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], (Record{"w3", -17}));
  out.clear();
  keyvalue_map("", out);
  EXPECT_TRUE(out.empty());
  EXPECT_THROW(keyvalue_map("no-tab-here", out), std::invalid_argument);
  EXPECT_THROW(keyvalue_map("k\tnotanumber", out), std::invalid_argument);
}

TEST(Hosts, LocalReduceUsesOp) {
  MapperState m;
  m.partition = {"x\t5", "x\t3", "y\t-1"};
  run_map(m, OpCode::kMin, keyvalue_map);
  EXPECT_EQ(m.local_table, (Table{{"x", 3}, {"y", -1}}));
}

TEST(Hosts, ShimSplitsByCeilingDivision) {
  MapperState m = mapper_with(45);
  const std::vector<Packet> pkts = shim_assemble(m, OpCode::kAdd);
  ASSERT_EQ(pkts.size(), 3u);
  EXPECT_EQ(pkts[0].kvs.size(), 20u);
  EXPECT_EQ(pkts[1].kvs.size(), 20u);
  EXPECT_EQ(pkts[2].kvs.size(), 5u);
  for (const Packet& p : pkts) {
    EXPECT_TRUE(p.flags.cpa);
    EXPECT_FALSE(p.flags.cpd);
    EXPECT_EQ(p.dst, 2u);
  }
}

TEST(Hosts, ShimSingleEntry) {
  MapperState m = mapper_with(1);
  const std::vector<Packet> pkts = shim_assemble(m, OpCode::kAdd);
  ASSERT_EQ(pkts.size(), 1u);
  EXPECT_EQ(pkts[0].kv_count(), 1u);
}

TEST(Hosts, ShimRejectsOversizeKey) {
  MapperState m;
  m.local_table[std::string(65, 'q')] = 1;
  EXPECT_THROW(shim_assemble(m, OpCode::kAdd), KeyTooLong);
}

TEST(Hosts, WordCountTruncatesLongTokens) {
  std::vector<Record> out;
  wordcount_map(std::string(80, 'z'), out);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].key.size(), 64u);
}

TEST(Hosts, HeapTriggerAtLimit) {
  MapperState m;
  m.heap_limit = 3;
  EXPECT_FALSE(maybe_trigger_collection(m, "a", OpCode::kAdd));
  EXPECT_FALSE(maybe_trigger_collection(m, "b", OpCode::kAdd));
  EXPECT_EQ(m.key_heap.size(), 2u);
  const std::optional<Packet> sig = maybe_trigger_collection(m, "c", OpCode::kAdd);
  ASSERT_TRUE(sig);
  EXPECT_TRUE(sig->flags.cpd);
  EXPECT_TRUE(sig->kvs.empty());
  EXPECT_TRUE(m.key_heap.empty());
}

TEST(Hosts, HeapSignalsCountIsFloorOfKeysOverLimit) {
  for (std::size_t keys : {2u, 3u, 10u, 45u}) {
    for (std::size_t limit : {1u, 3u, 7u}) {
      MapperState m = mapper_with(keys, limit);
      const std::vector<Packet> pkts = shim_assemble(m, OpCode::kAdd);
      std::size_t signals = 0;
      for (const Packet& p : pkts) signals += p.flags.cpd ? 1 : 0;
      EXPECT_EQ(signals, keys / limit) << keys << '/' << limit;
      EXPECT_EQ(m.signals_emitted, keys / limit);
      EXPECT_LE(m.key_heap.size(), limit);
    }
  }
}

TEST(Hosts, SignalFollowsPacketHoldingTriggeringKey) {
  MapperState m = mapper_with(45, 25);
  const std::vector<Packet> pkts = shim_assemble(m, OpCode::kAdd);
  // Key 25 closes the second data packet early; the signal follows it.
  ASSERT_EQ(pkts.size(), 4u);
  EXPECT_EQ(pkts[1].kvs.size(), 5u);
  EXPECT_TRUE(pkts[2].flags.cpd);
  EXPECT_EQ(pkts[3].kvs.size(), 20u);
}

TEST(Hosts, FinalReduceMergesAcrossFlushes) {
  ReducerState r;
  Packet a;
  a.flags = {true, false, true};
  a.kvs = {{Key("a"), 2}};
  Packet b = a;
  b.kvs = {{Key("a"), 3}};
  final_reduce(r, a);
  final_reduce(r, b);
  EXPECT_EQ(r.final_table, (Table{{"a", 5}}));
  Packet plain;
  EXPECT_THROW(final_reduce(r, plain), std::invalid_argument);
}

TEST(Hosts, PeriodicSignalTimes) {
  EXPECT_EQ(periodic_signal_times(100, 350), (std::vector<SimTime>{100, 200, 300}));
  EXPECT_TRUE(periodic_signal_times(100, 50).empty());
  EXPECT_TRUE(periodic_signal_times(0, 500).empty());
}

TEST(Hosts, ReducerCompletesOnExpectedFins) {
  ReducerState r;
  r.expected_flows = {1, 2};
  r.fins_received = {1};
  EXPECT_FALSE(r.complete());
  r.fins_received.insert(2);
  EXPECT_TRUE(r.complete());
}

TEST(Hosts, ControlFlowIds) {
  const FlowId f = control_flow_id(3, 9);
  EXPECT_TRUE(is_control_flow(f));
  EXPECT_FALSE(is_control_flow(5));
  EXPECT_NE(control_flow_id(3, 9), control_flow_id(9, 3));
  EXPECT_THROW(control_flow_id(40000, 1), std::out_of_range);
}

TEST(Hosts, RunModeNames) {
  for (RunMode m : {RunMode::kBaseline, RunMode::kInNetwork, RunMode::kNoMemoryMgmt}) {
    EXPECT_EQ(parse_run_mode(run_mode_name(m)), m);
  }
  EXPECT_THROW(parse_run_mode("fast"), std::invalid_argument);
}

}  // namespace
}  // namespace netreduce
