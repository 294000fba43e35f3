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

// Job language, aggregation-site placement and route generation.
//
// Job language, one statement per line, '#' starts a comment:
//   dataset <name> = <host>:<path>
//   mapper <id> on <dataset>
//   reducer <host> from <mapper>[, <mapper>...]
//   op ADD|MAX|MIN
// Names must be declared before they are referenced.

#ifndef NETREDUCE_COMPILER_HPP_
#define NETREDUCE_COMPILER_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "netreduce/codec.hpp"
#include "netreduce/dataplane.hpp"
#include "netreduce/hosts.hpp"
#include "netreduce/scenario.hpp"
#include "netreduce/topology.hpp"

namespace netreduce {

struct DatasetDecl {
  std::string name;
  std::string host;
  std::string path;
  friend bool operator==(const DatasetDecl&, const DatasetDecl&) = default;
};

struct MapperDecl {
  std::string id;
  std::string dataset;
  friend bool operator==(const MapperDecl&, const MapperDecl&) = default;
};

// A reducer group. The id names the host that runs the final reduce.
struct ReducerDecl {
  std::string id;
  std::vector<std::string> mappers;
  friend bool operator==(const ReducerDecl&, const ReducerDecl&) = default;
};

struct JobSpec {
  std::vector<DatasetDecl> datasets;
  std::vector<MapperDecl> mappers;
  std::vector<ReducerDecl> reducers;
  OpCode op = OpCode::kAdd;

  std::size_t mapper_index(std::string_view id) const;  // throws UnresolvedName
  const DatasetDecl& dataset(std::string_view name) const;
  const std::string& mapper_host(std::size_t mapper) const;

  friend bool operator==(const JobSpec&, const JobSpec&) = default;
};

// Throws ParseError, UnresolvedName, DuplicateId.
JobSpec parse_job(std::string_view text);
std::string pretty_print(const JobSpec& spec);

class NoFeasibleSwitch : public std::runtime_error {
 public:
  explicit NoFeasibleSwitch(const std::string& group)
      : std::runtime_error("no feasible switch for group " + group), group_(group) {}
  const std::string& group() const { return group_; }

 private:
  std::string group_;
};

class RouteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Placement {
  std::vector<NodeId> site;     // per reducer group
  std::vector<int> group_cost;  // per reducer group
  int cost = 0;
  friend bool operator==(const Placement&, const Placement&) = default;
};

// Sum of hops from every group mapper to `sw` plus hops from `sw` to the
// reducer; nullopt when some leg is unreachable.
std::optional<int> site_cost(const JobSpec& spec, const Topology& topo, std::size_t group,
                             NodeId sw);

// Greedy, one group at a time in declaration order, cheapest programmable
// switch with capacity left, lowest id on ties. Throws NoFeasibleSwitch,
// UnresolvedName.
Placement place_reducers(const JobSpec& spec, const Topology& topo, std::size_t capacity);

enum class FlowKind { kMapper, kMaster, kSwitch };
const char* flow_kind_name(FlowKind kind);

struct FlowAssignment {
  FlowId id = 0;
  FlowKind kind = FlowKind::kMapper;
  std::size_t mapper = 0;  // kMapper only
  std::size_t group = 0;
  friend bool operator==(const FlowAssignment&, const FlowAssignment&) = default;
};

// Flow ids are dense: mapper flows (mapper order, then group order),
// then one master flow per group, then one switch flow per group.
struct FlowPlan {
  std::vector<FlowAssignment> flows;

  std::optional<FlowId> mapper_flow(std::size_t mapper, std::size_t group) const;
  FlowId master_flow(std::size_t group) const;
  FlowId switch_flow(std::size_t group) const;
  std::size_t size() const { return flows.size(); }
  friend bool operator==(const FlowPlan&, const FlowPlan&) = default;
};

FlowPlan assign_flows(const JobSpec& spec);

// Per-node tables: shortest-path defaults everywhere plus flow rules that
// steer each mapper flow and master flow to its group's site. Throws
// RouteError if a rule cannot be installed or the result fails
// verify_routes.
std::vector<RouteTable> emit_routes(const JobSpec& spec, const Topology& topo,
                                    const Placement& placement, const FlowPlan& flows,
                                    NodeId master);

// Walks every steered flow hop by hop. Returns one message per flow that
// loops, dead-ends, or misses its site; empty when all are sound.
std::vector<std::string> verify_routes(const JobSpec& spec, const Topology& topo,
                                       const Placement& placement, const FlowPlan& flows,
                                       NodeId master, const std::vector<RouteTable>& routes);

struct CompileOptions {
  std::size_t group_capacity = 4;
  std::string master;  // empty: default_master()
};

// Last host that runs no mapper and no reducer, else the first reducer host.
NodeId default_master(const JobSpec& spec, const Topology& topo);

struct CompiledJob {
  JobSpec spec;
  Topology topo;
  Placement placement;
  FlowPlan flows;
  NodeId master = 0;
  std::vector<RouteTable> routes;  // per node

  NodeId mapper_host(std::size_t mapper) const;
  NodeId reducer_host(std::size_t group) const;
  // Agent view. Baseline layouts mark no group as aggregated.
  JobLayout layout(const ScenarioConfig& cfg, SimTime collect_interval) const;

  friend bool operator==(const CompiledJob&, const CompiledJob&) = default;
};

CompiledJob compile(const JobSpec& spec, const Topology& topo, const CompileOptions& opts);

// Deterministic text artifact: settings, topology, job, placement, flows
// and every route. read_manifest(write_manifest(j, s)) restores both.
std::string write_manifest(const CompiledJob& job, const ScenarioConfig& cfg);
std::pair<CompiledJob, ScenarioConfig> read_manifest(std::string_view text);

}  // namespace netreduce

#endif  // NETREDUCE_COMPILER_HPP_
