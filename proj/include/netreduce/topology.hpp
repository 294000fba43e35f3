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

// Network graph shared by the compiler and the simulator.
//
// Text form, one statement per line, '#' starts a comment:
//   node <id> host|switch|switch:prog
//   link <a> <b> <rate_bps> <delay_ns> <queue_pkts> [loss_p]

#ifndef NETREDUCE_TOPOLOGY_HPP_
#define NETREDUCE_TOPOLOGY_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "netreduce/codec.hpp"
#include "netreduce/dataplane.hpp"
#include "netreduce/transport.hpp"

namespace netreduce {

struct Node {
  std::string name;
  bool is_host = false;
  bool programmable = false;
  friend bool operator==(const Node&, const Node&) = default;
};

struct Link {
  NodeId a = 0;
  NodeId b = 0;
  std::uint64_t rate_bps = 1'000'000'000;
  SimTime delay_ns = 0;
  std::size_t queue_pkts = 1000;
  double loss = 0;
  friend bool operator==(const Link&, const Link&) = default;
};

// One end of a link as seen from a node. Ports number a node's links in
// declaration order.
struct Port {
  NodeId neighbor = 0;
  std::size_t link = 0;
};

inline constexpr int kUnreachable = -1;

class Topology {
 public:
  // Throws ParseError, DuplicateId, UnresolvedName.
  static Topology parse(std::string_view text);
  std::string to_text() const;

  NodeId add_node(const std::string& name, bool is_host, bool programmable = false);
  void add_link(const Link& link);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<Port>& ports(NodeId id) const { return ports_.at(id); }

  std::optional<NodeId> find(std::string_view name) const;
  NodeId id(std::string_view name) const;  // throws UnresolvedName

  std::vector<NodeId> hosts() const;
  std::vector<NodeId> switches() const;
  std::vector<NodeId> programmable_switches() const;

  // Throws std::invalid_argument unless connected with positive link rates
  // and loss probabilities in [0, 1].
  void validate() const;

  // Hop count along paths that never pass through a host; kUnreachable if
  // there is none.
  int hops(NodeId from, NodeId to) const;
  // First-hop port on a shortest path; lowest port index wins ties.
  std::optional<PortId> next_hop(NodeId at, NodeId dst) const;
  std::optional<PortId> port_to(NodeId at, NodeId neighbor) const;
  // Node sequence from `from` to `to` following next_hop; empty if unreachable.
  std::vector<NodeId> path(NodeId from, NodeId to) const;

  // Routing table of default next hops for every reachable destination.
  RouteTable default_routes(NodeId at) const;

  friend bool operator==(const Topology& a, const Topology& b) {
    return a.nodes_ == b.nodes_ && a.links_ == b.links_;
  }

 private:
  const std::vector<int>& distances_to(NodeId dst) const;

  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::vector<std::vector<Port>> ports_;
  std::unordered_map<std::string, NodeId> by_name_;
  mutable std::vector<std::vector<int>> dist_cache_;  // [dst][node]
};

}  // namespace netreduce

#endif  // NETREDUCE_TOPOLOGY_HPP_
