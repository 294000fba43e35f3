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

#include "netreduce/topology.hpp"

#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

#include "netreduce/errors.hpp"
#include "netreduce/text.hpp"

namespace netreduce {

Topology Topology::parse(std::string_view text) {
  Topology topo;
  std::size_t line_no = 0;
  for (std::string_view raw : split_lines(text)) {
    ++line_no;
    std::vector<std::string_view> tok = tokenize(strip_comment(raw));
    if (tok.empty()) continue;
    if (tok[0] == "node") {
      if (tok.size() != 3) throw ParseError(line_no, "expected: node <id> host|switch[:prog]");
      bool host = false;
      bool prog = false;
      if (tok[2] == "host") {
        host = true;
      } else if (tok[2] == "switch") {
      } else if (tok[2] == "switch:prog") {
        prog = true;
      } else {
        throw ParseError(line_no, "unknown node kind '" + std::string(tok[2]) + "'");
      }
      topo.add_node(std::string(tok[1]), host, prog);
    } else if (tok[0] == "link") {
      if (tok.size() != 6 && tok.size() != 7) {
        throw ParseError(line_no, "expected: link <a> <b> <rate_bps> <delay_ns> <queue_pkts> [loss_p]");
      }
      Link link;
      link.a = topo.id(tok[1]);
      link.b = topo.id(tok[2]);
      try {
        const double rate = parse_double(tok[3]);
        if (!(rate > 0) || rate > 1e15) throw std::invalid_argument("rate");
        link.rate_bps = static_cast<std::uint64_t>(std::llround(rate));
        const double delay = parse_double(tok[4]);
        if (delay < 0) throw std::invalid_argument("delay");
        link.delay_ns = static_cast<SimTime>(std::llround(delay));
        link.queue_pkts = static_cast<std::size_t>(parse_uint(tok[5]));
        link.loss = tok.size() == 7 ? parse_double(tok[6]) : 0.0;
      } catch (const std::invalid_argument&) {
        throw ParseError(line_no, "bad link parameters");
      }
      if (link.loss < 0 || link.loss > 1) throw ParseError(line_no, "loss outside [0,1]");
      if (link.a == link.b) throw ParseError(line_no, "self loop");
      topo.add_link(link);
    } else {
      throw ParseError(line_no, "unknown statement '" + std::string(tok[0]) + "'");
    }
  }
  return topo;
}

std::string Topology::to_text() const {
  std::ostringstream out;
  for (const Node& n : nodes_) {
    out << "node " << n.name << ' '
        << (n.is_host ? "host" : (n.programmable ? "switch:prog" : "switch")) << '\n';
  }
  for (const Link& l : links_) {
    out << "link " << nodes_[l.a].name << ' ' << nodes_[l.b].name << ' ' << l.rate_bps << ' '
        << l.delay_ns << ' ' << l.queue_pkts;
    if (l.loss != 0) out << ' ' << format_double(l.loss);
    out << '\n';
  }
  return out.str();
}

NodeId Topology::add_node(const std::string& name, bool is_host, bool programmable) {
  if (name.empty()) throw std::invalid_argument("empty node name");
  if (by_name_.contains(name)) throw DuplicateId(name);
  const auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(Node{name, is_host, !is_host && programmable});
  ports_.emplace_back();
  by_name_.emplace(name, id);
  dist_cache_.clear();
  return id;
}

void Topology::add_link(const Link& link) {
  if (link.a >= nodes_.size() || link.b >= nodes_.size()) {
    throw std::out_of_range("link endpoint out of range");
  }
  const std::size_t index = links_.size();
  links_.push_back(link);
  ports_[link.a].push_back(Port{link.b, index});
  ports_[link.b].push_back(Port{link.a, index});
  dist_cache_.clear();
}

std::optional<NodeId> Topology::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

NodeId Topology::id(std::string_view name) const {
  std::optional<NodeId> found = find(name);
  if (!found) throw UnresolvedName(std::string(name));
  return *found;
}

std::vector<NodeId> Topology::hosts() const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].is_host) out.push_back(i);
  }
  return out;
}

std::vector<NodeId> Topology::switches() const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].is_host) out.push_back(i);
  }
  return out;
}

std::vector<NodeId> Topology::programmable_switches() const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].programmable) out.push_back(i);
  }
  return out;
}

void Topology::validate() const {
  if (nodes_.empty()) throw std::invalid_argument("topology has no nodes");
  for (const Link& l : links_) {
    if (l.rate_bps == 0) throw std::invalid_argument("link rate must be positive");
    if (l.loss < 0 || l.loss > 1) throw std::invalid_argument("link loss outside [0,1]");
  }
  // Plain connectivity, hosts included.
  std::vector<bool> seen(nodes_.size(), false);
  std::deque<NodeId> frontier{0};
  seen[0] = true;
  while (!frontier.empty()) {
    const NodeId n = frontier.front();
    frontier.pop_front();
    for (const Port& p : ports_[n]) {
      if (!seen[p.neighbor]) {
        seen[p.neighbor] = true;
        frontier.push_back(p.neighbor);
      }
    }
  }
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    if (!seen[i]) throw std::invalid_argument("topology is not connected: " + nodes_[i].name);
  }
}

const std::vector<int>& Topology::distances_to(NodeId dst) const {
  if (dist_cache_.size() != nodes_.size()) dist_cache_.assign(nodes_.size(), {});
  std::vector<int>& dist = dist_cache_.at(dst);
  if (!dist.empty()) return dist;
  dist.assign(nodes_.size(), kUnreachable);
  dist[dst] = 0;
  std::deque<NodeId> frontier{dst};
  while (!frontier.empty()) {
    const NodeId n = frontier.front();
    frontier.pop_front();
    // Hosts terminate paths; only the destination itself may be a host
    // in the interior of this reverse search.
    if (n != dst && nodes_[n].is_host) continue;
    for (const Port& p : ports_[n]) {
      if (dist[p.neighbor] == kUnreachable) {
        dist[p.neighbor] = dist[n] + 1;
        frontier.push_back(p.neighbor);
      }
    }
  }
  return dist;
}

int Topology::hops(NodeId from, NodeId to) const { return distances_to(to).at(from); }

std::optional<PortId> Topology::next_hop(NodeId at, NodeId dst) const {
  if (at == dst) return std::nullopt;
  const std::vector<int>& dist = distances_to(dst);
  if (dist.at(at) == kUnreachable) return std::nullopt;
  const std::vector<Port>& ps = ports_.at(at);
  for (PortId i = 0; i < ps.size(); ++i) {
    const NodeId nb = ps[i].neighbor;
    if (dist[nb] == dist[at] - 1 && (nb == dst || !nodes_[nb].is_host)) return i;
  }
  return std::nullopt;
}

std::optional<PortId> Topology::port_to(NodeId at, NodeId neighbor) const {
  const std::vector<Port>& ps = ports_.at(at);
  for (PortId i = 0; i < ps.size(); ++i) {
    if (ps[i].neighbor == neighbor) return i;
  }
  return std::nullopt;
}

std::vector<NodeId> Topology::path(NodeId from, NodeId to) const {
  std::vector<NodeId> out{from};
  NodeId at = from;
  while (at != to) {
    std::optional<PortId> p = next_hop(at, to);
    if (!p) return {};
    at = ports_[at][*p].neighbor;
    out.push_back(at);
  }
  return out;
}

RouteTable Topology::default_routes(NodeId at) const {
  RouteTable table;
  for (NodeId dst = 0; dst < nodes_.size(); ++dst) {
    if (std::optional<PortId> p = next_hop(at, dst)) table.set_default(dst, *p);
  }
  return table;
}

}  // namespace netreduce
