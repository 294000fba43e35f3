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

#include "netreduce/compiler.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "netreduce/errors.hpp"
#include "netreduce/text.hpp"

namespace netreduce {

namespace {

bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return c > ' ' && c != ',' && c != '=' && c != '#' && c != ':' && c != 0x7f;
  });
}

std::string_view after_token(std::string_view line, std::string_view token) {
  const std::size_t at = line.find(token);
  return line.substr(at + token.size());
}

}  // namespace

std::size_t JobSpec::mapper_index(std::string_view id) const {
  for (std::size_t i = 0; i < mappers.size(); ++i) {
    if (mappers[i].id == id) return i;
  }
  throw UnresolvedName(std::string(id));
}

const DatasetDecl& JobSpec::dataset(std::string_view name) const {
  for (const DatasetDecl& d : datasets) {
    if (d.name == name) return d;
  }
  throw UnresolvedName(std::string(name));
}

const std::string& JobSpec::mapper_host(std::size_t mapper) const {
  return dataset(mappers.at(mapper).dataset).host;
}

JobSpec parse_job(std::string_view text) {
  JobSpec spec;
  bool op_seen = false;
  std::vector<std::size_t> mapper_lines;
  std::set<std::string> dataset_names;
  std::set<std::string> mapper_ids;
  std::set<std::string> reducer_ids;
  std::size_t line_no = 0;
  for (std::string_view raw : split_lines(text)) {
    ++line_no;
    const std::string_view line = trim(strip_comment(raw));
    std::vector<std::string_view> tok = tokenize(line);
    if (tok.empty()) continue;
    if (tok[0] == "op") {
      if (tok.size() != 2) throw ParseError(line_no, "expected: op ADD|MAX|MIN");
      if (op_seen) throw ParseError(line_no, "op declared twice");
      try {
        spec.op = parse_op_name(tok[1]);
      } catch (const std::invalid_argument&) {
        throw ParseError(line_no, "unknown op '" + std::string(tok[1]) + "'");
      }
      op_seen = true;
    } else if (tok[0] == "dataset") {
      std::string_view rest = trim(after_token(line, "dataset"));
      const std::size_t eq = rest.find('=');
      if (eq == std::string_view::npos) {
        throw ParseError(line_no, "expected: dataset <name> = <host>:<path>");
      }
      const std::string_view name = trim(rest.substr(0, eq));
      const std::string_view target = trim(rest.substr(eq + 1));
      const std::size_t colon = target.find(':');
      if (!valid_name(name) || colon == std::string_view::npos) {
        throw ParseError(line_no, "expected: dataset <name> = <host>:<path>");
      }
      const std::string_view host = trim(target.substr(0, colon));
      const std::string_view path = trim(target.substr(colon + 1));
      if (!valid_name(host) || path.empty()) throw ParseError(line_no, "bad dataset target");
      if (!dataset_names.insert(std::string(name)).second) throw DuplicateId(std::string(name));
      spec.datasets.push_back({std::string(name), std::string(host), std::string(path)});
    } else if (tok[0] == "mapper") {
      if (tok.size() != 4 || tok[2] != "on" || !valid_name(tok[1])) {
        throw ParseError(line_no, "expected: mapper <id> on <dataset>");
      }
      if (!dataset_names.contains(std::string(tok[3]))) throw UnresolvedName(std::string(tok[3]));
      if (!mapper_ids.insert(std::string(tok[1])).second) throw DuplicateId(std::string(tok[1]));
      spec.mappers.push_back({std::string(tok[1]), std::string(tok[3])});
      mapper_lines.push_back(line_no);
    } else if (tok[0] == "reducer") {
      if (tok.size() < 4 || tok[2] != "from" || !valid_name(tok[1])) {
        throw ParseError(line_no, "expected: reducer <host> from <mapper>[, <mapper>...]");
      }
      ReducerDecl group;
      group.id = std::string(tok[1]);
      std::string_view list =
          line.substr(static_cast<std::size_t>(tok[2].data() - line.data()) + tok[2].size());
      std::set<std::string> members;
      while (true) {
        const std::size_t comma = list.find(',');
        const std::string_view item = trim(list.substr(0, comma));
        if (!valid_name(item)) throw ParseError(line_no, "bad mapper list");
        if (!mapper_ids.contains(std::string(item))) throw UnresolvedName(std::string(item));
        if (!members.insert(std::string(item)).second) {
          throw ParseError(line_no, "mapper '" + std::string(item) + "' listed twice");
        }
        group.mappers.emplace_back(item);
        if (comma == std::string_view::npos) break;
        list.remove_prefix(comma + 1);
      }
      if (!reducer_ids.insert(group.id).second) throw DuplicateId(group.id);
      spec.reducers.push_back(std::move(group));
    } else {
      throw ParseError(line_no, "unknown statement '" + std::string(tok[0]) + "'");
    }
  }
  for (std::size_t i = 0; i < spec.mappers.size(); ++i) {
    const bool grouped = std::any_of(spec.reducers.begin(), spec.reducers.end(),
                                     [&](const ReducerDecl& r) {
                                       return std::find(r.mappers.begin(), r.mappers.end(),
                                                        spec.mappers[i].id) != r.mappers.end();
                                     });
    if (!grouped) {
      throw ParseError(mapper_lines[i],
                       "mapper '" + spec.mappers[i].id + "' belongs to no reducer group");
    }
  }
  return spec;
}

std::string pretty_print(const JobSpec& spec) {
  std::ostringstream out;
  out << "op " << op_name(spec.op) << '\n';
  for (const DatasetDecl& d : spec.datasets) {
    out << "dataset " << d.name << " = " << d.host << ':' << d.path << '\n';
  }
  for (const MapperDecl& m : spec.mappers) out << "mapper " << m.id << " on " << m.dataset << '\n';
  for (const ReducerDecl& r : spec.reducers) {
    out << "reducer " << r.id << " from ";
    for (std::size_t i = 0; i < r.mappers.size(); ++i) out << (i ? ", " : "") << r.mappers[i];
    out << '\n';
  }
  return out.str();
}

std::optional<int> site_cost(const JobSpec& spec, const Topology& topo, std::size_t group,
                             NodeId sw) {
  const ReducerDecl& r = spec.reducers.at(group);
  const int down = topo.hops(sw, topo.id(r.id));
  if (down == kUnreachable) return std::nullopt;
  int total = down;
  for (const std::string& m : r.mappers) {
    const int up = topo.hops(topo.id(spec.mapper_host(spec.mapper_index(m))), sw);
    if (up == kUnreachable) return std::nullopt;
    total += up;
  }
  return total;
}

Placement place_reducers(const JobSpec& spec, const Topology& topo, std::size_t capacity) {
  const std::vector<NodeId> candidates = topo.programmable_switches();
  std::vector<std::size_t> left(candidates.size(), capacity);
  Placement out;
  for (std::size_t g = 0; g < spec.reducers.size(); ++g) {
    std::optional<std::size_t> best;
    int best_cost = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (left[i] == 0) continue;
      std::optional<int> c = site_cost(spec, topo, g, candidates[i]);
      if (c && (!best || *c < best_cost)) {
        best = i;
        best_cost = *c;
      }
    }
    if (!best) throw NoFeasibleSwitch(spec.reducers[g].id);
    --left[*best];
    out.site.push_back(candidates[*best]);
    out.group_cost.push_back(best_cost);
    out.cost += best_cost;
  }
  return out;
}

const char* flow_kind_name(FlowKind kind) {
  switch (kind) {
    case FlowKind::kMapper:
      return "mapper";
    case FlowKind::kMaster:
      return "master";
    case FlowKind::kSwitch:
      return "switch";
  }
  return "?";
}

std::optional<FlowId> FlowPlan::mapper_flow(std::size_t mapper, std::size_t group) const {
  for (const FlowAssignment& f : flows) {
    if (f.kind == FlowKind::kMapper && f.mapper == mapper && f.group == group) return f.id;
  }
  return std::nullopt;
}

FlowId FlowPlan::master_flow(std::size_t group) const {
  for (const FlowAssignment& f : flows) {
    if (f.kind == FlowKind::kMaster && f.group == group) return f.id;
  }
  throw std::out_of_range("no master flow for group");
}

FlowId FlowPlan::switch_flow(std::size_t group) const {
  for (const FlowAssignment& f : flows) {
    if (f.kind == FlowKind::kSwitch && f.group == group) return f.id;
  }
  throw std::out_of_range("no switch flow for group");
}

FlowPlan assign_flows(const JobSpec& spec) {
  FlowPlan plan;
  FlowId next = 0;
  for (std::size_t m = 0; m < spec.mappers.size(); ++m) {
    for (std::size_t g = 0; g < spec.reducers.size(); ++g) {
      const auto& members = spec.reducers[g].mappers;
      if (std::find(members.begin(), members.end(), spec.mappers[m].id) != members.end()) {
        plan.flows.push_back({next++, FlowKind::kMapper, m, g});
      }
    }
  }
  for (std::size_t g = 0; g < spec.reducers.size(); ++g) {
    plan.flows.push_back({next++, FlowKind::kMaster, 0, g});
  }
  for (std::size_t g = 0; g < spec.reducers.size(); ++g) {
    plan.flows.push_back({next++, FlowKind::kSwitch, 0, g});
  }
  return plan;
}

namespace {

NodeId steered_source(const JobSpec& spec, const Topology& topo, const FlowAssignment& f,
                      NodeId master) {
  return f.kind == FlowKind::kMapper ? topo.id(spec.mapper_host(f.mapper)) : master;
}

// Follows lookup(flow, dst) from `from` until `stop`. Empty string on success.
// Acknowledgement walks use the default routes only.
std::string walk(const Topology& topo, const std::vector<RouteTable>& routes, FlowId flow,
                 NodeId from, NodeId dst, NodeId stop, bool ack = false) {
  std::set<NodeId> visited;
  NodeId at = from;
  while (at != stop) {
    // The source may itself be the destination host (a master that reduces).
    if (at == dst && at != from) return "reaches " + topo.node(dst).name + " first";
    if (!visited.insert(at).second) return "loops at " + topo.node(at).name;
    std::optional<PortId> port =
        ack ? routes.at(at).lookup_default(dst) : routes.at(at).lookup(flow, dst);
    if (!port || *port >= topo.ports(at).size()) {
      return "dead end at " + topo.node(at).name;
    }
    at = topo.ports(at)[*port].neighbor;
  }
  return {};
}

}  // namespace

std::vector<RouteTable> emit_routes(const JobSpec& spec, const Topology& topo,
                                    const Placement& placement, const FlowPlan& flows,
                                    NodeId master) {
  std::vector<RouteTable> routes;
  routes.reserve(topo.nodes().size());
  for (NodeId n = 0; n < topo.nodes().size(); ++n) routes.push_back(topo.default_routes(n));

  for (const FlowAssignment& f : flows.flows) {
    if (f.kind == FlowKind::kSwitch) continue;
    if (f.group >= placement.site.size()) throw RouteError("group without a site");
    const NodeId site = placement.site[f.group];
    if (site >= topo.nodes().size() || topo.node(site).is_host) {
      throw RouteError("site of group " + spec.reducers[f.group].id + " is not a switch");
    }
    const NodeId src = steered_source(spec, topo, f, master);
    const NodeId reducer = topo.id(spec.reducers[f.group].id);
    const std::vector<NodeId> path = topo.path(src, site);
    if (path.empty()) {
      throw RouteError("no path from " + topo.node(src).name + " to " + topo.node(site).name);
    }
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      routes[path[i]].set_flow(f.id, reducer, *topo.port_to(path[i], path[i + 1]));
    }
  }
  std::vector<std::string> problems = verify_routes(spec, topo, placement, flows, master, routes);
  if (!problems.empty()) throw RouteError(problems.front());
  return routes;
}

std::vector<std::string> verify_routes(const JobSpec& spec, const Topology& topo,
                                       const Placement& placement, const FlowPlan& flows,
                                       NodeId master, const std::vector<RouteTable>& routes) {
  std::vector<std::string> problems;
  if (routes.size() != topo.nodes().size()) {
    problems.push_back("route table count does not match node count");
    return problems;
  }
  for (const FlowAssignment& f : flows.flows) {
    if (f.group >= placement.site.size()) {
      problems.push_back("flow " + std::to_string(f.id) + ": group without a site");
      continue;
    }
    const NodeId site = placement.site[f.group];
    if (site >= topo.nodes().size()) {
      problems.push_back("flow " + std::to_string(f.id) + ": site missing from topology");
      continue;
    }
    const NodeId reducer = topo.id(spec.reducers[f.group].id);
    std::string err;
    if (f.kind == FlowKind::kSwitch) {
      err = walk(topo, routes, f.id, site, reducer, reducer);
    } else {
      const NodeId src = steered_source(spec, topo, f, master);
      err = walk(topo, routes, f.id, src, reducer, site);
      if (err.empty()) {
        std::string back = walk(topo, routes, f.id, site, src, src, true);
        if (!back.empty()) err = "acknowledgement path " + back;
      }
    }
    if (!err.empty()) {
      problems.push_back("flow " + std::to_string(f.id) + " (" + flow_kind_name(f.kind) +
                         "): " + err);
    }
  }
  return problems;
}

NodeId default_master(const JobSpec& spec, const Topology& topo) {
  std::set<std::string> busy;
  for (std::size_t m = 0; m < spec.mappers.size(); ++m) busy.insert(spec.mapper_host(m));
  for (const ReducerDecl& r : spec.reducers) busy.insert(r.id);
  const std::vector<NodeId> hosts = topo.hosts();
  for (auto it = hosts.rbegin(); it != hosts.rend(); ++it) {
    if (!busy.contains(topo.node(*it).name)) return *it;
  }
  if (!spec.reducers.empty()) return topo.id(spec.reducers.front().id);
  if (hosts.empty()) throw std::invalid_argument("topology has no hosts");
  return hosts.back();
}

NodeId CompiledJob::mapper_host(std::size_t mapper) const {
  return topo.id(spec.mapper_host(mapper));
}

NodeId CompiledJob::reducer_host(std::size_t group) const {
  return topo.id(spec.reducers.at(group).id);
}

JobLayout CompiledJob::layout(const ScenarioConfig& cfg, SimTime collect_interval) const {
  JobLayout out;
  out.op = spec.op;
  out.master = master;
  const bool aggregated = cfg.mode != RunMode::kBaseline;
  for (std::size_t m = 0; m < spec.mappers.size(); ++m) {
    JobLayout::Mapper mapper;
    mapper.name = spec.mappers[m].id;
    mapper.host = mapper_host(m);
    out.mappers.push_back(std::move(mapper));
  }
  for (std::size_t g = 0; g < spec.reducers.size(); ++g) {
    JobLayout::Group group;
    group.name = spec.reducers[g].id;
    group.reducer = reducer_host(g);
    group.aggregated = aggregated;
    group.master_flow = flows.master_flow(g);
    group.switch_flow = flows.switch_flow(g);
    out.groups.push_back(std::move(group));
  }
  for (const FlowAssignment& f : flows.flows) {
    if (f.kind != FlowKind::kMapper) continue;
    out.mappers[f.mapper].flows.push_back({f.id, f.group});
    out.groups[f.group].mapper_flows.push_back(f.id);
  }
  out.sender.initial_cwnd = cfg.initial_cwnd;
  out.sender.max_cwnd = cfg.max_cwnd;
  out.sender.min_rto = cfg.min_rto;
  out.sender.max_rto = cfg.max_rto;
  out.heap_limit = cfg.heap_limit;
  out.collect_interval = collect_interval;
  out.overflow_backoff = cfg.mode == RunMode::kInNetwork;
  return out;
}

CompiledJob compile(const JobSpec& spec, const Topology& topo, const CompileOptions& opts) {
  topo.validate();
  if (topo.nodes().size() >= (1u << 15)) throw std::invalid_argument("too many nodes");
  auto require_host = [&](const std::string& name) {
    if (!topo.node(topo.id(name)).is_host) {
      throw std::invalid_argument("'" + name + "' is not a host");
    }
  };
  for (const DatasetDecl& d : spec.datasets) require_host(d.host);
  for (const ReducerDecl& r : spec.reducers) require_host(r.id);

  CompiledJob job;
  job.spec = spec;
  job.topo = topo;
  job.placement = place_reducers(spec, topo, opts.group_capacity);
  job.flows = assign_flows(spec);
  if (opts.master.empty()) {
    job.master = default_master(spec, topo);
  } else {
    require_host(opts.master);
    job.master = topo.id(opts.master);
  }
  job.routes = emit_routes(spec, topo, job.placement, job.flows, job.master);
  return job;
}

}  // namespace netreduce
