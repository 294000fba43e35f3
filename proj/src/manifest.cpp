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

// Manifest layout:
//   netreduce-manifest 1
//   set <key> <value>
//   begin topology ... end topology
//   begin job ... end job
//   master <host>
//   site <group> <switch> <cost>
//   flow <id> mapper|master|switch <mapper or -> <group>
//   route <node> default <dst> <port> <neighbor>
//   route <node> flow <flow> <dst> <port> <neighbor>

#include <sstream>
#include <stdexcept>

#include "netreduce/compiler.hpp"
#include "netreduce/errors.hpp"
#include "netreduce/text.hpp"

namespace netreduce {

namespace {

constexpr std::string_view kMagic = "netreduce-manifest 1";

std::size_t group_index(const JobSpec& spec, std::string_view id) {
  for (std::size_t g = 0; g < spec.reducers.size(); ++g) {
    if (spec.reducers[g].id == id) return g;
  }
  throw UnresolvedName(std::string(id));
}

}  // namespace

std::string write_manifest(const CompiledJob& job, const ScenarioConfig& cfg) {
  std::ostringstream out;
  out << kMagic << '\n';
  for (const auto& [k, v] : cfg.entries()) out << "set " << k << ' ' << v << '\n';
  out << "begin topology\n" << job.topo.to_text() << "end topology\n";
  out << "begin job\n" << pretty_print(job.spec) << "end job\n";
  out << "master " << job.topo.node(job.master).name << '\n';
  for (std::size_t g = 0; g < job.placement.site.size(); ++g) {
    out << "site " << job.spec.reducers[g].id << ' ' << job.topo.node(job.placement.site[g]).name
        << ' ' << job.placement.group_cost[g] << '\n';
  }
  for (const FlowAssignment& f : job.flows.flows) {
    out << "flow " << f.id << ' ' << flow_kind_name(f.kind) << ' '
        << (f.kind == FlowKind::kMapper ? job.spec.mappers[f.mapper].id : std::string("-"))
        << ' ' << job.spec.reducers[f.group].id << '\n';
  }
  for (NodeId n = 0; n < job.routes.size(); ++n) {
    const std::string& name = job.topo.node(n).name;
    for (const auto& [dst, port] : job.routes[n].defaults()) {
      out << "route " << name << " default " << job.topo.node(dst).name << ' ' << port << ' '
          << job.topo.node(job.topo.ports(n).at(port).neighbor).name << '\n';
    }
    for (const auto& [key, port] : job.routes[n].flow_rules()) {
      out << "route " << name << " flow " << key.first << ' ' << job.topo.node(key.second).name
          << ' ' << port << ' ' << job.topo.node(job.topo.ports(n).at(port).neighbor).name
          << '\n';
    }
  }
  return out.str();
}

std::pair<CompiledJob, ScenarioConfig> read_manifest(std::string_view text) {
  const std::vector<std::string_view> lines = split_lines(text);
  if (lines.empty() || trim(lines[0]) != kMagic) throw ParseError(1, "not a manifest");

  ScenarioConfig cfg;
  CompiledJob job;
  std::string topo_text;
  std::string job_text;
  bool have_topo = false;
  bool have_job = false;
  bool have_master = false;
  std::vector<std::pair<std::size_t, std::vector<std::string_view>>> deferred;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    std::vector<std::string_view> tok = tokenize(lines[i]);
    if (tok.empty()) continue;
    if (tok[0] == "begin" && tok.size() == 2) {
      const std::string end = "end " + std::string(tok[1]);
      std::string body;
      std::size_t j = i + 1;
      for (; j < lines.size() && trim(lines[j]) != end; ++j) {
        body.append(lines[j]);
        body.push_back('\n');
      }
      if (j == lines.size()) throw ParseError(line_no, "unterminated section");
      if (tok[1] == "topology") {
        topo_text = std::move(body);
        have_topo = true;
      } else if (tok[1] == "job") {
        job_text = std::move(body);
        have_job = true;
      } else {
        throw ParseError(line_no, "unknown section");
      }
      i = j;
    } else if (tok[0] == "set") {
      if (tok.size() != 3) throw ParseError(line_no, "expected: set <key> <value>");
      try {
        cfg.set(tok[1], tok[2]);
      } catch (const std::invalid_argument& e) {
        throw ParseError(line_no, e.what());
      }
    } else {
      deferred.emplace_back(line_no, std::move(tok));
    }
  }
  if (!have_topo || !have_job) throw ParseError(lines.size(), "missing topology or job section");
  job.topo = Topology::parse(topo_text);
  job.spec = parse_job(job_text);
  job.routes.assign(job.topo.nodes().size(), RouteTable{});
  job.placement.site.assign(job.spec.reducers.size(), 0);
  job.placement.group_cost.assign(job.spec.reducers.size(), 0);
  std::vector<bool> sited(job.spec.reducers.size(), false);

  for (const auto& [line_no, tok] : deferred) {
    try {
      if (tok[0] == "master" && tok.size() == 2) {
        job.master = job.topo.id(tok[1]);
        have_master = true;
      } else if (tok[0] == "site" && tok.size() == 4) {
        const std::size_t g = group_index(job.spec, tok[1]);
        job.placement.site[g] = job.topo.id(tok[2]);
        job.placement.group_cost[g] = static_cast<int>(parse_int(tok[3]));
        sited[g] = true;
      } else if (tok[0] == "flow" && tok.size() == 5) {
        FlowAssignment f;
        f.id = static_cast<FlowId>(parse_uint(tok[1]));
        if (tok[2] == "mapper") {
          f.kind = FlowKind::kMapper;
          f.mapper = job.spec.mapper_index(tok[3]);
        } else if (tok[2] == "master") {
          f.kind = FlowKind::kMaster;
        } else if (tok[2] == "switch") {
          f.kind = FlowKind::kSwitch;
        } else {
          throw std::invalid_argument("unknown flow kind");
        }
        f.group = group_index(job.spec, tok[4]);
        if (f.id != job.flows.flows.size()) throw std::invalid_argument("flow ids not dense");
        job.flows.flows.push_back(f);
      } else if (tok[0] == "route" && (tok.size() == 6 || tok.size() == 7)) {
        const NodeId at = job.topo.id(tok[1]);
        const bool is_flow = tok[2] == "flow";
        if (!is_flow && tok[2] != "default") throw std::invalid_argument("unknown route kind");
        if (tok.size() != (is_flow ? 7u : 6u)) throw std::invalid_argument("bad route");
        const std::size_t base = is_flow ? 4 : 3;
        const NodeId dst = job.topo.id(tok[base]);
        const auto port = static_cast<PortId>(parse_uint(tok[base + 1]));
        if (port >= job.topo.ports(at).size() ||
            job.topo.ports(at)[port].neighbor != job.topo.id(tok[base + 2])) {
          throw std::invalid_argument("port does not match neighbor");
        }
        if (is_flow) {
          job.routes[at].set_flow(static_cast<FlowId>(parse_uint(tok[3])), dst, port);
        } else {
          job.routes[at].set_default(dst, port);
        }
      } else {
        throw std::invalid_argument("unknown statement '" + std::string(tok[0]) + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    } catch (const UnresolvedName& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (!have_master) throw ParseError(lines.size(), "missing master");
  for (bool s : sited) {
    if (!s) throw ParseError(lines.size(), "group without a site");
  }
  for (int c : job.placement.group_cost) job.placement.cost += c;
  return {std::move(job), std::move(cfg)};
}

}  // namespace netreduce
