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

#include "netreduce/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

#include "netreduce/errors.hpp"
#include "netreduce/text.hpp"

namespace netreduce {

ModelVolumes model_volumes(const TheoreticalModel& m) {
  if (!(m.D > 0)) throw DomainError("D must be positive");
  if (!(m.R > 0)) throw DomainError("R must be positive");
  if (!(m.N >= 1)) throw DomainError("N must be at least 1");
  if (!(m.rho <= 1) || !(m.rho * m.N >= 1)) throw DomainError("rho must lie in [1/N, 1]");
  ModelVolumes out;
  const double per_mapper = m.D * (1 + 1 / m.R);
  out.v = per_mapper * m.N;
  out.v_prime = per_mapper / m.rho;
  out.ratio = out.v_prime / out.v;
  return out;
}

double codec_key_value_proportion() {
  const double payload = static_cast<double>(kMaxPairsPerPacket * kPairBytes);
  return payload / static_cast<double>(wire::kPairs + kMaxPairsPerPacket * kPairBytes);
}

Topology default_topology() {
  Topology t;
  const std::uint64_t rate = 1'000'000'000;
  const SimTime delay = 1'000;
  const std::size_t queue = 256;
  const NodeId tor1 = t.add_node("tor1", false, true);
  const NodeId tor2 = t.add_node("tor2", false, true);
  const NodeId agg1 = t.add_node("agg1", false, true);
  const NodeId agg2 = t.add_node("agg2", false, true);
  for (NodeId tor : {tor1, tor2}) {
    for (NodeId agg : {agg1, agg2}) t.add_link(Link{tor, agg, rate, delay, queue, 0});
  }
  for (int i = 1; i <= 12; ++i) {
    const NodeId h = t.add_node("h" + std::to_string(i), true);
    t.add_link(Link{h, i <= 6 ? tor1 : tor2, rate, delay, queue, 0});
  }
  return t;
}

Topology testbed_topology(std::uint64_t rate_bps, SimTime delay_ns, std::size_t queue_pkts) {
  Topology t;
  const NodeId sw = t.add_node("s1", false, true);
  for (int i = 1; i <= 4; ++i) {
    const NodeId h = t.add_node("h" + std::to_string(i), true);
    t.add_link(Link{h, sw, rate_bps, delay_ns, queue_pkts, 0});
  }
  return t;
}

Topology load_topology(std::string_view ref) {
  if (ref == "default") return default_topology();
  if (ref == "testbed") return testbed_topology();
  return Topology::parse(read_file(std::string(ref)));
}

const char* layout_name(Layout layout) {
  return layout == Layout::kRack ? "rack" : "spread";
}

Layout parse_layout(std::string_view text) {
  if (text == "rack") return Layout::kRack;
  if (text == "spread") return Layout::kSpread;
  throw std::invalid_argument("unknown layout '" + std::string(text) + "'");
}

std::string layout_job(const Topology& topo, std::size_t mappers, std::string_view workload,
                       OpCode op, Layout layout) {
  if (mappers == 0) throw std::invalid_argument("need at least one mapper");
  const std::vector<NodeId> hosts = topo.hosts();
  if (hosts.size() < 2) throw std::invalid_argument("need at least two hosts");
  const NodeId reducer = hosts.front();
  std::vector<NodeId> mates;
  if (!topo.ports(reducer).empty()) {
    const NodeId edge = topo.ports(reducer).front().neighbor;
    for (NodeId h : hosts) {
      if (h != reducer && topo.port_to(h, edge)) mates.push_back(h);
    }
  }
  if (mates.empty() || layout == Layout::kSpread) {
    for (NodeId h : hosts) {
      if (h != reducer && std::find(mates.begin(), mates.end(), h) == mates.end()) {
        mates.push_back(h);
      }
    }
  }

  std::ostringstream out;
  for (std::size_t i = 0; i < mappers; ++i) {
    const Node& host = topo.node(mates[i % mates.size()]);
    out << "dataset d" << i + 1 << " = " << host.name << ':' << workload << '\n';
  }
  for (std::size_t i = 0; i < mappers; ++i) out << "mapper m" << i + 1 << " on d" << i + 1 << '\n';
  out << "reducer " << topo.node(reducer).name << " from ";
  for (std::size_t i = 0; i < mappers; ++i) out << (i ? ", m" : "m") << i + 1;
  out << "\nop " << op_name(op) << '\n';
  return out.str();
}

namespace {

struct MapperSource {
  WorkloadSpec workload;
  std::vector<std::string> partition;
};

std::vector<MapperSource> mapper_sources(const CompiledJob& job, std::uint64_t seed) {
  const JobSpec& spec = job.spec;
  const std::size_t n = spec.mappers.size();
  std::vector<MapperSource> out(n);
  for (std::size_t m = 0; m < n; ++m) {
    const DatasetDecl& d = spec.dataset(spec.mappers[m].dataset);
    out[m].workload = parse_workload(d.path);
    const WorkloadKind kind = out[m].workload.kind;
    if (kind == WorkloadKind::kGradientSum || kind == WorkloadKind::kWordCountSynthetic) {
      out[m].partition = generate_partition(out[m].workload, m, n, seed);
      continue;
    }
    // Files: deal lines among the mappers reading the same dataset.
    std::size_t rank = 0;
    std::size_t sharers = 0;
    for (std::size_t o = 0; o < n; ++o) {
      if (spec.mappers[o].dataset != spec.mappers[m].dataset) continue;
      if (o < m) ++rank;
      ++sharers;
    }
    out[m].partition = generate_partition(out[m].workload, rank, sharers, seed);
  }
  return out;
}

}  // namespace

std::vector<MapperInput> load_inputs(const CompiledJob& job, std::uint64_t seed) {
  std::vector<MapperInput> out;
  for (MapperSource& s : mapper_sources(job, seed)) {
    out.push_back(MapperInput{std::move(s.partition), map_fn_for(input_format(s.workload))});
  }
  return out;
}

std::vector<std::set<std::string>> mapper_key_sets(const CompiledJob& job, std::uint64_t seed) {
  std::vector<std::set<std::string>> out;
  for (const MapperSource& s : mapper_sources(job, seed)) {
    out.push_back(distinct_keys(s.partition, input_format(s.workload)));
  }
  return out;
}

Table job_oracle(const CompiledJob& job, std::uint64_t seed) {
  Table out;
  for (const MapperSource& s : mapper_sources(job, seed)) {
    const Table part = oracle_aggregate({s.partition}, input_format(s.workload), job.spec.op);
    for (const auto& [k, v] : part) fold_into(out, job.spec.op, Record{k, v});
  }
  return out;
}

CompiledJob compile_cell(const CellSpec& cell) {
  Topology topo = load_topology(cell.topology);
  topo.validate();
  JobSpec spec = parse_job(layout_job(topo, cell.mappers, cell.workload, cell.op, cell.layout));
  CompileOptions opts;
  opts.group_capacity = cell.settings.group_capacity;
  opts.master = cell.settings.master;
  return compile(spec, topo, opts);
}

CellOutcome run_cell(const CellSpec& cell) {
  CellOutcome out;
  out.spec = cell;
  try {
    const CompiledJob job = compile_cell(cell);
    const std::uint64_t seed = cell.settings.seed;
    const std::vector<std::set<std::string>> keys = mapper_key_sets(job, seed);
    double distinct = 0;
    for (const auto& k : keys) distinct += static_cast<double>(k.size());
    out.mean_mapper_bytes = distinct * kPairBytes / static_cast<double>(keys.size());
    out.rho = std::clamp(estimate_rho(keys), 1.0 / static_cast<double>(keys.size()), 1.0);
    out.ideal_ratio = model_volumes(TheoreticalModel{std::max(out.mean_mapper_bytes, 1.0),
                                                     codec_key_value_proportion(),
                                                     static_cast<double>(keys.size()), out.rho})
                          .ratio;
    out.result = simulate(job, cell.settings, load_inputs(job, seed));
    out.status = out.result->run.status;
  } catch (const Stalled& e) {
    out.status = JobStatus::kStalled;
    out.error = e.what();
  } catch (const HorizonExceeded& e) {
    out.status = JobStatus::kHorizonExceeded;
    out.error = e.what();
  } catch (const std::exception& e) {
    out.status = JobStatus::kPending;
    out.error = e.what();
  }
  return out;
}

namespace {

// Plan line state: comma lists for mappers, mode and seeds.
struct CellTemplate {
  CellSpec base;
  std::vector<std::size_t> mappers{3};
  std::vector<RunMode> modes{RunMode::kInNetwork};
  std::vector<std::uint64_t> seeds{1};
};

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const std::size_t c = s.find(',');
    out.push_back(trim(s.substr(0, c)));
    if (c == std::string_view::npos) break;
    s.remove_prefix(c + 1);
  }
  return out;
}

void apply_key(CellTemplate& t, std::string_view key, std::string_view value) {
  if (key == "topology") {
    t.base.topology = std::string(value);
  } else if (key == "workload") {
    t.base.workload = std::string(value);
  } else if (key == "layout") {
    t.base.layout = parse_layout(value);
  } else if (key == "op") {
    t.base.op = parse_op_name(value);
  } else if (key == "mappers") {
    t.mappers.clear();
    for (std::string_view v : split_commas(value)) {
      const std::uint64_t n = parse_uint(v);
      if (n == 0) throw std::invalid_argument("mappers must be positive");
      t.mappers.push_back(static_cast<std::size_t>(n));
    }
  } else if (key == "mode") {
    t.modes.clear();
    for (std::string_view v : split_commas(value)) t.modes.push_back(parse_run_mode(v));
  } else if (key == "seeds" || key == "seed") {
    t.seeds.clear();
    for (std::string_view v : split_commas(value)) {
      const std::size_t dash = v.find('-');
      if (dash == std::string_view::npos) {
        t.seeds.push_back(parse_uint(v));
        continue;
      }
      const std::uint64_t lo = parse_uint(v.substr(0, dash));
      const std::uint64_t hi = parse_uint(v.substr(dash + 1));
      if (hi < lo || hi - lo > 1'000'000) throw std::invalid_argument("bad seed range");
      for (std::uint64_t s = lo; s <= hi; ++s) t.seeds.push_back(s);
    }
  } else {
    t.base.settings.set(key, value);
  }
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string ratio_text(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return "";
  return format_double(static_cast<double>(num) / static_cast<double>(den));
}

}  // namespace

ExperimentPlan parse_plan(std::string_view text) {
  ExperimentPlan plan;
  CellTemplate globals;
  std::size_t line_no = 0;
  for (std::string_view raw : split_lines(text)) {
    ++line_no;
    std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    std::vector<std::string_view> tok = tokenize(line);
    try {
      if (tok[0] == "set") {
        const std::size_t eq = line.find('=');
        if (tok.size() < 4 || eq == std::string_view::npos) {
          throw ParseError(line_no, "expected: set <key> = <value>");
        }
        apply_key(globals, tok[1], trim(line.substr(eq + 1)));
      } else if (tok[0] == "cell") {
        if (tok.size() < 2) throw ParseError(line_no, "expected: cell <name> [key=value ...]");
        CellTemplate t = globals;
        t.base.name = std::string(tok[1]);
        for (std::size_t i = 2; i < tok.size(); ++i) {
          const std::size_t eq = tok[i].find('=');
          if (eq == std::string_view::npos || eq == 0) {
            throw ParseError(line_no, "expected key=value, got '" + std::string(tok[i]) + "'");
          }
          apply_key(t, tok[i].substr(0, eq), tok[i].substr(eq + 1));
        }
        for (std::size_t n : t.mappers) {
          for (RunMode mode : t.modes) {
            for (std::uint64_t seed : t.seeds) {
              CellSpec c = t.base;
              c.mappers = n;
              c.settings.mode = mode;
              c.settings.seed = seed;
              plan.cells.push_back(std::move(c));
            }
          }
        }
      } else {
        throw ParseError(line_no, "unknown statement '" + std::string(tok[0]) + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return plan;
}

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> kColumns = {
      "cell",          "topology",         "workload",
      "mode",          "mappers",          "seed",
      "status",        "jct_ns",           "last_hop_bytes",
      "last_hop_payload_bytes", "normalized_bytes", "normalized_payload_bytes",
      "ideal_ratio",   "rho",              "mean_rtt_ns",
      "collect_interval_ns", "losses",     "tail_drops",
      "retransmits",   "timeouts",         "flushes",
      "overflow_flushes", "fallback_pairs", "dropped_pairs",
      "duplicates_dropped", "halvings",    "peak_kv_size",
      "error"};
  return kColumns;
}

ExperimentReport run_experiment(const ExperimentPlan& plan, unsigned threads) {
  ExperimentReport report;
  const std::size_t n = plan.cells.size();
  report.outcomes.resize(n);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) report.outcomes[i] = run_cell(plan.cells[i]);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  // Baseline for normalization: same cell, mapper count and seed.
  std::map<std::tuple<std::string, std::size_t, std::uint64_t>, const CellOutcome*> baselines;
  for (const CellOutcome& o : report.outcomes) {
    if (o.spec.settings.mode == RunMode::kBaseline && o.status == JobStatus::kCompleted) {
      baselines.emplace(std::make_tuple(o.spec.name, o.spec.mappers, o.spec.settings.seed), &o);
    }
  }

  std::ostringstream csv;
  std::ostringstream good;
  std::ostringstream sum;
  const std::vector<std::string>& cols = result_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) csv << (i ? "," : "") << cols[i];
  csv << '\n';
  good << "cell,mode,mappers,seed,mapper,window,start_ns,bytes\n";
  sum << "cell mode mappers seed status jct_ms normalized_payload ideal_ratio\n";

  for (const CellOutcome& o : report.outcomes) {
    const CellSpec& c = o.spec;
    std::vector<std::string> row;
    row.push_back(csv_field(c.name));
    row.push_back(csv_field(c.topology));
    row.push_back(csv_field(c.workload));
    row.push_back(run_mode_name(c.settings.mode));
    row.push_back(std::to_string(c.mappers));
    row.push_back(std::to_string(c.settings.seed));
    row.push_back(job_status_name(o.status));
    std::string norm_payload;
    if (o.result) {
      const MetricsLedger& m = o.result->metrics;
      const RunCounters& k = m.counters;
      std::string norm_bytes;
      auto it = baselines.find(std::make_tuple(c.name, c.mappers, c.settings.seed));
      if (it != baselines.end()) {
        const MetricsLedger& b = it->second->result->metrics;
        norm_bytes = ratio_text(m.last_hop_bytes(), b.last_hop_bytes());
        norm_payload = ratio_text(m.last_hop_payload_bytes(), b.last_hop_payload_bytes());
      }
      std::size_t peak = 0;
      for (std::size_t p : m.peak_kv_size) peak = std::max(peak, p);
      for (std::uint64_t v :
           {static_cast<std::uint64_t>(m.jct), m.last_hop_bytes(), m.last_hop_payload_bytes()}) {
        row.push_back(std::to_string(v));
      }
      row.push_back(norm_bytes);
      row.push_back(norm_payload);
      row.push_back(format_double(o.ideal_ratio));
      row.push_back(format_double(o.rho));
      row.push_back(std::to_string(o.result->mean_rtt));
      row.push_back(std::to_string(o.result->collect_interval));
      for (std::uint64_t v : {k.losses, k.tail_drops, k.retransmits, k.timeouts, k.flushes,
                              k.overflow_flushes, k.fallback_pairs, k.dropped_pairs,
                              k.duplicates_dropped, k.halvings}) {
        row.push_back(std::to_string(v));
      }
      row.push_back(std::to_string(peak));
      for (std::size_t mi = 0; mi < m.goodput.size(); ++mi) {
        for (std::size_t w = 0; w < m.goodput[mi].size(); ++w) {
          good << csv_field(c.name) << ',' << run_mode_name(c.settings.mode) << ',' << c.mappers
               << ',' << c.settings.seed << ',' << m.mapper_names[mi] << ',' << w << ','
               << static_cast<std::uint64_t>(w) * static_cast<std::uint64_t>(m.goodput_window)
               << ',' << m.goodput[mi][w] << '\n';
        }
      }
    } else {
      row.resize(cols.size() - 1);
      row[12] = format_double(o.ideal_ratio);
      row[13] = format_double(o.rho);
    }
    row.push_back(csv_field(o.error));
    for (std::size_t i = 0; i < row.size(); ++i) csv << (i ? "," : "") << row[i];
    csv << '\n';

    sum << c.name << ' ' << run_mode_name(c.settings.mode) << ' ' << c.mappers << ' '
        << c.settings.seed << ' ' << job_status_name(o.status) << ' '
        << (o.result ? format_double(static_cast<double>(o.result->metrics.jct) / 1e6) : "-")
        << ' ' << (norm_payload.empty() ? "-" : norm_payload) << ' '
        << format_double(o.ideal_ratio) << '\n';
  }
  report.results_csv = csv.str();
  report.goodput_csv = good.str();
  report.summary = sum.str();
  return report;
}

void write_report(const ExperimentReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_file((base / "results.csv").string(), report.results_csv);
  write_file((base / "goodput.csv").string(), report.goodput_csv);
  write_file((base / "summary.txt").string(), report.summary);
}

RunArtifacts run_manifest(const CompiledJob& job, const ScenarioConfig& cfg) {
  RunArtifacts out{simulate(job, cfg, load_inputs(job, cfg.seed)), {}, {}, {}};
  out.metrics_csv = out.result.metrics.to_csv();
  out.goodput_csv = out.result.metrics.goodput_csv();
  std::ostringstream tsv;
  for (const auto& [k, v] : out.result.final_table) tsv << k << '\t' << v << '\n';
  out.output_tsv = tsv.str();
  return out;
}

std::string output_dir() {
  const char* env = std::getenv("NETREDUCE_OUT");
  return env && *env ? std::string(env) : std::string(".");
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace netreduce
