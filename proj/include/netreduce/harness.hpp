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

// Analytic volume model, standard topologies, single runs and sweeps.
//
// Plan files, one statement per line, '#' starts a comment:
//   set <key> = <value>              applies to every later cell
//   cell <name> [key=value ...]      one cell, or a cross product when
//                                    mappers= or mode= hold comma lists
// Cell keys: topology (default|testbed|<file>), workload (dataset path),
// layout (rack|spread), mappers, op, mode, seeds (comma list or a-b range), plus any scenario key.

#ifndef NETREDUCE_HARNESS_HPP_
#define NETREDUCE_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "netreduce/compiler.hpp"
#include "netreduce/netsim.hpp"
#include "netreduce/scenario.hpp"
#include "netreduce/topology.hpp"
#include "netreduce/workload.hpp"

namespace netreduce {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct TheoreticalModel {
  double D = 0;    // per-mapper data bytes
  double R = 0;    // key-value proportion
  double N = 1;    // mappers per reducer
  double rho = 1;  // randomness factor in [1/N, 1]
};

struct ModelVolumes {
  double v = 0;        // shuffle volume without aggregation
  double v_prime = 0;  // shuffle volume with aggregation
  double ratio = 0;    // v_prime / v
};

// Throws DomainError outside D > 0, R > 0, N >= 1, 1/N <= rho <= 1.
ModelVolumes model_volumes(const TheoreticalModel& m);

// Payload octets over total octets of a full packet.
double codec_key_value_proportion();

// Two ToRs under two aggregation switches, six hosts per ToR, 1 Gbps.
Topology default_topology();
// One programmable switch with four hosts.
Topology testbed_topology(std::uint64_t rate_bps = 10'000'000'000ULL, SimTime delay_ns = 1'000,
                          std::size_t queue_pkts = 1000);
// "default", "testbed" or a topology file.
Topology load_topology(std::string_view ref);

// Where mappers go relative to the reducer, which is always the first host.
// kRack: round robin over the reducer's rack mates (every other host when
// it has none). kSpread: rack mates first, then the remaining hosts, so
// hosts run one mapper each while they last.
enum class Layout { kRack, kSpread };
const char* layout_name(Layout layout);
Layout parse_layout(std::string_view text);  // rack | spread

// One reducer group. Each mapper gets its own dataset on its host reading
// `workload`.
std::string layout_job(const Topology& topo, std::size_t mappers, std::string_view workload,
                       OpCode op, Layout layout = Layout::kRack);

// Mapper inputs for a compiled job. Generators draw per mapper index with
// `seed`; files shared by several mappers are dealt line by line.
std::vector<MapperInput> load_inputs(const CompiledJob& job, std::uint64_t seed);
// Distinct keys per mapper, for the randomness factor.
std::vector<std::set<std::string>> mapper_key_sets(const CompiledJob& job, std::uint64_t seed);
// Single-machine aggregate of every mapper input.
Table job_oracle(const CompiledJob& job, std::uint64_t seed);

struct CellSpec {
  std::string name = "cell";
  std::string topology = "default";
  std::string workload = "gen:gradient-sum:keys=1000";
  std::size_t mappers = 3;
  OpCode op = OpCode::kAdd;
  Layout layout = Layout::kRack;
  ScenarioConfig settings;  // mode and seed live here
};

struct CellOutcome {
  CellSpec spec;
  JobStatus status = JobStatus::kPending;
  std::string error;
  std::optional<SimulationResult> result;
  double rho = 1;
  double ideal_ratio = 1;
  double mean_mapper_bytes = 0;
};

CompiledJob compile_cell(const CellSpec& cell);
// Never throws for simulation failures; they land in status and error.
CellOutcome run_cell(const CellSpec& cell);

struct ExperimentPlan {
  std::vector<CellSpec> cells;
};

ExperimentPlan parse_plan(std::string_view text);  // throws ParseError

struct ExperimentReport {
  std::vector<CellOutcome> outcomes;
  std::string results_csv;
  std::string goodput_csv;
  std::string summary;
};

// Runs every cell, up to `threads` at once (0: hardware concurrency).
// Output order and content do not depend on the thread count.
ExperimentReport run_experiment(const ExperimentPlan& plan, unsigned threads = 0);
void write_report(const ExperimentReport& report, const std::string& dir);

// Column order of results.csv.
const std::vector<std::string>& result_columns();

// Everything `run` writes, keyed by file name.
struct RunArtifacts {
  SimulationResult result;
  std::string metrics_csv;
  std::string goodput_csv;
  std::string output_tsv;  // final table, sorted key<TAB>value
};
RunArtifacts run_manifest(const CompiledJob& job, const ScenarioConfig& cfg);

// Output directory from NETREDUCE_OUT, else ".".
std::string output_dir();

std::uint64_t fnv1a64(std::string_view data);

}  // namespace netreduce

#endif  // NETREDUCE_HARNESS_HPP_
