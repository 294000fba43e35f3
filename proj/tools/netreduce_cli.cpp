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

// netreduce command line: compile, run, sweep, model, selftest.
// Exit codes: 0 ok, 1 error, 2 usage, 3 job stalled or hit a time cap.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "netreduce/errors.hpp"
#include "netreduce/harness.hpp"
#include "netreduce/text.hpp"

namespace nr = netreduce;

namespace {

constexpr int kExitError = 1;
constexpr int kExitStalled = 3;

void apply_overrides(nr::ScenarioConfig& cfg, const std::vector<std::string>& sets) {
  for (const std::string& kv : sets) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected key=value: " + kv);
    cfg.set(nr::trim(std::string_view(kv).substr(0, eq)),
            nr::trim(std::string_view(kv).substr(eq + 1)));
  }
}

int cmd_compile(const std::string& job_path, const std::string& topo_path,
                const std::string& out_path, const std::string& scenario_path,
                const std::vector<std::string>& sets) {
  nr::ScenarioConfig cfg;
  if (!scenario_path.empty()) cfg = nr::ScenarioConfig::parse(nr::read_file(scenario_path));
  apply_overrides(cfg, sets);
  nr::Topology topo = nr::load_topology(topo_path);
  topo.validate();
  const nr::JobSpec spec = nr::parse_job(nr::read_file(job_path));
  nr::CompileOptions opts;
  opts.group_capacity = cfg.group_capacity;
  opts.master = cfg.master;
  const nr::CompiledJob job = nr::compile(spec, topo, opts);
  nr::write_file(out_path, nr::write_manifest(job, cfg));
  for (std::size_t g = 0; g < spec.reducers.size(); ++g) {
    std::cout << "group " << spec.reducers[g].id << " site "
              << job.topo.node(job.placement.site[g]).name << " cost "
              << job.placement.group_cost[g] << '\n';
  }
  std::cout << "manifest " << out_path << '\n';
  return 0;
}

int cmd_run(const std::string& manifest_path, std::optional<std::uint64_t> seed,
            std::optional<double> loss, const std::string& mode,
            const std::vector<std::string>& sets) {
  auto [job, cfg] = nr::read_manifest(nr::read_file(manifest_path));
  if (seed) cfg.seed = *seed;
  if (loss) cfg.set("loss", nr::format_double(*loss));
  if (!mode.empty()) cfg.mode = nr::parse_run_mode(mode);
  apply_overrides(cfg, sets);
  const std::string dir = nr::output_dir();
  std::filesystem::create_directories(dir);
  try {
    const nr::RunArtifacts art = nr::run_manifest(job, cfg);
    const std::filesystem::path base(dir);
    nr::write_file((base / "metrics.csv").string(), art.metrics_csv);
    nr::write_file((base / "goodput.csv").string(), art.goodput_csv);
    nr::write_file((base / "output.tsv").string(), art.output_tsv);
    const nr::MetricsLedger& m = art.result.metrics;
    std::cout << "status " << nr::job_status_name(art.result.run.status) << '\n'
              << "jct_ns " << m.jct << '\n'
              << "last_hop_bytes " << m.last_hop_bytes() << '\n'
              << "last_hop_payload_bytes " << m.last_hop_payload_bytes() << '\n'
              << "keys " << art.result.final_table.size() << '\n';
  } catch (const nr::SimulationError& e) {
    std::cerr << "netreduce: " << e.what() << " at " << e.at() << " ns\n";
    return kExitStalled;
  }
  return 0;
}

int cmd_sweep(const std::string& plan_path, unsigned threads) {
  const nr::ExperimentPlan plan = nr::parse_plan(nr::read_file(plan_path));
  const nr::ExperimentReport report = nr::run_experiment(plan, threads);
  const std::string dir = nr::output_dir();
  nr::write_report(report, dir);
  std::cout << report.summary;
  std::cout << "wrote " << (std::filesystem::path(dir) / "results.csv").string() << '\n';
  return 0;
}

int cmd_model(double d, double r, double n, double rho) {
  const nr::ModelVolumes v = nr::model_volumes(nr::TheoreticalModel{d, r, n, rho});
  std::cout << "V " << nr::format_double(v.v) << '\n'
            << "V' " << nr::format_double(v.v_prime) << '\n'
            << "ratio " << nr::format_double(v.ratio) << '\n';
  return 0;
}

// Small end-to-end check of every mode against the single-machine result.
int cmd_selftest() {
  bool ok = true;
  for (nr::RunMode mode :
       {nr::RunMode::kBaseline, nr::RunMode::kInNetwork, nr::RunMode::kNoMemoryMgmt}) {
    nr::CellSpec cell;
    cell.name = "selftest";
    cell.topology = "testbed";
    cell.workload = "gen:wordcount:vocab=300,words=2000,overlap=0.7";
    cell.mappers = 3;
    cell.settings.mode = mode;
    cell.settings.bound_B = 64;
    cell.settings.num_slots = 128;
    cell.settings.loss = 0.01;
    const nr::CompiledJob job = nr::compile_cell(cell);
    const nr::Table want = nr::job_oracle(job, cell.settings.seed);
    const nr::CellOutcome got = nr::run_cell(cell);
    bool pass = got.result && got.status == nr::JobStatus::kCompleted;
    if (pass && mode == nr::RunMode::kNoMemoryMgmt) {
      // Pairs without a slot are dropped here, so only the key set is bounded.
      for (const auto& [k, v] : got.result->final_table) pass = pass && want.contains(k);
    } else if (pass) {
      pass = got.result->final_table == want;
    }
    std::cout << (pass ? "PASS " : "FAIL ") << nr::run_mode_name(mode);
    if (!got.error.empty()) std::cout << ' ' << got.error;
    std::cout << '\n';
    ok = ok && pass;
  }
  return ok ? 0 : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"netreduce: in-network aggregation emulator"};
  app.require_subcommand(1);

  std::string job_path, topo_path, out_path = "job.manifest", scenario_path;
  std::vector<std::string> compile_sets;
  CLI::App* compile = app.add_subcommand("compile", "Place aggregation sites and emit a manifest");
  compile->add_option("job", job_path, "Job file")->required();
  compile->add_option("topology", topo_path, "Topology file, or default|testbed")->required();
  compile->add_option("-o,--output", out_path, "Manifest to write");
  compile->add_option("--scenario", scenario_path, "Scenario file with key = value lines");
  compile->add_option("--set", compile_sets, "Scenario override key=value");

  std::string manifest_path, mode;
  std::optional<std::uint64_t> seed;
  std::optional<double> loss;
  std::vector<std::string> run_sets;
  CLI::App* run = app.add_subcommand("run", "Simulate a compiled manifest");
  run->add_option("manifest", manifest_path, "Manifest file")->required();
  run->add_option("--seed", seed, "Random seed");
  run->add_option("--loss", loss, "Extra loss probability on every link");
  run->add_option("--mode", mode, "baseline, p4com or no-mem");
  run->add_option("--set", run_sets, "Scenario override key=value");

  std::string plan_path;
  unsigned threads = 0;
  CLI::App* sweep = app.add_subcommand("sweep", "Run every cell of an experiment plan");
  sweep->add_option("plan", plan_path, "Plan file")->required();
  sweep->add_option("-j,--threads", threads, "Parallel cells, 0 for all cores");

  double d = 0, r = 0, n = 0, rho = 0;
  CLI::App* model = app.add_subcommand("model", "Evaluate the shuffle volume model");
  model->add_option("--D", d, "Per-mapper data bytes")->required();
  model->add_option("--R", r, "Key-value proportion")->required();
  model->add_option("--N", n, "Mappers per reducer")->required();
  model->add_option("--rho", rho, "Randomness factor")->required();

  CLI::App* selftest = app.add_subcommand("selftest", "Quick end-to-end check");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*compile) return cmd_compile(job_path, topo_path, out_path, scenario_path, compile_sets);
    if (*run) return cmd_run(manifest_path, seed, loss, mode, run_sets);
    if (*sweep) return cmd_sweep(plan_path, threads);
    if (*model) return cmd_model(d, r, n, rho);
    if (*selftest) return cmd_selftest();
  } catch (const nr::ParseError& e) {
    std::cerr << "netreduce: line " << e.line() << ": " << e.reason() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "netreduce: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
