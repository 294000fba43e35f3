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

#include <set>
#include <string>
#include <vector>

#include "netreduce/errors.hpp"
#include "netreduce/harness.hpp"
#include "netreduce/scenario.hpp"
#include "netreduce/workload.hpp"

namespace netreduce {
namespace {

TEST(Model, SixFullyOverlappingMappers) {
  const ModelVolumes v = model_volumes({1e6, 0.96, 6, 1});
  EXPECT_NEAR(v.ratio, 1.0 / 6, 1e-12);
  EXPECT_NEAR(v.v, 6 * 1e6 * (1 + 1 / 0.96), 1e-3);
}

TEST(Model, SingleMapperHasNoReduction) {
  EXPECT_DOUBLE_EQ(model_volumes({1000, 0.5, 1, 1}).ratio, 1);
}

TEST(Model, DisjointKeysHaveNoReduction) {
  for (double n : {2.0, 3.0, 12.0}) EXPECT_NEAR(model_volumes({1000, 0.5, n, 1 / n}).ratio, 1, 1e-12);
}

TEST(Model, OutOfDomainRejected) {
  EXPECT_THROW(model_volumes({0, 1, 2, 1}), DomainError);
  EXPECT_THROW(model_volumes({1, 0, 2, 1}), DomainError);
  EXPECT_THROW(model_volumes({1, 1, 0.5, 1}), DomainError);
  EXPECT_THROW(model_volumes({1, 1, 4, 0.2}), DomainError);
  EXPECT_THROW(model_volumes({1, 1, 4, 1.1}), DomainError);
}

TEST(Model, ProportionFromWireLayout) {
  EXPECT_NEAR(codec_key_value_proportion(), 1360.0 / 1416.0, 1e-12);
}

TEST(Rho, BoundaryCasesAndSetArithmetic) {
  using S = std::set<std::string>;
  EXPECT_DOUBLE_EQ(estimate_rho({S{"a", "b"}, S{"a", "b"}, S{"a", "b"}}), 1);
  EXPECT_DOUBLE_EQ(estimate_rho({S{"a"}, S{"b"}, S{"c"}}), 1.0 / 3);
  EXPECT_DOUBLE_EQ(estimate_rho({S{"a", "b"}, S{"b", "c"}}), 2.0 / 3);
  EXPECT_THROW(estimate_rho({S{}, S{}}), std::invalid_argument);
}

TEST(Workload, GradientSumSharesEveryKey) {
  const WorkloadSpec w = parse_workload("gen:gradient-sum:keys=100");
  std::vector<std::set<std::string>> keys;
  for (const auto& part : generate_workload(w, 6, 3)) keys.push_back(distinct_keys(part, input_format(w)));
  EXPECT_DOUBLE_EQ(estimate_rho(keys), 1);
  EXPECT_EQ(keys[0].size(), 100u);
}

TEST(Workload, ZeroOverlapIsDisjoint) {
  const WorkloadSpec w = parse_workload("gen:wordcount:vocab=50,words=400,overlap=0");
  std::vector<std::set<std::string>> keys;
  for (const auto& part : generate_workload(w, 4, 3)) keys.push_back(distinct_keys(part, input_format(w)));
  EXPECT_DOUBLE_EQ(estimate_rho(keys), 0.25);
}

TEST(Workload, OverlapRaisesRho) {
  double last = 0;
  for (double overlap : {0.0, 0.3, 0.6, 1.0}) {
    const WorkloadSpec w = parse_workload(
        "gen:wordcount:vocab=200,words=3000,overlap=" + std::to_string(overlap));
    std::vector<std::set<std::string>> keys;
    for (const auto& part : generate_workload(w, 4, 11)) {
      keys.push_back(distinct_keys(part, input_format(w)));
    }
    const double rho = estimate_rho(keys);
    EXPECT_GT(rho, last);
    last = rho;
  }
}

TEST(Workload, SameSeedSamePartitions) {
  const WorkloadSpec w = parse_workload("gen:wordcount:vocab=80,words=300,dist=zipf,s=1.2");
  EXPECT_EQ(generate_workload(w, 3, 5), generate_workload(w, 3, 5));
  EXPECT_NE(generate_workload(w, 3, 5), generate_workload(w, 3, 6));
}

TEST(Workload, MalformedGeneratorRejected) {
  EXPECT_THROW(parse_workload("gen:gradient-sum:keys=abc"), std::invalid_argument);
  EXPECT_THROW(parse_workload("gen:unknown:x=1"), std::invalid_argument);
}

TEST(Scenario, TextRoundTrip) {
  ScenarioConfig c;
  c.mode = RunMode::kBaseline;
  c.loss = 0.005;
  c.bound_B = 100;
  c.collect_interval = 0;
  c.master = "h3";
  EXPECT_EQ(ScenarioConfig::parse(c.to_text()), c);
  EXPECT_THROW(ScenarioConfig::parse("bogus = 1\n"), ParseError);
  EXPECT_THROW(ScenarioConfig::parse("loss 0.1\n"), ParseError);
}

TEST(Plan, ExpandsListsIntoCells) {
  const ExperimentPlan plan = parse_plan(
      "set bound_B = 512\n"
      "cell sweep workload=gen:gradient-sum:keys=50,range=3 mappers=3,6 mode=baseline,p4com "
      "seeds=1-2 loss=0.01\n");
  ASSERT_EQ(plan.cells.size(), 8u);
  EXPECT_EQ(plan.cells[0].workload, "gen:gradient-sum:keys=50,range=3");
  EXPECT_EQ(plan.cells[0].settings.bound_B, 512u);
  EXPECT_DOUBLE_EQ(plan.cells[7].settings.loss, 0.01);
  EXPECT_EQ(plan.cells[7].mappers, 6u);
  EXPECT_EQ(plan.cells[7].settings.mode, RunMode::kInNetwork);
  EXPECT_EQ(plan.cells[7].settings.seed, 2u);
  EXPECT_THROW(parse_plan("cell x mappers=0\n"), ParseError);
  EXPECT_THROW(parse_plan("run everything\n"), ParseError);
}

TEST(Plan, BaselineNormalizesToOne) {
  const ExperimentPlan plan = parse_plan(
      "cell n topology=testbed workload=gen:gradient-sum:keys=100 mappers=3 "
      "mode=baseline,p4com collect_interval_ns=0\n");
  const ExperimentReport r = run_experiment(plan, 2);
  ASSERT_EQ(r.outcomes.size(), 2u);
  const std::string& csv = r.results_csv;
  EXPECT_EQ(csv.substr(0, csv.find('\n')).find("cell,topology,workload,mode"), 0u);
  // Baseline row: normalized columns are exactly 1.
  EXPECT_NE(csv.find(",baseline,3,1,completed,"), std::string::npos);
  const std::size_t row = csv.find(",baseline,3,1,completed,");
  const std::string line = csv.substr(row, csv.find('\n', row) - row);
  EXPECT_NE(line.find(",1,1,"), std::string::npos);
  // Thread count does not change the report.
  EXPECT_EQ(run_experiment(plan, 1).results_csv, csv);
}

TEST(Layout, RackAndSpread) {
  const Topology t = default_topology();
  const JobSpec rack = parse_job(layout_job(t, 6, "x", OpCode::kAdd, Layout::kRack));
  const JobSpec spread = parse_job(layout_job(t, 6, "x", OpCode::kAdd, Layout::kSpread));
  std::set<std::string> rack_hosts, spread_hosts;
  for (std::size_t m = 0; m < 6; ++m) {
    rack_hosts.insert(rack.mapper_host(m));
    spread_hosts.insert(spread.mapper_host(m));
  }
  EXPECT_EQ(rack_hosts.size(), 5u);
  EXPECT_EQ(spread_hosts.size(), 6u);
  EXPECT_FALSE(rack_hosts.contains("h7"));
  EXPECT_TRUE(spread_hosts.contains("h7"));
}

TEST(Hash, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

}  // namespace
}  // namespace netreduce
