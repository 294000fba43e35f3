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

#include <random>
#include <string>

#include "netreduce/compiler.hpp"
#include "netreduce/errors.hpp"
#include "netreduce/harness.hpp"
#include "test_util.hpp"

namespace netreduce {
namespace {

const char* kStar =
    "node sw switch:prog\n"
    "node h1 host\nnode h2 host\nnode h3 host\nnode h4 host\n"
    "link h1 sw 1e9 1000 64\nlink h2 sw 1e9 1000 64\n"
    "link h3 sw 1e9 1000 64\nlink h4 sw 1e9 1000 64\n";

const char* kStarJob =
    "dataset a = h1:gen:gradient-sum:keys=10\n"
    "dataset b = h2:gen:gradient-sum:keys=10\n"
    "dataset c = h3:gen:gradient-sum:keys=10\n"
    "mapper m1 on a\nmapper m2 on b\nmapper m3 on c\n"
    "reducer h4 from m1, m2, m3\n"
    "op ADD\n";

TEST(Topology, ParsesAndPrintsBack) {
  const Topology t = Topology::parse(kStar);
  EXPECT_EQ(t.nodes().size(), 5u);
  EXPECT_EQ(t.links().size(), 4u);
  EXPECT_EQ(Topology::parse(t.to_text()), t);
  EXPECT_EQ(t.hops(t.id("h1"), t.id("h4")), 2);
}

TEST(Topology, ParseErrorsCarryLine) {
  try {
    Topology::parse("node a host\nlink a b 1 1 1\n");
    FAIL();
  } catch (const UnresolvedName& e) {
    EXPECT_EQ(e.name(), "b");
  }
  try {
    Topology::parse("node a host\n\nnode b router\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(Topology::parse("node a host\nnode a host\n"), DuplicateId);
}

TEST(Topology, HostsDoNotForward) {
  // h1 - s1 - h2 - s2 : s2 reachable from s1 only through a host.
  const Topology t = Topology::parse(
      "node s1 switch\nnode s2 switch\nnode h1 host\nnode h2 host\n"
      "link h1 s1 1e9 0 8\nlink s1 h2 1e9 0 8\nlink h2 s2 1e9 0 8\n");
  EXPECT_EQ(t.hops(t.id("s1"), t.id("s2")), kUnreachable);
  EXPECT_EQ(t.hops(t.id("h2"), t.id("s2")), 1);
}

TEST(Compiler, MinimalJob) {
  const JobSpec spec = parse_job(
      "dataset d = h1:input.txt\nmapper m on d\nreducer h2 from m\n");
  EXPECT_EQ(spec.datasets.size(), 1u);
  EXPECT_EQ(spec.mappers.size(), 1u);
  ASSERT_EQ(spec.reducers.size(), 1u);
  EXPECT_EQ(spec.reducers[0].mappers, std::vector<std::string>{"m"});
  EXPECT_EQ(parse_job(pretty_print(spec)), spec);
}

TEST(Compiler, UnresolvedDatasetReported) {
  EXPECT_THROW(parse_job("mapper m1 on nosuch\n"), UnresolvedName);
}

TEST(Compiler, MapperOutsideEveryGroupRejected) {
  EXPECT_THROW(parse_job("dataset d = h1:x\nmapper m on d\nmapper n on d\nreducer h2 from m\n"),
               ParseError);
}

TEST(Compiler, DuplicateReducerHostRejected) {
  EXPECT_THROW(parse_job("dataset d = h1:x\nmapper m on d\nreducer h2 from m\nreducer h2 from m\n"),
               DuplicateId);
}

TEST(Compiler, SingleSwitchIsChosenWithCostFour) {
  const Topology t = Topology::parse(kStar);
  const JobSpec spec = parse_job(kStarJob);
  const Placement p = place_reducers(spec, t, 4);
  ASSERT_EQ(p.site.size(), 1u);
  EXPECT_EQ(p.site[0], t.id("sw"));
  EXPECT_EQ(p.cost, 4);
}

TEST(Compiler, StarRoutesAreOneHopToHub) {
  const Topology t = Topology::parse(kStar);
  const CompiledJob job = compile(parse_job(kStarJob), t, {});
  for (NodeId h : t.hosts()) {
    for (const auto& [dst, port] : job.routes[h].defaults()) {
      EXPECT_EQ(t.ports(h)[port].neighbor, t.id("sw"));
    }
  }
  EXPECT_TRUE(verify_routes(job.spec, job.topo, job.placement, job.flows, job.master, job.routes)
                  .empty());
}

TEST(Compiler, CapacityForcesDistinctSwitches) {
  const Topology t = Topology::parse(
      "node s1 switch:prog\nnode s2 switch:prog\n"
      "node h1 host\nnode h2 host\nnode h3 host\nnode h4 host\n"
      "link s1 s2 1e9 0 8\n"
      "link h1 s1 1e9 0 8\nlink h2 s1 1e9 0 8\nlink h3 s2 1e9 0 8\nlink h4 s2 1e9 0 8\n");
  const JobSpec spec = parse_job(
      "dataset a = h1:x\ndataset b = h2:x\n"
      "mapper m1 on a\nmapper m2 on b\n"
      "reducer h3 from m1\nreducer h4 from m2\n");
  const Placement two = place_reducers(spec, t, 2);
  EXPECT_EQ(two.site[0], two.site[1]);
  const Placement one = place_reducers(spec, t, 1);
  EXPECT_NE(one.site[0], one.site[1]);
}

TEST(Compiler, NoProgrammableSwitchFails) {
  const Topology t = Topology::parse(
      "node s switch\nnode h1 host\nnode h2 host\nlink h1 s 1e9 0 8\nlink h2 s 1e9 0 8\n");
  const JobSpec spec = parse_job("dataset a = h1:x\nmapper m on a\nreducer h2 from m\n");
  EXPECT_THROW(place_reducers(spec, t, 4), NoFeasibleSwitch);
}

TEST(Compiler, RoutesThroughWrongSiteFailVerification) {
  const Topology t = Topology::parse(kStar);
  CompiledJob job = compile(parse_job(kStarJob), t, {});
  // Point the placement at a mapper host: no other flow can traverse it.
  Placement bad = job.placement;
  bad.site[0] = t.id("h1");
  EXPECT_FALSE(verify_routes(job.spec, job.topo, bad, job.flows, job.master, job.routes).empty());
  EXPECT_THROW(emit_routes(job.spec, job.topo, bad, job.flows, job.master), RouteError);
}

TEST(Compiler, DroppedFlowRuleDetected) {
  const Topology t = default_topology();
  const JobSpec spec = parse_job(layout_job(t, 3, "gen:gradient-sum:keys=10", OpCode::kAdd,
                                            Layout::kSpread));
  CompiledJob job = compile(spec, t, {});
  EXPECT_TRUE(verify_routes(job.spec, job.topo, job.placement, job.flows, job.master, job.routes)
                  .empty());
  // Flows crossing racks rely on rules; removing them must be noticed when
  // the default path misses the site.
  for (RouteTable& r : job.routes) r.clear_flow_rules();
  const NodeId site = job.placement.site[0];
  bool some_bypass = false;
  for (std::size_t m = 0; m < spec.mappers.size(); ++m) {
    const std::vector<NodeId> path = t.path(job.mapper_host(m), job.reducer_host(0));
    some_bypass = some_bypass || std::find(path.begin(), path.end(), site) == path.end();
  }
  if (some_bypass) {
    EXPECT_FALSE(
        verify_routes(job.spec, job.topo, job.placement, job.flows, job.master, job.routes)
            .empty());
  }
}

TEST(Compiler, FlowIdsAreDense) {
  const JobSpec spec = parse_job(
      "dataset a = h1:x\nmapper m1 on a\nmapper m2 on a\n"
      "reducer h2 from m1, m2\nreducer h3 from m2\n");
  const FlowPlan plan = assign_flows(spec);
  ASSERT_EQ(plan.size(), 3u + 2u + 2u);
  for (std::size_t i = 0; i < plan.size(); ++i) EXPECT_EQ(plan.flows[i].id, i);
  EXPECT_EQ(*plan.mapper_flow(0, 0), 0u);
  EXPECT_EQ(*plan.mapper_flow(1, 0), 1u);
  EXPECT_EQ(*plan.mapper_flow(1, 1), 2u);
  EXPECT_FALSE(plan.mapper_flow(0, 1));
  EXPECT_EQ(plan.master_flow(1), 4u);
  EXPECT_EQ(plan.switch_flow(1), 6u);
}

TEST(Compiler, ManifestRoundTrip) {
  const Topology t = default_topology();
  const JobSpec spec = parse_job(layout_job(t, 6, "gen:wordcount:vocab=50,words=200",
                                            OpCode::kMax, Layout::kSpread));
  const CompiledJob job = compile(spec, t, {});
  ScenarioConfig cfg;
  cfg.seed = 77;
  cfg.loss = 0.01;
  cfg.collect_interval = 12345;
  const std::string text = write_manifest(job, cfg);
  const auto [job2, cfg2] = read_manifest(text);
  EXPECT_EQ(job2, job);
  EXPECT_EQ(cfg2, cfg);
  EXPECT_EQ(write_manifest(job2, cfg2), text);
}

TEST(Compiler, ManifestRejectsGarbage) {
  EXPECT_THROW(read_manifest("not a manifest\n"), ParseError);
}

// Greedy placement matches an exhaustive search for single groups, and
// stays within 1.5x of the optimum for several groups.
TEST(CompilerProperty, GreedyAgainstExhaustive) {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 60; ++trial) {
    const Topology t = test::random_topology(rng, 6, 6, true);
    const JobSpec one = test::random_job(rng, t, 1);
    const int best = test::exhaustive_min_cost(one, t, 4);
    ASSERT_GE(best, 0);
    EXPECT_EQ(place_reducers(one, t, 4).cost, best);

    const JobSpec many = test::random_job(rng, t, 1 + rng() % 3);
    const int best_many = test::exhaustive_min_cost(many, t, 2);
    if (best_many < 0) {
      EXPECT_THROW(place_reducers(many, t, 2), NoFeasibleSwitch);
      continue;
    }
    try {
      EXPECT_LE(place_reducers(many, t, 2).cost, 1.5 * best_many);
    } catch (const NoFeasibleSwitch&) {
      // Greedy may paint itself into a corner that the exhaustive search avoids.
    }
  }
}

// Every compiled random job verifies: steered flows reach their site, loop
// free, and ACKs find their way back.
TEST(CompilerProperty, CompiledRoutesVerify) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const Topology t = test::random_topology(rng, 6, 7, false);
    const JobSpec spec = test::random_job(rng, t, 1 + rng() % 2);
    const CompiledJob job = compile(spec, t, {});
    EXPECT_TRUE(
        verify_routes(job.spec, job.topo, job.placement, job.flows, job.master, job.routes)
            .empty());
  }
}

}  // namespace
}  // namespace netreduce
