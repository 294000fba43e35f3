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

// Run-time knobs. Text form is one `key = value` per line; the same keys
// appear as `set <key> <value>` lines in a manifest.

#ifndef NETREDUCE_SCENARIO_HPP_
#define NETREDUCE_SCENARIO_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "netreduce/hosts.hpp"
#include "netreduce/transport.hpp"

namespace netreduce {

struct ScenarioConfig {
  RunMode mode = RunMode::kInNetwork;
  std::uint64_t seed = 1;
  double loss = 0;      // extra Bernoulli loss on every channel
  double dup_prob = 0;  // probability a delivered packet is delivered twice

  std::size_t bound_B = 1024;
  std::size_t num_slots = 2048;
  std::size_t num_hash = 2;
  std::size_t group_capacity = 4;
  std::size_t heap_limit = 100'000;
  std::optional<SimTime> collect_interval;  // unset: 10x mean round trip; 0: off

  double initial_cwnd = 10;
  double max_cwnd = 64;
  SimTime min_rto = 2'000'000;
  SimTime max_rto = 200'000'000;

  SimTime goodput_window = 5'000'000'000;
  SimTime stall_timeout = 5'000'000'000;
  SimTime max_sim_time = 3'600'000'000'000;
  double wall_clock_limit_s = 600;

  std::string master;  // host name; empty picks a default

  // Throws std::invalid_argument for unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  // Every knob in a fixed order, values formatted for set().
  std::vector<std::pair<std::string, std::string>> entries() const;

  static ScenarioConfig parse(std::string_view text);  // throws ParseError
  std::string to_text() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

}  // namespace netreduce

#endif  // NETREDUCE_SCENARIO_HPP_
