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

#include "netreduce/scenario.hpp"

#include <cmath>
#include <stdexcept>

#include "netreduce/errors.hpp"
#include "netreduce/text.hpp"

namespace netreduce {

namespace {

SimTime parse_ns(std::string_view v) {
  const double d = parse_double(v);
  if (d < 0) throw std::invalid_argument("negative duration");
  return static_cast<SimTime>(std::llround(d));
}

double parse_probability(std::string_view v) {
  const double p = parse_double(v);
  if (!(p >= 0 && p < 1)) throw std::invalid_argument("probability outside [0,1)");
  return p;
}

std::size_t parse_count(std::string_view v) { return static_cast<std::size_t>(parse_uint(v)); }

}  // namespace

void ScenarioConfig::set(std::string_view key, std::string_view value) {
  if (key == "mode") {
    mode = parse_run_mode(value);
  } else if (key == "seed") {
    seed = parse_uint(value);
  } else if (key == "loss") {
    loss = parse_probability(value);
  } else if (key == "dup_prob") {
    dup_prob = parse_probability(value);
  } else if (key == "bound_B") {
    bound_B = parse_count(value);
  } else if (key == "num_slots") {
    num_slots = parse_count(value);
  } else if (key == "num_hash") {
    num_hash = parse_count(value);
  } else if (key == "group_capacity") {
    group_capacity = parse_count(value);
  } else if (key == "heap_limit") {
    heap_limit = parse_count(value);
    if (heap_limit == 0) throw std::invalid_argument("heap_limit must be positive");
  } else if (key == "collect_interval_ns") {
    if (value == "auto") {
      collect_interval.reset();
    } else {
      collect_interval = parse_ns(value);
    }
  } else if (key == "initial_cwnd") {
    initial_cwnd = parse_double(value);
    if (initial_cwnd < 1) throw std::invalid_argument("initial_cwnd < 1");
  } else if (key == "max_cwnd") {
    max_cwnd = parse_double(value);
    if (max_cwnd < 1) throw std::invalid_argument("max_cwnd < 1");
  } else if (key == "min_rto_ns") {
    min_rto = parse_ns(value);
  } else if (key == "max_rto_ns") {
    max_rto = parse_ns(value);
  } else if (key == "goodput_window_ns") {
    goodput_window = parse_ns(value);
    if (goodput_window == 0) throw std::invalid_argument("goodput_window_ns must be positive");
  } else if (key == "stall_timeout_ns") {
    stall_timeout = parse_ns(value);
  } else if (key == "max_sim_time_ns") {
    max_sim_time = parse_ns(value);
  } else if (key == "wall_clock_limit_s") {
    wall_clock_limit_s = parse_double(value);
  } else if (key == "master") {
    master = value == "auto" ? std::string() : std::string(value);
  } else {
    throw std::invalid_argument("unknown setting '" + std::string(key) + "'");
  }
}

std::vector<std::pair<std::string, std::string>> ScenarioConfig::entries() const {
  return {
      {"mode", run_mode_name(mode)},
      {"seed", std::to_string(seed)},
      {"loss", format_double(loss)},
      {"dup_prob", format_double(dup_prob)},
      {"bound_B", std::to_string(bound_B)},
      {"num_slots", std::to_string(num_slots)},
      {"num_hash", std::to_string(num_hash)},
      {"group_capacity", std::to_string(group_capacity)},
      {"heap_limit", std::to_string(heap_limit)},
      {"collect_interval_ns",
       collect_interval ? std::to_string(*collect_interval) : std::string("auto")},
      {"initial_cwnd", format_double(initial_cwnd)},
      {"max_cwnd", format_double(max_cwnd)},
      {"min_rto_ns", std::to_string(min_rto)},
      {"max_rto_ns", std::to_string(max_rto)},
      {"goodput_window_ns", std::to_string(goodput_window)},
      {"stall_timeout_ns", std::to_string(stall_timeout)},
      {"max_sim_time_ns", std::to_string(max_sim_time)},
      {"wall_clock_limit_s", format_double(wall_clock_limit_s)},
      {"master", master.empty() ? std::string("auto") : master},
  };
}

ScenarioConfig ScenarioConfig::parse(std::string_view text) {
  ScenarioConfig cfg;
  std::size_t line_no = 0;
  for (std::string_view raw : split_lines(text)) {
    ++line_no;
    std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    try {
      cfg.set(key, value);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return cfg;
}

std::string ScenarioConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries()) out += k + " = " + v + "\n";
  return out;
}

}  // namespace netreduce
