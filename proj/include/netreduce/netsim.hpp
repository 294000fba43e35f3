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

// Discrete-event network simulation. Time is integer nanoseconds; events at
// equal times run in insertion order.

#ifndef NETREDUCE_NETSIM_HPP_
#define NETREDUCE_NETSIM_HPP_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "netreduce/compiler.hpp"
#include "netreduce/hosts.hpp"
#include "netreduce/metrics.hpp"
#include "netreduce/scenario.hpp"
#include "netreduce/transport.hpp"

namespace netreduce {

class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, SimTime at) : std::runtime_error(what), at_(at) {}
  SimTime at() const { return at_; }

 private:
  SimTime at_;
};

// Work is outstanding but nothing has made progress for too long.
class Stalled : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

// The simulated-time or wall-clock cap was reached.
class HorizonExceeded : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

// ceil(bytes * 8 / rate) in nanoseconds.
SimTime serialization_ns(std::size_t bytes, std::uint64_t rate_bps);

class EventQueue {
 public:
  void schedule(SimTime at, std::function<void()> fn);
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  SimTime now() const { return now_; }
  SimTime next_time() const;
  // Pops and runs the earliest event. Throws std::logic_error if empty.
  void run_next();

 private:
  struct Event {
    SimTime at;
    std::uint64_t order;
    std::function<void()> fn;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.at != b.at ? a.at > b.at : a.order > b.order;
    }
  };
  std::vector<Event> heap_;
  std::uint64_t next_order_ = 0;
  SimTime now_ = 0;
};

enum class Fate { kDelivered, kTailDropped, kLost };

struct ChannelVerdict {
  Fate fate = Fate::kDelivered;
  SimTime arrival = 0;      // meaningful unless tail dropped
  bool duplicated = false;  // a second copy arrives at the same instant
};

// One direction of a link: FIFO serialization, tail drop at `queue_pkts`
// (the packet in service counts), Bernoulli loss, optional duplication.
// Draws one uniform per accepted packet for loss, and a second one for
// duplication only when dup_prob > 0.
class Channel {
 public:
  Channel(std::uint64_t rate_bps, SimTime delay_ns, std::size_t queue_pkts, double loss,
          double dup_prob, std::uint64_t rng_seed);

  ChannelVerdict offer(std::size_t bytes, SimTime now);
  std::size_t occupancy(SimTime now);

 private:
  std::uint64_t rate_bps_;
  SimTime delay_ns_;
  std::size_t queue_pkts_;
  double loss_;
  double dup_prob_;
  std::mt19937_64 rng_;
  SimTime busy_until_ = 0;
  std::deque<SimTime> departures_;
};

struct MapperInput {
  std::vector<std::string> partition;
  MapFn map_fn;
};

struct SimulationResult {
  JobRun run;
  MetricsLedger metrics;
  std::vector<Table> group_tables;  // final reducer state per group
  Table final_table;                // all groups folded together
  std::vector<std::size_t> residual_kv_size;  // per aggregation site at the end
  SimTime mean_rtt = 0;
  SimTime collect_interval = 0;
  std::uint64_t events = 0;
};

// Mean unloaded round trip of the mapper flows: full-size data packet out,
// acknowledgement back.
SimTime estimate_mean_rtt(const CompiledJob& job, RunMode mode);

// Runs the job to completion. Throws Stalled or HorizonExceeded.
SimulationResult simulate(const CompiledJob& job, const ScenarioConfig& cfg,
                          const std::vector<MapperInput>& inputs);

// Bytes delivered into reducer hosts.
std::uint64_t measure_last_hop(const MetricsLedger& ledger);

}  // namespace netreduce

#endif  // NETREDUCE_NETSIM_HPP_
