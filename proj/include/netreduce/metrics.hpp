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

#ifndef NETREDUCE_METRICS_HPP_
#define NETREDUCE_METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "netreduce/transport.hpp"

namespace netreduce {

struct LinkCounters {
  std::uint64_t packets_offered = 0;
  std::uint64_t packets_delivered = 0;
  std::uint64_t bytes_offered = 0;
  std::uint64_t bytes_delivered = 0;
  std::uint64_t bytes_dropped = 0;
  std::uint64_t payload_bytes_delivered = 0;  // key/value octets only
  std::uint64_t tail_drops = 0;
  std::uint64_t loss_drops = 0;
  std::uint64_t duplicates_injected = 0;
};

struct RunCounters {
  std::uint64_t losses = 0;
  std::uint64_t tail_drops = 0;
  std::uint64_t duplicates_injected = 0;
  std::uint64_t retransmits = 0;
  std::uint64_t timeouts = 0;
  std::uint64_t dup_acks = 0;
  std::uint64_t unknown_acks = 0;
  std::uint64_t flushes = 0;
  std::uint64_t overflow_flushes = 0;
  std::uint64_t flush_packets = 0;
  std::uint64_t fallback_pairs = 0;
  std::uint64_t dropped_pairs = 0;
  std::uint64_t duplicates_dropped = 0;
  std::uint64_t out_of_order_dropped = 0;
  std::uint64_t header_copies = 0;
  std::uint64_t backoff_signals = 0;
  std::uint64_t halvings = 0;
  std::uint64_t malformed = 0;
  std::uint64_t unroutable = 0;
  std::uint64_t rejected = 0;
  std::uint64_t control_messages = 0;
  std::uint64_t periodic_signals = 0;
  std::uint64_t heap_signals = 0;
};

// Everything a run measures. Serialization is deterministic: identical runs
// produce identical CSV text.
struct MetricsLedger {
  std::vector<std::string> link_names;  // "a->b", one per directed channel
  std::vector<LinkCounters> links;
  std::vector<bool> last_hop;           // channel delivers into a reducer host

  std::vector<std::string> mapper_names;
  std::vector<std::vector<std::uint64_t>> goodput;  // acked app bytes per window
  SimTime goodput_window = 5'000'000'000;

  std::vector<std::string> switch_names;
  std::vector<std::size_t> peak_kv_size;

  SimTime jct = 0;
  RunCounters counters;

  void add_goodput(std::size_t mapper, SimTime now, std::uint64_t bytes);

  std::uint64_t last_hop_bytes() const;
  std::uint64_t last_hop_payload_bytes() const;

  // Long format: section,name,value.
  std::string to_csv() const;
  // mapper,window,start_ns,bytes
  std::string goodput_csv() const;
};

}  // namespace netreduce

#endif  // NETREDUCE_METRICS_HPP_
