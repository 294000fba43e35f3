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

#include "netreduce/metrics.hpp"

#include <sstream>
#include <stdexcept>

namespace netreduce {

void MetricsLedger::add_goodput(std::size_t mapper, SimTime now, std::uint64_t bytes) {
  if (goodput_window <= 0) throw std::logic_error("goodput window must be positive");
  std::vector<std::uint64_t>& series = goodput.at(mapper);
  const auto window = static_cast<std::size_t>(now / goodput_window);
  if (series.size() <= window) series.resize(window + 1, 0);
  series[window] += bytes;
}

std::uint64_t MetricsLedger::last_hop_bytes() const {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (last_hop[i]) total += links[i].bytes_delivered;
  }
  return total;
}

std::uint64_t MetricsLedger::last_hop_payload_bytes() const {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (last_hop[i]) total += links[i].payload_bytes_delivered;
  }
  return total;
}

std::string MetricsLedger::to_csv() const {
  std::ostringstream out;
  out << "section,name,field,value\n";
  out << "run,job,jct_ns," << jct << '\n';
  out << "run,job,last_hop_bytes," << last_hop_bytes() << '\n';
  out << "run,job,last_hop_payload_bytes," << last_hop_payload_bytes() << '\n';
  const RunCounters& c = counters;
  const std::pair<const char*, std::uint64_t> rows[] = {
      {"losses", c.losses},
      {"tail_drops", c.tail_drops},
      {"duplicates_injected", c.duplicates_injected},
      {"retransmits", c.retransmits},
      {"timeouts", c.timeouts},
      {"dup_acks", c.dup_acks},
      {"unknown_acks", c.unknown_acks},
      {"flushes", c.flushes},
      {"overflow_flushes", c.overflow_flushes},
      {"flush_packets", c.flush_packets},
      {"fallback_pairs", c.fallback_pairs},
      {"dropped_pairs", c.dropped_pairs},
      {"duplicates_dropped", c.duplicates_dropped},
      {"out_of_order_dropped", c.out_of_order_dropped},
      {"header_copies", c.header_copies},
      {"backoff_signals", c.backoff_signals},
      {"halvings", c.halvings},
      {"malformed", c.malformed},
      {"unroutable", c.unroutable},
      {"rejected", c.rejected},
      {"control_messages", c.control_messages},
      {"periodic_signals", c.periodic_signals},
      {"heap_signals", c.heap_signals},
  };
  for (const auto& [name, value] : rows) out << "counter,run," << name << ',' << value << '\n';
  for (std::size_t i = 0; i < switch_names.size(); ++i) {
    out << "switch," << switch_names[i] << ",peak_kv_size," << peak_kv_size[i] << '\n';
  }
  for (std::size_t i = 0; i < links.size(); ++i) {
    const LinkCounters& l = links[i];
    const std::string& n = link_names[i];
    out << "link," << n << ",last_hop," << (last_hop[i] ? 1 : 0) << '\n';
    out << "link," << n << ",packets_offered," << l.packets_offered << '\n';
    out << "link," << n << ",packets_delivered," << l.packets_delivered << '\n';
    out << "link," << n << ",bytes_offered," << l.bytes_offered << '\n';
    out << "link," << n << ",bytes_delivered," << l.bytes_delivered << '\n';
    out << "link," << n << ",bytes_dropped," << l.bytes_dropped << '\n';
    out << "link," << n << ",payload_bytes_delivered," << l.payload_bytes_delivered << '\n';
    out << "link," << n << ",tail_drops," << l.tail_drops << '\n';
    out << "link," << n << ",loss_drops," << l.loss_drops << '\n';
    out << "link," << n << ",duplicates_injected," << l.duplicates_injected << '\n';
  }
  return out.str();
}

std::string MetricsLedger::goodput_csv() const {
  std::ostringstream out;
  out << "mapper,window,start_ns,bytes\n";
  for (std::size_t m = 0; m < goodput.size(); ++m) {
    for (std::size_t w = 0; w < goodput[m].size(); ++w) {
      out << mapper_names.at(m) << ',' << w << ',' << static_cast<SimTime>(w) * goodput_window
          << ',' << goodput[m][w] << '\n';
    }
  }
  return out.str();
}

}  // namespace netreduce
