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

// Mapper inputs. A dataset path is either a local file or a generator:
//   gen:gradient-sum:keys=<K>[,range=<r>]
//   gen:wordcount:vocab=<K>,words=<n>[,overlap=<f>][,dist=uniform|zipf][,s=<x>]
//   kv:<file>     key<TAB>value lines
//   <file>        plain text, counted word by word

#ifndef NETREDUCE_WORKLOAD_HPP_
#define NETREDUCE_WORKLOAD_HPP_

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "netreduce/hosts.hpp"

namespace netreduce {

enum class WorkloadKind { kGradientSum, kWordCountSynthetic, kWordCountFile, kKeyValueFile };
enum class KeyDistribution { kUniform, kZipf };

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::kGradientSum;
  std::size_t vocab = 1000;      // distinct keys available to each mapper
  std::size_t words = 1000;      // words drawn per mapper (word count)
  double overlap = 1.0;          // share of draws from the shared vocabulary
  KeyDistribution dist = KeyDistribution::kUniform;
  double zipf_s = 1.0;
  std::int32_t value_range = 1000;  // gradient values lie in [-range, range]
  std::string path;                 // file kinds

  friend bool operator==(const WorkloadSpec&, const WorkloadSpec&) = default;
};

// Throws std::invalid_argument on a malformed generator description.
WorkloadSpec parse_workload(std::string_view dataset_path);
InputFormat input_format(const WorkloadSpec& w);

// Partition for one of `num_mappers` mappers. Deterministic in
// (w, rank, num_mappers, seed). File kinds deal lines round robin.
std::vector<std::string> generate_partition(const WorkloadSpec& w, std::size_t rank,
                                            std::size_t num_mappers, std::uint64_t seed);
std::vector<std::vector<std::string>> generate_workload(const WorkloadSpec& w,
                                                        std::size_t num_mappers,
                                                        std::uint64_t seed);

// Sum of per-mapper distinct key counts over N times the union size.
// Throws std::invalid_argument when there are no keys at all.
double estimate_rho(const std::vector<std::set<std::string>>& key_sets);
std::set<std::string> distinct_keys(const std::vector<std::string>& partition,
                                    InputFormat format);

// Single-machine reference aggregate.
Table oracle_aggregate(const std::vector<std::vector<std::string>>& partitions,
                       InputFormat format, OpCode op);

}  // namespace netreduce

#endif  // NETREDUCE_WORKLOAD_HPP_
