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

#include "netreduce/workload.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>

#include "netreduce/rng.hpp"
#include "netreduce/text.hpp"

namespace netreduce {

namespace {

constexpr std::size_t kWordsPerLine = 16;

void apply_option(WorkloadSpec& w, std::string_view key, std::string_view value) {
  if (key == "keys" || key == "vocab") {
    w.vocab = static_cast<std::size_t>(parse_uint(value));
  } else if (key == "range") {
    const std::uint64_t r = parse_uint(value);
    if (r > 0x3fffffff) throw std::invalid_argument("range too large");
    w.value_range = static_cast<std::int32_t>(r);
  } else if (key == "words") {
    w.words = static_cast<std::size_t>(parse_uint(value));
  } else if (key == "overlap") {
    w.overlap = parse_double(value);
    if (w.overlap < 0 || w.overlap > 1) throw std::invalid_argument("overlap outside [0,1]");
  } else if (key == "dist") {
    if (value == "uniform") {
      w.dist = KeyDistribution::kUniform;
    } else if (value == "zipf") {
      w.dist = KeyDistribution::kZipf;
    } else {
      throw std::invalid_argument("unknown distribution '" + std::string(value) + "'");
    }
  } else if (key == "s") {
    w.zipf_s = parse_double(value);
    if (w.zipf_s <= 0) throw std::invalid_argument("zipf exponent must be positive");
  } else {
    throw std::invalid_argument("unknown workload option '" + std::string(key) + "'");
  }
}

// Inverse-CDF sampler over ranks 0..n-1.
class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double s) : cdf_(n) {
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      total += 1.0 / std::pow(static_cast<double>(i + 1), s);
      cdf_[i] = total;
    }
    for (double& c : cdf_) c /= total;
  }
  std::size_t draw(std::mt19937_64& rng) const {
    const double u = unit_double(rng);
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

}  // namespace

WorkloadSpec parse_workload(std::string_view path) {
  WorkloadSpec w;
  if (path.starts_with("gen:")) {
    std::string_view rest = path.substr(4);
    const std::size_t colon = rest.find(':');
    const std::string_view kind = rest.substr(0, colon);
    if (kind == "gradient-sum") {
      w.kind = WorkloadKind::kGradientSum;
    } else if (kind == "wordcount") {
      w.kind = WorkloadKind::kWordCountSynthetic;
    } else {
      throw std::invalid_argument("unknown generator '" + std::string(kind) + "'");
    }
    std::string_view opts = colon == std::string_view::npos ? "" : rest.substr(colon + 1);
    while (!opts.empty()) {
      const std::size_t comma = opts.find(',');
      const std::string_view item = opts.substr(0, comma);
      const std::size_t eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw std::invalid_argument("expected key=value in '" + std::string(item) + "'");
      }
      apply_option(w, item.substr(0, eq), item.substr(eq + 1));
      if (comma == std::string_view::npos) break;
      opts.remove_prefix(comma + 1);
    }
    if (w.vocab == 0) throw std::invalid_argument("generator needs at least one key");
  } else if (path.starts_with("kv:")) {
    w.kind = WorkloadKind::kKeyValueFile;
    w.path = std::string(path.substr(3));
  } else {
    w.kind = WorkloadKind::kWordCountFile;
    w.path = std::string(path);
  }
  return w;
}

InputFormat input_format(const WorkloadSpec& w) {
  switch (w.kind) {
    case WorkloadKind::kGradientSum:
    case WorkloadKind::kKeyValueFile:
      return InputFormat::kKeyValue;
    case WorkloadKind::kWordCountSynthetic:
    case WorkloadKind::kWordCountFile:
      return InputFormat::kWordCount;
  }
  return InputFormat::kWordCount;
}

std::vector<std::string> generate_partition(const WorkloadSpec& w, std::size_t rank,
                                            std::size_t num_mappers, std::uint64_t seed) {
  if (num_mappers == 0 || rank >= num_mappers) throw std::invalid_argument("bad mapper rank");
  std::mt19937_64 rng(stream_seed(seed, rank));
  std::vector<std::string> out;
  switch (w.kind) {
    case WorkloadKind::kGradientSum: {
      out.reserve(w.vocab);
      const auto span = static_cast<std::uint64_t>(w.value_range) * 2 + 1;
      for (std::size_t k = 0; k < w.vocab; ++k) {
        const auto v = static_cast<std::int64_t>(below(rng, span)) - w.value_range;
        out.push_back(std::to_string(k) + '\t' + std::to_string(v));
      }
      break;
    }
    case WorkloadKind::kWordCountSynthetic: {
      std::optional<ZipfSampler> zipf;
      if (w.dist == KeyDistribution::kZipf) zipf.emplace(w.vocab, w.zipf_s);
      std::string line;
      for (std::size_t i = 0; i < w.words; ++i) {
        const bool shared = unit_double(rng) < w.overlap;
        const std::size_t k = zipf ? zipf->draw(rng) : below(rng, w.vocab);
        if (!line.empty()) line.push_back(' ');
        line += shared ? "w" + std::to_string(k)
                       : "p" + std::to_string(rank) + "_" + std::to_string(k);
        if ((i + 1) % kWordsPerLine == 0) {
          out.push_back(std::move(line));
          line.clear();
        }
      }
      if (!line.empty()) out.push_back(std::move(line));
      break;
    }
    case WorkloadKind::kWordCountFile:
    case WorkloadKind::kKeyValueFile: {
      const std::string text = read_file(w.path);
      std::size_t index = 0;
      for (std::string_view line : split_lines(text)) {
        if (index++ % num_mappers == rank) out.emplace_back(line);
      }
      break;
    }
  }
  return out;
}

std::vector<std::vector<std::string>> generate_workload(const WorkloadSpec& w,
                                                        std::size_t num_mappers,
                                                        std::uint64_t seed) {
  std::vector<std::vector<std::string>> out;
  for (std::size_t i = 0; i < num_mappers; ++i) {
    out.push_back(generate_partition(w, i, num_mappers, seed));
  }
  return out;
}

double estimate_rho(const std::vector<std::set<std::string>>& key_sets) {
  std::set<std::string> all;
  std::size_t total = 0;
  for (const auto& s : key_sets) {
    total += s.size();
    all.insert(s.begin(), s.end());
  }
  if (all.empty()) throw std::invalid_argument("estimate_rho needs at least one key");
  return static_cast<double>(total) /
         (static_cast<double>(key_sets.size()) * static_cast<double>(all.size()));
}

std::set<std::string> distinct_keys(const std::vector<std::string>& partition,
                                    InputFormat format) {
  std::set<std::string> keys;
  const MapFn fn = map_fn_for(format);
  std::vector<Record> records;
  for (const std::string& source : partition) {
    records.clear();
    fn(source, records);
    for (Record& r : records) keys.insert(std::move(r.key));
  }
  return keys;
}

Table oracle_aggregate(const std::vector<std::vector<std::string>>& partitions,
                       InputFormat format, OpCode op) {
  Table table;
  const MapFn fn = map_fn_for(format);
  std::vector<Record> records;
  for (const auto& partition : partitions) {
    for (const std::string& source : partition) {
      records.clear();
      fn(source, records);
      for (const Record& r : records) fold_into(table, op, r);
    }
  }
  return table;
}

}  // namespace netreduce
