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

// Small helpers for the line-oriented text formats.

#ifndef NETREDUCE_TEXT_HPP_
#define NETREDUCE_TEXT_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace netreduce {

// Lines without their terminators. A trailing newline does not start a line.
std::vector<std::string_view> split_lines(std::string_view text);
std::string_view strip_comment(std::string_view line);  // drops '#' onward
std::string_view trim(std::string_view s);
std::vector<std::string_view> tokenize(std::string_view line);

// Whole-string parses; throw std::invalid_argument.
double parse_double(std::string_view s);
std::uint64_t parse_uint(std::string_view s);
std::int64_t parse_int(std::string_view s);
bool parse_bool(std::string_view s);

// Shortest text that parses back to the same double.
std::string format_double(double v);

std::string read_file(const std::string& path);  // throws std::runtime_error
void write_file(const std::string& path, std::string_view contents);

}  // namespace netreduce

#endif  // NETREDUCE_TEXT_HPP_
