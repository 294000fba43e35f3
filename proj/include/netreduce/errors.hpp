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

#ifndef NETREDUCE_ERRORS_HPP_
#define NETREDUCE_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace netreduce {

// Malformed line in one of the text inputs. Line numbers start at 1.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : std::runtime_error("line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(reason) {}
  std::size_t line() const { return line_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class UnresolvedName : public std::runtime_error {
 public:
  explicit UnresolvedName(const std::string& name)
      : std::runtime_error("unresolved name: " + name), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class DuplicateId : public std::runtime_error {
 public:
  explicit DuplicateId(const std::string& id)
      : std::runtime_error("duplicate id: " + id), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

}  // namespace netreduce

#endif  // NETREDUCE_ERRORS_HPP_
