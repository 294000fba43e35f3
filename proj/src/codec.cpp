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

#include "netreduce/codec.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>

namespace netreduce {

namespace {

void put_u32(std::uint8_t* out, std::uint32_t v) {
  out[0] = static_cast<std::uint8_t>(v >> 24);
  out[1] = static_cast<std::uint8_t>(v >> 16);
  out[2] = static_cast<std::uint8_t>(v >> 8);
  out[3] = static_cast<std::uint8_t>(v);
}

void put_u16(std::uint8_t* out, std::uint16_t v) {
  out[0] = static_cast<std::uint8_t>(v >> 8);
  out[1] = static_cast<std::uint8_t>(v);
}

std::uint32_t get_u32(const std::uint8_t* in) {
  return (std::uint32_t{in[0]} << 24) | (std::uint32_t{in[1]} << 16) |
         (std::uint32_t{in[2]} << 8) | std::uint32_t{in[3]};
}

std::uint16_t get_u16(const std::uint8_t* in) {
  return static_cast<std::uint16_t>((in[0] << 8) | in[1]);
}

constexpr std::uint8_t kFlagCpa = 0x01;
constexpr std::uint8_t kFlagCpk = 0x02;
constexpr std::uint8_t kFlagCpd = 0x04;

}  // namespace

const char* op_name(OpCode op) {
  switch (op) {
    case OpCode::kAdd: return "ADD";
    case OpCode::kMax: return "MAX";
    case OpCode::kMin: return "MIN";
  }
  return "?";
}

OpCode parse_op_name(std::string_view name) {
  if (name == "ADD") return OpCode::kAdd;
  if (name == "MAX") return OpCode::kMax;
  if (name == "MIN") return OpCode::kMin;
  throw std::invalid_argument("unknown op '" + std::string(name) + "'");
}

std::int32_t combine(OpCode op, std::int32_t current, std::int32_t incoming) {
  switch (op) {
    case OpCode::kAdd:
      return static_cast<std::int32_t>(static_cast<std::uint32_t>(current) +
                                       static_cast<std::uint32_t>(incoming));
    case OpCode::kMax: return std::max(current, incoming);
    case OpCode::kMin: return std::min(current, incoming);
  }
  return current;
}

std::uint8_t CpFlags::to_octet() const {
  return static_cast<std::uint8_t>((cpa ? kFlagCpa : 0) | (cpk ? kFlagCpk : 0) |
                                   (cpd ? kFlagCpd : 0));
}

KeyTooLong::KeyTooLong(std::size_t length)
    : std::invalid_argument("key of " + std::to_string(length) +
                            " octets exceeds 64") {}

Key::Key(std::string_view text) {
  if (text.size() > kKeyBytes) throw KeyTooLong(text.size());
  bytes_.fill(0);
  std::memcpy(bytes_.data(), text.data(), text.size());
}

std::string Key::text() const {
  std::size_t n = kKeyBytes;
  while (n > 0 && bytes_[n - 1] == 0) --n;
  return std::string(reinterpret_cast<const char*>(bytes_.data()), n);
}

const char* malformed_reason_name(MalformedReason reason) {
  switch (reason) {
    case MalformedReason::kTruncatedHeader: return "truncated-header";
    case MalformedReason::kBadFlags: return "bad-flags";
    case MalformedReason::kInconsistentFlags: return "inconsistent-flags";
    case MalformedReason::kBadOpcode: return "bad-opcode";
    case MalformedReason::kCountTooLarge: return "count-too-large";
    case MalformedReason::kLengthMismatch: return "length-mismatch";
  }
  return "?";
}

Malformed::Malformed(MalformedReason reason)
    : std::runtime_error(std::string("malformed packet: ") +
                         malformed_reason_name(reason)),
      reason_(reason) {}

std::size_t encoded_size(const Packet& p) {
  return kHeaderBytes + (p.flags.cpa ? 2 + kPairBytes * p.kvs.size() : 0);
}

std::vector<std::uint8_t> encode(const Packet& p) {
  if (!p.flags.consistent()) throw InvariantViolation("inconsistent CP flags");
  if (p.kvs.size() > kMaxPairsPerPacket) {
    throw InvariantViolation("kv_count " + std::to_string(p.kvs.size()) +
                             " exceeds 20");
  }
  if (!p.flags.cpa && !p.kvs.empty()) {
    throw InvariantViolation("non-P4COM packet carries key-value pairs");
  }

  std::vector<std::uint8_t> out(encoded_size(p), 0);
  std::uint8_t* b = out.data();
  put_u32(b + wire::kSrc, p.src);
  put_u32(b + wire::kDst, p.dst);
  put_u32(b + wire::kFlow, p.flow);
  put_u32(b + wire::kSeq, p.seq);
  b[wire::kFlags] = p.flags.to_octet();
  b[wire::kTag] = p.tag;
  put_u32(b + wire::kAux, p.aux);
  put_u16(b + wire::kFragIndex, p.frag_index);
  put_u16(b + wire::kFragCount, p.frag_count);
  if (!p.flags.cpa) return out;

  b[wire::kOp] = static_cast<std::uint8_t>(p.op);
  b[wire::kCount] = static_cast<std::uint8_t>(p.kvs.size());
  std::uint8_t* cursor = b + wire::kPairs;
  for (const KeyValue& kv : p.kvs) {
    std::memcpy(cursor, kv.key.bytes().data(), kKeyBytes);
    put_u32(cursor + kKeyBytes, static_cast<std::uint32_t>(kv.value));
    cursor += kPairBytes;
  }
  return out;
}

Packet decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) throw Malformed(MalformedReason::kTruncatedHeader);
  const std::uint8_t* b = bytes.data();

  Packet p;
  p.src = get_u32(b + wire::kSrc);
  p.dst = get_u32(b + wire::kDst);
  p.flow = get_u32(b + wire::kFlow);
  p.seq = get_u32(b + wire::kSeq);
  const std::uint8_t flags = b[wire::kFlags];
  if (flags & ~(kFlagCpa | kFlagCpk | kFlagCpd)) throw Malformed(MalformedReason::kBadFlags);
  p.flags.cpa = flags & kFlagCpa;
  p.flags.cpk = flags & kFlagCpk;
  p.flags.cpd = flags & kFlagCpd;
  if (!p.flags.consistent()) throw Malformed(MalformedReason::kInconsistentFlags);
  p.tag = b[wire::kTag];
  p.aux = get_u32(b + wire::kAux);
  p.frag_index = get_u16(b + wire::kFragIndex);
  p.frag_count = get_u16(b + wire::kFragCount);

  if (!p.flags.cpa) {
    if (bytes.size() != kHeaderBytes) throw Malformed(MalformedReason::kLengthMismatch);
    return p;
  }
  if (bytes.size() < kHeaderBytes + 2) throw Malformed(MalformedReason::kTruncatedHeader);
  const std::uint8_t op = b[wire::kOp];
  if (op > static_cast<std::uint8_t>(OpCode::kMin)) throw Malformed(MalformedReason::kBadOpcode);
  p.op = static_cast<OpCode>(op);
  const std::size_t count = b[wire::kCount];
  if (count > kMaxPairsPerPacket) throw Malformed(MalformedReason::kCountTooLarge);
  if (bytes.size() != kHeaderBytes + 2 + count * kPairBytes) {
    throw Malformed(MalformedReason::kLengthMismatch);
  }
  p.kvs.resize(count);
  const std::uint8_t* cursor = b + wire::kPairs;
  for (KeyValue& kv : p.kvs) {
    std::memcpy(kv.key.bytes().data(), cursor, kKeyBytes);
    kv.value = static_cast<std::int32_t>(get_u32(cursor + kKeyBytes));
    cursor += kPairBytes;
  }
  return p;
}

bool peek_cpa(std::span<const std::uint8_t> bytes) {
  return bytes.size() > wire::kFlags && (bytes[wire::kFlags] & kFlagCpa);
}

std::size_t peek_payload_bytes(std::span<const std::uint8_t> bytes) {
  if (!peek_cpa(bytes) || bytes.size() <= wire::kCount) return 0;
  return kPairBytes * bytes[wire::kCount];
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 3);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    out.push_back(kDigits[bytes[i] >> 4]);
    out.push_back(kDigits[bytes[i] & 0xF]);
    out.push_back((i % 16 == 15 || i + 1 == bytes.size()) ? '\n' : ' ');
  }
  return out;
}

std::vector<std::uint8_t> from_hex(std::string_view text) {
  std::vector<std::uint8_t> out;
  int high = -1;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    int digit;
    if (c >= '0' && c <= '9') digit = c - '0';
    else if (c >= 'a' && c <= 'f') digit = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') digit = c - 'A' + 10;
    else throw std::invalid_argument(std::string("bad hex digit '") + c + "'");
    if (high < 0) {
      high = digit;
    } else {
      out.push_back(static_cast<std::uint8_t>((high << 4) | digit));
      high = -1;
    }
  }
  if (high >= 0) throw std::invalid_argument("odd number of hex digits");
  return out;
}

}  // namespace netreduce
