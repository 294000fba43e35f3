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

#ifndef NETREDUCE_CODEC_HPP_
#define NETREDUCE_CODEC_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace netreduce {

using NodeId = std::uint32_t;
using FlowId = std::uint32_t;
using SeqNo = std::uint32_t;

// Wire constants. The pseudo-header stands in for L2+L3+L4 plus the
// cutting-payload fields; everything after it exists only when CPA is set.
inline constexpr std::size_t kHeaderBytes = 54;
inline constexpr std::size_t kKeyBytes = 64;
inline constexpr std::size_t kValueBytes = 4;
inline constexpr std::size_t kPairBytes = kKeyBytes + kValueBytes;
inline constexpr std::size_t kMaxPairsPerPacket = 20;
inline constexpr std::size_t kMtuBytes = 1500;

// Header offsets.
//   0  src        u32
//   4  dst        u32
//   8  flow       u32
//   12 seq        u32
//   16 flags      u8   bit0=CPA bit1=CPK bit2=CPD
//   17 tag        u8   meaning depends on packet class (see PacketTag)
//   18 aux        u32  flush: kv_size at flush time; control: argument
//   22 frag_index u16
//   24 frag_count u16
//   26..53        reserved, zero
// then, iff CPA: op u8, kv_count u8, kv_count * (key[64], value i32 BE)
namespace wire {
inline constexpr std::size_t kSrc = 0;
inline constexpr std::size_t kDst = 4;
inline constexpr std::size_t kFlow = 8;
inline constexpr std::size_t kSeq = 12;
inline constexpr std::size_t kFlags = 16;
inline constexpr std::size_t kTag = 17;
inline constexpr std::size_t kAux = 18;
inline constexpr std::size_t kFragIndex = 22;
inline constexpr std::size_t kFragCount = 24;
inline constexpr std::size_t kOp = kHeaderBytes;
inline constexpr std::size_t kCount = kHeaderBytes + 1;
inline constexpr std::size_t kPairs = kHeaderBytes + 2;
}  // namespace wire

enum class OpCode : std::uint8_t { kAdd = 0, kMax = 1, kMin = 2 };

const char* op_name(OpCode op);
OpCode parse_op_name(std::string_view name);  // throws std::invalid_argument

// Combines two values under `op`. ADD wraps modulo 2^32.
std::int32_t combine(OpCode op, std::int32_t current, std::int32_t incoming);

struct CpFlags {
  bool cpa = false;  // P4COM-valid
  bool cpk = false;  // ACK
  bool cpd = false;  // collection / flush

  bool consistent() const { return (!cpk || cpa) && (!cpd || cpa) && !(cpk && cpd); }
  std::uint8_t to_octet() const;
  friend bool operator==(const CpFlags&, const CpFlags&) = default;
};

// Meaning of the tag octet per packet class.
namespace tag {
// cpa=1, cpd=0, cpk=0
inline constexpr std::uint8_t kMapperData = 0;
inline constexpr std::uint8_t kHeaderCopy = 1;
inline constexpr std::uint8_t kFallback = 2;
// cpa=1, cpd=1: flush reason (signals carry the reason they request)
inline constexpr std::uint8_t kFlushSignal = 0;
inline constexpr std::uint8_t kFlushOverflow = 1;
inline constexpr std::uint8_t kFlushDrain = 2;
// cpa=0: control message kind
inline constexpr std::uint8_t kCtlNone = 0;
inline constexpr std::uint8_t kCtlStart = 1;
inline constexpr std::uint8_t kCtlSendComplete = 2;
inline constexpr std::uint8_t kCtlAllSent = 3;
inline constexpr std::uint8_t kCtlOverflowReport = 4;
inline constexpr std::uint8_t kCtlOverflowNotice = 5;
inline constexpr std::uint8_t kCtlFin = 6;
}  // namespace tag

// Fixed 64-octet opaque key, zero padded on the right.
class Key {
 public:
  Key() { bytes_.fill(0); }
  // Throws KeyTooLong if `text` exceeds 64 octets.
  explicit Key(std::string_view text);

  const std::array<std::uint8_t, kKeyBytes>& bytes() const { return bytes_; }
  std::array<std::uint8_t, kKeyBytes>& bytes() { return bytes_; }
  // Key with trailing zero padding removed.
  std::string text() const;

  friend bool operator==(const Key&, const Key&) = default;
  friend auto operator<=>(const Key&, const Key&) = default;

 private:
  std::array<std::uint8_t, kKeyBytes> bytes_;
};

struct KeyValue {
  Key key;
  std::int32_t value = 0;
  friend bool operator==(const KeyValue&, const KeyValue&) = default;
};

struct Packet {
  NodeId src = 0;
  NodeId dst = 0;
  FlowId flow = 0;
  SeqNo seq = 0;
  CpFlags flags;
  std::uint8_t tag = 0;
  std::uint32_t aux = 0;
  std::uint16_t frag_index = 0;
  std::uint16_t frag_count = 0;
  OpCode op = OpCode::kAdd;  // meaningful iff flags.cpa
  std::vector<KeyValue> kvs;

  std::size_t kv_count() const { return kvs.size(); }
  friend bool operator==(const Packet&, const Packet&) = default;
};

class KeyTooLong : public std::invalid_argument {
 public:
  explicit KeyTooLong(std::size_t length);
};

class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class MalformedReason {
  kTruncatedHeader,
  kBadFlags,
  kInconsistentFlags,
  kBadOpcode,
  kCountTooLarge,
  kLengthMismatch,
};

const char* malformed_reason_name(MalformedReason reason);

class Malformed : public std::runtime_error {
 public:
  explicit Malformed(MalformedReason reason);
  MalformedReason reason() const { return reason_; }

 private:
  MalformedReason reason_;
};

// 54 + (cpa ? 2 + 68 * kv_count : 0).
std::size_t encoded_size(const Packet& p);

// Throws InvariantViolation when flags are inconsistent, kv_count > 20, or a
// non-P4COM packet carries pairs.
std::vector<std::uint8_t> encode(const Packet& p);

// Throws Malformed.
Packet decode(std::span<const std::uint8_t> bytes);

// Cheap header peeks used for per-link accounting without a full decode.
bool peek_cpa(std::span<const std::uint8_t> bytes);
std::size_t peek_payload_bytes(std::span<const std::uint8_t> bytes);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(std::string_view text);  // ignores whitespace

}  // namespace netreduce

#endif  // NETREDUCE_CODEC_HPP_
