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

#include <gtest/gtest.h>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "netreduce/codec.hpp"
#include "test_util.hpp"

namespace netreduce {
namespace {

TEST(Codec, CollectionSignalIs56Octets) {
  Packet p;
  p.flags = {true, false, true};
  EXPECT_EQ(encode(p).size(), 56u);
  EXPECT_EQ(encoded_size(p), 56u);
}

TEST(Codec, FullPacketFitsMtu) {
  Packet p;
  p.flags.cpa = true;
  for (int i = 0; i < 20; ++i) p.kvs.push_back({Key("k" + std::to_string(i)), i});
  EXPECT_EQ(encode(p).size(), 1416u);
  EXPECT_LE(encode(p).size(), kMtuBytes);
}

TEST(Codec, PlainPacketHasNoPayloadSection) {
  Packet p;
  p.tag = tag::kCtlFin;
  EXPECT_EQ(encode(p).size(), kHeaderBytes);
}

TEST(Codec, TruncatedHeaderIsMalformed) {
  std::vector<std::uint8_t> b(10, 0);
  try {
    decode(b);
    FAIL();
  } catch (const Malformed& e) {
    EXPECT_EQ(e.reason(), MalformedReason::kTruncatedHeader);
  }
}

TEST(Codec, BadOpcodeIsMalformed) {
  Packet p;
  p.flags.cpa = true;
  std::vector<std::uint8_t> b = encode(p);
  b[wire::kOp] = 7;
  try {
    decode(b);
    FAIL();
  } catch (const Malformed& e) {
    EXPECT_EQ(e.reason(), MalformedReason::kBadOpcode);
  }
}

TEST(Codec, InconsistentFlagsRejected) {
  Packet p;
  p.flags = {false, true, false};
  EXPECT_THROW(encode(p), InvariantViolation);
  p.flags = {true, true, true};
  EXPECT_THROW(encode(p), InvariantViolation);

  Packet ok;
  ok.flags.cpa = true;
  std::vector<std::uint8_t> b = encode(ok);
  b[wire::kFlags] = 0x06;  // cpk and cpd without cpa
  EXPECT_THROW(decode(b), Malformed);
  b[wire::kFlags] = 0x08;  // unknown bit
  EXPECT_THROW(decode(b), Malformed);
}

TEST(Codec, TwentyOnePairsRejected) {
  Packet p;
  p.flags.cpa = true;
  for (int i = 0; i < 21; ++i) p.kvs.push_back({Key("k"), i});
  EXPECT_THROW(encode(p), InvariantViolation);
}

TEST(Codec, CountBeyondTwentyOrLengthMismatchIsMalformed) {
  Packet p;
  p.flags.cpa = true;
  p.kvs.push_back({Key("a"), 1});
  std::vector<std::uint8_t> b = encode(p);
  std::vector<std::uint8_t> too_many = b;
  too_many[wire::kCount] = 21;
  EXPECT_THROW(decode(too_many), Malformed);
  std::vector<std::uint8_t> short_body(b.begin(), b.end() - 1);
  EXPECT_THROW(decode(short_body), Malformed);
}

TEST(Codec, KeyLongerThan64Throws) {
  EXPECT_THROW(Key(std::string(65, 'k')), KeyTooLong);
  EXPECT_NO_THROW(Key(std::string(64, 'k')));
}

TEST(Codec, AddWrapsModulo2To32) {
  EXPECT_EQ(combine(OpCode::kAdd, 0x7FFFFFFF, 1), static_cast<std::int32_t>(0x80000000u));
  EXPECT_EQ(combine(OpCode::kMax, 5, 3), 5);
  EXPECT_EQ(combine(OpCode::kMin, 5, 3), 3);
  EXPECT_EQ(combine(OpCode::kMax, -1, -7), -1);
}

TEST(Codec, ValuesAreBigEndianTwosComplement) {
  Packet p;
  p.flags.cpa = true;
  p.kvs.push_back({Key("v"), -2});
  const std::vector<std::uint8_t> b = encode(p);
  const std::size_t at = wire::kPairs + kKeyBytes;
  EXPECT_EQ(b[at], 0xFF);
  EXPECT_EQ(b[at + 3], 0xFE);
}

TEST(Codec, RandomRoundTripIsBitExact) {
  std::mt19937_64 rng(12345);
  for (int i = 0; i < 10000; ++i) {
    const Packet p = test::random_packet(rng);
    const std::vector<std::uint8_t> b = encode(p);
    ASSERT_EQ(b.size(), encoded_size(p));
    ASSERT_LE(b.size(), kMtuBytes);
    const Packet q = decode(b);
    ASSERT_EQ(q, p);
    ASSERT_EQ(encode(q), b);
  }
}

TEST(Codec, PeeksAgreeWithDecode) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 500; ++i) {
    const Packet p = test::random_packet(rng);
    const std::vector<std::uint8_t> b = encode(p);
    EXPECT_EQ(peek_cpa(b), p.flags.cpa);
    EXPECT_EQ(peek_payload_bytes(b), p.kvs.size() * kPairBytes);
  }
}

TEST(Codec, HexRoundTrip) {
  const std::vector<std::uint8_t> b{0x00, 0xab, 0x10, 0xff};
  EXPECT_EQ(to_hex(b), "00 ab 10 ff\n");
  EXPECT_EQ(from_hex("00 ab\n10ff"), b);
}

TEST(Codec, GoldenVectorsDecodeAndEncode) {
  const std::vector<test::GoldenVector> vectors = test::load_golden_vectors();
  ASSERT_GE(vectors.size(), 8u);
  for (const test::GoldenVector& v : vectors) {
    SCOPED_TRACE(v.name);
    EXPECT_EQ(decode(v.bytes), v.packet);
    EXPECT_EQ(encode(v.packet), v.bytes);
  }
}

}  // namespace
}  // namespace netreduce
