#!/usr/bin/env python3
# Copyright 2026 The netreduce Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

# Writes vectors.txt: wire images built with struct, independent of the C++
# codec. Rerun only when the wire layout changes on purpose.

import os
import struct

HEADER = 54


def encode(v):
    flags = (1 if v["cpa"] else 0) | (2 if v["cpk"] else 0) | (4 if v["cpd"] else 0)
    head = struct.pack(">IIIIBBIHH", v["src"], v["dst"], v["flow"], v["seq"], flags,
                       v["tag"], v["aux"], v["frag_index"], v["frag_count"])
    head += b"\0" * (HEADER - len(head))
    if not v["cpa"]:
        return head
    body = struct.pack(">BB", v["op"], len(v["kvs"]))
    for key, value in v["kvs"]:
        k = key.encode()
        body += k + b"\0" * (64 - len(k)) + struct.pack(">i", value)
    return head + body


def vec(name, src=0, dst=0, flow=0, seq=0, cpa=False, cpk=False, cpd=False, tag=0, aux=0,
        frag_index=0, frag_count=0, op=0, kvs=()):
    return dict(name=name, src=src, dst=dst, flow=flow, seq=seq, cpa=cpa, cpk=cpk, cpd=cpd,
                tag=tag, aux=aux, frag_index=frag_index, frag_count=frag_count, op=op,
                kvs=list(kvs))


VECTORS = [
    vec("data_two_pairs", src=3, dst=7, flow=2, seq=1, cpa=True, op=0,
        kvs=[("alice", 2), ("bob", -5)]),
    vec("collection_signal", src=9, dst=7, flow=12, seq=4, cpa=True, cpd=True, tag=0, op=0),
    vec("drain_signal_max", src=9, dst=7, flow=12, seq=5, cpa=True, cpd=True, tag=2, op=1),
    vec("switch_ack", src=7, dst=3, flow=2, seq=1, cpa=True, cpk=True, op=0),
    vec("header_copy", src=3, dst=9, flow=2, seq=8, cpa=True, tag=1, op=2),
    vec("overflow_flush", src=100, dst=7, flow=13, seq=2, cpa=True, cpd=True, tag=1,
        aux=1025, frag_index=1, frag_count=3, op=0,
        kvs=[("k%d" % i, i * 1000 - 7) for i in range(5)]),
    vec("full_packet", src=1, dst=2, flow=0, seq=0xFFFFFFFF, cpa=True, op=0,
        kvs=[("w%02d" % i, (-1) ** i * (1 << i)) for i in range(20)]),
    vec("max_key", src=1, dst=2, flow=0, seq=3, cpa=True, op=2,
        kvs=[("x" * 64, -2147483648), ("y", 2147483647)]),
    vec("plain_control", src=15, dst=1, flow=0x80000000 | (15 << 15) | 1, seq=1, tag=6, aux=4),
    vec("plain_empty", src=0, dst=0, flow=0, seq=0),
]


def main():
    out = os.path.join(os.path.dirname(os.path.abspath(__file__)), "vectors.txt")
    with open(out, "w") as f:
        f.write("# generated by make_golden.py\n")
        for v in VECTORS:
            f.write("vector %s\n" % v["name"])
            for field in ("src", "dst", "flow", "seq", "tag", "aux", "frag_index",
                          "frag_count", "op"):
                f.write("%s %d\n" % (field, v[field]))
            f.write("flags %d %d %d\n" % (v["cpa"], v["cpk"], v["cpd"]))
            for key, value in v["kvs"]:
                f.write("kv %s %d\n" % (key, value))
            f.write("hex %s\n" % encode(v).hex())
            f.write("end\n")


if __name__ == "__main__":
    main()
