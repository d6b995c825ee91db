#!/usr/bin/env python3
# Copyright 2026 The LCaaS Authors
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

"""Writes chain_oracle.hpp: block hashes for a small fixed ledger, built with hashlib.

Ledger: absolute genesis at t=1000, data digests sha256("log-k") at t=1001+k for
k < 3, terminal at t=1004; relative genesis of chain 1 at t=1005; super genesis at
t=1000 and the super block for chain 0 at t=1004.

Usage: python3 gen_chain_oracle.py > chain_oracle.hpp
"""

import hashlib

ZERO = "0" * 64


def sha(s):
    return hashlib.sha256(s.encode("utf-8")).hexdigest()


def serialize(i, t, kind, data, prev):
    return f"{i}|{t}|{kind}|{len(data.encode('utf-8'))}:{data}|{prev}"


def block(i, t, kind, data, prev):
    return {"i": i, "t": t, "kind": kind, "data": data, "prev": prev, "hash": sha(serialize(i, t, kind, data, prev))}


chain = [block(0, 1000, "absolute_genesis", "ABSOLUTE_GENESIS", ZERO)]
digests = [sha(f"log-{k}") for k in range(3)]
for k, d in enumerate(digests):
    chain.append(block(k + 1, 1001 + k, "data", d, chain[-1]["hash"]))
aggregate = sha("".join(b["hash"] for b in chain))
chain.append(block(4, 1004, "terminal", aggregate, chain[-1]["hash"]))
terminal = chain[-1]
relative = block(0, 1005, "relative_genesis", "RELATIVE_GENESIS", terminal["hash"])
super_genesis = block(0, 1000, "super_genesis", "SUPER_GENESIS", ZERO)
record = serialize(4, 1004, "terminal", aggregate, terminal["prev"]) + "|" + terminal["hash"]
super_block = block(1, 1004, "super", record, super_genesis["hash"])
utf8 = block(1, 7, "data", "héllo", ZERO)


def s(name, v):
    return f'inline constexpr std::string_view {name} = "{v}";'


lines = [
    "// Copyright 2026 The LCaaS Authors",
    "// SPDX-License-Identifier: Apache-2.0",
    "// Generated by gen_chain_oracle.py; do not edit.",
    "#pragma once",
    "#include <array>",
    "#include <string_view>",
    "namespace oracle {",
    s("sha_abc", sha("abc")),
    s("sha_empty", sha("")),
    s("genesis_t0_serialized", serialize(0, 0, "absolute_genesis", "ABSOLUTE_GENESIS", ZERO)),
    s("genesis_t0_hash", block(0, 0, "absolute_genesis", "ABSOLUTE_GENESIS", ZERO)["hash"]),
    "inline constexpr std::array<std::string_view, 3> digests{" + ", ".join(f'"{d}"' for d in digests) + "};",
    "inline constexpr std::array<std::string_view, 5> chain0{" + ", ".join(f'"{b["hash"]}"' for b in chain) + "};",
    s("aggregate0", aggregate),
    s("relative_genesis1", relative["hash"]),
    s("super_genesis", super_genesis["hash"]),
    s("super_block1", super_block["hash"]),
    s("terminal_record0", record),
    s("utf8_serialized", serialize(1, 7, "data", "héllo", ZERO).replace("é", "\\xc3\\xa9")),
    s("utf8_hash", utf8["hash"]),
    "}  // namespace oracle",
]
print("\n".join(lines))
