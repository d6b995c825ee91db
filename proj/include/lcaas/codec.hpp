/*
   Copyright 2026 The LCaaS Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

// JSON forms of chain-core types. JSON is storage and wire format only; hashing always
// goes through canonical_serialize.

#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "block.hpp"
#include "chain.hpp"
#include "error.hpp"

namespace lcaas {

using Json = nlohmann::ordered_json;

inline Json to_json(const Block& b) {
    Json j;
    j["index"] = b.index;
    j["timestamp"] = b.timestamp;
    j["block_type"] = std::string{to_string(b.block_type)};
    j["data"] = b.data;
    j["previous_hash"] = b.previous_hash.hex();
    j["current_hash"] = b.current_hash.hex();
    return j;
}

//! One JSON Lines record, without the trailing newline.
inline std::string to_json_line(const Block& b) { return to_json(b).dump(); }

inline Block block_from_json(const Json& j) {
    auto bad = [](const std::string& why) { return Error(errc::malformed_record, why); };
    if (!j.is_object() || j.size() != 6) throw bad("expected an object with exactly 6 fields");
    for (const char* key : {"index", "timestamp", "block_type", "data", "previous_hash", "current_hash"}) {
        if (!j.contains(key)) throw bad(std::string{"missing field "} + key);
    }
    if (!j["index"].is_number_unsigned()) throw bad("index must be a non-negative integer");
    if (!j["timestamp"].is_number_integer()) throw bad("timestamp must be an integer");
    if (!j["block_type"].is_string() || !j["data"].is_string() || !j["previous_hash"].is_string() ||
        !j["current_hash"].is_string()) {
        throw bad("string field has wrong type");
    }
    auto type = parse_block_type(j["block_type"].get<std::string>());
    if (!type) throw bad("unknown block_type");
    auto prev = Hash::parse(j["previous_hash"].get<std::string>());
    auto cur = Hash::parse(j["current_hash"].get<std::string>());
    if (!prev || !cur) throw bad("hash field is not 64 lowercase hex characters");
    Block b;
    b.index = j["index"].get<std::uint64_t>();
    b.timestamp = j["timestamp"].get<Timestamp>();
    b.block_type = *type;
    b.data = j["data"].get<std::string>();
    b.previous_hash = *prev;
    b.current_hash = *cur;
    return b;
}

inline Block block_from_json_line(std::string_view line) {
    Json j;
    try {
        j = Json::parse(line);
    } catch (const Json::exception& e) {
        throw Error(errc::malformed_record, e.what());
    }
    return block_from_json(j);
}

inline Json to_json(const ChainReport& r) {
    Json j;
    j["ok"] = r.ok;
    j["partial"] = r.partial;
    j["failing_index"] = r.failing_index ? Json(*r.failing_index) : Json(nullptr);
    j["reason"] = std::string{to_string(r.reason)};
    j["hash_ops"] = r.hash_ops;
    j["length"] = r.length;
    return j;
}

inline Json to_json(const HierarchyIssue& issue) {
    Json j;
    j["level"] = std::string{to_string(issue.level)};
    j["chain_id"] = issue.level == Level::circled ? Json(issue.chain_id) : Json(nullptr);
    j["block_index"] = issue.block_index;
    j["reason"] = std::string{to_string(issue.reason)};
    return j;
}

inline Json to_json(const HierarchyReport& r) {
    Json j;
    j["ok"] = r.ok;
    j["hash_ops"] = r.hash_ops;
    j["super"] = to_json(r.super_report);
    Json chains = Json::array();
    for (const auto& c : r.chain_reports) chains.push_back(to_json(c));
    j["chains"] = std::move(chains);
    Json issues = Json::array();
    for (const auto& i : r.issues) issues.push_back(to_json(i));
    j["issues"] = std::move(issues);
    return j;
}

inline Json to_json(const MembershipProof& p) {
    Json j;
    j["chain_id"] = p.chain_id;
    j["block_index"] = p.block_index;
    j["terminal"] = p.terminal ? to_json(*p.terminal) : Json(nullptr);
    j["sb_index"] = p.sb_index ? Json(*p.sb_index) : Json(nullptr);
    return j;
}

inline Json to_json(const CircledBlockchain& c) {
    Json j;
    j["chain_id"] = c.chain_id;
    j["capacity_n"] = c.capacity_n;
    j["sealed"] = c.sealed;
    Json blocks = Json::array();
    for (const auto& b : c.blocks) blocks.push_back(to_json(b));
    j["blocks"] = std::move(blocks);
    return j;
}

inline Json to_json(const SuperBlockchain& s) {
    Json j;
    Json blocks = Json::array();
    for (const auto& b : s.blocks) blocks.push_back(to_json(b));
    j["blocks"] = std::move(blocks);
    return j;
}

}  // namespace lcaas
