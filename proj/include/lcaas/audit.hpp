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

// Audits read the files on disk, never a writer's memory. The CLI and the HTTP service
// both call these, so their reports are byte-identical for the same directory.

#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "chain.hpp"
#include "codec.hpp"
#include "store.hpp"

namespace lcaas {

struct DirectoryAudit {
    HierarchyReport report;
    std::vector<LineFault> receipt_faults;
};

inline DirectoryAudit audit_directory(const fs::path& root) {
    std::vector<LineFault> faults;
    auto state = scan_for_audit(root, faults);
    DirectoryAudit audit;
    audit.report = verify_hierarchy(state.super_chain, state.chains);
    for (const auto& f : faults) {
        const auto name = f.file.filename().string();
        if (name == superchain_path(root).filename()) {
            audit.report.issues.push_back({Level::super, 0, f.line - 1, FailureReason::malformed_record});
        } else if (name == receipts_path(root).filename()) {
            audit.receipt_faults.push_back(f);
        } else {
            // circled-<id>.jsonl
            auto id = std::stoull(name.substr(8, name.size() - 8 - 6));
            audit.report.issues.push_back({Level::circled, id, f.line - 1, FailureReason::malformed_record});
        }
    }
    std::stable_sort(audit.report.issues.begin(), audit.report.issues.end(), [](const auto& a, const auto& b) {
        return std::tuple{a.level != Level::super, a.chain_id, a.block_index} <
               std::tuple{b.level != Level::super, b.chain_id, b.block_index};
    });
    audit.report.ok = audit.report.issues.empty() && audit.receipt_faults.empty();
    return audit;
}

inline Json to_json(const DirectoryAudit& a) {
    Json j = to_json(a.report);
    Json faults = Json::array();
    for (const auto& f : a.receipt_faults) {
        faults.push_back({{"file", f.file.filename().string()}, {"line", f.line}, {"reason", f.reason}});
    }
    j["receipt_faults"] = std::move(faults);
    return j;
}

struct DigestAudit {
    Hash digest;
    MembershipProof proof;
    ChainReport chain_report;
    ChainReport super_report;
    bool embedded_terminal_matches{false};
    bool ok{false};
};

//! std::nullopt when the digest is in no data block on disk.
inline std::optional<DigestAudit> audit_digest(const fs::path& root, const Hash& digest) {
    std::vector<LineFault> faults;
    auto state = scan_for_audit(root, faults);
    auto proof = find_digest(digest, state.chains);
    if (!proof) return std::nullopt;
    DigestAudit a{digest, *proof, verify_circled(state.chains[proof->chain_id]), verify_super_chain(state.super_chain),
                  false, false};
    if (proof->sb_index) {
        const auto& blocks = state.super_chain.blocks;
        if (*proof->sb_index < blocks.size()) {
            auto embedded = parse_record(blocks[*proof->sb_index].data);
            a.embedded_terminal_matches = embedded && *embedded == *proof->terminal;
        }
    } else {
        a.embedded_terminal_matches = true;  // open chain: nothing embedded yet
    }
    a.ok = a.chain_report.ok && a.super_report.ok && a.embedded_terminal_matches &&
           verify_membership(*proof, digest, state.super_chain, state.chains);
    return a;
}

inline Json to_json(const DigestAudit& a) {
    Json j;
    j["digest"] = a.digest.hex();
    j["ok"] = a.ok;
    j["proof"] = to_json(a.proof);
    j["chain_report"] = to_json(a.chain_report);
    j["super_report"] = to_json(a.super_report);
    j["embedded_terminal_matches"] = a.embedded_terminal_matches;
    return j;
}

}  // namespace lcaas
