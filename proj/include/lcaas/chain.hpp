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

/// \file
/// \brief Two-level hash chain hierarchy: circled chains capped by terminal blocks,
/// and a super chain whose blocks embed those terminals.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "block.hpp"
#include "error.hpp"
#include "hash.hpp"

namespace lcaas {

using ChainId = std::uint64_t;

struct CircledBlockchain {
    ChainId chain_id{0};
    std::uint64_t capacity_n{1};
    std::vector<Block> blocks;
    bool sealed{false};

    [[nodiscard]] std::uint64_t data_count() const noexcept {
        if (blocks.empty()) return 0;
        return blocks.size() - 1 - (sealed ? 1 : 0);
    }
    [[nodiscard]] bool full() const noexcept { return data_count() >= capacity_n; }
    [[nodiscard]] const Block& terminal() const {
        if (!sealed) throw Error(errc::not_full, "chain " + std::to_string(chain_id) + " is not sealed");
        return blocks.back();
    }

    friend bool operator==(const CircledBlockchain&, const CircledBlockchain&) = default;
};

struct SuperBlockchain {
    std::vector<Block> blocks;

    //! Number of super blocks, excluding the super genesis.
    [[nodiscard]] std::size_t super_block_count() const noexcept { return blocks.empty() ? 0 : blocks.size() - 1; }

    friend bool operator==(const SuperBlockchain&, const SuperBlockchain&) = default;
};

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

inline Block new_absolute_genesis(Timestamp timestamp) {
    return make_block(0, timestamp, BlockType::absolute_genesis, std::string{kAbsoluteGenesisData}, Hash::zero());
}

inline Block new_super_genesis(Timestamp timestamp) {
    return make_block(0, timestamp, BlockType::super_genesis, std::string{kSuperGenesisData}, Hash::zero());
}

inline Block new_relative_genesis(const Block& prev_terminal, Timestamp timestamp) {
    if (prev_terminal.block_type != BlockType::terminal) {
        throw Error(errc::invalid_terminal, "block type is " + std::string{to_string(prev_terminal.block_type)});
    }
    if (!verify_block(prev_terminal, prev_terminal.previous_hash)) {
        throw Error(errc::tampered_terminal, "terminal " + prev_terminal.current_hash.hex() + " does not re-verify");
    }
    return make_block(0, timestamp, BlockType::relative_genesis, std::string{kRelativeGenesisData},
                      prev_terminal.current_hash);
}

inline CircledBlockchain open_first_chain(std::uint64_t capacity_n, Timestamp timestamp) {
    if (capacity_n == 0) throw Error(errc::invalid_config, "capacity_n must be positive");
    return CircledBlockchain{0, capacity_n, {new_absolute_genesis(timestamp)}, false};
}

inline CircledBlockchain open_next_chain(const CircledBlockchain& prev, Timestamp timestamp) {
    return CircledBlockchain{prev.chain_id + 1, prev.capacity_n, {new_relative_genesis(prev.terminal(), timestamp)},
                             false};
}

inline SuperBlockchain new_super_chain(Timestamp timestamp) { return SuperBlockchain{{new_super_genesis(timestamp)}}; }

inline const Block& append_data(CircledBlockchain& chain, const Hash& payload_digest, Timestamp timestamp) {
    if (chain.sealed) throw Error(errc::chain_sealed, "chain " + std::to_string(chain.chain_id));
    if (chain.blocks.empty()) throw Error(errc::malformed_record, "chain has no genesis");
    if (chain.full()) throw Error(errc::chain_full, "chain " + std::to_string(chain.chain_id));
    const Block& last = chain.blocks.back();
    chain.blocks.push_back(make_block(last.index + 1, timestamp, BlockType::data, payload_digest.hex(), last.current_hash));
    return chain.blocks.back();
}

inline const Block& append_data(CircledBlockchain& chain, std::string_view payload_digest, Timestamp timestamp) {
    auto digest = Hash::parse(payload_digest);
    if (!digest) throw Error(errc::invalid_digest, std::string{payload_digest.substr(0, 80)});
    return append_data(chain, *digest, timestamp);
}

//! Digest over the concatenated hex current_hash values of `blocks`.
inline Hash aggregate_digest(std::span<const Block> blocks) {
    std::string joined;
    joined.reserve(blocks.size() * Hash::kHexLength);
    for (const auto& b : blocks) joined += b.current_hash.hex();
    return compute_hash(joined);
}

enum class SealMode {
    require_full,  ///< automatic rotation: exactly capacity_n data blocks
    early,         ///< operator-forced: at least one data block
};

inline const Block& seal(CircledBlockchain& chain, Timestamp timestamp, SealMode mode = SealMode::require_full) {
    if (chain.sealed) throw Error(errc::already_sealed, "chain " + std::to_string(chain.chain_id));
    if (chain.data_count() == 0) {
        throw Error(mode == SealMode::early ? errc::empty_chain : errc::not_full, "chain " + std::to_string(chain.chain_id));
    }
    if (mode == SealMode::require_full && chain.data_count() < chain.capacity_n) {
        throw Error(errc::not_full, std::to_string(chain.data_count()) + " of " + std::to_string(chain.capacity_n));
    }
    const Block& last = chain.blocks.back();
    auto aggregate = aggregate_digest(chain.blocks);
    chain.blocks.push_back(make_block(last.index + 1, timestamp, BlockType::terminal, aggregate.hex(), last.current_hash));
    chain.sealed = true;
    return chain.blocks.back();
}

inline const Block& make_super_block(const Block& terminal, SuperBlockchain& super_chain, Timestamp timestamp) {
    if (super_chain.blocks.empty()) throw Error(errc::malformed_record, "super chain has no genesis");
    if (terminal.block_type != BlockType::terminal) {
        throw Error(errc::invalid_terminal, "block type is " + std::string{to_string(terminal.block_type)});
    }
    if (!verify_block(terminal, terminal.previous_hash)) {
        throw Error(errc::tampered_terminal, "terminal " + terminal.current_hash.hex() + " does not re-verify");
    }
    const Block& last = super_chain.blocks.back();
    super_chain.blocks.push_back(
        make_block(last.index + 1, timestamp, BlockType::super, serialize_record(terminal), last.current_hash));
    return super_chain.blocks.back();
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

struct ChainReport {
    bool ok{true};
    bool partial{false};  ///< unsealed chain: prefix verified, terminal missing
    std::optional<std::uint64_t> failing_index;
    FailureReason reason{FailureReason::none};
    std::uint64_t hash_ops{0};
    std::uint64_t length{0};

    friend bool operator==(const ChainReport&, const ChainReport&) = default;
};

namespace detail {

    inline ChainReport fail(ChainReport r, std::uint64_t index, FailureReason reason) {
        r.ok = false;
        r.failing_index = index;
        r.reason = reason;
        return r;
    }

inline ChainReport walk_circled(const CircledBlockchain& chain) {
    ChainReport report;
    report.length = chain.blocks.size();
    if (chain.blocks.empty()) return fail(report, 0, FailureReason::missing_block);

    const auto& blocks = chain.blocks;
    const auto expected_genesis = chain.chain_id == 0 ? BlockType::absolute_genesis : BlockType::relative_genesis;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const Block& b = blocks[i];
        const bool is_last = i + 1 == blocks.size();
        // A relative genesis links outside this chain; verify_hierarchy checks that link.
        const Hash& expected_prev = i == 0 ? (expected_genesis == BlockType::absolute_genesis ? Hash::zero() : b.previous_hash)
                                           : blocks[i - 1].current_hash;
        if (auto r = verify_block(b, expected_prev); !r) return fail(report, i, r.reason);
        if (b.index != i) return fail(report, i, FailureReason::bad_index);

        BlockType expected_type = BlockType::data;
        if (i == 0) {
            expected_type = expected_genesis;
        } else if (is_last && chain.sealed) {
            expected_type = BlockType::terminal;
        }
        if (b.block_type != expected_type) return fail(report, i, FailureReason::bad_block_type);
        if (i == 0 && b.data != (chain.chain_id == 0 ? kAbsoluteGenesisData : kRelativeGenesisData)) {
            return fail(report, i, FailureReason::bad_payload);
        }
        if (b.block_type == BlockType::data && !Hash::is_valid(b.data)) {
            return fail(report, i, FailureReason::bad_payload);
        }
    }
    if (!chain.sealed) {
        report.partial = true;
        return report;
    }
    const std::uint64_t data_blocks = blocks.size() - 2;
    if (data_blocks == 0 || data_blocks > chain.capacity_n) {
        return fail(report, blocks.size() - 1, FailureReason::missing_block);
    }
    auto aggregate = aggregate_digest(std::span{blocks}.first(blocks.size() - 1));
    if (blocks.back().data != aggregate.hex()) {
        return fail(report, blocks.size() - 1, FailureReason::aggregate_mismatch);
    }
    return report;
}

inline ChainReport walk_super(const SuperBlockchain& super_chain) {
    ChainReport report;
    report.length = super_chain.blocks.size();
    const auto& blocks = super_chain.blocks;
    if (blocks.empty()) return fail(report, 0, FailureReason::missing_block);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const Block& b = blocks[i];
        const Hash& expected_prev = i == 0 ? Hash::zero() : blocks[i - 1].current_hash;
        if (auto r = verify_block(b, expected_prev); !r) return fail(report, i, r.reason);
        if (b.index != i) return fail(report, i, FailureReason::bad_index);
        const auto expected_type = i == 0 ? BlockType::super_genesis : BlockType::super;
        if (b.block_type != expected_type) return fail(report, i, FailureReason::bad_block_type);
        if (i == 0) {
            if (b.data != kSuperGenesisData) return fail(report, i, FailureReason::bad_payload);
        } else {
            auto embedded = parse_record(b.data);
            if (!embedded || embedded->block_type != BlockType::terminal) {
                return fail(report, i, FailureReason::bad_payload);
            }
        }
    }
    return report;
}

}  // namespace detail

//! Walks a circled chain, stops at the lowest failing block. Costs one hash per block
//! plus one for the terminal aggregate when sealed.
inline ChainReport verify_circled(const CircledBlockchain& chain) {
    const auto start = hash_invocation_count();
    auto report = detail::walk_circled(chain);
    report.hash_ops = hash_invocation_count() - start;
    return report;
}

//! Checks only the super chain's own blocks: #SB + 1 hash computations, independent of
//! the circled chains underneath.
inline ChainReport verify_super_chain(const SuperBlockchain& super_chain) {
    const auto start = hash_invocation_count();
    auto report = detail::walk_super(super_chain);
    report.hash_ops = hash_invocation_count() - start;
    return report;
}

enum class Level { super, circled };

constexpr std::string_view to_string(Level l) noexcept { return l == Level::super ? "super" : "circled"; }

struct HierarchyIssue {
    Level level{Level::circled};
    ChainId chain_id{0};  ///< meaningful for Level::circled only
    std::uint64_t block_index{0};
    FailureReason reason{FailureReason::none};

    friend bool operator==(const HierarchyIssue&, const HierarchyIssue&) = default;
};

struct HierarchyReport {
    bool ok{true};
    ChainReport super_report;
    std::vector<ChainReport> chain_reports;  ///< one per circled chain, by chain_id
    std::vector<HierarchyIssue> issues;      ///< super issues first, then circled by (chain_id, block_index)
    std::uint64_t hash_ops{0};

    //! The issue that pinpoints the tampered block: the super chain's if any, else the lowest circled one.
    [[nodiscard]] std::optional<HierarchyIssue> first_issue() const {
        if (issues.empty()) return std::nullopt;
        return issues.front();
    }
};

//! Full audit of both levels.
inline HierarchyReport verify_hierarchy(const SuperBlockchain& super_chain, std::span<const CircledBlockchain> chains) {
    HierarchyReport report;
    report.super_report = verify_super_chain(super_chain);
    if (!report.super_report.ok) {
        report.issues.push_back({Level::super, 0, *report.super_report.failing_index, report.super_report.reason});
    }

    const std::size_t sb_count = super_chain.super_block_count();
    for (std::size_t k = 0; k < chains.size(); ++k) {
        const auto& chain = chains[k];
        auto chain_report = verify_circled(chain);
        if (chain.chain_id != k) {
            report.issues.push_back({Level::circled, k, 0, FailureReason::bad_index});
        }
        if (!chain_report.ok) {
            report.issues.push_back({Level::circled, k, *chain_report.failing_index, chain_report.reason});
        }
        if (k + 1 < chains.size() && !chain.sealed) {
            report.issues.push_back({Level::circled, k, chain.blocks.size(), FailureReason::missing_block});
        }
        if (k > 0 && !chain.blocks.empty() && chains[k - 1].sealed &&
            chain.blocks.front().previous_hash != chains[k - 1].blocks.back().current_hash) {
            report.issues.push_back({Level::circled, k, 0, FailureReason::link_broken});
        }
        if (chain.sealed) {
            const std::uint64_t terminal_index = chain.blocks.size() - 1;
            const std::size_t sb_index = k + 1;
            if (sb_index > sb_count) {
                report.issues.push_back({Level::super, 0, sb_index, FailureReason::missing_block});
            } else {
                auto embedded = parse_record(super_chain.blocks[sb_index].data);
                if (!embedded || *embedded != chain.blocks.back()) {
                    report.issues.push_back({Level::circled, k, terminal_index, FailureReason::terminal_mismatch});
                }
            }
        }
        report.chain_reports.push_back(chain_report);
    }
    const std::size_t sealed_count = static_cast<std::size_t>(
        std::count_if(chains.begin(), chains.end(), [](const auto& c) { return c.sealed; }));
    for (std::size_t sb = sealed_count + 1; sb <= sb_count; ++sb) {
        report.issues.push_back({Level::super, 0, sb, FailureReason::terminal_mismatch});
    }

    std::stable_sort(report.issues.begin(), report.issues.end(), [](const auto& a, const auto& b) {
        return std::tuple{a.level != Level::super, a.chain_id, a.block_index} <
               std::tuple{b.level != Level::super, b.chain_id, b.block_index};
    });
    report.hash_ops = report.super_report.hash_ops;
    for (const auto& r : report.chain_reports) report.hash_ops += r.hash_ops;
    report.ok = report.issues.empty();
    return report;
}

// ---------------------------------------------------------------------------
// Membership
// ---------------------------------------------------------------------------

struct MembershipProof {
    ChainId chain_id{0};
    std::uint64_t block_index{0};
    std::optional<Block> terminal;        ///< absent while the chain is still open
    std::optional<std::uint64_t> sb_index;  ///< super block embedding the terminal

    friend bool operator==(const MembershipProof&, const MembershipProof&) = default;
};

//! Earliest occurrence: lowest chain_id, then lowest block index.
inline std::optional<MembershipProof> find_digest(const Hash& digest, std::span<const CircledBlockchain> chains) {
    for (const auto& chain : chains) {
        for (const auto& b : chain.blocks) {
            if (b.block_type == BlockType::data && b.data == digest.hex()) {
                MembershipProof proof{chain.chain_id, b.index, std::nullopt, std::nullopt};
                if (chain.sealed) {
                    proof.terminal = chain.blocks.back();
                    proof.sb_index = chain.chain_id + 1;
                }
                return proof;
            }
        }
    }
    return std::nullopt;
}

//! Re-establishes inclusion: the holding chain verifies, still contains the digest at the
//! claimed index, and (when sealed) its terminal is the one embedded in the claimed SB.
inline bool verify_membership(const MembershipProof& proof, const Hash& digest, const SuperBlockchain& super_chain,
                              std::span<const CircledBlockchain> chains) {
    if (proof.chain_id >= chains.size()) return false;
    const auto& chain = chains[proof.chain_id];
    if (proof.block_index >= chain.blocks.size()) return false;
    const Block& b = chain.blocks[proof.block_index];
    if (b.block_type != BlockType::data || b.data != digest.hex()) return false;
    if (!verify_circled(chain).ok) return false;
    if (!proof.terminal) return !chain.sealed;
    if (!chain.sealed || chain.blocks.back() != *proof.terminal || !proof.sb_index) return false;
    if (*proof.sb_index >= super_chain.blocks.size()) return false;
    auto embedded = parse_record(super_chain.blocks[*proof.sb_index].data);
    return embedded && *embedded == *proof.terminal;
}

}  // namespace lcaas
