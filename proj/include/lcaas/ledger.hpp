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
/// \brief The ledger: one persisted hierarchy with a single serialized writer.
///
/// Ingest appends a data block; reaching capacity rotates the open chain:
/// seal -> super block -> anchor submission -> relative genesis of the next chain.
/// Each step is persisted before the next, and opening a ledger finishes any rotation
/// a crash interrupted, so the on-disk state always converges to a verifying hierarchy.

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "anchor.hpp"
#include "chain.hpp"
#include "clock.hpp"
#include "error.hpp"
#include "store.hpp"

namespace lcaas {

struct SubmissionResponse {
    Hash digest;
    ChainId chain_id{0};
    std::uint64_t block_index{0};
    bool sealed{false};
    std::optional<std::uint64_t> sb_index;
    std::optional<std::string> anchor_ticket;
};

inline Json to_json(const SubmissionResponse& r) {
    Json j;
    j["digest"] = r.digest.hex();
    j["chain_id"] = r.chain_id;
    j["block_index"] = r.block_index;
    j["chain_state"] = r.sealed ? "sealed" : "open";
    j["sb_index"] = r.sb_index ? Json(*r.sb_index) : Json(nullptr);
    j["anchor_ticket"] = r.anchor_ticket ? Json(*r.anchor_ticket) : Json(nullptr);
    return j;
}

struct SealOutcome {
    ChainId chain_id{0};
    Block terminal;
    std::uint64_t sb_index{0};
    std::optional<std::string> anchor_ticket;
};

struct LedgerOptions {
    std::optional<std::uint64_t> expected_capacity;  ///< refuse to open a ledger created with another n
    std::uint64_t gas_price_gwei{9};
    StoreOptions store;
};

class Ledger {
  public:
    //! Creates a fresh ledger: manifest, absolute genesis, super genesis. `root` must be empty or absent.
    static void init(const fs::path& root, std::uint64_t capacity_n, const Clock& clock) {
        if (capacity_n == 0) throw Error(errc::invalid_config, "capacity_n must be >= 1");
        if (fs::exists(root) && (!fs::is_directory(root) || !fs::is_empty(root))) {
            throw Error(errc::nonempty_dir, root.string());
        }
        fs::create_directories(root);
        LedgerLock lock{root};
        LedgerStore::write_manifest_file(root, Manifest{capacity_n, 0, 0, 0, 0});
        LedgerState empty;
        LedgerStore store{root, empty};
        auto first = open_first_chain(capacity_n, clock.now_ms());
        store.append_block(ChainId{0}, first.blocks.front());
        store.append_block(SuperChainRef{}, new_super_genesis(clock.now_ms()));
    }

    Ledger(const fs::path& root, const Clock& clock, std::unique_ptr<AnchorBackend> anchor, LedgerOptions options = {})
        : clock_{clock}, anchor_{std::move(anchor)}, gas_{options.gas_price_gwei}, lock_{existing(root)} {
        auto state = load_all(root);
        if (options.expected_capacity && *options.expected_capacity != state.capacity_n) {
            throw Error(errc::config_mismatch, "ledger capacity_n " + std::to_string(state.capacity_n) + " != configured " +
                                                   std::to_string(*options.expected_capacity));
        }
        warnings_ = state.warnings;
        capacity_n_ = state.capacity_n;
        store_ = std::make_unique<LedgerStore>(root, state, std::move(options.store));
        chains_ = std::move(state.chains);
        super_ = std::move(state.super_chain);
        for (auto& r : state.receipts) {
            receipt_index_[r.ticket_id] = receipts_.size();
            anchored_sbs_.insert(r.sb_index);
            receipts_.push_back(std::move(r));
        }
        recover();
    }

    ~Ledger() {
        std::unique_lock lock{mutex_};
        if (!available_ || !store_) return;
        try {
            write_manifest();
        } catch (const std::exception&) {
        }
    }

    Ledger(const Ledger&) = delete;
    Ledger& operator=(const Ledger&) = delete;

    [[nodiscard]] const fs::path& root() const noexcept { return store_->root(); }
    [[nodiscard]] std::uint64_t capacity_n() const noexcept { return capacity_n_; }
    [[nodiscard]] const std::vector<std::string>& recovery_warnings() const noexcept { return warnings_; }
    [[nodiscard]] const Clock& clock() const noexcept { return clock_; }
    [[nodiscard]] bool available() const {
        std::shared_lock lock{mutex_};
        return available_;
    }

    SubmissionResponse submit_digest(const Hash& digest) {
        std::unique_lock lock{mutex_};
        ensure_available();
        auto& chain = chains_.back();
        const auto now = clock_.now_ms();
        guarded([&] {
            append_data(chain, digest, now);
            try {
                store_->append_block(chain.chain_id, chain.blocks.back());
            } catch (...) {
                chain.blocks.pop_back();
                throw;
            }
        });
        ++data_blocks_;
        SubmissionResponse response{digest, chain.chain_id, chain.blocks.back().index, false, std::nullopt, std::nullopt};
        if (chain.full()) {
            auto outcome = rotate(SealMode::require_full);
            response.sealed = true;
            response.sb_index = outcome.sb_index;
            response.anchor_ticket = outcome.anchor_ticket;
        }
        return response;
    }

    //! Raw log bodies are hashed and discarded; only the digest is stored.
    SubmissionResponse submit_log(std::string_view body) { return submit_digest(compute_hash(body)); }

    //! Operator-forced rotation of a partially filled chain.
    SealOutcome force_seal() {
        std::unique_lock lock{mutex_};
        ensure_available();
        if (chains_.back().data_count() == 0) throw Error(errc::empty_chain, "chain " + std::to_string(chains_.back().chain_id));
        return rotate(SealMode::early);
    }

    //! Polls every outstanding anchor ticket and persists new receipts. Returns how many confirmed.
    std::size_t poll_anchors() {
        if (!anchor_) return 0;
        std::vector<PendingAnchor> snapshot;
        {
            std::shared_lock lock{mutex_};
            snapshot.reserve(pending_.size());
            for (const auto& [_, p] : pending_) snapshot.push_back(p);
        }
        if (snapshot.empty()) return 0;
        const auto now = clock_.now_ms();
        std::vector<ReceiptRecord> confirmed;
        for (const auto& p : snapshot) {
            auto result = anchor_->poll(p.ticket.ticket_id, now);
            if (auto* receipt = std::get_if<AnchorReceipt>(&result)) {
                confirmed.push_back(ReceiptRecord{receipt->ticket_id, p.sb_index, p.ticket.payload_hash,
                                                  p.ticket.gas_price.gwei(), p.sealed_at, p.ticket.submitted_at,
                                                  receipt->pseudo_tx_hash, receipt->confirmed_at, receipt->latency_ms});
            }
        }
        if (confirmed.empty()) return 0;
        std::unique_lock lock{mutex_};
        std::size_t count = 0;
        for (auto& r : confirmed) {
            if (!pending_.contains(r.ticket_id)) continue;
            guarded([&] { store_->append_receipt(r); });
            pending_.erase(r.ticket_id);
            receipt_index_[r.ticket_id] = receipts_.size();
            anchored_sbs_.insert(r.sb_index);
            receipts_.push_back(std::move(r));
            ++count;
        }
        write_manifest();
        return count;
    }

    // -- queries (copies taken under a shared lock) ---------------------------------

    [[nodiscard]] std::optional<CircledBlockchain> chain(ChainId id) const {
        std::shared_lock lock{mutex_};
        if (id >= chains_.size()) return std::nullopt;
        return chains_[id];
    }
    [[nodiscard]] std::vector<CircledBlockchain> chains() const {
        std::shared_lock lock{mutex_};
        return chains_;
    }
    [[nodiscard]] SuperBlockchain super_chain() const {
        std::shared_lock lock{mutex_};
        return super_;
    }
    [[nodiscard]] std::optional<ReceiptRecord> receipt(const std::string& ticket_id) const {
        std::shared_lock lock{mutex_};
        auto it = receipt_index_.find(ticket_id);
        if (it == receipt_index_.end()) return std::nullopt;
        return receipts_[it->second];
    }
    [[nodiscard]] std::vector<ReceiptRecord> receipts() const {
        std::shared_lock lock{mutex_};
        return receipts_;
    }
    [[nodiscard]] bool is_pending(const std::string& ticket_id) const {
        std::shared_lock lock{mutex_};
        return pending_.contains(ticket_id);
    }
    [[nodiscard]] std::size_t pending_anchor_count() const {
        std::shared_lock lock{mutex_};
        return pending_.size();
    }
    [[nodiscard]] Manifest manifest() const {
        std::shared_lock lock{mutex_};
        return current_manifest();
    }
    [[nodiscard]] HierarchyReport verify() const {
        std::shared_lock lock{mutex_};
        return verify_hierarchy(super_, chains_);
    }

    //! Runs `fn` while no write is in progress, so files on disk end at a line boundary.
    template <typename Fn>
    auto with_quiescent_files(Fn&& fn) const {
        std::shared_lock lock{mutex_};
        return fn(root());
    }

  private:
    struct PendingAnchor {
        AnchorTicket ticket;
        std::uint64_t sb_index;
        Timestamp sealed_at;
    };

    static const fs::path& existing(const fs::path& root) {
        if (!ledger_exists(root)) throw Error(errc::ledger_missing, root.string());
        return root;
    }

    void ensure_available() const {
        if (!available_) throw Error(errc::ledger_unavailable, "a previous write failed; restart to recover");
    }

    // Store failures poison the writer: memory and disk may disagree until a restart reloads from disk.
    template <typename Fn>
    void guarded(Fn&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            if (e.code() == errc::io_failure) available_ = false;
            throw;
        }
    }

    SealOutcome rotate(SealMode mode) {
        auto& chain = chains_.back();
        const auto now = clock_.now_ms();
        guarded([&] {
            seal(chain, now, mode);
            store_->append_block(chain.chain_id, chain.blocks.back());
        });
        SealOutcome outcome = promote(chain.chain_id);
        guarded([&] {
            auto next = open_next_chain(chains_.back(), clock_.now_ms());
            store_->append_block(next.chain_id, next.blocks.front());
            chains_.push_back(std::move(next));
            write_manifest();
        });
        return outcome;
    }

    // Super block for a sealed chain, then anchoring.
    SealOutcome promote(ChainId id) {
        const Block terminal = chains_[id].blocks.back();
        guarded([&] {
            make_super_block(terminal, super_, clock_.now_ms());
            store_->append_block(SuperChainRef{}, super_.blocks.back());
        });
        const std::uint64_t sb_index = super_.blocks.back().index;
        return SealOutcome{id, terminal, sb_index, submit_anchor(sb_index)};
    }

    std::optional<std::string> submit_anchor(std::uint64_t sb_index) {
        if (!anchor_) return std::nullopt;
        const Block& sb = super_.blocks[sb_index];
        auto terminal = parse_record(sb.data);
        auto ticket = anchor_->submit(sb.current_hash, gas_, clock_.now_ms());
        pending_.emplace(ticket.ticket_id, PendingAnchor{ticket, sb_index, terminal ? terminal->timestamp : sb.timestamp});
        return ticket.ticket_id;
    }

    // Finishes whatever a crash interrupted: missing geneses, super blocks, next chain,
    // a full but unsealed chain, and anchoring of super blocks without receipts.
    void recover() {
        const auto now = clock_.now_ms();
        if (chains_.empty()) {
            auto first = open_first_chain(capacity_n_, now);
            store_->append_block(ChainId{0}, first.blocks.front());
            chains_.push_back(std::move(first));
        }
        if (super_.blocks.empty()) {
            super_ = new_super_chain(now);
            store_->append_block(SuperChainRef{}, super_.blocks.front());
        }
        for (std::uint64_t sb = 1; sb <= super_.super_block_count(); ++sb) {
            if (!anchored_sbs_.contains(sb)) submit_anchor(sb);
        }
        for (ChainId id = super_.super_block_count(); id < chains_.size(); ++id) {
            if (chains_[id].sealed) promote(id);
        }
        if (chains_.back().sealed) {
            auto next = open_next_chain(chains_.back(), clock_.now_ms());
            store_->append_block(next.chain_id, next.blocks.front());
            chains_.push_back(std::move(next));
        } else if (chains_.back().full()) {
            rotate(SealMode::require_full);
        }
        data_blocks_ = 0;
        for (const auto& c : chains_) data_blocks_ += c.data_count();
        write_manifest();
    }

    [[nodiscard]] Manifest current_manifest() const {
        std::uint64_t sealed = 0;
        for (const auto& c : chains_) sealed += c.sealed ? 1 : 0;
        return Manifest{capacity_n_, chains_.back().chain_id, sealed, data_blocks_, receipts_.size()};
    }

    void write_manifest() { store_->write_manifest(current_manifest()); }

    const Clock& clock_;
    std::unique_ptr<AnchorBackend> anchor_;
    GasPrice gas_;
    LedgerLock lock_;
    std::unique_ptr<LedgerStore> store_;
    std::uint64_t capacity_n_{1};
    std::vector<std::string> warnings_;

    mutable std::shared_mutex mutex_;
    bool available_{true};
    std::vector<CircledBlockchain> chains_;
    SuperBlockchain super_;
    std::uint64_t data_blocks_{0};
    std::vector<ReceiptRecord> receipts_;
    std::unordered_map<std::string, std::size_t> receipt_index_;
    std::set<std::uint64_t> anchored_sbs_;
    std::map<std::string, PendingAnchor> pending_;
};

}  // namespace lcaas
