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
/// \brief Append-only JSON Lines persistence of a ledger directory.
///
/// Layout under the root:
///   circled-<id>.jsonl   one block per line, genesis first
///   superchain.jsonl     super genesis then super blocks
///   receipts.jsonl       anchor receipts
///   manifest.json        capacity and counters (rewritten atomically)
///   LOCK                 flock()ed by the single writer
///
/// A final segment without a trailing newline is a torn write and is dropped. Every
/// complete line must parse and verify; anything else is reported as corruption.

#pragma once

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "block.hpp"
#include "chain.hpp"
#include "codec.hpp"
#include "error.hpp"

namespace lcaas {

namespace fs = std::filesystem;

inline fs::path circled_path(const fs::path& root, ChainId id) { return root / ("circled-" + std::to_string(id) + ".jsonl"); }
inline fs::path superchain_path(const fs::path& root) { return root / "superchain.jsonl"; }
inline fs::path receipts_path(const fs::path& root) { return root / "receipts.jsonl"; }
inline fs::path manifest_path(const fs::path& root) { return root / "manifest.json"; }
inline fs::path lock_path(const fs::path& root) { return root / "LOCK"; }

struct Manifest {
    std::uint64_t capacity_n{1};
    ChainId active_chain_id{0};
    std::uint64_t sealed_chains{0};
    std::uint64_t data_blocks{0};
    std::uint64_t receipts{0};

    friend bool operator==(const Manifest&, const Manifest&) = default;
};

inline Json to_json(const Manifest& m) {
    Json j;
    j["capacity_n"] = m.capacity_n;
    j["active_chain_id"] = m.active_chain_id;
    j["counters"] = {{"sealed_chains", m.sealed_chains}, {"data_blocks", m.data_blocks}, {"receipts", m.receipts}};
    return j;
}

inline Manifest manifest_from_json(const Json& j) {
    try {
        Manifest m;
        m.capacity_n = j.at("capacity_n").get<std::uint64_t>();
        m.active_chain_id = j.at("active_chain_id").get<ChainId>();
        const auto& c = j.at("counters");
        m.sealed_chains = c.at("sealed_chains").get<std::uint64_t>();
        m.data_blocks = c.at("data_blocks").get<std::uint64_t>();
        m.receipts = c.at("receipts").get<std::uint64_t>();
        if (m.capacity_n == 0) throw Error(errc::malformed_record, "capacity_n is 0");
        return m;
    } catch (const Json::exception& e) {
        throw Error(errc::malformed_record, std::string{"manifest: "} + e.what());
    }
}

//! A confirmed anchoring of one super block, as persisted in receipts.jsonl.
struct ReceiptRecord {
    std::string ticket_id;
    std::uint64_t sb_index{0};
    Hash payload_hash;
    std::uint64_t gas_price_gwei{1};
    Timestamp sealed_at{0};
    Timestamp submitted_at{0};
    Hash pseudo_tx_hash;
    Timestamp confirmed_at{0};
    std::int64_t latency_ms{0};

    friend bool operator==(const ReceiptRecord&, const ReceiptRecord&) = default;
};

inline Json to_json(const ReceiptRecord& r) {
    Json j;
    j["ticket_id"] = r.ticket_id;
    j["sb_index"] = r.sb_index;
    j["payload_hash"] = r.payload_hash.hex();
    j["gas_price_gwei"] = r.gas_price_gwei;
    j["sealed_at"] = r.sealed_at;
    j["submitted_at"] = r.submitted_at;
    j["pseudo_tx_hash"] = r.pseudo_tx_hash.hex();
    j["confirmed_at"] = r.confirmed_at;
    j["latency_ms"] = r.latency_ms;
    return j;
}

inline ReceiptRecord receipt_from_json(const Json& j) {
    try {
        ReceiptRecord r;
        r.ticket_id = j.at("ticket_id").get<std::string>();
        r.sb_index = j.at("sb_index").get<std::uint64_t>();
        r.payload_hash = Hash::from_hex(j.at("payload_hash").get<std::string>());
        r.gas_price_gwei = j.at("gas_price_gwei").get<std::uint64_t>();
        r.sealed_at = j.at("sealed_at").get<Timestamp>();
        r.submitted_at = j.at("submitted_at").get<Timestamp>();
        r.pseudo_tx_hash = Hash::from_hex(j.at("pseudo_tx_hash").get<std::string>());
        r.confirmed_at = j.at("confirmed_at").get<Timestamp>();
        r.latency_ms = j.at("latency_ms").get<std::int64_t>();
        if (r.latency_ms < 0 || r.confirmed_at - r.submitted_at != r.latency_ms) {
            throw Error(errc::malformed_record, "receipt latency inconsistent");
        }
        return r;
    } catch (const Json::exception& e) {
        throw Error(errc::malformed_record, std::string{"receipt: "} + e.what());
    }
}

// ---------------------------------------------------------------------------
// Reading
// ---------------------------------------------------------------------------

struct FileLines {
    std::vector<std::string> lines;  ///< complete lines, newline stripped
    bool torn_tail{false};
    std::uintmax_t good_bytes{0};  ///< length of the prefix made of complete lines
};

inline FileLines read_lines(const fs::path& path) {
    std::ifstream in{path, std::ios::binary};
    if (!in) throw Error(errc::io_failure, "cannot open " + path.string());
    std::string content{std::istreambuf_iterator<char>{in}, std::istreambuf_iterator<char>{}};
    FileLines out;
    std::size_t start = 0;
    while (start < content.size()) {
        auto nl = content.find('\n', start);
        if (nl == std::string::npos) {
            out.torn_tail = true;
            break;
        }
        out.lines.emplace_back(content, start, nl - start);
        start = nl + 1;
        out.good_bytes = start;
    }
    return out;
}

//! A damaged line found by a tolerant scan.
struct LineFault {
    fs::path file;
    std::size_t line{0};  ///< 1-based
    std::string reason;
};

struct LedgerState {
    std::uint64_t capacity_n{1};
    std::vector<CircledBlockchain> chains;
    SuperBlockchain super_chain;
    std::vector<ReceiptRecord> receipts;
    std::vector<std::string> warnings;  ///< torn tails discarded
};

inline bool ledger_exists(const fs::path& root) { return fs::exists(manifest_path(root)); }

namespace detail {

    inline Manifest read_manifest(const fs::path& root) {
        std::ifstream in{manifest_path(root)};
        if (!in) throw Error(errc::ledger_missing, root.string());
        Json j;
        try {
            j = Json::parse(in);
        } catch (const Json::exception& e) {
            throw CorruptionDetected(manifest_path(root).string(), 1, e.what());
        }
        return manifest_from_json(j);
    }

    // Stand-in for an unparseable line so later blocks keep their positions. It never
    // verifies: its stored hash is all zeros.
    inline Block placeholder_block(std::uint64_t index) {
        return Block{index, 0, BlockType::data, {}, Hash::zero(), Hash::zero()};
    }

    // Parses every complete line of a block file. Malformed lines go to `faults`; in
    // tolerant mode they become placeholders, in strict mode the first one throws.
    inline std::vector<Block> read_blocks(const fs::path& path, bool strict, std::vector<LineFault>& faults,
                                          std::vector<std::string>& warnings, bool* last_malformed = nullptr) {
        auto file = read_lines(path);
        if (file.torn_tail) warnings.push_back("discarded torn tail of " + path.string());
        std::vector<Block> blocks;
        if (last_malformed) *last_malformed = false;
        for (std::size_t i = 0; i < file.lines.size(); ++i) {
            try {
                blocks.push_back(block_from_json_line(file.lines[i]));
                if (last_malformed) *last_malformed = false;
            } catch (const Error& e) {
                if (strict) throw CorruptionDetected(path.string(), i + 1, e.what());
                faults.push_back({path, i + 1, std::string{to_string(FailureReason::malformed_record)}});
                blocks.push_back(placeholder_block(i));
                if (last_malformed) *last_malformed = true;
            }
        }
        return blocks;
    }

    inline LedgerState scan(const fs::path& root, bool strict, std::vector<LineFault>& faults) {
        LedgerState state;
        state.capacity_n = read_manifest(root).capacity_n;
        std::optional<ChainId> damaged_tail;
        for (ChainId id = 0;; ++id) {
            auto path = circled_path(root, id);
            if (!fs::exists(path)) break;
            bool last_malformed = false;
            auto blocks = read_blocks(path, strict, faults, state.warnings, &last_malformed);
            if (blocks.empty()) {
                // Only the newest chain file may be empty: its genesis write was torn.
                if (fs::exists(circled_path(root, id + 1))) {
                    if (strict) throw CorruptionDetected(path.string(), 1, "empty chain file");
                    faults.push_back({path, 1, std::string{to_string(FailureReason::missing_block)}});
                }
                state.warnings.push_back("ignored empty " + path.string());
                break;
            }
            // A damaged last line counts as the terminal when a later chain exists.
            const bool sealed = blocks.back().block_type == BlockType::terminal ||
                                (last_malformed && fs::exists(circled_path(root, id + 1)));
            state.chains.push_back(CircledBlockchain{id, state.capacity_n, std::move(blocks), sealed});
            if (last_malformed && !sealed) damaged_tail = id;
        }
        if (fs::exists(superchain_path(root))) {
            state.super_chain.blocks = read_blocks(superchain_path(root), strict, faults, state.warnings);
        }
        // Newest chain: a damaged last line is its terminal if a super block already embeds one.
        if (damaged_tail && state.super_chain.blocks.size() > *damaged_tail + 1) state.chains.back().sealed = true;
        if (fs::exists(receipts_path(root))) {
            auto file = read_lines(receipts_path(root));
            if (file.torn_tail) state.warnings.push_back("discarded torn tail of " + receipts_path(root).string());
            for (std::size_t i = 0; i < file.lines.size(); ++i) {
                try {
                    state.receipts.push_back(receipt_from_json(Json::parse(file.lines[i])));
                } catch (const std::exception& e) {
                    if (strict) throw CorruptionDetected(receipts_path(root).string(), i + 1, e.what());
                    faults.push_back({receipts_path(root), i + 1, std::string{to_string(FailureReason::malformed_record)}});
                }
            }
        }
        return state;
    }

}  // namespace detail

//! Loads and fully verifies a ledger directory. Interior damage throws CorruptionDetected
//! naming the file and 1-based line; torn tails are dropped and listed in `warnings`.
inline LedgerState load_all(const fs::path& root) {
    if (!fs::is_directory(root)) throw Error(errc::ledger_missing, root.string());
    std::vector<LineFault> faults;
    auto state = detail::scan(root, /*strict=*/true, faults);

    for (const auto& chain : state.chains) {
        auto report = verify_circled(chain);
        const bool last = chain.chain_id + 1 == state.chains.size();
        if (!report.ok) {
            throw CorruptionDetected(circled_path(root, chain.chain_id).string(), *report.failing_index + 1,
                                     std::string{to_string(report.reason)});
        }
        if (!last && !chain.sealed) {
            throw CorruptionDetected(circled_path(root, chain.chain_id).string(), chain.blocks.size(),
                                     "interior chain is not sealed");
        }
        if (chain.chain_id > 0 && chain.blocks.front().previous_hash != state.chains[chain.chain_id - 1].blocks.back().current_hash) {
            throw CorruptionDetected(circled_path(root, chain.chain_id).string(), 1,
                                     std::string{to_string(FailureReason::link_broken)});
        }
    }
    if (!state.super_chain.blocks.empty()) {
        auto report = verify_super_chain(state.super_chain);
        if (!report.ok) {
            throw CorruptionDetected(superchain_path(root).string(), *report.failing_index + 1,
                                     std::string{to_string(report.reason)});
        }
        for (std::size_t k = 1; k < state.super_chain.blocks.size(); ++k) {
            const bool has_terminal = k - 1 < state.chains.size() && state.chains[k - 1].sealed;
            auto embedded = parse_record(state.super_chain.blocks[k].data);
            if (!has_terminal || !embedded || *embedded != state.chains[k - 1].blocks.back()) {
                throw CorruptionDetected(superchain_path(root).string(), k + 1,
                                         std::string{to_string(FailureReason::terminal_mismatch)});
            }
        }
    }
    return state;
}

//! Tolerant read for audits: never throws on damage, reports unparseable lines instead.
inline LedgerState scan_for_audit(const fs::path& root, std::vector<LineFault>& faults) {
    if (!fs::is_directory(root)) throw Error(errc::ledger_missing, root.string());
    return detail::scan(root, /*strict=*/false, faults);
}

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

//! Exclusive advisory lock on <root>/LOCK, held for the writer's lifetime.
class LedgerLock {
  public:
    explicit LedgerLock(const fs::path& root) {
        fd_ = ::open(lock_path(root).c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
        if (fd_ < 0) throw Error(errc::io_failure, "open " + lock_path(root).string() + ": " + std::strerror(errno));
        if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
            ::close(fd_);
            fd_ = -1;
            throw Error(errc::ledger_locked, root.string() + " is held by another writer");
        }
    }
    ~LedgerLock() {
        if (fd_ >= 0) ::close(fd_);
    }
    LedgerLock(LedgerLock&& other) noexcept : fd_{std::exchange(other.fd_, -1)} {}
    LedgerLock& operator=(LedgerLock&&) = delete;
    LedgerLock(const LedgerLock&) = delete;
    LedgerLock& operator=(const LedgerLock&) = delete;

  private:
    int fd_{-1};
};

struct SuperChainRef {
    friend bool operator==(SuperChainRef, SuperChainRef) = default;
};

//! Target file of an append: a circled chain by id, or the super chain.
using ChainRef = std::variant<ChainId, SuperChainRef>;

//! Test seam for crash harnesses. `write_limit` may shorten a write (simulating a torn
//! line); `after_write` runs once the bytes are in the file.
struct WriteHooks {
    std::function<std::size_t(const fs::path&, std::size_t)> write_limit;
    std::function<void(const fs::path&)> after_write;
};

struct StoreOptions {
    bool fsync{true};
    WriteHooks hooks;
};

//! Single writer over a ledger directory. Keeps the tail of each file so appends that
//! would not extend the persisted chain are refused before touching the file.
class LedgerStore {
  public:
    //! Opens an existing directory for appending. Truncates torn tails left by a crash.
    LedgerStore(fs::path root, const LedgerState& state, StoreOptions options = {})
        : root_{std::move(root)}, options_{std::move(options)} {
        for (const auto& c : state.chains) tails_[c.chain_id] = c.blocks.back();
        if (!state.super_chain.blocks.empty()) super_tail_ = state.super_chain.blocks.back();
        truncate_torn_tails();
    }

    ~LedgerStore() {
        for (auto& [_, fd] : fds_) ::close(fd);
    }
    LedgerStore(const LedgerStore&) = delete;
    LedgerStore& operator=(const LedgerStore&) = delete;

    [[nodiscard]] const fs::path& root() const noexcept { return root_; }
    [[nodiscard]] StoreOptions& options() noexcept { return options_; }

    void append_block(const ChainRef& target, const Block& block) {
        const bool is_super = std::holds_alternative<SuperChainRef>(target);
        const std::optional<Block>* tail = nullptr;
        std::optional<Block> none;
        Hash expected_prev = Hash::zero();
        fs::path path;
        if (is_super) {
            path = superchain_path(root_);
            tail = &super_tail_;
        } else {
            const ChainId id = std::get<ChainId>(target);
            path = circled_path(root_, id);
            auto it = tails_.find(id);
            if (it != tails_.end()) {
                tail = &it->second;
            } else {
                tail = &none;
                // New chain file: must be the next id and open with a genesis linked to the previous terminal.
                if (id != tails_.size()) out_of_order(path, "chain id " + std::to_string(id) + " leaves a gap");
                if (id > 0) {
                    const auto& prev = tails_.at(id - 1);
                    if (!prev || prev->block_type != BlockType::terminal) out_of_order(path, "previous chain is not sealed");
                    expected_prev = prev->current_hash;
                }
            }
        }
        if (*tail) {
            if (block.index != (*tail)->index + 1) out_of_order(path, "index " + std::to_string(block.index));
            expected_prev = (*tail)->current_hash;
        } else if (block.index != 0) {
            out_of_order(path, "first block must have index 0");
        }
        if (auto r = verify_block(block, expected_prev); !r) out_of_order(path, std::string{to_string(r.reason)});

        write_line(path, to_json_line(block));
        if (is_super) {
            super_tail_ = block;
        } else {
            tails_[std::get<ChainId>(target)] = block;
        }
    }

    void append_receipt(const ReceiptRecord& receipt) { write_line(receipts_path(root_), to_json(receipt).dump()); }

    //! Atomic replace via rename.
    void write_manifest(const Manifest& m) { write_manifest_file(root_, m); }

    static void write_manifest_file(const fs::path& root, const Manifest& m) {
        auto tmp = manifest_path(root);
        tmp += ".tmp";
        {
            std::ofstream out{tmp, std::ios::trunc};
            out << to_json(m).dump(2) << '\n';
            out.flush();
            if (!out) throw Error(errc::io_failure, "write " + tmp.string());
        }
        std::error_code ec;
        fs::rename(tmp, manifest_path(root), ec);
        if (ec) throw Error(errc::io_failure, "rename manifest: " + ec.message());
    }

  private:
    [[noreturn]] static void out_of_order(const fs::path& path, const std::string& why) {
        throw Error(errc::out_of_order_block, path.filename().string() + ": " + why);
    }

    int fd_for(const fs::path& path) {
        auto key = path.string();
        if (auto it = fds_.find(key); it != fds_.end()) return it->second;
        int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
        if (fd < 0) throw Error(errc::io_failure, "open " + key + ": " + std::strerror(errno));
        fds_.emplace(key, fd);
        return fd;
    }

    void write_line(const fs::path& path, std::string line) {
        line += '\n';
        std::size_t limit = line.size();
        if (options_.hooks.write_limit) limit = std::min(limit, options_.hooks.write_limit(path, line.size()));
        const int fd = fd_for(path);
        std::size_t done = 0;
        while (done < limit) {
            auto n = ::write(fd, line.data() + done, limit - done);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw Error(errc::io_failure, "write " + path.string() + ": " + std::strerror(errno));
            }
            done += static_cast<std::size_t>(n);
        }
        if (options_.fsync && ::fdatasync(fd) != 0) {
            throw Error(errc::io_failure, "fdatasync " + path.string() + ": " + std::strerror(errno));
        }
        if (options_.hooks.after_write) options_.hooks.after_write(path);
    }

    void truncate_torn_tails() {
        std::vector<fs::path> files{superchain_path(root_), receipts_path(root_)};
        for (ChainId id = 0; fs::exists(circled_path(root_, id)); ++id) files.push_back(circled_path(root_, id));
        for (const auto& f : files) {
            if (!fs::exists(f)) continue;
            auto lines = read_lines(f);
            if (lines.torn_tail) fs::resize_file(f, lines.good_bytes);
            if (lines.lines.empty() && f.filename().string().starts_with("circled-")) fs::remove(f);
        }
    }

    fs::path root_;
    StoreOptions options_;
    std::map<ChainId, std::optional<Block>> tails_;
    std::optional<Block> super_tail_;
    std::map<std::string, int> fds_;
};

}  // namespace lcaas
