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

#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <lcaas/audit.hpp>
#include <lcaas/chain.hpp>
#include <lcaas/ledger.hpp>

namespace lcaas::test {

namespace fs = std::filesystem;

class TempDir {
  public:
    explicit TempDir(const std::string& tag = "t") {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("lcaas-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const fs::path& path() const noexcept { return path_; }
    [[nodiscard]] fs::path operator/(const std::string& s) const { return path_ / s; }

  private:
    fs::path path_;
};

inline std::string slurp(const fs::path& p) {
    std::ifstream in{p, std::ios::binary};
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void spit(const fs::path& p, const std::string& content) {
    std::ofstream out{p, std::ios::binary | std::ios::trunc};
    out << content;
}

inline std::vector<std::string> split_lines(const std::string& content) {
    std::vector<std::string> lines;
    std::istringstream in{content};
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

//! Digest of the k-th synthetic log line.
inline Hash digest_of(std::uint64_t k) { return compute_hash("log-" + std::to_string(k)); }

struct Hierarchy {
    std::vector<CircledBlockchain> chains;
    SuperBlockchain super_chain;
};

//! `sealed` full chains of capacity n followed by an open chain holding `open_data` blocks.
inline Hierarchy build_hierarchy(std::size_t sealed, std::uint64_t n, std::uint64_t open_data = 0, Timestamp t0 = 1000) {
    Hierarchy h;
    Timestamp t = t0;
    h.super_chain = new_super_chain(t);
    h.chains.push_back(open_first_chain(n, t++));
    std::uint64_t k = 0;
    for (std::size_t c = 0; c < sealed; ++c) {
        auto& chain = h.chains.back();
        for (std::uint64_t i = 0; i < n; ++i) append_data(chain, digest_of(k++), t++);
        const Block& terminal = seal(chain, t++);
        make_super_block(terminal, h.super_chain, t++);
        h.chains.push_back(open_next_chain(h.chains.back(), t++));
    }
    for (std::uint64_t i = 0; i < open_data; ++i) append_data(h.chains.back(), digest_of(k++), t++);
    return h;
}

//! Fills a fresh on-disk ledger through the Ledger API (no anchoring).
inline void fill_ledger(const fs::path& root, std::uint64_t n, std::uint64_t digests, const Clock& clock) {
    Ledger::init(root, n, clock);
    LedgerOptions options;
    options.store.fsync = false;
    Ledger ledger{root, clock, nullptr, options};
    for (std::uint64_t k = 0; k < digests; ++k) ledger.submit_digest(digest_of(k));
}

// ---------------------------------------------------------------------------
// On-disk single-character tampering
// ---------------------------------------------------------------------------

struct Mutation {
    fs::path file;
    std::size_t line{0};  ///< 0-based
    std::size_t column{0};
    char original{0};
    char replacement{0};
    HierarchyIssue expected;  ///< where the audit must point
};

//! Files that carry hash-linked blocks, with the location prefix of their issues.
inline std::vector<std::pair<fs::path, HierarchyIssue>> block_files(const fs::path& root) {
    std::vector<std::pair<fs::path, HierarchyIssue>> files;
    for (ChainId id = 0; fs::exists(circled_path(root, id)); ++id) {
        files.push_back({circled_path(root, id), HierarchyIssue{Level::circled, id, 0, FailureReason::none}});
    }
    files.push_back({superchain_path(root), HierarchyIssue{Level::super, 0, 0, FailureReason::none}});
    return files;
}

//! Replaces one printable character of one stored block with a different printable character.
inline Mutation random_mutation(const fs::path& root, std::mt19937_64& rng) {
    auto files = block_files(root);
    std::vector<std::pair<std::size_t, std::size_t>> slots;  // (file, line)
    std::vector<std::vector<std::string>> contents;
    for (std::size_t f = 0; f < files.size(); ++f) {
        contents.push_back(split_lines(slurp(files[f].first)));
        for (std::size_t l = 0; l < contents.back().size(); ++l) slots.emplace_back(f, l);
    }
    auto [f, l] = slots[std::uniform_int_distribution<std::size_t>{0, slots.size() - 1}(rng)];
    const auto& line = contents[f][l];
    Mutation m;
    m.file = files[f].first;
    m.line = l;
    m.column = std::uniform_int_distribution<std::size_t>{0, line.size() - 1}(rng);
    m.original = line[m.column];
    do {
        m.replacement = static_cast<char>(std::uniform_int_distribution<int>{0x20, 0x7e}(rng));
    } while (m.replacement == m.original);
    m.expected = files[f].second;
    m.expected.block_index = l;
    return m;
}

inline void apply(const Mutation& m, bool undo = false) {
    auto content = slurp(m.file);
    std::size_t offset = 0;
    for (std::size_t l = 0; l < m.line; ++l) offset = content.find('\n', offset) + 1;
    content[offset + m.column] = undo ? m.original : m.replacement;
    spit(m.file, content);
}

inline bool located(const HierarchyReport& report, const Mutation& m) {
    auto issue = report.first_issue();
    return issue && issue->level == m.expected.level && issue->chain_id == m.expected.chain_id &&
           issue->block_index == m.expected.block_index;
}

}  // namespace lcaas::test
