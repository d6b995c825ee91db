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

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "error.hpp"
#include "hash.hpp"

namespace lcaas {

//! Unix epoch milliseconds.
using Timestamp = std::int64_t;

enum class BlockType {
    absolute_genesis,
    relative_genesis,
    data,
    terminal,
    super_genesis,
    super,
};

constexpr std::string_view to_string(BlockType t) noexcept {
    switch (t) {
        case BlockType::absolute_genesis: return "absolute_genesis";
        case BlockType::relative_genesis: return "relative_genesis";
        case BlockType::data: return "data";
        case BlockType::terminal: return "terminal";
        case BlockType::super_genesis: return "super_genesis";
        case BlockType::super: return "super";
    }
    return "unknown";
}

constexpr std::optional<BlockType> parse_block_type(std::string_view tag) noexcept {
    for (auto t : {BlockType::absolute_genesis, BlockType::relative_genesis, BlockType::data, BlockType::terminal,
                   BlockType::super_genesis, BlockType::super}) {
        if (to_string(t) == tag) return t;
    }
    return std::nullopt;
}

inline constexpr std::string_view kAbsoluteGenesisData = "ABSOLUTE_GENESIS";
inline constexpr std::string_view kRelativeGenesisData = "RELATIVE_GENESIS";
inline constexpr std::string_view kSuperGenesisData = "SUPER_GENESIS";

struct Block {
    std::uint64_t index{0};
    Timestamp timestamp{0};
    BlockType block_type{BlockType::data};
    std::string data;
    Hash previous_hash;
    Hash current_hash;

    friend bool operator==(const Block&, const Block&) = default;
};

//! Strict UTF-8 check: rejects overlongs, surrogates and code points above U+10FFFF.
inline bool is_valid_utf8(std::string_view s) noexcept {
    auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = byte(i);
        std::size_t extra = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if (c >= 0xc2 && c <= 0xdf) {
            extra = 1;
            cp = c & 0x1f;
        } else if (c >= 0xe0 && c <= 0xef) {
            extra = 2;
            cp = c & 0x0f;
        } else if (c >= 0xf0 && c <= 0xf4) {
            extra = 3;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + extra >= s.size()) return false;
        for (std::size_t k = 1; k <= extra; ++k) {
            unsigned char cc = byte(i + k);
            if ((cc & 0xc0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3f);
        }
        if ((extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) || cp > 0x10ffff ||
            (cp >= 0xd800 && cp <= 0xdfff)) {
            return false;
        }
        i += extra + 1;
    }
    return true;
}

//! Hash input for a block: `index|timestamp|block_type|len(data):data|previous_hash`.
//! The byte-length prefix on data keeps the encoding injective even when data contains '|'.
inline std::string canonical_serialize(std::uint64_t index, Timestamp timestamp, BlockType block_type,
                                       std::string_view data, const Hash& previous_hash) {
    if (!is_valid_utf8(data)) throw Error(errc::non_utf8_data);
    std::string out;
    out.reserve(data.size() + 128);
    out += std::to_string(index);
    out += '|';
    out += std::to_string(timestamp);
    out += '|';
    out += to_string(block_type);
    out += '|';
    out += std::to_string(data.size());
    out += ':';
    out += data;
    out += '|';
    out += previous_hash.hex();
    return out;
}

inline std::string canonical_serialize(const Block& b) {
    return canonical_serialize(b.index, b.timestamp, b.block_type, b.data, b.previous_hash);
}

//! Builds a block and fills current_hash.
inline Block make_block(std::uint64_t index, Timestamp timestamp, BlockType type, std::string data,
                        const Hash& previous_hash) {
    Block b{index, timestamp, type, std::move(data), previous_hash, {}};
    b.current_hash = compute_hash(canonical_serialize(b));
    return b;
}

//! All six fields, as embedded in a super block's data element.
inline std::string serialize_record(const Block& b) { return canonical_serialize(b) + "|" + b.current_hash.hex(); }

namespace detail {

    // Canonical decimal: no sign for unsigned, no leading zeros.
    template <typename Int>
    std::optional<Int> parse_decimal(std::string_view s) {
        if (s.empty()) return std::nullopt;
        std::string_view digits = s.front() == '-' ? s.substr(1) : s;
        if (digits.empty() || (digits.size() > 1 && digits.front() == '0')) return std::nullopt;
        if (s.front() == '-' && digits == "0") return std::nullopt;
        Int v{};
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
        return v;
    }

    inline std::optional<std::string_view> take_until(std::string_view& s, char sep) {
        auto pos = s.find(sep);
        if (pos == std::string_view::npos) return std::nullopt;
        auto field = s.substr(0, pos);
        s.remove_prefix(pos + 1);
        return field;
    }

}  // namespace detail

//! Inverse of serialize_record. Strict: any non-canonical spelling is rejected.
inline std::optional<Block> parse_record(std::string_view s) {
    Block b;
    auto index = detail::take_until(s, '|');
    auto ts = detail::take_until(s, '|');
    auto tag = detail::take_until(s, '|');
    auto len = detail::take_until(s, ':');
    if (!index || !ts || !tag || !len) return std::nullopt;
    auto i = detail::parse_decimal<std::uint64_t>(*index);
    auto t = detail::parse_decimal<Timestamp>(*ts);
    auto type = parse_block_type(*tag);
    auto n = detail::parse_decimal<std::size_t>(*len);
    if (!i || !t || !type || !n) return std::nullopt;
    if (s.size() < *n) return std::nullopt;
    b.data.assign(s.substr(0, *n));
    s.remove_prefix(*n);
    if (!is_valid_utf8(b.data)) return std::nullopt;
    if (s.size() != 2 * (Hash::kHexLength + 1) || s[0] != '|' || s[Hash::kHexLength + 1] != '|') return std::nullopt;
    auto prev = Hash::parse(s.substr(1, Hash::kHexLength));
    auto cur = Hash::parse(s.substr(Hash::kHexLength + 2));
    if (!prev || !cur) return std::nullopt;
    b.index = *i;
    b.timestamp = *t;
    b.block_type = *type;
    b.previous_hash = *prev;
    b.current_hash = *cur;
    return b;
}

enum class FailureReason {
    none,
    hash_mismatch,
    link_broken,
    bad_index,
    bad_block_type,
    bad_payload,
    aggregate_mismatch,
    terminal_mismatch,
    missing_block,
    malformed_record,
};

constexpr std::string_view to_string(FailureReason r) noexcept {
    switch (r) {
        case FailureReason::none: return "none";
        case FailureReason::hash_mismatch: return "hash_mismatch";
        case FailureReason::link_broken: return "link_broken";
        case FailureReason::bad_index: return "bad_index";
        case FailureReason::bad_block_type: return "bad_block_type";
        case FailureReason::bad_payload: return "bad_payload";
        case FailureReason::aggregate_mismatch: return "aggregate_mismatch";
        case FailureReason::terminal_mismatch: return "terminal_mismatch";
        case FailureReason::missing_block: return "missing_block";
        case FailureReason::malformed_record: return "malformed_record";
    }
    return "unknown";
}

struct VerificationResult {
    FailureReason reason{FailureReason::none};

    [[nodiscard]] bool ok() const noexcept { return reason == FailureReason::none; }
    explicit operator bool() const noexcept { return ok(); }
};

//! One hash recomputation. A block whose data is not UTF-8 cannot hash and counts as a mismatch.
inline VerificationResult verify_block(const Block& block, const Hash& expected_previous_hash) {
    std::optional<Hash> recomputed;
    try {
        recomputed = compute_hash(canonical_serialize(block));
    } catch (const Error&) {
        return {FailureReason::hash_mismatch};
    }
    if (*recomputed != block.current_hash) return {FailureReason::hash_mismatch};
    if (block.previous_hash != expected_previous_hash) return {FailureReason::link_broken};
    return {};
}

}  // namespace lcaas
