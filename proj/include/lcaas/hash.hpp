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

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include <openssl/evp.h>

#include "error.hpp"

namespace lcaas {

//! Lowercase hex SHA-256 digest, always 64 characters from [0-9a-f].
class Hash {
  public:
    static constexpr std::size_t kHexLength = 64;

    //! All-zero hash used as previous_hash of chain roots.
    Hash() : hex_(kHexLength, '0') {}

    static std::optional<Hash> parse(std::string_view hex) {
        if (!is_valid(hex)) return std::nullopt;
        Hash h;
        h.hex_.assign(hex);
        return h;
    }

    static Hash from_hex(std::string_view hex) {
        auto h = parse(hex);
        if (!h) throw Error(errc::invalid_hash, std::string{hex.substr(0, 80)});
        return *h;
    }

    static Hash zero() { return Hash{}; }

    static bool is_valid(std::string_view hex) noexcept {
        if (hex.size() != kHexLength) return false;
        for (char c : hex) {
            if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
        }
        return true;
    }

    [[nodiscard]] const std::string& hex() const noexcept { return hex_; }
    [[nodiscard]] bool is_zero() const noexcept { return hex_.find_first_not_of('0') == std::string::npos; }

    friend bool operator==(const Hash&, const Hash&) = default;
    friend auto operator<=>(const Hash&, const Hash&) = default;

    friend std::ostream& operator<<(std::ostream& os, const Hash& h) { return os << h.hex_; }

  private:
    std::string hex_;
};

namespace detail {
    inline thread_local std::uint64_t hash_invocations = 0;
}

//! Number of compute_hash calls made on the calling thread. Verification reports diff this counter.
inline std::uint64_t hash_invocation_count() noexcept { return detail::hash_invocations; }

inline Hash compute_hash(std::string_view bytes) {
    ++detail::hash_invocations;
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1 || len != 32) {
        throw Error(errc::io_failure, "EVP_Digest(sha256) failed");
    }
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string hex(Hash::kHexLength, '0');
    for (unsigned int i = 0; i < len; ++i) {
        hex[2 * i] = kDigits[digest[i] >> 4];
        hex[2 * i + 1] = kDigits[digest[i] & 0x0f];
    }
    return Hash::from_hex(hex);
}

}  // namespace lcaas

template <>
struct std::hash<lcaas::Hash> {
    std::size_t operator()(const lcaas::Hash& h) const noexcept { return std::hash<std::string>{}(h.hex()); }
};
