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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lcaas {

enum class errc {
    invalid_hash,
    invalid_digest,
    non_utf8_data,
    invalid_terminal,
    tampered_terminal,
    chain_sealed,
    chain_full,
    not_full,
    already_sealed,
    empty_chain,
    malformed_record,
    out_of_order_block,
    io_failure,
    corruption_detected,
    nonempty_dir,
    ledger_missing,
    ledger_locked,
    ledger_unavailable,
    config_mismatch,
    invalid_config,
    invalid_gas_price,
    unknown_gas_tier,
    unknown_ticket,
    empty_sample,
    non_finite_sample,
    constant_input,
    length_mismatch,
    insufficient_data,
    service_unreachable,
    submission_rejected,
};

constexpr std::string_view to_string(errc code) noexcept {
    switch (code) {
        case errc::invalid_hash: return "invalid_hash";
        case errc::invalid_digest: return "invalid_digest";
        case errc::non_utf8_data: return "non_utf8_data";
        case errc::invalid_terminal: return "invalid_terminal";
        case errc::tampered_terminal: return "tampered_terminal";
        case errc::chain_sealed: return "chain_sealed";
        case errc::chain_full: return "chain_full";
        case errc::not_full: return "not_full";
        case errc::already_sealed: return "already_sealed";
        case errc::empty_chain: return "empty_chain";
        case errc::malformed_record: return "malformed_record";
        case errc::out_of_order_block: return "out_of_order_block";
        case errc::io_failure: return "io_failure";
        case errc::corruption_detected: return "corruption_detected";
        case errc::nonempty_dir: return "nonempty_dir";
        case errc::ledger_missing: return "ledger_missing";
        case errc::ledger_locked: return "ledger_locked";
        case errc::ledger_unavailable: return "ledger_unavailable";
        case errc::config_mismatch: return "config_mismatch";
        case errc::invalid_config: return "invalid_config";
        case errc::invalid_gas_price: return "invalid_gas_price";
        case errc::unknown_gas_tier: return "unknown_gas_tier";
        case errc::unknown_ticket: return "unknown_ticket";
        case errc::empty_sample: return "empty_sample";
        case errc::non_finite_sample: return "non_finite_sample";
        case errc::constant_input: return "constant_input";
        case errc::length_mismatch: return "length_mismatch";
        case errc::insufficient_data: return "insufficient_data";
        case errc::service_unreachable: return "service_unreachable";
        case errc::submission_rejected: return "submission_rejected";
    }
    return "unknown";
}

//! Base exception for every failure the library reports as an error (as opposed to a verification result).
class Error : public std::runtime_error {
  public:
    Error(errc code, const std::string& detail)
        : std::runtime_error(std::string{to_string(code)} + (detail.empty() ? "" : ": " + detail)), code_{code} {}
    explicit Error(errc code) : Error(code, {}) {}

    [[nodiscard]] errc code() const noexcept { return code_; }

  private:
    errc code_;
};

//! Raised by the store when a persisted file is damaged anywhere but its torn tail.
class CorruptionDetected : public Error {
  public:
    CorruptionDetected(std::string file, std::size_t line, std::string reason)
        : Error(errc::corruption_detected, file + ":" + std::to_string(line) + ": " + reason),
          file_{std::move(file)},
          line_{line},
          reason_{std::move(reason)} {}

    [[nodiscard]] const std::string& file() const noexcept { return file_; }
    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] const std::string& reason() const noexcept { return reason_; }

  private:
    std::string file_;
    std::size_t line_;
    std::string reason_;
};

}  // namespace lcaas
