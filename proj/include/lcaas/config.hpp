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

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>

#include "codec.hpp"
#include "error.hpp"

namespace lcaas {

enum class AnchorMode { simulated, none };
enum class ClockMode { wall, simulated };

constexpr std::string_view to_string(AnchorMode m) noexcept { return m == AnchorMode::simulated ? "simulated" : "none"; }
constexpr std::string_view to_string(ClockMode m) noexcept { return m == ClockMode::wall ? "wall" : "simulated"; }

//! Immutable after startup. Loaded from an optional JSON file, then LCAAS_* environment overrides.
struct ServiceConfig {
    std::uint64_t capacity_n{100};
    std::uint64_t gas_price_gwei{9};
    AnchorMode anchor_backend{AnchorMode::simulated};
    std::filesystem::path ledger_root{"ledger"};
    std::string listen_address{"127.0.0.1:8080"};
    std::uint64_t rng_seed{1};
    ClockMode clock_mode{ClockMode::wall};
    std::size_t max_log_bytes{10 * 1024 * 1024};
    bool fsync{true};
    std::int64_t anchor_poll_ms{200};

    void validate() const {
        if (capacity_n == 0) throw Error(errc::invalid_config, "capacity_n must be >= 1");
        if (gas_price_gwei == 0) throw Error(errc::invalid_config, "gas_price_gwei must be >= 1");
        if (max_log_bytes == 0) throw Error(errc::invalid_config, "max_log_bytes must be >= 1");
        if (anchor_poll_ms <= 0) throw Error(errc::invalid_config, "anchor_poll_ms must be > 0");
        (void)split_listen();
    }

    //! host:port
    [[nodiscard]] std::pair<std::string, int> split_listen() const {
        auto colon = listen_address.rfind(':');
        if (colon == std::string::npos) throw Error(errc::invalid_config, "listen_address needs host:port");
        try {
            int port = std::stoi(listen_address.substr(colon + 1));
            if (port < 0 || port > 65535) throw std::out_of_range{"port"};
            return {listen_address.substr(0, colon), port};
        } catch (const std::logic_error&) {
            throw Error(errc::invalid_config, "bad port in listen_address " + listen_address);
        }
    }

    using EnvLookup = std::function<std::optional<std::string>(const char*)>;

    static std::optional<std::string> process_env(const char* name) {
        if (const char* v = std::getenv(name)) return std::string{v};
        return std::nullopt;
    }

    void apply_json(const Json& j) {
        try {
            if (j.contains("capacity_n")) capacity_n = j["capacity_n"].get<std::uint64_t>();
            if (j.contains("gas_price_gwei")) gas_price_gwei = j["gas_price_gwei"].get<std::uint64_t>();
            if (j.contains("anchor_backend")) anchor_backend = parse_anchor(j["anchor_backend"].get<std::string>());
            if (j.contains("ledger_root")) ledger_root = j["ledger_root"].get<std::string>();
            if (j.contains("listen_address")) listen_address = j["listen_address"].get<std::string>();
            if (j.contains("rng_seed")) rng_seed = j["rng_seed"].get<std::uint64_t>();
            if (j.contains("clock_mode")) clock_mode = parse_clock(j["clock_mode"].get<std::string>());
            if (j.contains("max_log_bytes")) max_log_bytes = j["max_log_bytes"].get<std::size_t>();
            if (j.contains("fsync")) fsync = j["fsync"].get<bool>();
            if (j.contains("anchor_poll_ms")) anchor_poll_ms = j["anchor_poll_ms"].get<std::int64_t>();
        } catch (const Json::exception& e) {
            throw Error(errc::invalid_config, e.what());
        }
    }

    void apply_env(const EnvLookup& env) {
        auto number = [](const char* name, const std::string& v) {
            if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
                throw Error(errc::invalid_config, std::string{name} + "=" + v);
            }
            try {
                std::size_t pos = 0;
                auto n = std::stoull(v, &pos);
                if (pos != v.size()) throw std::invalid_argument{name};
                return static_cast<std::uint64_t>(n);
            } catch (const std::logic_error&) {
                throw Error(errc::invalid_config, std::string{name} + "=" + v);
            }
        };
        if (auto v = env("LCAAS_CAPACITY")) capacity_n = number("LCAAS_CAPACITY", *v);
        if (auto v = env("LCAAS_GAS_GWEI")) gas_price_gwei = number("LCAAS_GAS_GWEI", *v);
        if (auto v = env("LCAAS_ANCHOR")) anchor_backend = parse_anchor(*v);
        if (auto v = env("LCAAS_ROOT")) ledger_root = *v;
        if (auto v = env("LCAAS_LISTEN")) listen_address = *v;
        if (auto v = env("LCAAS_SEED")) rng_seed = number("LCAAS_SEED", *v);
    }

    static ServiceConfig load(const std::optional<std::filesystem::path>& file, const EnvLookup& env = process_env) {
        ServiceConfig c;
        if (file) {
            std::ifstream in{*file};
            if (!in) throw Error(errc::invalid_config, "cannot read " + file->string());
            try {
                c.apply_json(Json::parse(in));
            } catch (const Json::parse_error& e) {
                throw Error(errc::invalid_config, e.what());
            }
        }
        c.apply_env(env);
        c.validate();
        return c;
    }

    static AnchorMode parse_anchor(const std::string& s) {
        if (s == "simulated") return AnchorMode::simulated;
        if (s == "none") return AnchorMode::none;
        throw Error(errc::invalid_config, "anchor_backend must be simulated|none, got " + s);
    }
    static ClockMode parse_clock(const std::string& s) {
        if (s == "wall") return ClockMode::wall;
        if (s == "simulated" || s == "sim") return ClockMode::simulated;
        throw Error(errc::invalid_config, "clock_mode must be wall|simulated, got " + s);
    }
};

}  // namespace lcaas
