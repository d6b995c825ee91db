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
/// \brief Anchoring of super block hashes on an external network.
///
/// AnchorBackend is the seam for a real public-chain client. SimulatedAnchor models
/// confirmation latency per gas tier as a lognormal body plus a rare heavy tail.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <unordered_map>
#include <variant>

#include "block.hpp"
#include "error.hpp"
#include "hash.hpp"

namespace lcaas {

class GasPrice {
  public:
    explicit GasPrice(std::uint64_t gwei) : gwei_{gwei} {
        if (gwei == 0) throw Error(errc::invalid_gas_price, "gas price must be at least 1 gwei");
    }
    [[nodiscard]] std::uint64_t gwei() const noexcept { return gwei_; }
    friend auto operator<=>(const GasPrice&, const GasPrice&) = default;

  private:
    std::uint64_t gwei_;
};

struct AnchorTicket {
    std::string ticket_id;
    Hash payload_hash;
    GasPrice gas_price{1};
    Timestamp submitted_at{0};
};

struct AnchorReceipt {
    std::string ticket_id;
    Hash pseudo_tx_hash;
    Timestamp confirmed_at{0};
    std::int64_t latency_ms{0};

    friend bool operator==(const AnchorReceipt&, const AnchorReceipt&) = default;
};

struct Pending {
    Timestamp scheduled_at{0};  ///< informational; a real network would not know this
};

using PollResult = std::variant<Pending, AnchorReceipt>;

inline Hash pseudo_tx_hash(const Hash& payload_hash, const std::string& ticket_id) {
    return compute_hash(payload_hash.hex() + ticket_id);
}

class AnchorBackend {
  public:
    virtual ~AnchorBackend() = default;
    virtual AnchorTicket submit(const Hash& payload_hash, GasPrice gas_price, Timestamp now) = 0;
    virtual PollResult poll(const std::string& ticket_id, Timestamp now) = 0;
};

// ---------------------------------------------------------------------------
// Latency model
// ---------------------------------------------------------------------------

struct LognormalTier {
    double mu{0};     ///< log-milliseconds
    double sigma{0};  ///< log-milliseconds
};

struct LatencyModel {
    std::map<std::uint64_t, LognormalTier> tiers;  ///< keyed by gwei
    double p_tail{0};
    double tail_lo_ms{180'000};
    double tail_knee_ms{300'000};
    double tail_hi_ms{1'400'000};
    double tail_knee_mass{0.8};  ///< share of tail draws landing in [tail_lo_ms, tail_knee_ms)
    std::uint64_t rng_seed{1};
    bool strict{false};  ///< reject gas prices without a calibrated tier instead of using the nearest

    //! Body mean exp(mu + sigma^2/2) in milliseconds.
    static LognormalTier tier_with_mean(double mean_ms, double sigma) {
        return {std::log(mean_ms) - sigma * sigma / 2, sigma};
    }

    //! Test-network calibration: ~23 s average at 9 gwei, lower gas spreads further right,
    //! about 0.2% of confirmations take 3 to 23 minutes.
    static LatencyModel default_calibration(std::uint64_t seed = 1) {
        LatencyModel m;
        m.tiers[6] = tier_with_mean(22'800, 0.38);
        m.tiers[9] = tier_with_mean(22'300, 0.30);
        m.tiers[20] = tier_with_mean(21'300, 0.19);
        m.p_tail = 0.002;
        m.rng_seed = seed;
        return m;
    }

    void validate() const {
        auto bad = [](const std::string& why) { return Error(errc::invalid_config, "latency model: " + why); };
        if (tiers.empty()) throw bad("no gas tiers");
        for (const auto& [gwei, t] : tiers) {
            if (gwei == 0) throw bad("tier at 0 gwei");
            if (!std::isfinite(t.mu) || !std::isfinite(t.sigma) || t.sigma < 0) throw bad("tier parameters");
        }
        if (!(p_tail >= 0 && p_tail < 0.01)) throw bad("p_tail must lie in [0, 0.01)");
        if (!(std::isfinite(tail_lo_ms) && std::isfinite(tail_hi_ms) && tail_lo_ms > 0 && tail_lo_ms < tail_hi_ms)) {
            throw bad("tail range");
        }
        if (!(tail_knee_ms >= tail_lo_ms && tail_knee_ms <= tail_hi_ms)) throw bad("tail knee outside range");
        if (!(tail_knee_mass >= 0 && tail_knee_mass <= 1)) throw bad("tail_knee_mass must lie in [0, 1]");
    }

    [[nodiscard]] const LognormalTier& tier_for(GasPrice gas) const {
        if (auto it = tiers.find(gas.gwei()); it != tiers.end()) return it->second;
        if (strict) throw Error(errc::unknown_gas_tier, std::to_string(gas.gwei()) + " gwei");
        auto above = tiers.lower_bound(gas.gwei());
        if (above == tiers.begin()) return above->second;
        auto below = std::prev(above);
        if (above == tiers.end()) return below->second;
        return (gas.gwei() - below->first) <= (above->first - gas.gwei()) ? below->second : above->second;
    }
};

//! One confirmation latency in milliseconds; always >= 1.
template <typename Engine>
std::int64_t draw(const LatencyModel& model, GasPrice gas, Engine& engine) {
    const auto& tier = model.tier_for(gas);
    std::uniform_real_distribution<double> unit{0.0, 1.0};
    double ms = 0;
    if (unit(engine) < model.p_tail) {
        if (unit(engine) < model.tail_knee_mass) {
            ms = std::uniform_real_distribution<double>{model.tail_lo_ms, model.tail_knee_ms}(engine);
        } else {
            ms = std::uniform_real_distribution<double>{model.tail_knee_ms, model.tail_hi_ms}(engine);
        }
    } else if (tier.sigma == 0) {
        ms = std::exp(tier.mu);
    } else {
        ms = std::exp(std::normal_distribution<double>{tier.mu, tier.sigma}(engine));
    }
    if (!(ms < static_cast<double>(std::numeric_limits<std::int32_t>::max()))) {
        ms = std::numeric_limits<std::int32_t>::max();
    }
    return std::max<std::int64_t>(1, std::llround(ms));
}

//! Seeded model plus its engine.
class LatencySampler {
  public:
    explicit LatencySampler(LatencyModel model) : model_{std::move(model)}, engine_{model_.rng_seed} {
        model_.validate();
    }
    std::int64_t draw(GasPrice gas) { return lcaas::draw(model_, gas, engine_); }
    [[nodiscard]] const LatencyModel& model() const noexcept { return model_; }

  private:
    LatencyModel model_;
    std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Simulated network
// ---------------------------------------------------------------------------

class SimulatedAnchor final : public AnchorBackend {
  public:
    explicit SimulatedAnchor(LatencyModel model) : sampler_{std::move(model)} {}

    AnchorTicket submit(const Hash& payload_hash, GasPrice gas_price, Timestamp now) override {
        std::lock_guard lock{mutex_};
        (void)sampler_.model().tier_for(gas_price);  // strict-mode check before consuming randomness
        const auto seq = next_seq_++;
        std::string ticket_id = "t" + compute_hash(payload_hash.hex() + ":" + std::to_string(seq)).hex().substr(0, 16);
        AnchorTicket ticket{ticket_id, payload_hash, gas_price, now};
        const auto latency = sampler_.draw(gas_price);
        scheduled_.emplace(ticket_id, Scheduled{ticket, now + latency});
        return ticket;
    }

    PollResult poll(const std::string& ticket_id, Timestamp now) override {
        std::lock_guard lock{mutex_};
        auto it = scheduled_.find(ticket_id);
        if (it == scheduled_.end()) throw Error(errc::unknown_ticket, ticket_id);
        const auto& s = it->second;
        if (now < s.confirm_at) return Pending{s.confirm_at};
        return AnchorReceipt{ticket_id, pseudo_tx_hash(s.ticket.payload_hash, ticket_id), s.confirm_at,
                             s.confirm_at - s.ticket.submitted_at};
    }

    [[nodiscard]] const LatencyModel& model() const noexcept { return sampler_.model(); }

  private:
    struct Scheduled {
        AnchorTicket ticket;
        Timestamp confirm_at;
    };

    std::mutex mutex_;
    LatencySampler sampler_;
    std::uint64_t next_seq_{0};
    std::unordered_map<std::string, Scheduled> scheduled_;
};

}  // namespace lcaas
