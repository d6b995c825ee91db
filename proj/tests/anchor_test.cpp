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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include <lcaas/anchor.hpp>
#include <lcaas/stats.hpp>

namespace lcaas {
namespace {

    std::vector<double> draws(std::uint64_t gwei, std::size_t count, std::uint64_t seed) {
        LatencySampler s{LatencyModel::default_calibration(seed)};
        std::vector<double> out;
        for (std::size_t i = 0; i < count; ++i) out.push_back(static_cast<double>(s.draw(GasPrice{gwei})));
        return out;
    }

    TEST(GasPrice, RejectsZero) {
        try {
            GasPrice g{0};
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), errc::invalid_gas_price);
        }
        EXPECT_EQ(GasPrice{6}.gwei(), 6u);
    }

    TEST(LatencyModel, SameSeedSameSequence) {
        EXPECT_EQ(draws(9, 500, 11), draws(9, 500, 11));
        EXPECT_NE(draws(9, 500, 11), draws(9, 500, 12));
    }

    TEST(LatencyModel, NineGweiMeanNearTwentyThreeSeconds) {
        for (std::uint64_t seed : {1, 2, 3}) {
            auto d = draws(9, 5000, seed);
            EXPECT_NEAR(stats::mean(d), 23'000, 2'300) << seed;
        }
    }

    TEST(LatencyModel, LowerGasSpreadsFurther) {
        auto g6 = stats::summarize(draws(6, 4000, 5));
        auto g20 = stats::summarize(draws(20, 4000, 5));
        EXPECT_GT(g6.p95, g20.p95);
        auto ks = stats::ks_two_sample(draws(6, 2000, 8), draws(20, 2000, 9));
        EXPECT_LT(ks.p_value, 1e-3);
    }

    TEST(LatencyModel, DrawsArePositiveAndBounded) {
        LatencyModel m = LatencyModel::default_calibration(4);
        m.p_tail = 0.009;
        LatencySampler s{m};
        for (int i = 0; i < 20000; ++i) {
            auto ms = s.draw(GasPrice{9});
            ASSERT_GE(ms, 1);
            ASSERT_LE(ms, static_cast<std::int64_t>(m.tail_hi_ms) + 1);
        }
    }

    TEST(LatencyModel, TailRegion) {
        LatencyModel m = LatencyModel::default_calibration(6);
        m.p_tail = 0.009;
        LatencySampler s{m};
        std::size_t knee = 0, far = 0;
        for (int i = 0; i < 200000; ++i) {
            auto ms = s.draw(GasPrice{9});
            if (ms >= 180'000 && ms < 300'000) ++knee;
            if (ms >= 300'000) ++far;
        }
        const double tail = static_cast<double>(knee + far);
        EXPECT_NEAR(tail / 200000.0, 0.009, 0.0015);
        EXPECT_NEAR(static_cast<double>(knee) / tail, 0.8, 0.05);
    }

    TEST(LatencyModel, ZeroSigmaIsDeterministic) {
        LatencyModel m;
        m.tiers[10] = LatencyModel::tier_with_mean(5'000, 0);
        m.p_tail = 0;
        LatencySampler s{m};
        EXPECT_EQ(s.draw(GasPrice{10}), 5'000);
    }

    TEST(LatencyModel, NearestTierAndStrictMode) {
        LatencyModel m = LatencyModel::default_calibration();
        EXPECT_EQ(&m.tier_for(GasPrice{1}), &m.tiers.at(6));
        EXPECT_EQ(&m.tier_for(GasPrice{7}), &m.tiers.at(6));
        EXPECT_EQ(&m.tier_for(GasPrice{8}), &m.tiers.at(9));
        EXPECT_EQ(&m.tier_for(GasPrice{14}), &m.tiers.at(9));
        EXPECT_EQ(&m.tier_for(GasPrice{15}), &m.tiers.at(20));
        EXPECT_EQ(&m.tier_for(GasPrice{500}), &m.tiers.at(20));
        m.strict = true;
        try {
            (void)m.tier_for(GasPrice{7});
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), errc::unknown_gas_tier);
        }
    }

    TEST(LatencyModel, Validation) {
        auto expect_invalid = [](auto mutate) {
            LatencyModel m = LatencyModel::default_calibration();
            mutate(m);
            try {
                m.validate();
                ADD_FAILURE();
            } catch (const Error& e) {
                EXPECT_EQ(e.code(), errc::invalid_config);
            }
        };
        expect_invalid([](LatencyModel& m) { m.p_tail = 0.01; });
        expect_invalid([](LatencyModel& m) { m.p_tail = -0.1; });
        expect_invalid([](LatencyModel& m) { m.tiers.clear(); });
        expect_invalid([](LatencyModel& m) { m.tiers[9].sigma = -1; });
        expect_invalid([](LatencyModel& m) { m.tail_hi_ms = m.tail_lo_ms; });
        expect_invalid([](LatencyModel& m) { m.tail_knee_mass = 1.5; });
        EXPECT_NO_THROW(LatencyModel::default_calibration().validate());
    }

    TEST(SimulatedAnchor, PendingThenConfirmed) {
        SimulatedAnchor anchor{LatencyModel::default_calibration(2)};
        const Hash payload = compute_hash("sb");
        auto ticket = anchor.submit(payload, GasPrice{9}, 1'000);
        EXPECT_EQ(ticket.submitted_at, 1'000);
        EXPECT_EQ(ticket.payload_hash, payload);
        auto first = anchor.poll(ticket.ticket_id, 1'000);
        ASSERT_TRUE(std::holds_alternative<Pending>(first));
        const auto due = std::get<Pending>(first).scheduled_at;
        EXPECT_GT(due, 1'000);
        EXPECT_TRUE(std::holds_alternative<Pending>(anchor.poll(ticket.ticket_id, due - 1)));
        auto done = anchor.poll(ticket.ticket_id, due + 50);
        ASSERT_TRUE(std::holds_alternative<AnchorReceipt>(done));
        const auto& r = std::get<AnchorReceipt>(done);
        EXPECT_EQ(r.confirmed_at, due);
        EXPECT_EQ(r.latency_ms, due - 1'000);
        EXPECT_EQ(r.pseudo_tx_hash, compute_hash(payload.hex() + ticket.ticket_id));
        // Polling again is idempotent.
        EXPECT_EQ(std::get<AnchorReceipt>(anchor.poll(ticket.ticket_id, due + 999)), r);
        EXPECT_THROW(anchor.poll("t0000000000000000", 0), Error);
    }

}  // namespace
}  // namespace lcaas
