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
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include <lcaas/stats.hpp>

#include "oracle/stats_oracle.hpp"

namespace lcaas::stats {
namespace {

    // Relative tolerance 1e-9, absolute near zero.
    void expect_close(double actual, double expected) {
        EXPECT_NEAR(actual, expected, 1e-9 * std::max(1.0, std::fabs(expected))) << "expected " << expected;
        if (expected != 0 && std::fabs(expected) < 1) {
            EXPECT_LE(std::fabs(actual - expected) / std::fabs(expected), 1e-9) << actual << " vs " << expected;
        }
    }

    errc error_of(auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.code();
        }
        return errc::io_failure;
    }

    TEST(Percentile, LinearInterpolation) {
        const std::vector<double> v{1, 2, 3, 4};
        EXPECT_DOUBLE_EQ(percentile(v, 95), 3.85);
        EXPECT_DOUBLE_EQ(percentile(v, 0), 1);
        EXPECT_DOUBLE_EQ(percentile(v, 100), 4);
        EXPECT_DOUBLE_EQ(median(v), 2.5);
        EXPECT_DOUBLE_EQ(percentile(std::vector<double>{7}, 95), 7);
    }

    TEST(Percentile, MatchesOracle) {
        expect_close(percentile(oracle::x, 0), oracle::pct_x_0);
        expect_close(percentile(oracle::x, 5), oracle::pct_x_5);
        expect_close(percentile(oracle::x, 25), oracle::pct_x_25);
        expect_close(percentile(oracle::x, 50), oracle::pct_x_50);
        expect_close(percentile(oracle::x, 90), oracle::pct_x_90);
        expect_close(percentile(oracle::x, 95), oracle::pct_x_95);
        expect_close(percentile(oracle::x, 99.9), oracle::pct_x_99_9);
        expect_close(percentile(oracle::x, 100), oracle::pct_x_100);
        expect_close(mean(oracle::x), oracle::mean_x);
        expect_close(median(oracle::x), oracle::median_x);
    }

    TEST(Summary, Fields) {
        auto s = summarize(std::vector<double>{4, 1, 3, 2});
        EXPECT_EQ(s.count, 4u);
        EXPECT_DOUBLE_EQ(s.mean, 2.5);
        EXPECT_DOUBLE_EQ(s.median, 2.5);
        EXPECT_DOUBLE_EQ(s.p95, 3.85);
        EXPECT_DOUBLE_EQ(s.min, 1);
        EXPECT_DOUBLE_EQ(s.max, 4);
    }

    TEST(Correlation, MatchesOracle) {
        expect_close(pearson(oracle::x, oracle::y), oracle::pearson_xy);
        expect_close(spearman(oracle::x, oracle::y), oracle::spearman_xy);
        expect_close(pearson(oracle::ties, oracle::y), oracle::pearson_ties_y);
        expect_close(spearman(oracle::ties, oracle::y), oracle::spearman_ties_y);
    }

    TEST(Correlation, Properties) {
        std::vector<double> x{1, 2, 3, 4, 5};
        std::vector<double> y{2, 4, 6, 8, 10};
        std::vector<double> cubed{1, 8, 27, 64, 125};
        EXPECT_DOUBLE_EQ(pearson(x, y), 1.0);
        EXPECT_DOUBLE_EQ(spearman(x, cubed), 1.0);
        EXPECT_LT(pearson(x, cubed), 1.0);
        std::vector<double> rev{5, 4, 3, 2, 1};
        EXPECT_DOUBLE_EQ(spearman(x, rev), -1.0);
        EXPECT_EQ(average_ranks(std::vector<double>{10, 20, 20, 30}), (std::vector<double>{1, 2.5, 2.5, 4}));
    }

    TEST(Correlation, InputErrors) {
        std::vector<double> x{1, 2, 3};
        EXPECT_EQ(error_of([&] { (void)pearson(x, std::vector<double>{1, 1, 1}); }), errc::constant_input);
        EXPECT_EQ(error_of([&] { (void)pearson(x, std::vector<double>{1, 2}); }), errc::length_mismatch);
        EXPECT_EQ(error_of([&] { (void)pearson(std::vector<double>{}, std::vector<double>{}); }), errc::empty_sample);
        EXPECT_EQ(error_of([&] { (void)spearman(std::vector<double>{1}, std::vector<double>{2}); }), errc::insufficient_data);
        const double nan = std::numeric_limits<double>::quiet_NaN();
        EXPECT_EQ(error_of([&] { (void)mean(std::vector<double>{1, nan}); }), errc::non_finite_sample);
        EXPECT_EQ(error_of([&] { (void)percentile(x, 101); }), errc::insufficient_data);
    }

    TEST(LinearFit, MatchesOracle) {
        auto f = linear_fit(oracle::x, oracle::y);
        expect_close(f.slope, oracle::fit_xy_slope);
        expect_close(f.intercept, oracle::fit_xy_intercept);
        expect_close(f.r_squared, oracle::fit_xy_r2);
        expect_close(f.p_value, oracle::fit_xy_p);
        auto g = linear_fit(oracle::ties, oracle::y);
        expect_close(g.slope, oracle::fit_ties_y_slope);
        expect_close(g.intercept, oracle::fit_ties_y_intercept);
        expect_close(g.r_squared, oracle::fit_ties_y_r2);
        expect_close(g.p_value, oracle::fit_ties_y_p);
    }

    TEST(LinearFit, EdgeCases) {
        auto exact = linear_fit(std::vector<double>{0, 1, 2, 3}, std::vector<double>{1, 3, 5, 7});
        EXPECT_DOUBLE_EQ(exact.slope, 2);
        EXPECT_DOUBLE_EQ(exact.intercept, 1);
        EXPECT_DOUBLE_EQ(exact.r_squared, 1);
        EXPECT_EQ(exact.p_value, 0);
        EXPECT_EQ(error_of([] { (void)linear_fit(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}); }),
                  errc::constant_input);
        EXPECT_EQ(error_of([] { (void)linear_fit(std::vector<double>{1, 2}, std::vector<double>{1, 2}); }),
                  errc::insufficient_data);
        auto flat = linear_fit(std::vector<double>{1, 2, 3}, std::vector<double>{5, 5, 5});
        EXPECT_EQ(flat.slope, 0);
        EXPECT_EQ(flat.p_value, 1);
    }

    TEST(SpecialFunctions, MatchOracle) {
        for (const auto& p : oracle::student_t) expect_close(student_t_two_sided_p(p.t, p.df), p.p);
        for (const auto& p : oracle::incomplete_beta) expect_close(incomplete_beta(p.a, p.b, p.x), p.value);
        for (const auto& p : oracle::kolmogorov_q) expect_close(kolmogorov_q(p.lambda), p.q);
        EXPECT_EQ(kolmogorov_q(0.0), 1.0);
    }

    TEST(KolmogorovSmirnov, MatchesOracle) {
        auto small = ks_two_sample(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 2, 3, 5});
        EXPECT_DOUBLE_EQ(small.d, 0.25);
        auto ab = ks_two_sample(oracle::ks_a, oracle::ks_b);
        expect_close(ab.d, oracle::ks_ab_d);
        expect_close(ab.p_value, oracle::ks_ab_p);
        auto big = ks_two_sample(oracle::ks_big_a, oracle::ks_big_b);
        expect_close(big.d, oracle::ks_big_d);
        expect_close(big.p_value, oracle::ks_big_p);
    }

    double brute_force_d(const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<double> points = a;
        points.insert(points.end(), b.begin(), b.end());
        double d = 0;
        for (double t : points) {
            double fa = 0, fb = 0;
            for (double v : a) fa += v <= t ? 1 : 0;
            for (double v : b) fb += v <= t ? 1 : 0;
            d = std::max(d, std::fabs(fa / static_cast<double>(a.size()) - fb / static_cast<double>(b.size())));
        }
        return d;
    }

    TEST(KolmogorovSmirnov, MergedSweepEqualsBruteForceEcdf) {
        std::mt19937_64 rng{31};
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<double> a(1 + rng() % 60), b(1 + rng() % 60);
            const bool coarse = trial % 2 == 0;  // half the trials are tie-heavy
            for (auto& v : a) v = coarse ? static_cast<double>(rng() % 8) : std::ldexp(static_cast<double>(rng() >> 11), -53);
            for (auto& v : b) v = coarse ? static_cast<double>(rng() % 8) : std::ldexp(static_cast<double>(rng() >> 11), -53) + 0.05;
            EXPECT_DOUBLE_EQ(ks_two_sample(a, b).d, brute_force_d(a, b)) << trial;
        }
    }

    TEST(KolmogorovSmirnov, IdenticalSamples) {
        auto r = ks_two_sample(oracle::x, oracle::x);
        EXPECT_EQ(r.d, 0);
        EXPECT_EQ(r.p_value, 1);
    }

    TEST(Histogram, BinsAndOverflow) {
        auto h = histogram(std::vector<double>{0, 0.5, 1, 9.99, 10, 11, -1}, 10, 0, 10);
        ASSERT_EQ(h.edges.size(), 11u);
        ASSERT_EQ(h.counts.size(), 10u);
        EXPECT_EQ(h.counts[0], 2u);
        EXPECT_EQ(h.counts[1], 1u);
        EXPECT_EQ(h.counts[9], 2u);  // last bin is closed on the right
        EXPECT_EQ(h.overflow, 2u);
        EXPECT_EQ(error_of([] { (void)histogram(std::vector<double>{1}, 0, 0, 1); }), errc::insufficient_data);
    }

}  // namespace
}  // namespace lcaas::stats
