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
/// \brief Descriptive statistics, correlation, simple regression and the two-sample
/// Kolmogorov-Smirnov test.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace lcaas::stats {

namespace detail {

    inline void require_sample(std::span<const double> xs) {
        if (xs.empty()) throw Error(errc::empty_sample);
        for (double x : xs) {
            if (!std::isfinite(x)) throw Error(errc::non_finite_sample);
        }
    }

    inline void require_pair(std::span<const double> x, std::span<const double> y, std::size_t min_len) {
        require_sample(x);
        require_sample(y);
        if (x.size() != y.size()) {
            throw Error(errc::length_mismatch, std::to_string(x.size()) + " vs " + std::to_string(y.size()));
        }
        if (x.size() < min_len) throw Error(errc::insufficient_data, "need at least " + std::to_string(min_len) + " points");
    }

    inline std::vector<double> sorted(std::span<const double> xs) {
        std::vector<double> v{xs.begin(), xs.end()};
        std::sort(v.begin(), v.end());
        return v;
    }

    inline double sorted_percentile(const std::vector<double>& v, double p) {
        const double h = (static_cast<double>(v.size()) - 1.0) * p / 100.0;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
    }

    // Regularized incomplete beta I_x(a, b), continued fraction evaluated with modified Lentz.
    inline double betacf(double a, double b, double x) {
        constexpr int kMaxIter = 300;
        constexpr double kEps = 1e-15;
        constexpr double kTiny = 1e-300;
        const double qab = a + b;
        const double qap = a + 1.0;
        const double qam = a - 1.0;
        double c = 1.0;
        double d = 1.0 - qab * x / qap;
        if (std::fabs(d) < kTiny) d = kTiny;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= kMaxIter; ++m) {
            const double m2 = 2.0 * m;
            double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
            d = 1.0 + aa * d;
            if (std::fabs(d) < kTiny) d = kTiny;
            c = 1.0 + aa / c;
            if (std::fabs(c) < kTiny) c = kTiny;
            d = 1.0 / d;
            h *= d * c;
            aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
            d = 1.0 + aa * d;
            if (std::fabs(d) < kTiny) d = kTiny;
            c = 1.0 + aa / c;
            if (std::fabs(c) < kTiny) c = kTiny;
            d = 1.0 / d;
            const double del = d * c;
            h *= del;
            if (std::fabs(del - 1.0) < kEps) break;
        }
        return h;
    }

}  // namespace detail

inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double front =
        std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::betacf(a, b, x) / a;
    return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

//! Two-sided p-value of Student's t with `df` degrees of freedom.
inline double student_t_two_sided_p(double t, double df) {
    if (std::isinf(t)) return 0.0;
    return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

inline double mean(std::span<const double> xs) {
    detail::require_sample(xs);
    // Kahan summation.
    double sum = 0.0;
    double comp = 0.0;
    for (double x : xs) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum / static_cast<double>(xs.size());
}

//! Linear interpolation between closest ranks: h = (N-1)p/100.
inline double percentile(std::span<const double> xs, double p) {
    detail::require_sample(xs);
    if (!(p >= 0.0 && p <= 100.0)) throw Error(errc::insufficient_data, "percentile outside [0, 100]");
    return detail::sorted_percentile(detail::sorted(xs), p);
}

inline double median(std::span<const double> xs) { return percentile(xs, 50.0); }

struct Summary {
    std::size_t count{0};
    double mean{0};
    double median{0};
    double p95{0};
    double min{0};
    double max{0};
};

inline Summary summarize(std::span<const double> xs) {
    detail::require_sample(xs);
    auto v = detail::sorted(xs);
    return {v.size(), mean(xs), detail::sorted_percentile(v, 50), detail::sorted_percentile(v, 95), v.front(), v.back()};
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
    detail::require_pair(x, y, 2);
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw Error(errc::constant_input);
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

//! 1-based ranks; tied values share the average of the ranks they span.
inline std::vector<double> average_ranks(std::span<const double> xs) {
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(xs.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
    detail::require_pair(x, y, 2);
    auto rx = average_ranks(x);
    auto ry = average_ranks(y);
    return pearson(rx, ry);
}

struct LinearFit {
    double slope{0};
    double intercept{0};
    double r_squared{0};
    double p_value{1};  ///< two-sided, H0: slope = 0, t with n-2 df
};

inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    detail::require_pair(x, y, 3);
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw Error(errc::constant_input, "x is constant");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        sse += r * r;
    }
    // Residuals below rounding noise count as an exact fit.
    if (syy == 0.0) {
        fit.r_squared = 1.0;
        fit.p_value = 1.0;
        return fit;
    }
    if (sse <= 1e-24 * syy) sse = 0.0;
    fit.r_squared = std::clamp(1.0 - sse / syy, 0.0, 1.0);
    const double df = static_cast<double>(x.size()) - 2.0;
    if (sse == 0.0) {
        fit.p_value = 0.0;
        return fit;
    }
    const double se = std::sqrt(sse / df / sxx);
    fit.p_value = student_t_two_sided_p(fit.slope / se, df);
    return fit;
}

//! Kolmogorov survival function Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_q(double lambda) {
    if (lambda < 0.2) return 1.0;  // series has not converged; Q is 1 to double precision here
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::fabs(term) < 1e-17) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
    double d{0};
    double p_value{1};
};

//! D = sup |ECDF_a - ECDF_b| over all sample points, p from the asymptotic Kolmogorov
//! distribution with the small-sample correction lambda = (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) D.
inline KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    detail::require_sample(a);
    detail::require_sample(b);
    auto sa = detail::sorted(a);
    auto sb = detail::sorted(b);
    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < sa.size() && j < sb.size()) {
        const double t = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] == t) ++i;
        while (j < sb.size() && sb[j] == t) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = na * nb / (na + nb);
    const double sq = std::sqrt(ne);
    return {d, kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)};
}

struct Histogram {
    std::vector<double> edges;  ///< bins + 1 edges
    std::vector<std::size_t> counts;
    std::size_t overflow{0};  ///< values outside [edges.front(), edges.back()]
};

//! Equal-width bins over [lo, hi]; the last bin is closed on the right.
inline Histogram histogram(std::span<const double> xs, std::size_t bins, double lo, double hi) {
    if (bins == 0 || !(hi > lo)) throw Error(errc::insufficient_data, "histogram needs bins > 0 and hi > lo");
    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t k = 0; k <= bins; ++k) h.edges[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
    h.counts.assign(bins, 0);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (double x : xs) {
        if (x < lo || x > hi) {
            ++h.overflow;
            continue;
        }
        auto k = static_cast<std::size_t>((x - lo) / width);
        h.counts[std::min(k, bins - 1)]++;
    }
    return h;
}

}  // namespace lcaas::stats
