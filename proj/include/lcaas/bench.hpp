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
/// \brief Open-loop load generation and the tps x n x gas factor-matrix experiment.
///
/// Simulated-clock runs drive an in-process ledger and anchor on a shared virtual clock,
/// so the slowest cells (0.1 tps) finish in seconds and reports are reproducible from the
/// seed. Wall-clock runs go through the HTTP API of a live service.

#pragma once

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "anchor.hpp"
#include "clock.hpp"
#include "ledger.hpp"
#include "server.hpp"
#include "stats.hpp"

namespace lcaas::bench {

inline constexpr double kTpsLevels[] = {0.1, 1, 10, 100};
inline constexpr std::uint64_t kLengthLevels[] = {1, 10, 100};
inline constexpr std::uint64_t kGasLevels[] = {6, 9, 20};
inline constexpr double kOutlierMs = 180'000;

struct ExperimentConfig {
    double tps{1};
    std::uint64_t n{1};
    std::uint64_t gas_gwei{9};
    std::uint64_t file_count{200};
    std::uint64_t file_size_bytes{64};
    std::uint64_t seed{1};
    ClockMode clock{ClockMode::simulated};

    //! e.g. "tps0.1-n10-g6"
    [[nodiscard]] std::string name() const {
        std::ostringstream os;
        os << "tps" << tps << "-n" << n << "-g" << gas_gwei;
        return os.str();
    }
};

//! 1000 files for tps >= 10, otherwise 200.
inline std::uint64_t default_file_count(double tps) { return tps >= 10 ? 1000 : 200; }

//! All 36 cells in deterministic order (tps, then n, then gas). Cell i gets seed base_seed + i.
inline std::vector<ExperimentConfig> matrix_cells(std::uint64_t base_seed, ClockMode clock = ClockMode::simulated) {
    std::vector<ExperimentConfig> cells;
    for (double tps : kTpsLevels) {
        for (auto n : kLengthLevels) {
            for (auto g : kGasLevels) {
                cells.push_back({tps, n, g, default_file_count(tps), 64, base_seed + cells.size(), clock});
            }
        }
    }
    return cells;
}

struct SbTiming {
    std::uint64_t sb_index{0};
    std::string ticket_id;
    Timestamp sealed_at{0};
    Timestamp submitted_at{0};
    Timestamp confirmed_at{0};
    std::int64_t latency_ms{0};          ///< anchor submit -> confirm
    std::int64_t seal_to_confirm_ms{0};  ///< secondary column
};

struct LoadResult {
    std::vector<SbTiming> sbs;
    std::vector<double> ingest_latency_ms;
    std::uint64_t submitted{0};
    std::uint64_t acknowledged{0};
    std::uint64_t rejected{0};
    std::uint64_t sealed_chains{0};  ///< SBs created during the run
    std::uint64_t unconfirmed{0};    ///< tickets still pending when the run stopped waiting
    double send_window_ms{0};        ///< first to last dispatch
    double max_drift_ms{0};          ///< worst lateness of a dispatch against its schedule
};

//! 64-byte printable synthetic log line; its SHA-256 is what gets submitted.
class PayloadSource {
  public:
    PayloadSource(std::uint64_t seed, std::size_t size) : engine_{seed}, size_{size} {}
    std::string next() {
        static constexpr char kAlphabet[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 :=-";
        std::uniform_int_distribution<std::size_t> pick{0, sizeof(kAlphabet) - 2};
        std::string s(size_, ' ');
        for (auto& c : s) c = kAlphabet[pick(engine_)];
        return s;
    }
    Hash next_digest() { return compute_hash(next()); }

  private:
    std::mt19937_64 engine_;
    std::size_t size_;
};

//! Offset of the k-th submission from t0 in milliseconds.
inline Timestamp schedule_offset_ms(std::uint64_t k, double tps) {
    return static_cast<Timestamp>(std::llround(static_cast<double>(k) * 1000.0 / tps));
}

// ---------------------------------------------------------------------------
// Simulated clock driver
// ---------------------------------------------------------------------------

struct SimOptions {
    Timestamp start_ms{1'600'000'000'000};
    Timestamp poll_step_ms{1'000};        ///< clock step while draining confirmations
    Timestamp max_drain_ms{6 * 3'600'000};  ///< give up on confirmations after this much virtual time
};

inline LoadResult run_simulated_load(const ExperimentConfig& config, const fs::path& ledger_root, SimOptions opts = {}) {
    SimulatedClock clock{opts.start_ms};
    ServiceConfig sc;
    sc.capacity_n = config.n;
    sc.gas_price_gwei = config.gas_gwei;
    sc.ledger_root = ledger_root;
    sc.rng_seed = config.seed;
    sc.fsync = false;
    auto ledger = open_ledger(sc, clock, std::make_unique<SimulatedAnchor>(LatencyModel::default_calibration(config.seed)));

    LoadResult result;
    PayloadSource payloads{config.seed ^ 0x9e3779b97f4a7c15ULL, config.file_size_bytes};
    std::vector<std::pair<std::string, std::uint64_t>> tickets;
    const Timestamp t0 = opts.start_ms;
    for (std::uint64_t k = 0; k < config.file_count; ++k) {
        clock.advance_to(t0 + schedule_offset_ms(k, config.tps));
        ledger->poll_anchors();
        const auto digest = payloads.next_digest();
        const auto started = std::chrono::steady_clock::now();
        ++result.submitted;
        try {
            auto response = ledger->submit_digest(digest);
            ++result.acknowledged;
            if (response.anchor_ticket) tickets.emplace_back(*response.anchor_ticket, *response.sb_index);
            if (response.sealed) ++result.sealed_chains;
        } catch (const Error&) {
            ++result.rejected;
        }
        result.ingest_latency_ms.push_back(
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count());
    }
    result.send_window_ms = static_cast<double>(schedule_offset_ms(config.file_count - 1, config.tps));
    result.max_drift_ms = 0;  // dispatch happens exactly at the scheduled virtual instant

    const Timestamp drain_until = clock.now_ms() + opts.max_drain_ms;
    while (ledger->pending_anchor_count() > 0 && clock.now_ms() < drain_until) {
        clock.advance_by(opts.poll_step_ms);
        ledger->poll_anchors();
    }
    for (const auto& [ticket, sb] : tickets) {
        auto r = ledger->receipt(ticket);
        if (!r) {
            ++result.unconfirmed;
            continue;
        }
        result.sbs.push_back({sb, ticket, r->sealed_at, r->submitted_at, r->confirmed_at, r->latency_ms,
                              r->confirmed_at - r->sealed_at});
    }
    return result;
}

// ---------------------------------------------------------------------------
// Wall clock / HTTP driver
// ---------------------------------------------------------------------------

struct HttpOptions {
    std::string host{"127.0.0.1"};
    int port{8080};
    std::size_t workers{16};
    std::chrono::milliseconds receipt_timeout{std::chrono::minutes{10}};
    std::chrono::milliseconds receipt_poll{std::chrono::milliseconds{250}};
};

//! GET with a few retries on transport errors (a pooled connection may be closed under us).
inline Json http_get_json(httplib::Client& client, const std::string& path, int& status) {
    constexpr int kAttempts = 3;
    auto res = client.Get(path);
    for (int attempt = 1; !res && attempt < kAttempts; ++attempt) {
        std::this_thread::sleep_for(std::chrono::milliseconds{50 * attempt});
        res = client.Get(path);
    }
    if (!res) throw Error(errc::service_unreachable, path + ": " + httplib::to_string(res.error()));
    status = res->status;
    try {
        return Json::parse(res->body);
    } catch (const Json::exception&) {
        return Json{};
    }
}

//! Open-loop: the k-th request is dispatched at t0 + k/tps no matter how earlier ones fare.
//! Ingest latency is measured from the scheduled instant, so queueing delay is included.
inline LoadResult run_http_load(const ExperimentConfig& config, const HttpOptions& opts) {
    using clock = std::chrono::steady_clock;
    {
        httplib::Client probe{opts.host, opts.port};
        int status = 0;
        auto st = http_get_json(probe, "/api/v1/status", status);
        if (status != 200) throw Error(errc::service_unreachable, "status endpoint returned " + std::to_string(status));
        if (st.value("capacity_n", std::uint64_t{0}) != config.n || st.value("gas_price_gwei", std::uint64_t{0}) != config.gas_gwei) {
            throw Error(errc::invalid_config, "service is not configured with n=" + std::to_string(config.n) +
                                                  " gas=" + std::to_string(config.gas_gwei));
        }
    }

    struct Job {
        std::uint64_t k;
        clock::time_point scheduled;
        Hash digest;
    };
    std::mutex mutex;
    std::condition_variable cv;
    std::deque<Job> queue;
    bool done_dispatching = false;

    LoadResult result;
    std::mutex result_mutex;
    std::vector<std::pair<std::string, std::uint64_t>> tickets;

    auto worker = [&] {
        httplib::Client client{opts.host, opts.port};
        client.set_keep_alive(true);
        client.set_tcp_nodelay(true);
        for (;;) {
            Job job;
            {
                std::unique_lock lock{mutex};
                cv.wait(lock, [&] { return !queue.empty() || done_dispatching; });
                if (queue.empty()) return;
                job = std::move(queue.front());
                queue.pop_front();
            }
            Json body{{"digest", job.digest.hex()}};
            auto res = client.Post("/api/v1/digests", body.dump(), "application/json");
            const double ms = std::chrono::duration<double, std::milli>(clock::now() - job.scheduled).count();
            std::lock_guard lock{result_mutex};
            result.ingest_latency_ms.push_back(ms);
            if (!res || res->status != 200) {
                ++result.rejected;
                continue;
            }
            ++result.acknowledged;
            try {
                auto j = Json::parse(res->body);
                if (j["chain_state"] == "sealed") ++result.sealed_chains;
                if (j["anchor_ticket"].is_string()) {
                    tickets.emplace_back(j["anchor_ticket"].get<std::string>(), j["sb_index"].get<std::uint64_t>());
                }
            } catch (const Json::exception&) {
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < std::max<std::size_t>(1, opts.workers); ++i) pool.emplace_back(worker);

    PayloadSource payloads{config.seed ^ 0x9e3779b97f4a7c15ULL, config.file_size_bytes};
    const auto t0 = clock::now() + std::chrono::milliseconds{20};
    clock::time_point first_dispatch{}, last_dispatch{};
    for (std::uint64_t k = 0; k < config.file_count; ++k) {
        const auto scheduled = t0 + std::chrono::milliseconds{schedule_offset_ms(k, config.tps)};
        auto digest = payloads.next_digest();
        std::this_thread::sleep_until(scheduled);
        const auto now = clock::now();
        result.max_drift_ms = std::max(result.max_drift_ms, std::chrono::duration<double, std::milli>(now - scheduled).count());
        if (k == 0) first_dispatch = now;
        last_dispatch = now;
        {
            std::lock_guard lock{mutex};
            queue.push_back(Job{k, scheduled, digest});
        }
        cv.notify_one();
        ++result.submitted;
    }
    {
        std::lock_guard lock{mutex};
        done_dispatching = true;
    }
    cv.notify_all();
    for (auto& t : pool) t.join();
    result.send_window_ms = std::chrono::duration<double, std::milli>(last_dispatch - first_dispatch).count();

    httplib::Client client{opts.host, opts.port};
    client.set_keep_alive(true);
    client.set_tcp_nodelay(true);
    const auto deadline = clock::now() + opts.receipt_timeout;
    std::map<std::string, std::uint64_t> outstanding{tickets.begin(), tickets.end()};
    while (!outstanding.empty()) {
        for (auto it = outstanding.begin(); it != outstanding.end();) {
            int status = 0;
            auto j = http_get_json(client, "/api/v1/receipts/" + it->first, status);
            if (status == 200 && j.value("status", "") == "confirmed") {
                auto sealed = j["sealed_at"].get<Timestamp>();
                auto confirmed = j["confirmed_at"].get<Timestamp>();
                result.sbs.push_back({it->second, it->first, sealed, j["submitted_at"].get<Timestamp>(), confirmed,
                                      j["latency_ms"].get<std::int64_t>(), confirmed - sealed});
                it = outstanding.erase(it);
            } else {
                ++it;
            }
        }
        if (outstanding.empty() || clock::now() >= deadline) break;
        std::this_thread::sleep_for(opts.receipt_poll);
    }
    result.unconfirmed = outstanding.size();
    std::sort(result.sbs.begin(), result.sbs.end(), [](const auto& a, const auto& b) { return a.sb_index < b.sb_index; });
    return result;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct ExperimentReport {
    ExperimentConfig config;
    LoadResult load;
    std::uint64_t expected_sb_count{0};
    std::optional<stats::Summary> latency;
    std::optional<stats::Summary> ingest;
    std::optional<double> latency_vs_order_pearson;
    std::optional<stats::Histogram> histogram;

    [[nodiscard]] std::vector<double> latencies() const {
        std::vector<double> v;
        v.reserve(load.sbs.size());
        for (const auto& s : load.sbs) v.push_back(static_cast<double>(s.latency_ms));
        return v;
    }
};

//! p99.9 of the sample, the upper edge of density histograms.
inline double density_upper(std::span<const double> xs) { return stats::percentile(xs, 99.9); }

inline ExperimentReport make_report(const ExperimentConfig& config, LoadResult load) {
    ExperimentReport r;
    r.config = config;
    r.load = std::move(load);
    r.expected_sb_count = config.file_count / config.n;
    auto lat = r.latencies();
    if (!lat.empty()) {
        r.latency = stats::summarize(lat);
        const double hi = density_upper(lat);
        r.histogram = stats::histogram(lat, 50, 0.0, hi > 0 ? hi : 1.0);
        if (lat.size() >= 2) {
            std::vector<double> order(lat.size());
            std::iota(order.begin(), order.end(), 0.0);
            try {
                r.latency_vs_order_pearson = stats::pearson(order, lat);
            } catch (const Error&) {
            }
        }
    }
    if (!r.load.ingest_latency_ms.empty()) r.ingest = stats::summarize(r.load.ingest_latency_ms);
    return r;
}

inline Json to_json(const ExperimentConfig& c) {
    return Json{{"tps", c.tps},           {"n", c.n},
                {"gas_gwei", c.gas_gwei}, {"file_count", c.file_count},
                {"file_size_bytes", c.file_size_bytes}, {"seed", c.seed},
                {"clock", std::string{to_string(c.clock)}}};
}

inline Json to_json(const stats::Summary& s) {
    return Json{{"count", s.count}, {"mean", s.mean}, {"median", s.median}, {"p95", s.p95}, {"min", s.min}, {"max", s.max}};
}

inline Json to_json(const stats::Histogram& h) {
    return Json{{"edges", h.edges}, {"counts", h.counts}, {"overflow", h.overflow}};
}

inline Json to_json(const stats::LinearFit& f) {
    return Json{{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}, {"p_value", f.p_value}};
}

inline Json optional_json(const auto& v) { return v ? to_json(*v) : Json(nullptr); }

inline Json to_json(const ExperimentReport& r) {
    Json j;
    j["config"] = to_json(r.config);
    j["sb_count"] = r.load.sbs.size();
    j["expected_sb_count"] = r.expected_sb_count;
    j["sealed_chains"] = r.load.sealed_chains;
    j["unconfirmed"] = r.load.unconfirmed;
    j["submitted"] = r.load.submitted;
    j["acknowledged"] = r.load.acknowledged;
    j["rejected"] = r.load.rejected;
    j["send_window_ms"] = r.load.send_window_ms;
    j["max_drift_ms"] = r.load.max_drift_ms;
    j["latency_ms"] = optional_json(r.latency);
    j["ingest_latency_ms"] = optional_json(r.ingest);
    j["latency_vs_order_pearson"] = r.latency_vs_order_pearson ? Json(*r.latency_vs_order_pearson) : Json(nullptr);
    j["histogram"] = optional_json(r.histogram);
    Json per_sb = Json::array();
    Json outliers = Json::array();
    for (const auto& s : r.load.sbs) {
        per_sb.push_back({{"sb_index", s.sb_index},
                          {"ticket_id", s.ticket_id},
                          {"latency_ms", s.latency_ms},
                          {"seal_to_confirm_ms", s.seal_to_confirm_ms}});
        if (static_cast<double>(s.latency_ms) > kOutlierMs) {
            outliers.push_back({{"sb_index", s.sb_index}, {"latency_ms", s.latency_ms}});
        }
    }
    j["outliers"] = std::move(outliers);
    j["per_sb"] = std::move(per_sb);
    return j;
}

// ---------------------------------------------------------------------------
// Cross-experiment analysis
// ---------------------------------------------------------------------------

struct Correlation {
    std::optional<double> pearson;
    std::optional<double> spearman;
    std::optional<stats::LinearFit> fit;
};

inline Correlation correlate(std::span<const double> x, std::span<const double> y) {
    Correlation c;
    try {
        c.pearson = stats::pearson(x, y);
        c.spearman = stats::spearman(x, y);
    } catch (const Error&) {
    }
    try {
        c.fit = stats::linear_fit(x, y);
    } catch (const Error&) {
    }
    return c;
}

struct FactorAnalysis {
    std::string factor;
    Correlation raw;     ///< pooled per-SB latencies
    Correlation mean;    ///< one point per experiment
    Correlation median;
    Correlation p95;
};

struct KsComparison {
    std::uint64_t gas_a{0};
    std::uint64_t gas_b{0};
    std::size_t n_a{0};
    std::size_t n_b{0};
    stats::KsResult ks;
};

struct TierDensity {
    std::uint64_t gas_gwei{0};
    stats::Histogram histogram;
};

struct TailCounts {
    std::size_t total_sbs{0};
    std::size_t in_3_to_5_min{0};
    std::size_t over_5_min{0};
    std::size_t over_20_min{0};
};

inline TailCounts count_tail(std::span<const double> latencies_ms) {
    TailCounts t;
    t.total_sbs = latencies_ms.size();
    for (double ms : latencies_ms) {
        if (ms >= 180'000 && ms <= 300'000) ++t.in_3_to_5_min;
        if (ms > 300'000) ++t.over_5_min;
        if (ms > 1'200'000) ++t.over_20_min;
    }
    return t;
}

struct AnalysisSummary {
    std::size_t experiments{0};
    std::vector<FactorAnalysis> factors;
    std::vector<KsComparison> ks;
    std::vector<TierDensity> densities;
    TailCounts tail;
    std::map<std::uint64_t, std::vector<double>> pooled_by_gas;
};

inline AnalysisSummary analyze(std::span<const ExperimentReport> reports, std::size_t density_bins = 50) {
    std::size_t usable = 0;
    for (const auto& r : reports) usable += r.latency ? 1 : 0;
    if (usable < 2) throw Error(errc::insufficient_data, "need at least 2 reports with confirmed SBs");

    AnalysisSummary a;
    a.experiments = usable;
    struct Column {
        const char* name;
        double (*get)(const ExperimentConfig&);
    };
    const Column columns[] = {
        {"tps", [](const ExperimentConfig& c) { return c.tps; }},
        {"n", [](const ExperimentConfig& c) { return static_cast<double>(c.n); }},
        {"gas_gwei", [](const ExperimentConfig& c) { return static_cast<double>(c.gas_gwei); }},
    };
    std::vector<double> raw_latency;
    std::vector<const ExperimentReport*> with_data;
    for (const auto& r : reports) {
        if (!r.latency) continue;
        with_data.push_back(&r);
        for (double v : r.latencies()) {
            raw_latency.push_back(v);
            a.pooled_by_gas[r.config.gas_gwei].push_back(v);
        }
    }
    for (const auto& col : columns) {
        FactorAnalysis f;
        f.factor = col.name;
        std::vector<double> raw_x;
        std::vector<double> exp_x, means, medians, p95s;
        for (const auto* r : with_data) {
            const double x = col.get(r->config);
            raw_x.insert(raw_x.end(), r->load.sbs.size(), x);
            exp_x.push_back(x);
            means.push_back(r->latency->mean);
            medians.push_back(r->latency->median);
            p95s.push_back(r->latency->p95);
        }
        f.raw = correlate(raw_x, raw_latency);
        f.mean = correlate(exp_x, means);
        f.median = correlate(exp_x, medians);
        f.p95 = correlate(exp_x, p95s);
        a.factors.push_back(std::move(f));
    }
    for (auto ia = a.pooled_by_gas.begin(); ia != a.pooled_by_gas.end(); ++ia) {
        for (auto ib = std::next(ia); ib != a.pooled_by_gas.end(); ++ib) {
            a.ks.push_back({ia->first, ib->first, ia->second.size(), ib->second.size(),
                            stats::ks_two_sample(ia->second, ib->second)});
        }
    }
    for (const auto& [gas, sample] : a.pooled_by_gas) {
        const double hi = density_upper(sample);
        a.densities.push_back({gas, stats::histogram(sample, density_bins, 0.0, hi > 0 ? hi : 1.0)});
    }
    a.tail = count_tail(raw_latency);
    return a;
}

inline Json to_json(const Correlation& c) {
    return Json{{"pearson", c.pearson ? Json(*c.pearson) : Json(nullptr)},
                {"spearman", c.spearman ? Json(*c.spearman) : Json(nullptr)},
                {"linear_fit", optional_json(c.fit)}};
}

inline Json to_json(const AnalysisSummary& a) {
    Json j;
    j["experiments"] = a.experiments;
    Json factors = Json::object();
    for (const auto& f : a.factors) {
        factors[f.factor] = {{"raw", to_json(f.raw)}, {"mean", to_json(f.mean)}, {"median", to_json(f.median)}, {"p95", to_json(f.p95)}};
    }
    j["correlations"] = std::move(factors);
    Json ks = Json::array();
    for (const auto& k : a.ks) {
        ks.push_back({{"gas_a", k.gas_a}, {"gas_b", k.gas_b}, {"n_a", k.n_a}, {"n_b", k.n_b}, {"d", k.ks.d}, {"p_value", k.ks.p_value}});
    }
    j["ks_by_gas"] = std::move(ks);
    Json tiers = Json::object();
    for (const auto& [gas, sample] : a.pooled_by_gas) {
        std::size_t over_32s = 0;
        for (double v : sample) over_32s += v > 32'000 ? 1 : 0;
        Json t = to_json(stats::summarize(sample));
        t["share_over_32s"] = static_cast<double>(over_32s) / static_cast<double>(sample.size());
        tiers[std::to_string(gas)] = std::move(t);
    }
    j["tiers"] = std::move(tiers);
    j["tail"] = {{"total_sbs", a.tail.total_sbs},
                 {"in_3_to_5_min", a.tail.in_3_to_5_min},
                 {"over_5_min", a.tail.over_5_min},
                 {"over_20_min", a.tail.over_20_min}};
    return j;
}

//! bin_lo,bin_hi,count
inline std::string density_csv(const stats::Histogram& h) {
    std::ostringstream os;
    os << "bin_lo,bin_hi,count\n";
    os << std::setprecision(10);
    for (std::size_t k = 0; k < h.counts.size(); ++k) os << h.edges[k] << ',' << h.edges[k + 1] << ',' << h.counts[k] << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// Orchestration
// ---------------------------------------------------------------------------

struct RunOptions {
    fs::path out_dir{"bench-out"};
    bool keep_ledgers{false};
    std::optional<std::string> endpoint;  ///< host:port of a live service (wall clock only)
    HttpOptions http;
    SimOptions sim;
    std::ostream* progress{nullptr};
};

namespace detail {

    class ScratchDir {
      public:
        ScratchDir(fs::path path, bool keep) : path_{std::move(path)}, keep_{keep} {
            fs::remove_all(path_);
            fs::create_directories(path_.parent_path());
        }
        ~ScratchDir() {
            std::error_code ec;
            if (!keep_) fs::remove_all(path_, ec);
        }
        ScratchDir(const ScratchDir&) = delete;
        ScratchDir& operator=(const ScratchDir&) = delete;
        [[nodiscard]] const fs::path& path() const noexcept { return path_; }

      private:
        fs::path path_;
        bool keep_;
    };

    inline void write_file(const fs::path& path, const std::string& content) {
        std::ofstream out{path, std::ios::trunc};
        out << content;
        if (!out) throw Error(errc::io_failure, "write " + path.string());
    }

}  // namespace detail

inline ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& opts) {
    const auto scratch_root = opts.keep_ledgers ? opts.out_dir / "ledgers"
                                                : fs::temp_directory_path() / ("lcaas-bench-" + std::to_string(::getpid()));
    detail::ScratchDir scratch{scratch_root / config.name(), opts.keep_ledgers};
    if (config.clock == ClockMode::simulated) return make_report(config, run_simulated_load(config, scratch.path(), opts.sim));

    HttpOptions http = opts.http;
    if (opts.endpoint) {
        ServiceConfig parse_only;
        parse_only.listen_address = *opts.endpoint;
        std::tie(http.host, http.port) = parse_only.split_listen();
        return make_report(config, run_http_load(config, http));
    }
    // No endpoint given: bring up a private service instance on an ephemeral port.
    ServiceConfig sc;
    sc.capacity_n = config.n;
    sc.gas_price_gwei = config.gas_gwei;
    sc.ledger_root = scratch.path();
    sc.listen_address = "127.0.0.1:0";
    sc.rng_seed = config.seed;
    WallClock wall;
    Service service{sc, wall, nullptr};
    http.host = "127.0.0.1";
    http.port = service.start();
    auto report = make_report(config, run_http_load(config, http));
    service.stop();
    return report;
}

struct CellFailure {
    std::string cell;
    std::string error;
};

struct MatrixResult {
    std::vector<ExperimentReport> reports;
    std::vector<CellFailure> failures;
    std::optional<AnalysisSummary> analysis;
};

//! Writes report-<cell>.json per cell, then analysis.json and density-g<g>.csv.
inline void write_outputs(const fs::path& out_dir, const MatrixResult& m) {
    fs::create_directories(out_dir);
    for (const auto& r : m.reports) detail::write_file(out_dir / ("report-" + r.config.name() + ".json"), render(to_json(r)));
    if (!m.analysis) return;
    Json j = to_json(*m.analysis);
    Json failures = Json::array();
    for (const auto& f : m.failures) failures.push_back({{"cell", f.cell}, {"error", f.error}});
    j["failed_cells"] = std::move(failures);
    detail::write_file(out_dir / "analysis.json", render(j));
    for (const auto& d : m.analysis->densities) {
        detail::write_file(out_dir / ("density-g" + std::to_string(d.gas_gwei) + ".csv"), density_csv(d.histogram));
    }
}

inline MatrixResult run_cells(const std::vector<ExperimentConfig>& cells, const RunOptions& opts) {
    MatrixResult m;
    for (const auto& cell : cells) {
        const auto started = std::chrono::steady_clock::now();
        try {
            m.reports.push_back(run_experiment(cell, opts));
        } catch (const std::exception& e) {
            m.failures.push_back({cell.name(), e.what()});
        }
        if (opts.progress) {
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            *opts.progress << cell.name() << (m.failures.empty() || m.failures.back().cell != cell.name() ? " ok " : " FAILED ")
                           << std::fixed << std::setprecision(2) << secs << "s\n";
        }
    }
    if (m.reports.size() >= 2) {
        try {
            m.analysis = analyze(m.reports);
        } catch (const Error& e) {
            m.failures.push_back({"analysis", e.what()});
        }
    }
    write_outputs(opts.out_dir, m);
    return m;
}

inline MatrixResult run_matrix(std::uint64_t base_seed, ClockMode clock, const RunOptions& opts) {
    return run_cells(matrix_cells(base_seed, clock), opts);
}

}  // namespace lcaas::bench
