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
/// \brief The `lcaas` and `bench` command lines, as functions so tests can drive them in-process.
///
/// lcaas exit codes: 0 ok, 1 integrity failure, 2 digest not found, 3 usage or environment error.

#pragma once

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "audit.hpp"
#include "bench.hpp"
#include "config.hpp"
#include "ledger.hpp"
#include "server.hpp"

namespace lcaas::cli {

enum exit_code : int { ok = 0, integrity_failure = 1, not_found = 2, environment = 3 };

namespace detail {

    inline std::string describe(const HierarchyIssue& i) {
        std::ostringstream os;
        if (i.level == Level::super) {
            os << "super chain block " << i.block_index;
        } else {
            os << "chain " << i.chain_id << " block " << i.block_index;
        }
        os << ": " << to_string(i.reason);
        return os.str();
    }

    inline int parse(CLI::App& app, int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            const int rc = app.exit(e, out, err);
            return rc == 0 ? -1 : environment;  // -1: help printed, nothing else to do
        }
        return ok;
    }

    inline int cmd_init(const fs::path& root, std::uint64_t n, std::ostream& out) {
        WallClock clock;
        Ledger::init(root, n, clock);
        out << "initialized " << root.string() << " with n=" << n << "\n";
        return ok;
    }

    inline int cmd_ingest(const ServiceConfig& config, const std::vector<fs::path>& files, bool json, std::ostream& out,
                          std::ostream& err) {
        WallClock clock;
        LedgerOptions options;
        options.gas_price_gwei = config.gas_price_gwei;
        options.store.fsync = config.fsync;
        Ledger ledger{config.ledger_root, clock, make_anchor(config), std::move(options)};
        for (const auto& w : ledger.recovery_warnings()) err << "recovered: " << w << "\n";
        for (const auto& file : files) {
            std::ifstream in{file, std::ios::binary};
            if (!in) throw Error(errc::io_failure, "cannot read " + file.string());
            std::ostringstream body;
            body << in.rdbuf();
            auto response = ledger.submit_log(body.str());
            if (json) {
                auto j = to_json(response);
                j["file"] = file.string();
                out << j.dump() << "\n";
            } else {
                out << response.digest.hex() << "  " << file.string() << "  chain " << response.chain_id << " block "
                    << response.block_index << (response.sealed ? " (sealed)" : "") << "\n";
            }
        }
        return ok;
    }

    inline int cmd_verify(const fs::path& root, const std::optional<std::string>& digest, bool json, std::ostream& out,
                          std::ostream& err) {
        if (!ledger_exists(root)) {
            err << "error: no ledger at " << root.string() << "\n";
            return environment;
        }
        if (digest) {
            auto h = Hash::parse(*digest);
            if (!h) {
                err << "error: not a 64-character lowercase hex digest: " << *digest << "\n";
                return environment;
            }
            auto audit = audit_digest(root, *h);
            if (!audit) {
                if (json) out << render(Json{{"digest", *digest}, {"found", false}});
                else out << "NOT FOUND " << *digest << "\n";
                return not_found;
            }
            if (json) {
                out << render(to_json(*audit));
            } else {
                out << (audit->ok ? "OK " : "FAIL ") << audit->digest.hex() << " in chain " << audit->proof.chain_id
                    << " block " << audit->proof.block_index;
                if (audit->proof.sb_index) out << ", super block " << *audit->proof.sb_index;
                else out << ", chain still open";
                out << "\n";
                if (!audit->chain_report.ok) {
                    out << "  chain " << audit->proof.chain_id << " block " << audit->chain_report.failing_index.value_or(0) << ": "
                        << to_string(audit->chain_report.reason) << "\n";
                }
                if (!audit->super_report.ok) {
                    out << "  super chain block " << audit->super_report.failing_index.value_or(0) << ": "
                        << to_string(audit->super_report.reason) << "\n";
                }
                if (!audit->embedded_terminal_matches) out << "  super block does not embed this chain's terminal\n";
            }
            return audit->ok ? ok : integrity_failure;
        }
        auto audit = audit_directory(root);
        if (json) {
            out << render(to_json(audit));
        } else {
            if (audit.report.ok) {
                out << "OK " << audit.report.chain_reports.size() << " chains, "
                    << (audit.report.super_report.length > 0 ? audit.report.super_report.length - 1 : 0)
                    << " super blocks, " << audit.report.hash_ops << " hashes\n";
            } else {
                out << "FAIL " << audit.report.issues.size() + audit.receipt_faults.size() << " issue(s)\n";
                for (const auto& i : audit.report.issues) out << "  " << describe(i) << "\n";
                for (const auto& f : audit.receipt_faults) {
                    out << "  " << f.file.filename().string() << " line " << f.line << ": " << f.reason << "\n";
                }
            }
        }
        return audit.report.ok ? ok : integrity_failure;
    }

    inline int cmd_serve(const ServiceConfig& config, std::ostream& out) {
        // Block the shutdown signals before any thread starts so only sigwait sees them.
        sigset_t signals;
        sigemptyset(&signals);
        sigaddset(&signals, SIGINT);
        sigaddset(&signals, SIGTERM);
        pthread_sigmask(SIG_BLOCK, &signals, nullptr);

        WallClock wall;
        Service service{config, wall, &out};
        const int port = service.start();
        out << Json{{"event", "listening"}, {"port", port}, {"root", config.ledger_root.string()}}.dump() << std::endl;
        int sig = 0;
        sigwait(&signals, &sig);
        service.stop();
        out << Json{{"event", "stopped"}, {"signal", sig}}.dump() << std::endl;
        return ok;
    }

}  // namespace detail

inline int lcaas_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Log integrity ledger: circled blockchains sealed into an anchored super chain"};
    app.require_subcommand(1);

    fs::path root;
    std::uint64_t n = 100;
    std::optional<fs::path> config_file;
    std::vector<fs::path> files;
    std::optional<std::string> digest;
    std::optional<std::string> listen;
    bool json = false;

    auto* init = app.add_subcommand("init", "create an empty ledger");
    init->add_option("--root", root, "ledger directory")->required();
    init->add_option("--n", n, "data blocks per circled chain")->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 32));

    auto* ingest = app.add_subcommand("ingest", "hash files and append their digests");
    ingest->add_option("--root", root, "ledger directory")->required();
    ingest->add_option("--config", config_file, "JSON config file");
    ingest->add_option("files", files, "log files")->required();
    ingest->add_flag("--json", json, "one JSON line per file");

    auto* verify = app.add_subcommand("verify", "audit the ledger on disk");
    verify->add_option("--root", root, "ledger directory")->required();
    verify->add_option("--digest", digest, "check one digest and its super block");
    verify->add_flag("--json", json, "machine-readable report");

    auto* serve = app.add_subcommand("serve", "run the HTTP service until SIGINT/SIGTERM");
    serve->add_option("--config", config_file, "JSON config file");
    serve->add_option("--root", root, "ledger directory (overrides config)");
    serve->add_option("--listen", listen, "host:port (overrides config)");

    if (int rc = detail::parse(app, argc, argv, out, err); rc != ok) return rc < 0 ? ok : rc;

    try {
        if (init->parsed()) return detail::cmd_init(root, n, out);
        if (verify->parsed()) return detail::cmd_verify(root, digest, json, out, err);
        auto config = ServiceConfig::load(config_file);
        if (!root.empty()) config.ledger_root = root;
        if (listen) config.listen_address = *listen;
        config.validate();
        if (ingest->parsed()) {
            if (!ledger_exists(config.ledger_root)) {
                err << "error: no ledger at " << config.ledger_root.string() << " (run lcaas init first)\n";
                return environment;
            }
            return detail::cmd_ingest(config, files, json, out, err);
        }
        if (config.clock_mode != ClockMode::wall) {
            err << "error: serve runs on the wall clock; the simulated clock is only available to bench\n";
            return environment;
        }
        return detail::cmd_serve(config, out);
    } catch (const CorruptionDetected& e) {
        err << "error: " << e.what() << "\n";
        return integrity_failure;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return environment;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return environment;
    }
}

inline int bench_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Open-loop load generator and factor-matrix experiment"};
    app.require_subcommand(1);
    auto* run = app.add_subcommand("run", "run one cell or the full 36-cell matrix");

    bool matrix = false;
    bench::ExperimentConfig cell;
    std::optional<std::uint64_t> count;
    std::string clock = "sim";
    fs::path out_dir = "bench-out";
    std::optional<std::string> endpoint;
    bool keep_ledgers = false;
    double receipt_timeout_s = 600;

    run->add_flag("--matrix", matrix, "all tps x n x gas combinations");
    run->add_option("--tps", cell.tps, "submissions per second")->check(CLI::PositiveNumber);
    run->add_option("--n", cell.n, "data blocks per circled chain")->check(CLI::PositiveNumber);
    run->add_option("--gas", cell.gas_gwei, "gas price tier in gwei")->check(CLI::PositiveNumber);
    run->add_option("--count", count, "number of submissions (default 1000 if tps >= 10, else 200)")
        ->check(CLI::PositiveNumber);
    run->add_option("--seed", cell.seed, "base RNG seed");
    run->add_option("--clock", clock, "sim or wall")->check(CLI::IsMember({"sim", "simulated", "wall"}));
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--endpoint", endpoint, "host:port of a running service (wall clock only)");
    run->add_flag("--keep-ledgers", keep_ledgers, "keep per-cell ledgers under OUT/ledgers");
    run->add_option("--receipt-timeout", receipt_timeout_s, "seconds to wait for anchor receipts (wall clock)");
    run->get_option("--matrix")->excludes("--tps")->excludes("--n")->excludes("--gas")->excludes("--count");

    if (int rc = detail::parse(app, argc, argv, out, err); rc != ok) return rc < 0 ? ok : rc;

    try {
        bench::RunOptions opts;
        opts.out_dir = out_dir;
        opts.keep_ledgers = keep_ledgers;
        opts.endpoint = endpoint;
        opts.http.receipt_timeout = std::chrono::milliseconds{static_cast<std::int64_t>(receipt_timeout_s * 1000)};
        opts.progress = &err;
        const auto mode = ServiceConfig::parse_clock(clock);
        bench::MatrixResult result;
        if (matrix) {
            result = bench::run_matrix(cell.seed, mode, opts);
        } else {
            cell.clock = mode;
            cell.file_count = count.value_or(bench::default_file_count(cell.tps));
            result = bench::run_cells({cell}, opts);
        }
        Json summary;
        summary["out"] = out_dir.string();
        summary["cells"] = result.reports.size();
        Json failures = Json::array();
        for (const auto& f : result.failures) failures.push_back({{"cell", f.cell}, {"error", f.error}});
        summary["failures"] = std::move(failures);
        if (result.reports.size() == 1 && result.reports.front().latency) {
            summary["latency_ms"] = bench::to_json(*result.reports.front().latency);
        }
        out << render(summary);
        return result.failures.empty() ? ok : integrity_failure;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return environment;
    }
}

}  // namespace lcaas::cli
