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
/// \brief HTTP/1.1 + JSON front end over a Ledger.
///
///   POST /api/v1/digests               {"digest": "<64 hex>"}
///   POST /api/v1/logs                  raw body, hashed server-side
///   POST /api/v1/seal                  early rotation of the open chain
///   GET  /api/v1/verify                full on-disk audit
///   GET  /api/v1/verify/digest/{hash}  membership proof + on-disk verification
///   GET  /api/v1/chains/{id}
///   GET  /api/v1/superchain
///   GET  /api/v1/receipts/{ticket_id}
///   GET  /api/v1/status

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <httplib.h>

#include "audit.hpp"
#include "clock.hpp"
#include "config.hpp"
#include "ledger.hpp"

namespace lcaas {

//! Pretty JSON with a trailing newline; shared by HTTP responses and CLI --json output.
inline std::string render(const Json& j) { return j.dump(2) + "\n"; }

inline int http_status(errc code) {
    switch (code) {
        case errc::invalid_digest:
        case errc::invalid_hash:
        case errc::malformed_record: return 400;
        case errc::empty_chain: return 409;
        case errc::ledger_unavailable:
        case errc::io_failure: return 503;
        default: return 500;
    }
}

inline std::unique_ptr<AnchorBackend> make_anchor(const ServiceConfig& config) {
    if (config.anchor_backend == AnchorMode::none) return nullptr;
    return std::make_unique<SimulatedAnchor>(LatencyModel::default_calibration(config.rng_seed));
}

//! Opens (creating on first start) the ledger named by `config`.
inline std::unique_ptr<Ledger> open_ledger(const ServiceConfig& config, const Clock& clock,
                                           std::unique_ptr<AnchorBackend> anchor, WriteHooks hooks = {}) {
    if (!ledger_exists(config.ledger_root)) Ledger::init(config.ledger_root, config.capacity_n, clock);
    LedgerOptions options;
    options.expected_capacity = config.capacity_n;
    options.gas_price_gwei = config.gas_price_gwei;
    options.store.fsync = config.fsync;
    options.store.hooks = std::move(hooks);
    return std::make_unique<Ledger>(config.ledger_root, clock, std::move(anchor), std::move(options));
}

class Service {
  public:
    //! Keep-alive connections each hold a worker, so size well above expected client count.
    static constexpr std::size_t kHttpThreads = 64;

    Service(ServiceConfig config, const Clock& clock, std::ostream* request_log = &std::cout, WriteHooks hooks = {})
        : config_{std::move(config)}, clock_{clock}, request_log_{request_log} {
        config_.validate();
        ledger_ = open_ledger(config_, clock_, make_anchor(config_), std::move(hooks));
        install_routes();
    }

    ~Service() { stop(); }
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    //! Binds and serves on a background thread. Port 0 in listen_address picks a free port.
    int start() {
        auto [host, port] = config_.split_listen();
        port_ = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
        if (port_ < 0) throw Error(errc::io_failure, "cannot bind " + config_.listen_address);
        listener_ = std::thread{[this] { server_.listen_after_bind(); }};
        poller_ = std::thread{[this] { poll_loop(); }};
        server_.wait_until_ready();
        return port_;
    }

    void stop() {
        {
            std::lock_guard lock{stop_mutex_};
            if (stopping_) return;
            stopping_ = true;
        }
        stop_cv_.notify_all();
        server_.stop();
        if (listener_.joinable()) listener_.join();
        if (poller_.joinable()) poller_.join();
    }

    //! Blocks until stop() is called from elsewhere (signal handler thread, test).
    void wait() {
        std::unique_lock lock{stop_mutex_};
        stop_cv_.wait(lock, [this] { return stopping_; });
    }

    [[nodiscard]] int port() const noexcept { return port_; }
    [[nodiscard]] Ledger& ledger() noexcept { return *ledger_; }
    [[nodiscard]] const ServiceConfig& config() const noexcept { return config_; }

  private:
    static void reply(httplib::Response& res, int status, const Json& body) {
        res.status = status;
        res.set_content(render(body), "application/json");
    }
    static void reply_error(httplib::Response& res, int status, std::string_view code, const std::string& detail = {}) {
        Json j;
        j["error"] = std::string{code};
        if (!detail.empty()) j["detail"] = detail;
        reply(res, status, j);
    }

    template <typename Fn>
    static void handle(httplib::Response& res, Fn&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            reply_error(res, http_status(e.code()), to_string(e.code()), e.what());
        }
    }

    void install_routes() {
        server_.new_task_queue = [] { return new httplib::ThreadPool(kHttpThreads); };
        server_.set_tcp_nodelay(true);
        server_.set_payload_max_length(config_.max_log_bytes);
        server_.set_logger([this](const httplib::Request& req, const httplib::Response& res) { log_request(req, res); });
        server_.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string what = "unknown";
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                what = e.what();
            } catch (...) {
            }
            reply_error(res, 500, "internal_error", what);
        });

        server_.Post("/api/v1/digests", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] {
                std::optional<Hash> digest;
                try {
                    auto body = Json::parse(req.body);
                    if (body.is_object() && body.contains("digest") && body["digest"].is_string()) {
                        digest = Hash::parse(body["digest"].get<std::string>());
                    }
                } catch (const Json::exception&) {
                }
                if (!digest) return reply_error(res, 400, "invalid_digest");
                reply(res, 200, to_json(ledger_->submit_digest(*digest)));
            });
        });

        server_.Post("/api/v1/logs", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] {
                if (req.body.empty()) return reply_error(res, 400, "empty_body");
                if (req.body.size() > config_.max_log_bytes) return reply_error(res, 413, "too_large");
                reply(res, 200, to_json(ledger_->submit_log(req.body)));
            });
        });

        server_.Post("/api/v1/seal", [this](const httplib::Request&, httplib::Response& res) {
            handle(res, [&] {
                auto outcome = ledger_->force_seal();
                Json j;
                j["chain_id"] = outcome.chain_id;
                j["chain_length"] = outcome.terminal.index + 1;
                j["terminal"] = to_json(outcome.terminal);
                j["sb_index"] = outcome.sb_index;
                j["anchor_ticket"] = outcome.anchor_ticket ? Json(*outcome.anchor_ticket) : Json(nullptr);
                reply(res, 200, j);
            });
        });

        server_.Get("/api/v1/verify", [this](const httplib::Request&, httplib::Response& res) {
            handle(res, [&] {
                auto audit = ledger_->with_quiescent_files([](const fs::path& root) { return audit_directory(root); });
                reply(res, 200, to_json(audit));
            });
        });

        server_.Get(R"(/api/v1/verify/digest/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] {
                auto digest = Hash::parse(req.matches[1].str());
                if (!digest) return reply_error(res, 400, "invalid_digest");
                auto audit = ledger_->with_quiescent_files([&](const fs::path& root) { return audit_digest(root, *digest); });
                if (!audit) return reply_error(res, 404, "not_found");
                reply(res, 200, to_json(*audit));
            });
        });

        server_.Get(R"(/api/v1/chains/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] {
                std::optional<CircledBlockchain> chain;
                try {
                    chain = ledger_->chain(std::stoull(req.matches[1].str()));
                } catch (const std::out_of_range&) {
                }
                if (!chain) return reply_error(res, 404, "not_found");
                Json j = to_json(*chain);
                j["verification"] = to_json(verify_circled(*chain));
                reply(res, 200, j);
            });
        });

        server_.Get("/api/v1/superchain", [this](const httplib::Request&, httplib::Response& res) {
            handle(res, [&] {
                auto sc = ledger_->super_chain();
                Json j = to_json(sc);
                j["verification"] = to_json(verify_super_chain(sc));
                reply(res, 200, j);
            });
        });

        server_.Get(R"(/api/v1/receipts/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] {
                const auto ticket = req.matches[1].str();
                if (auto r = ledger_->receipt(ticket)) {
                    Json j = to_json(*r);
                    j["status"] = "confirmed";
                    j["pseudo_tx_hash_verifies"] = pseudo_tx_hash(r->payload_hash, r->ticket_id) == r->pseudo_tx_hash;
                    return reply(res, 200, j);
                }
                if (ledger_->is_pending(ticket)) return reply(res, 200, Json{{"ticket_id", ticket}, {"status", "pending"}});
                reply_error(res, 404, "not_found");
            });
        });

        server_.Get("/api/v1/status", [this](const httplib::Request&, httplib::Response& res) {
            Json j = to_json(ledger_->manifest());
            j["gas_price_gwei"] = config_.gas_price_gwei;
            j["pending_anchors"] = ledger_->pending_anchor_count();
            j["available"] = ledger_->available();
            reply(res, 200, j);
        });
    }

    void log_request(const httplib::Request& req, const httplib::Response& res) {
        if (!request_log_) return;
        Json j;
        j["ts"] = WallClock{}.now_ms();
        j["method"] = req.method;
        j["path"] = req.path;
        j["status"] = res.status;
        j["bytes_in"] = req.body.size();
        std::lock_guard lock{log_mutex_};
        *request_log_ << j.dump() << '\n';
    }

    void poll_loop() {
        std::unique_lock lock{stop_mutex_};
        while (!stopping_) {
            lock.unlock();
            try {
                ledger_->poll_anchors();
            } catch (const std::exception& e) {
                if (request_log_) {
                    std::lock_guard log_lock{log_mutex_};
                    *request_log_ << Json{{"event", "anchor_poll_failed"}, {"detail", e.what()}}.dump() << '\n';
                }
            }
            lock.lock();
            stop_cv_.wait_for(lock, std::chrono::milliseconds{config_.anchor_poll_ms}, [this] { return stopping_; });
        }
    }

    ServiceConfig config_;
    const Clock& clock_;
    std::ostream* request_log_;
    std::mutex log_mutex_;
    std::unique_ptr<Ledger> ledger_;
    httplib::Server server_;
    int port_{-1};
    std::thread listener_;
    std::thread poller_;
    std::mutex stop_mutex_;
    std::condition_variable stop_cv_;
    bool stopping_{false};
};

}  // namespace lcaas
