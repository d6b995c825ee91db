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

#include <atomic>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include <lcaas/server.hpp>

#include "support.hpp"

namespace lcaas {
namespace {

    using test::digest_of;

    class ServerTest : public ::testing::Test {
      protected:
        void start(std::uint64_t n = 3, std::size_t max_log_bytes = 10 * 1024 * 1024) {
            ServiceConfig c;
            c.capacity_n = n;
            c.ledger_root = dir_ / "ledger";
            c.listen_address = "127.0.0.1:0";
            c.fsync = false;
            c.anchor_poll_ms = 10;
            c.max_log_bytes = max_log_bytes;
            service_ = std::make_unique<Service>(c, clock_, &log_);
            port_ = service_->start();
            client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
        }
        void TearDown() override {
            if (service_) service_->stop();
        }

        httplib::Result post_digest(const std::string& hex) {
            return client_->Post("/api/v1/digests", Json{{"digest", hex}}.dump(), "application/json");
        }
        static Json body(const httplib::Result& r) { return Json::parse(r->body); }

        test::TempDir dir_;
        SimulatedClock clock_{1'000'000};
        std::ostringstream log_;
        std::unique_ptr<Service> service_;
        int port_{0};
        std::unique_ptr<httplib::Client> client_;
    };

    TEST_F(ServerTest, SubmitDigestAndRotate) {
        start(2);
        auto r = post_digest(digest_of(0).hex());
        ASSERT_TRUE(r);
        EXPECT_EQ(r->status, 200);
        auto j = body(r);
        EXPECT_EQ(j["digest"], digest_of(0).hex());
        EXPECT_EQ(j["chain_id"], 0);
        EXPECT_EQ(j["block_index"], 1);
        EXPECT_EQ(j["chain_state"], "open");
        EXPECT_TRUE(j["sb_index"].is_null());
        auto sealed = body(post_digest(digest_of(1).hex()));
        EXPECT_EQ(sealed["chain_state"], "sealed");
        EXPECT_EQ(sealed["sb_index"], 1);
        EXPECT_TRUE(sealed["anchor_ticket"].is_string());
    }

    TEST_F(ServerTest, RejectsBadDigests) {
        start();
        for (const std::string& bad : {std::string{"abc"}, std::string(64, 'G'), std::string(64, 'A')}) {
            auto r = post_digest(bad);
            ASSERT_TRUE(r);
            EXPECT_EQ(r->status, 400);
            EXPECT_EQ(body(r)["error"], "invalid_digest");
        }
        auto not_json = client_->Post("/api/v1/digests", "{{{", "application/json");
        EXPECT_EQ(not_json->status, 400);
        auto no_field = client_->Post("/api/v1/digests", R"({"hash":"x"})", "application/json");
        EXPECT_EQ(no_field->status, 400);
    }

    TEST_F(ServerTest, LogsEndpoint) {
        start(3, 1024);
        auto r = client_->Post("/api/v1/logs", "2026-01-01 hello", "text/plain");
        ASSERT_TRUE(r);
        EXPECT_EQ(r->status, 200);
        EXPECT_EQ(body(r)["digest"], compute_hash("2026-01-01 hello").hex());
        auto empty = client_->Post("/api/v1/logs", "", "text/plain");
        EXPECT_EQ(empty->status, 400);
        EXPECT_EQ(body(empty)["error"], "empty_body");
        auto big = client_->Post("/api/v1/logs", std::string(2048, 'x'), "text/plain");
        ASSERT_TRUE(big);
        EXPECT_EQ(big->status, 413);
    }

    TEST_F(ServerTest, SealEndpoint) {
        start(10);
        auto empty = client_->Post("/api/v1/seal", "", "application/json");
        EXPECT_EQ(empty->status, 409);
        EXPECT_EQ(body(empty)["error"], "empty_chain");
        post_digest(digest_of(0).hex());
        auto r = client_->Post("/api/v1/seal", "", "application/json");
        EXPECT_EQ(r->status, 200);
        auto j = body(r);
        EXPECT_EQ(j["chain_id"], 0);
        EXPECT_EQ(j["chain_length"], 3);
        EXPECT_EQ(j["sb_index"], 1);
        EXPECT_EQ(j["terminal"]["block_type"], "terminal");
    }

    TEST_F(ServerTest, VerifyDigest) {
        start(2);
        for (std::uint64_t k = 0; k < 3; ++k) post_digest(digest_of(k).hex());
        auto r = client_->Get("/api/v1/verify/digest/" + digest_of(1).hex());
        ASSERT_EQ(r->status, 200);
        auto j = body(r);
        EXPECT_TRUE(j["ok"]);
        EXPECT_EQ(j["proof"]["chain_id"], 0);
        EXPECT_EQ(j["proof"]["block_index"], 2);
        EXPECT_EQ(j["proof"]["sb_index"], 1);
        EXPECT_TRUE(j["embedded_terminal_matches"]);
        EXPECT_EQ(client_->Get("/api/v1/verify/digest/" + digest_of(50).hex())->status, 404);
        EXPECT_EQ(client_->Get("/api/v1/verify/digest/zz")->status, 400);
        auto full = client_->Get("/api/v1/verify");
        ASSERT_EQ(full->status, 200);
        EXPECT_TRUE(body(full)["ok"]);
    }

    TEST_F(ServerTest, ChainsSuperchainAndReceipts) {
        start(1);
        auto sealed = body(post_digest(digest_of(0).hex()));
        const std::string ticket = sealed["anchor_ticket"];
        auto chain = client_->Get("/api/v1/chains/0");
        ASSERT_EQ(chain->status, 200);
        auto cj = body(chain);
        EXPECT_EQ(cj["blocks"].size(), 3u);
        EXPECT_TRUE(cj["verification"]["ok"]);
        EXPECT_EQ(client_->Get("/api/v1/chains/99")->status, 404);
        EXPECT_EQ(client_->Get("/api/v1/chains/99999999999999999999999")->status, 404);
        auto sc = body(client_->Get("/api/v1/superchain"));
        EXPECT_EQ(sc["blocks"].size(), 2u);
        EXPECT_EQ(sc["verification"]["hash_ops"], 2);

        auto pending = client_->Get("/api/v1/receipts/" + ticket);
        ASSERT_EQ(pending->status, 200);
        EXPECT_EQ(body(pending)["status"], "pending");
        clock_.advance_by(3'600'000);
        Json confirmed;
        for (int i = 0; i < 200; ++i) {
            confirmed = body(client_->Get("/api/v1/receipts/" + ticket));
            if (confirmed["status"] == "confirmed") break;
            std::this_thread::sleep_for(std::chrono::milliseconds{10});
        }
        EXPECT_EQ(confirmed["status"], "confirmed");
        EXPECT_TRUE(confirmed["pseudo_tx_hash_verifies"]);
        EXPECT_EQ(confirmed["sb_index"], 1);
        EXPECT_EQ(client_->Get("/api/v1/receipts/tnope")->status, 404);
    }

    TEST_F(ServerTest, StructuredRequestLog) {
        start();
        post_digest(digest_of(0).hex());
        client_->Get("/api/v1/status");
        service_->stop();
        std::istringstream lines{log_.str()};
        int requests = 0;
        for (std::string line; std::getline(lines, line);) {
            auto j = Json::parse(line);
            if (!j.contains("method")) continue;
            ++requests;
            EXPECT_TRUE(j.contains("status"));
            EXPECT_TRUE(j.contains("path"));
            EXPECT_TRUE(j.contains("ts"));
        }
        EXPECT_EQ(requests, 2);
    }

    TEST_F(ServerTest, UnavailableLedgerAnswers503) {
        ServiceConfig c;
        c.capacity_n = 5;
        c.ledger_root = dir_ / "ledger";
        c.listen_address = "127.0.0.1:0";
        c.fsync = false;
        std::atomic<bool> fail{false};
        WriteHooks hooks;
        hooks.write_limit = [&](const fs::path&, std::size_t size) -> std::size_t {
            if (fail) throw Error(errc::io_failure, "disk full");
            return size;
        };
        service_ = std::make_unique<Service>(c, clock_, &log_, std::move(hooks));
        client_ = std::make_unique<httplib::Client>("127.0.0.1", service_->start());
        EXPECT_EQ(post_digest(digest_of(0).hex())->status, 200);
        fail = true;
        EXPECT_EQ(post_digest(digest_of(1).hex())->status, 503);
        fail = false;
        auto after = post_digest(digest_of(2).hex());
        EXPECT_EQ(after->status, 503);
        EXPECT_EQ(body(after)["error"], "ledger_unavailable");
        EXPECT_FALSE(body(client_->Get("/api/v1/status"))["available"]);
    }

    TEST_F(ServerTest, StatusReportsConfiguration) {
        start(4);
        auto j = body(client_->Get("/api/v1/status"));
        EXPECT_EQ(j["capacity_n"], 4);
        EXPECT_EQ(j["gas_price_gwei"], 9);
        EXPECT_TRUE(j["available"]);
    }

}  // namespace
}  // namespace lcaas
