/*
 *     Copyright 2026 The hybrid-ocsp Authors
 *
 *   Licensed under the Apache License, Version 2.0 (the "License");
 *   you may not use this file except in compliance with the License.
 *   You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 *   Unless required by applicable law or agreed to in writing, software
 *   distributed under the License is distributed on an "AS IS" BASIS,
 *   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *   See the License for the specific language governing permissions and
 *   limitations under the License.
 */
#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "hocsp/ca.hpp"
#include "hocsp/ocsp.hpp"
#include "hocsp/store.hpp"
#include "test_support.hpp"

namespace hocsp {
namespace {

using testing::TempDir;

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class CliFlow : public ::testing::Test {
protected:
    void SetUp() override {
        ca_dir = (dir.path() / "ca").string();
        // 1024-bit keys keep key generation out of the test's runtime.
        ASSERT_EQ(run({"--ca-dir", ca_dir, "ca-init", "--key-bits", "1024"}).code, 0);
    }
    TempDir dir;
    std::string ca_dir;
};

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
    EXPECT_EQ(run({}).code, cli::kExitUsage);
    auto bogus = run({"revoke", "--serial", "12", "--bogus"});
    EXPECT_EQ(bogus.code, cli::kExitUsage);
    EXPECT_NE(bogus.err.find("Usage"), std::string::npos);
    EXPECT_EQ(run({"revoke"}).code, cli::kExitUsage); // --serial is required
    EXPECT_EQ(run({"check", "--serial", "01", "--mode", "sometimes"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
}

TEST_F(CliFlow, ReferenceCrlPipeline) {
    for (auto serial : {"221A0A99711F9968", "308C707EA89F47A5", "5238F3475665F7C4"}) {
        auto r = run({"--ca-dir", ca_dir, "revoke", "--serial", serial, "--reason", "key-compromise", "--at",
                      "2023-05-04T19:57:27Z"});
        EXPECT_EQ(r.code, 0) << r.err;
    }
    auto ledger = ca::RevocationLedger::open(std::filesystem::path(ca_dir) / "ledger.txt");
    EXPECT_EQ(ledger.size(), 3u);

    auto dup = run({"--ca-dir", ca_dir, "revoke", "--serial", "221A0A99711F9968"});
    EXPECT_EQ(dup.code, cli::kExitFailure);
    EXPECT_NE(dup.err.find("AlreadyRevoked"), std::string::npos);

    auto pem_path = (dir.path() / "crl.pem").string();
    ASSERT_EQ(run({"--ca-dir", ca_dir, "gen-crl", "--pem", "--omit-next-update", "--out", pem_path}).code, 0);
    auto pem = slurp(pem_path);
    EXPECT_TRUE(pem.starts_with("-----BEGIN X509 CRL-----"));
    auto crl = crl_from_pem(pem);
    EXPECT_EQ(crl.issuer.to_string(), "C=aa, ST=aa, L=aa, O=aa, OU=aa, CN=rootca");
    EXPECT_FALSE(crl.next_update);
    EXPECT_EQ(crl.entries, testing::reference_entries());

    auto text = run({"--ca-dir", ca_dir, "gen-crl", "--text", "--omit-next-update"});
    EXPECT_NE(text.out.find("Next Update: NONE"), std::string::npos);
    EXPECT_NE(text.out.find("Key Compromise"), std::string::npos);
}

TEST_F(CliFlow, DecimalSerialsAndBadValues) {
    EXPECT_EQ(run({"--ca-dir", ca_dir, "revoke", "--serial", "0d255", "--reason", "superseded"}).code, 0);
    auto ledger = ca::RevocationLedger::open(std::filesystem::path(ca_dir) / "ledger.txt");
    EXPECT_TRUE(ledger.contains(SerialNumber::from_u64(255)));
    EXPECT_EQ(run({"--ca-dir", ca_dir, "revoke", "--serial", "xyz"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"--ca-dir", ca_dir, "revoke", "--serial", "01", "--reason", "bored"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"--ca-dir", (dir.path() / "missing").string(), "revoke", "--serial", "01"}).code,
              cli::kExitFailure);
}

TEST_F(CliFlow, ConfigFileAndFlagPrecedence) {
    auto cfg = dir.path() / "hocsp.toml";
    std::ofstream(cfg) << "ca-dir = \"" << ca_dir << "\"\n[revoke]\nreason = \"ca-compromise\"\n";
    ASSERT_EQ(run({"--config", cfg.string(), "revoke", "--serial", "0A"}).code, 0);
    ASSERT_EQ(run({"--config", cfg.string(), "revoke", "--serial", "0B", "--reason", "superseded"}).code, 0);
    auto records = ca::RevocationLedger::open(std::filesystem::path(ca_dir) / "ledger.txt").records();
    ASSERT_EQ(records.size(), 2u);
    EXPECT_EQ(records[0].reason, CrlReason::CaCompromise);
    EXPECT_EQ(records[1].reason, CrlReason::Superseded);
}

TEST_F(CliFlow, BindAddressPrecedence) {
    // Flag beats environment beats config file; distinct loopback hosts show which won.
    auto cfg = dir.path() / "serve.toml";
    std::ofstream(cfg) << "[serve]\nocsp-bind = \"127.0.0.2:0\"\ncrl-bind = \"127.0.0.1:0\"\n";
    auto serve = [&](std::vector<std::string> extra) {
        std::vector<std::string> args{"--ca-dir", ca_dir, "--config", cfg.string(), "serve", "--duration", "0.1"};
        args.insert(args.end(), extra.begin(), extra.end());
        auto r = run(args);
        EXPECT_EQ(r.code, 0) << r.err;
        return r.out;
    };
    EXPECT_NE(serve({}).find("OCSP responder on http://127.0.0.2:"), std::string::npos);
    ::setenv("HOCSP_OCSP_BIND", "127.0.0.3:0", 1);
    EXPECT_NE(serve({}).find("OCSP responder on http://127.0.0.3:"), std::string::npos);
    EXPECT_NE(serve({"--ocsp-bind", "127.0.0.4:0"}).find("OCSP responder on http://127.0.0.4:"), std::string::npos);
    ::unsetenv("HOCSP_OCSP_BIND");
}

TEST_F(CliFlow, CheckExitCodes) {
    ASSERT_EQ(run({"--ca-dir", ca_dir, "revoke", "--serial", "221A0A99711F9968", "--reason", "key-compromise"}).code, 0);
    auto authority = ca::CertificateAuthority::open(ca_dir);
    ca::CrlDistributionServer crl_server(authority, {});
    crl_server.start();
    store::RevocationStore st(authority.public_key());
    ASSERT_TRUE(st.refresh(store::http_crl_fetcher(crl_server.der_url())).ok);
    auto key = PrivateKey::from_pem(slurp(std::filesystem::path(ca_dir) / "ca-key.pem"));
    ocsp::Responder responder(st, {authority.issuer(), std::make_shared<RsaSha256Signer>(key), {}});
    ocsp::OcspServer ocsp_server(responder, {});
    ocsp_server.start();

    auto base = std::vector<std::string>{"--ca-dir", ca_dir, "check", "--ocsp-url", ocsp_server.url(), "--crl-url",
                                         crl_server.der_url()};
    auto with = [&](std::vector<std::string> extra) {
        auto args = base;
        args.insert(args.end(), extra.begin(), extra.end());
        return run(args);
    };
    auto revoked = with({"--serial", "221A0A99711F9968"});
    EXPECT_EQ(revoked.code, 1);
    auto line = nlohmann::json::parse(revoked.out);
    EXPECT_EQ(line["status"], "revoked");
    EXPECT_EQ(line["source"], "Ocsp");
    EXPECT_EQ(line["reason"], "key-compromise");
    EXPECT_EQ(with({"--serial", "01"}).code, 0);

    ocsp_server.stop();
    auto fallback = with({"--serial", "01"});
    EXPECT_EQ(fallback.code, 0);
    EXPECT_EQ(nlohmann::json::parse(fallback.out)["source"], "CrlFetch");

    crl_server.stop();
    EXPECT_EQ(with({"--serial", "01", "--timeout-ms", "300"}).code, cli::kExitAllPathsFailed);
    EXPECT_EQ(run({"--ca-dir", ca_dir, "check", "--serial", "01"}).code, cli::kExitUsage); // no endpoints
}

TEST(Cli, MeasureAndSimulateSmoke) {
    TempDir dir;
    auto json = (dir.path() / "m.json").string();
    auto m = run({"measure", "--max", "2", "--key-bits", "1024", "--out", json});
    EXPECT_EQ(m.code, 0) << m.err;
    EXPECT_NE(m.out.find("crossover"), std::string::npos);
    EXPECT_EQ(nlohmann::json::parse(slurp(json))["rows"].size(), 3u);

    auto s = run({"simulate", "--meters", "3", "--duration", "4", "--rate", "1", "--outage", "1:2", "--issued", "50"});
    EXPECT_EQ(s.code, 0) << s.err;
    EXPECT_EQ(run({"simulate", "--outage", "oops"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"simulate", "--outage", "50:70"}).code, cli::kExitUsage); // window beyond duration
}

TEST(Cli, BenchInProcess) {
    auto b = run({"bench", "--requests", "20", "--concurrency", "2", "--revoked", "100"});
    EXPECT_EQ(b.code, 0) << b.err;
    EXPECT_NE(b.out.find("avg request time"), std::string::npos);
}

} // namespace
} // namespace hocsp
