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

#include <nlohmann/json.hpp>

#include "hocsp/error.hpp"
#include "hocsp/sim.hpp"
#include "test_support.hpp"

namespace hocsp {
namespace {

using namespace hocsp::sim;

TEST(Measure, CrossoverStructure) {
    std::vector<std::size_t> counts;
    for (std::size_t n = 0; n <= 40; ++n) counts.push_back(n);
    auto report = measure_bytes(counts, MeasureOptions{.key = testing::ca_key()});
    std::cout << render_table(report);
    ASSERT_EQ(report.rows.size(), 41u);
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const auto& row = report.rows[i];
        EXPECT_EQ(row.ocsp_bytes, report.rows[0].ocsp_bytes);
        EXPECT_GT(row.pem_bytes, row.der_bytes);
        if (i > 0) EXPECT_GT(row.der_bytes, report.rows[i - 1].der_bytes);
    }
    EXPECT_LT(report.rows[0].der_bytes, report.rows[0].ocsp_bytes);
    EXPECT_LT(report.rows[0].pem_bytes, report.rows[0].ocsp_bytes);
    ASSERT_TRUE(report.crossover_der && report.crossover_pem);
    EXPECT_LT(*report.crossover_pem, *report.crossover_der);
    auto j = nlohmann::json::parse(to_json(report));
    EXPECT_EQ(j["rows"].size(), 41u);
    EXPECT_EQ(j["crossover_der"].get<std::size_t>(), *report.crossover_der);
}

TEST(Measure, UnsortedInputIsNormalized) {
    auto report = measure_bytes({5, 0, 5, 2}, MeasureOptions{.key = testing::ca_key()});
    ASSERT_EQ(report.rows.size(), 3u);
    EXPECT_EQ(report.rows[0].record_count, 0u);
    EXPECT_EQ(report.rows[2].record_count, 5u);
}

SimConfig small_config() {
    SimConfig c;
    c.n_meters = 10;
    c.duration_s = 12;
    c.request_rate_per_meter_hz = 1;
    c.issued_certificates = 200;
    c.ca_key = testing::ca_key();
    return c;
}

TEST(Simulation, OutageFallsBackAndStaysCorrect) {
    auto c = small_config();
    c.outage_windows = {{4, 8}};
    auto r = run_simulation(c);
    std::cout << render_table(r);
    EXPECT_GT(r.total_checks, 100u);
    EXPECT_TRUE(r.all_correct());
    EXPECT_GT(r.outage_checks, 0u);
    EXPECT_EQ(r.outage_source_violations, 0u);
    EXPECT_GT(r.source_counts.ocsp, 0u);
    EXPECT_GT(r.source_counts.crl_fetch, 0u);
    auto j = nlohmann::json::parse(to_json(r));
    EXPECT_EQ(j["total_checks"].get<std::uint64_t>(), r.total_checks);
}

TEST(Simulation, ForceOcspWithoutOutagesUsesOcspOnly) {
    auto c = small_config();
    c.policy.mode = client::Mode::ForceOcsp;
    auto r = run_simulation(c);
    EXPECT_TRUE(r.all_correct());
    EXPECT_EQ(r.source_counts.ocsp, r.total_checks);
}

TEST(Simulation, DeterministicCounts) {
    auto c = small_config();
    c.outage_windows = {{3, 6}};
    auto a = run_simulation(c);
    auto b = run_simulation(c);
    EXPECT_TRUE(a.same_counts(b));
    c.rng_seed = 2;
    auto other = run_simulation(c);
    EXPECT_FALSE(a.same_counts(other) && a.bytes_ocsp == other.bytes_ocsp && a.total_checks == other.total_checks &&
                 a.source_counts.crl_fetch == other.source_counts.crl_fetch);
}

TEST(Simulation, RejectsBadConfig) {
    auto c = small_config();
    c.outage_windows = {{10, 20}};
    EXPECT_THROW(run_simulation(c), Error);
    c = small_config();
    c.request_rate_per_meter_hz = 0;
    EXPECT_THROW(run_simulation(c), Error);
}

TEST(Bench, DegenerateSingleRequest) {
    Testbed tb(TestbedOptions{.key = testing::ca_key()});
    auto revoked = populate_ledger(tb, 100, 3);
    tb.start();
    auto r = run_bench(BenchConfig{1, 3, tb.ocsp_url(), bench_requests(tb, revoked, 10, 1)});
    EXPECT_EQ(r.n_requests, 1u);
    EXPECT_EQ(r.errors, 0u);
    EXPECT_DOUBLE_EQ(r.throughput_rps, 1.0 / r.total_time_s);
    EXPECT_DOUBLE_EQ(r.avg_request_s, r.total_time_s);
    EXPECT_EQ(tb.ocsp_server().requests_served(), 1u);
}

TEST(Bench, CountsExactlyAndTargetDown) {
    Testbed tb(TestbedOptions{.key = testing::ca_key()});
    auto revoked = populate_ledger(tb, 1000, 3);
    tb.start();
    EXPECT_EQ(tb.store().current()->size(), 1000u);
    auto r = run_bench(BenchConfig{200, 2, tb.ocsp_url(), bench_requests(tb, revoked, 50, 1)});
    EXPECT_EQ(r.errors, 0u);
    EXPECT_EQ(tb.ocsp_server().requests_served(), 200u);
    EXPECT_NEAR(r.avg_request_s, r.total_time_s / 200, 1e-12);
    auto url = tb.ocsp_url();
    tb.ocsp_down();
    try {
        run_bench(BenchConfig{10, 1, url, bench_requests(tb, revoked, 1, 1)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TargetDown);
    }
}

} // namespace
} // namespace hocsp
