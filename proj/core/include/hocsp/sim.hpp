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
#pragma once

// Experiment harness: an in-process testbed (CA, CRL endpoint, OCSP
// responder), the meter-fleet simulation with outage injection, the
// responder load benchmark and the CRL-vs-OCSP byte measurement.

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hocsp/ca.hpp"
#include "hocsp/client.hpp"
#include "hocsp/ocsp.hpp"
#include "hocsp/store.hpp"

namespace hocsp::sim {

/// "C=aa, ST=aa, L=aa, O=aa, OU=aa, CN=rootca"
DistinguishedName reference_issuer();

struct TestbedOptions {
    DistinguishedName issuer = reference_issuer();
    /// Generated (RSA, key_bits) when absent.
    std::optional<PrivateKey> key;
    int key_bits = 2048;
    /// Ship the CA certificate in every OCSP response.
    bool attach_ca_certificate = true;
    bool include_next_update = true;
    std::chrono::seconds refresh_interval = ca::kDefaultRefreshInterval;
    std::string host = "127.0.0.1";
};

/// CA + CRL endpoint + store + OCSP responder wired together on loopback.
class Testbed {
public:
    explicit Testbed(TestbedOptions options = {});
    ~Testbed();
    Testbed(const Testbed&) = delete;
    Testbed& operator=(const Testbed&) = delete;

    /// Starts the CRL endpoint, loads the store from it over HTTP and starts
    /// the responder. Throws EndpointUnavailable.
    void start();
    void stop();

    /// Re-fetches the CRL into the responder's store.
    store::RefreshOutcome refresh_store();
    /// Outage injection: connections to the responder are refused while down.
    void ocsp_down();
    void ocsp_up();

    ca::CertificateAuthority& authority() noexcept;
    store::RevocationStore& store() noexcept;
    ocsp::OcspServer& ocsp_server() noexcept;
    ca::CrlDistributionServer& crl_server() noexcept;

    std::string ocsp_url() const;
    std::string crl_der_url() const;
    std::string crl_pem_url() const;

    client::ClientConfig client_config(client::ClientPolicy policy = {}) const;
    ocsp::OcspRequest request_for(const SerialNumber& serial, std::optional<Bytes> nonce = std::nullopt) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------
// Fleet simulation

struct OutageWindow {
    double start_s = 0;
    double end_s = 0;
    bool contains(double t) const noexcept { return t >= start_s && t < end_s; }
};

struct SimConfig {
    int n_meters = 100;
    double request_rate_per_meter_hz = 0.5;
    double duration_s = 60;
    std::vector<OutageWindow> outage_windows;
    double revoked_fraction = 0.1;
    std::uint64_t rng_seed = 1;
    client::ClientPolicy policy;
    /// Size of the issued-certificate population the meters draw from.
    int issued_certificates = 1000;
    /// Threads driving meters within each time segment.
    int workers = 4;
    std::optional<PrivateKey> ca_key;

    /// Throws InvalidArgument.
    void validate() const;
};

struct LatencySummary {
    double mean_ms = 0;
    double p50_ms = 0;
    double p99_ms = 0;
};

struct SourceCounts {
    std::uint64_t ocsp = 0;
    std::uint64_t crl_cache = 0;
    std::uint64_t crl_fetch = 0;
    bool operator==(const SourceCounts&) const = default;
};

struct SimReport {
    std::uint64_t total_checks = 0;
    std::uint64_t correct_checks = 0;
    std::uint64_t failures = 0;      // checks that raised instead of answering
    std::uint64_t stale_answers = 0; // answered from an expired cache
    SourceCounts source_counts;
    std::uint64_t bytes_ocsp = 0;
    std::uint64_t bytes_crl_fetch = 0;
    std::uint64_t outage_checks = 0;
    /// Checks inside an outage window answered by anything but the CRL paths.
    std::uint64_t outage_source_violations = 0;
    LatencySummary latency;
    double wall_time_s = 0;

    bool all_correct() const noexcept { return failures == 0 && correct_checks == total_checks; }
    /// Equality of everything except timings.
    bool same_counts(const SimReport& other) const;
};

/// Meters fire on a seeded open-loop schedule in virtual time; outage
/// windows stop the responder. Every answer is checked against the ledger.
/// Throws EndpointUnavailable if the testbed cannot start.
SimReport run_simulation(const SimConfig& config);

// ---------------------------------------------------------------------------
// Responder benchmark

struct BenchConfig {
    std::size_t n_requests = 1000;
    int concurrency = 1;
    std::string target_url;
    /// DER requests, cycled through in order.
    std::vector<Bytes> request_bodies;
    bool keep_alive = true;
    std::chrono::milliseconds timeout{10000};
};

struct BenchReport {
    std::size_t n_requests = 0;
    int concurrency = 0;
    bool keep_alive = true;
    double total_time_s = 0;
    /// total_time_s / n_requests.
    double avg_request_s = 0;
    double throughput_rps = 0;
    double mean_latency_ms = 0;
    double p99_latency_ms = 0;
    std::size_t errors = 0;
};

/// Issues exactly n_requests OCSP POSTs. Throws TargetDown when the target
/// does not accept connections, InvalidArgument for a bad config.
BenchReport run_bench(const BenchConfig& config);

/// Requests for `count` serials under the testbed's CA, about a tenth of them
/// revoked serials so responses exercise both statuses.
std::vector<Bytes> bench_requests(const Testbed& testbed, const std::vector<SerialNumber>& revoked, std::size_t count,
                                  std::uint64_t seed);

/// Revokes `count` fresh random serials in the testbed's CA; returns them.
std::vector<SerialNumber> populate_ledger(Testbed& testbed, std::size_t count, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Byte measurement

struct MeasureOptions {
    DistinguishedName issuer = reference_issuer();
    std::optional<PrivateKey> key;
    int key_bits = 2048;
    std::uint64_t seed = 1;
};

struct MeasureRow {
    std::size_t record_count = 0;
    std::size_t der_bytes = 0;  // HTTP request + response for GET /crl.der
    std::size_t pem_bytes = 0;  // HTTP request + response for GET /crl.pem
    std::size_t ocsp_bytes = 0; // HTTP request + response for one OCSP query
};

struct MeasureReport {
    std::vector<MeasureRow> rows;
    /// Smallest record count whose CRL exchange exceeds the OCSP exchange.
    std::optional<std::size_t> crossover_der;
    std::optional<std::size_t> crossover_pem;
};

/// Rows come back sorted by record count, duplicates removed.
MeasureReport measure_bytes(std::vector<std::size_t> record_counts, const MeasureOptions& options = {});

// ---------------------------------------------------------------------------
// Reporting

std::string to_json(const SimReport& report);
std::string to_json(const BenchReport& report);
std::string to_json(const MeasureReport& report);
std::string render_table(const SimReport& report);
std::string render_table(const std::vector<BenchReport>& reports);
std::string render_table(const MeasureReport& report);

} // namespace hocsp::sim
