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
#include "hocsp/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "hocsp/error.hpp"
#include "hocsp/http.hpp"

namespace hocsp::sim {

DistinguishedName reference_issuer() { return DistinguishedName::parse("C=aa, ST=aa, L=aa, O=aa, OU=aa, CN=rootca"); }

namespace {

/// 8-octet serial with the top bit clear and a nonzero first octet, the shape
/// of the serials in the reference CRL.
SerialNumber random_serial(std::mt19937_64& rng) {
    return SerialNumber::from_u64((rng() & 0x7FFFFFFFFFFFFFFFULL) | 0x0100000000000000ULL);
}

Bytes random_nonce(std::mt19937_64& rng) {
    Bytes nonce(16);
    for (auto& b : nonce) b = static_cast<std::uint8_t>(rng());
    return nonce;
}

double percentile(std::vector<double>& sorted, double p) {
    if (sorted.empty()) return 0;
    auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sorted.size())));
    return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

} // namespace

// ---------------------------------------------------------------------------
// Testbed

struct Testbed::Impl {
    TestbedOptions options;
    PrivateKey key;
    ca::CertificateAuthority authority;
    ca::CrlDistributionServer crl_server;
    store::RevocationStore store;
    ocsp::Responder responder;
    ocsp::OcspServer ocsp_server;

    explicit Impl(TestbedOptions opts)
        : options(std::move(opts)),
          key(options.key ? *options.key : PrivateKey::generate_rsa(options.key_bits)),
          authority(ca::CertificateAuthority::in_memory(options.issuer, key, ca::CaOptions{options.refresh_interval})),
          crl_server(authority, ca::CrlServerOptions{.host = options.host,
                                                     .port = 0,
                                                     .refresh_interval = options.refresh_interval,
                                                     .include_next_update = options.include_next_update}),
          store(authority.public_key()),
          responder(store, identity()),
          ocsp_server(responder, ocsp::OcspServerOptions{options.host, 0}) {}

    ocsp::ResponderIdentity identity() const {
        ocsp::ResponderIdentity id{options.issuer, std::make_shared<RsaSha256Signer>(key), {}};
        if (options.attach_ca_certificate) id.certificates.push_back(authority.certificate_der());
        return id;
    }
};

Testbed::Testbed(TestbedOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}
Testbed::~Testbed() { stop(); }

void Testbed::start() {
    try {
        impl_->crl_server.start();
        auto outcome = refresh_store();
        if (!outcome.ok) throw Error(ErrorCode::EndpointUnavailable, "initial CRL load failed: " + outcome.message);
        impl_->ocsp_server.start();
    } catch (const Error& e) {
        stop();
        if (e.code() == ErrorCode::EndpointUnavailable) throw;
        throw Error(ErrorCode::EndpointUnavailable, e.what());
    }
}

void Testbed::stop() {
    impl_->ocsp_server.stop();
    impl_->crl_server.stop();
}

store::RefreshOutcome Testbed::refresh_store() { return impl_->store.refresh(store::http_crl_fetcher(crl_der_url())); }
void Testbed::ocsp_down() { impl_->ocsp_server.stop(); }
void Testbed::ocsp_up() {
    if (!impl_->ocsp_server.running()) impl_->ocsp_server.start();
}

ca::CertificateAuthority& Testbed::authority() noexcept { return impl_->authority; }
store::RevocationStore& Testbed::store() noexcept { return impl_->store; }
ocsp::OcspServer& Testbed::ocsp_server() noexcept { return impl_->ocsp_server; }
ca::CrlDistributionServer& Testbed::crl_server() noexcept { return impl_->crl_server; }
std::string Testbed::ocsp_url() const { return impl_->ocsp_server.url(); }
std::string Testbed::crl_der_url() const { return impl_->crl_server.der_url(); }
std::string Testbed::crl_pem_url() const { return impl_->crl_server.pem_url(); }

client::ClientConfig Testbed::client_config(client::ClientPolicy policy) const {
    client::ClientConfig c;
    c.endpoints = client::Endpoints{ocsp_url(), crl_der_url(), crl_pem_url()};
    c.policy = policy;
    c.issuer = impl_->options.issuer;
    c.ca_key = impl_->authority.public_key();
    return c;
}

ocsp::OcspRequest Testbed::request_for(const SerialNumber& serial, std::optional<Bytes> nonce) const {
    return ocsp::OcspRequest{
        {ocsp::make_cert_id(der::oid::kSha1, impl_->options.issuer, impl_->authority.public_key(), serial)},
        std::move(nonce)};
}

std::vector<SerialNumber> populate_ledger(Testbed& testbed, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng{seed};
    std::vector<SerialNumber> out;
    out.reserve(count);
    auto& ledger = testbed.authority().ledger();
    auto at = Asn1Time::now();
    while (out.size() < count) {
        auto serial = random_serial(rng);
        if (ledger.contains(serial)) continue;
        ledger.revoke(serial, CrlReason::KeyCompromise, at);
        out.push_back(serial);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fleet simulation

void SimConfig::validate() const {
    auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
    if (n_meters < 1) bad("n_meters must be >= 1");
    if (!(request_rate_per_meter_hz > 0)) bad("request rate must be > 0");
    if (!(duration_s > 0)) bad("duration must be > 0");
    if (revoked_fraction < 0 || revoked_fraction > 1) bad("revoked_fraction must be in [0, 1]");
    if (issued_certificates < 1) bad("issued_certificates must be >= 1");
    if (workers < 1) bad("workers must be >= 1");
    for (const auto& w : outage_windows) {
        if (w.start_s < 0 || w.end_s > duration_s || w.start_s >= w.end_s) {
            bad("outage windows must satisfy 0 <= start < end <= duration");
        }
    }
    policy.validate();
}

bool SimReport::same_counts(const SimReport& o) const {
    return total_checks == o.total_checks && correct_checks == o.correct_checks && failures == o.failures &&
           stale_answers == o.stale_answers && source_counts == o.source_counts && bytes_ocsp == o.bytes_ocsp &&
           bytes_crl_fetch == o.bytes_crl_fetch && outage_checks == o.outage_checks &&
           outage_source_violations == o.outage_source_violations;
}

namespace {

struct Event {
    double t = 0;
    std::size_t serial_index = 0;
};

struct CheckRecord {
    bool failed = false;
    bool correct = false;
    bool stale = false;
    bool in_outage = false;
    client::Source source = client::Source::Ocsp;
    std::size_t bytes = 0;
    double latency_ms = 0;
};

struct Meter {
    std::vector<Event> events;
    std::size_t cursor = 0;
    double now_s = 0;
    std::unique_ptr<client::HybridClient> client;
    std::vector<CheckRecord> records;
};

} // namespace

SimReport run_simulation(const SimConfig& config) {
    config.validate();
    const auto wall_started = std::chrono::steady_clock::now();

    Testbed testbed(TestbedOptions{.key = config.ca_key});

    // Issued population and the ledger oracle.
    std::mt19937_64 rng{config.rng_seed};
    std::vector<SerialNumber> issued;
    std::unordered_set<SerialNumber> seen;
    while (issued.size() < static_cast<std::size_t>(config.issued_certificates)) {
        auto s = random_serial(rng);
        if (seen.insert(s).second) issued.push_back(s);
    }
    auto shuffled = issued;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto n_revoked = static_cast<std::size_t>(std::llround(config.revoked_fraction * static_cast<double>(issued.size())));
    std::unordered_set<SerialNumber> oracle(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_revoked));
    const auto revoked_at = Asn1Time::now();
    for (std::size_t i = 0; i < n_revoked; ++i) testbed.authority().revoke(shuffled[i], CrlReason::KeyCompromise, revoked_at);
    testbed.start();

    // Per-meter schedules: open loop, fixed period with ±10% seeded jitter.
    const double period = 1.0 / config.request_rate_per_meter_hz;
    const auto base_steady = store::SteadyClock::now();
    const auto base_wall = Asn1Time::now().epoch_seconds;
    std::vector<std::unique_ptr<Meter>> meters;
    for (int m = 0; m < config.n_meters; ++m) {
        auto meter = std::make_unique<Meter>();
        std::seed_seq seq{config.rng_seed, static_cast<std::uint64_t>(m), std::uint64_t{0x6d65746572}};
        std::mt19937_64 mrng{seq};
        std::uniform_real_distribution<double> first(0, period), jitter(0.9, 1.1);
        std::uniform_int_distribution<std::size_t> pick(0, issued.size() - 1);
        for (double t = first(mrng); t < config.duration_s; t += period * jitter(mrng)) {
            meter->events.push_back(Event{t, pick(mrng)});
        }
        auto cc = testbed.client_config(config.policy);
        Meter* self = meter.get();
        cc.clocks.steady = [self, base_steady] {
            return base_steady + std::chrono::duration_cast<store::SteadyClock::duration>(
                                     std::chrono::duration<double>(self->now_s));
        };
        cc.clocks.wall = [self, base_wall] {
            return Asn1Time{base_wall + static_cast<std::int64_t>(std::floor(self->now_s))};
        };
        meter->client = std::make_unique<client::HybridClient>(std::move(cc));
        meters.push_back(std::move(meter));
    }

    auto in_outage = [&](double t) {
        return std::any_of(config.outage_windows.begin(), config.outage_windows.end(),
                           [t](const OutageWindow& w) { return w.contains(t); });
    };

    // Segment the timeline at outage boundaries; the responder's state is
    // fixed within a segment, so meters can run concurrently inside it.
    std::set<double> cuts{0.0, config.duration_s};
    for (const auto& w : config.outage_windows) {
        cuts.insert(w.start_s);
        cuts.insert(w.end_s);
    }
    std::vector<double> bounds(cuts.begin(), cuts.end());
    for (std::size_t seg = 0; seg + 1 < bounds.size(); ++seg) {
        const double end = bounds[seg + 1];
        if (in_outage((bounds[seg] + end) / 2)) {
            testbed.ocsp_down();
        } else {
            testbed.ocsp_up();
        }

        std::atomic<std::size_t> next{0};
        auto work = [&] {
            for (std::size_t m; (m = next.fetch_add(1)) < meters.size();) {
                auto& meter = *meters[m];
                for (; meter.cursor < meter.events.size() && meter.events[meter.cursor].t < end; ++meter.cursor) {
                    const auto& ev = meter.events[meter.cursor];
                    meter.now_s = ev.t;
                    CheckRecord rec;
                    rec.in_outage = in_outage(ev.t);
                    const auto& serial = issued[ev.serial_index];
                    try {
                        auto r = meter.client->check(serial);
                        rec.source = r.source;
                        rec.bytes = r.bytes_used;
                        rec.latency_ms = r.latency_ms;
                        rec.stale = r.stale;
                        rec.correct = !is_unknown(r.status) && is_revoked(r.status) == oracle.contains(serial);
                    } catch (const Error& e) {
                        spdlog::debug("meter {} check at {:.3f}s failed: {}", m, ev.t, e.what());
                        rec.failed = true;
                    }
                    meter.records.push_back(rec);
                }
            }
        };
        std::vector<std::thread> pool;
        for (int w = 1; w < std::min(config.workers, config.n_meters); ++w) pool.emplace_back(work);
        work();
        for (auto& t : pool) t.join();
    }
    testbed.stop();

    // Single collection point, in meter order.
    SimReport report;
    std::vector<double> latencies;
    for (const auto& meter : meters) {
        for (const auto& rec : meter->records) {
            ++report.total_checks;
            if (rec.in_outage) ++report.outage_checks;
            if (rec.failed) {
                ++report.failures;
                continue;
            }
            if (rec.correct) ++report.correct_checks;
            if (rec.stale) ++report.stale_answers;
            switch (rec.source) {
            case client::Source::Ocsp:
                ++report.source_counts.ocsp;
                report.bytes_ocsp += rec.bytes;
                if (rec.in_outage) ++report.outage_source_violations;
                break;
            case client::Source::CrlFetch:
                ++report.source_counts.crl_fetch;
                report.bytes_crl_fetch += rec.bytes;
                break;
            case client::Source::CrlCache:
                ++report.source_counts.crl_cache;
                break;
            }
            latencies.push_back(rec.latency_ms);
        }
    }
    if (!latencies.empty()) {
        double sum = 0;
        for (double l : latencies) sum += l;
        report.latency.mean_ms = sum / static_cast<double>(latencies.size());
        std::sort(latencies.begin(), latencies.end());
        report.latency.p50_ms = percentile(latencies, 0.50);
        report.latency.p99_ms = percentile(latencies, 0.99);
    }
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_started).count();
    return report;
}

// ---------------------------------------------------------------------------
// Benchmark

std::vector<Bytes> bench_requests(const Testbed& testbed, const std::vector<SerialNumber>& revoked, std::size_t count,
                                  std::uint64_t seed) {
    std::mt19937_64 rng{seed};
    std::vector<Bytes> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        auto serial = (i % 10 == 0 && !revoked.empty()) ? revoked[rng() % revoked.size()] : random_serial(rng);
        out.push_back(ocsp::encode_ocsp_request(testbed.request_for(serial, random_nonce(rng))));
    }
    return out;
}

BenchReport run_bench(const BenchConfig& config) {
    if (config.n_requests < 1) throw Error(ErrorCode::InvalidArgument, "n_requests must be >= 1");
    if (config.concurrency < 1) throw Error(ErrorCode::InvalidArgument, "concurrency must be >= 1");
    if (config.request_bodies.empty()) throw Error(ErrorCode::InvalidArgument, "no request bodies");
    const auto url = http::Url::parse(config.target_url);

    // Reachability probe; a GET is answered 405 and is not one of the n POSTs.
    try {
        http::get(url, http::ClientOptions{config.timeout, false});
    } catch (const Error& e) {
        throw Error(ErrorCode::TargetDown, std::string("benchmark target unreachable: ") + e.what());
    }

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> errors{0};
    std::vector<std::vector<double>> latencies(static_cast<std::size_t>(config.concurrency));
    auto worker = [&](std::size_t w) {
        http::Client client(url, http::ClientOptions{config.timeout, config.keep_alive});
        auto& mine = latencies[w];
        for (std::size_t i; (i = next.fetch_add(1)) < config.n_requests;) {
            const auto& body = config.request_bodies[i % config.request_bodies.size()];
            auto t0 = std::chrono::steady_clock::now();
            try {
                auto ex = client.post(url.path, http::kOcspRequestType, body);
                if (ex.status != 200 ||
                    ocsp::decode_ocsp_response(ex.body).status != ocsp::ResponseStatus::Successful) {
                    errors.fetch_add(1);
                }
            } catch (const Error&) {
                errors.fetch_add(1);
            }
            mine.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
        }
    };

    const auto started = std::chrono::steady_clock::now();
    std::vector<std::thread> pool;
    for (int w = 0; w < config.concurrency; ++w) pool.emplace_back(worker, static_cast<std::size_t>(w));
    for (auto& t : pool) t.join();
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    std::vector<double> all;
    for (auto& l : latencies) all.insert(all.end(), l.begin(), l.end());
    std::sort(all.begin(), all.end());
    double sum = 0;
    for (double l : all) sum += l;

    BenchReport r;
    r.n_requests = config.n_requests;
    r.concurrency = config.concurrency;
    r.keep_alive = config.keep_alive;
    r.total_time_s = total;
    r.avg_request_s = total / static_cast<double>(config.n_requests);
    r.throughput_rps = total > 0 ? static_cast<double>(config.n_requests) / total : 0;
    r.mean_latency_ms = all.empty() ? 0 : sum / static_cast<double>(all.size());
    r.p99_latency_ms = percentile(all, 0.99);
    r.errors = errors.load();
    return r;
}

// ---------------------------------------------------------------------------
// Byte measurement

MeasureReport measure_bytes(std::vector<std::size_t> record_counts, const MeasureOptions& options) {
    std::sort(record_counts.begin(), record_counts.end());
    record_counts.erase(std::unique(record_counts.begin(), record_counts.end()), record_counts.end());

    Testbed testbed(TestbedOptions{.issuer = options.issuer,
                                   .key = options.key,
                                   .key_bits = options.key_bits,
                                   .include_next_update = false});
    testbed.start();
    std::mt19937_64 rng{options.seed};
    const auto der_url = http::Url::parse(testbed.crl_der_url());
    const auto pem_url = http::Url::parse(testbed.crl_pem_url());
    const auto ocsp_url = http::Url::parse(testbed.ocsp_url());

    MeasureReport report;
    auto& ledger = testbed.authority().ledger();
    for (auto n : record_counts) {
        auto at = Asn1Time::now();
        while (ledger.size() < n) {
            auto serial = random_serial(rng);
            if (!ledger.contains(serial)) ledger.revoke(serial, CrlReason::KeyCompromise, at);
        }
        auto outcome = testbed.refresh_store();
        if (!outcome.ok) throw Error(ErrorCode::EndpointUnavailable, outcome.message);

        SerialNumber good = random_serial(rng);
        while (ledger.contains(good)) good = random_serial(rng);
        auto request = ocsp::encode_ocsp_request(testbed.request_for(good, random_nonce(rng)));

        MeasureRow row;
        row.record_count = n;
        row.der_bytes = http::get(der_url).total_bytes();
        row.pem_bytes = http::get(pem_url).total_bytes();
        auto ex = http::post(ocsp_url, http::kOcspRequestType, request);
        if (ex.status != 200 || ocsp::decode_ocsp_response(ex.body).status != ocsp::ResponseStatus::Successful) {
            throw Error(ErrorCode::EndpointUnavailable, "OCSP query failed during measurement");
        }
        row.ocsp_bytes = ex.total_bytes();
        report.rows.push_back(row);
        if (!report.crossover_der && row.der_bytes > row.ocsp_bytes) report.crossover_der = n;
        if (!report.crossover_pem && row.pem_bytes > row.ocsp_bytes) report.crossover_pem = n;
    }
    testbed.stop();
    return report;
}

// ---------------------------------------------------------------------------
// Reporting

std::string to_json(const SimReport& r) {
    nlohmann::ordered_json j;
    j["total_checks"] = r.total_checks;
    j["correct_checks"] = r.correct_checks;
    j["failures"] = r.failures;
    j["stale_answers"] = r.stale_answers;
    j["latency_ms"] = {{"mean", r.latency.mean_ms}, {"p50", r.latency.p50_ms}, {"p99", r.latency.p99_ms}};
    j["bytes_by_source"] = {{"Ocsp", r.bytes_ocsp}, {"CrlFetch", r.bytes_crl_fetch}};
    j["source_counts"] = {{"Ocsp", r.source_counts.ocsp},
                          {"CrlCache", r.source_counts.crl_cache},
                          {"CrlFetch", r.source_counts.crl_fetch}};
    j["outage_checks"] = r.outage_checks;
    j["outage_source_violations"] = r.outage_source_violations;
    j["wall_time_s"] = r.wall_time_s;
    return j.dump(2);
}

namespace {

nlohmann::ordered_json bench_json(const BenchReport& r) {
    nlohmann::ordered_json j;
    j["n_requests"] = r.n_requests;
    j["concurrency"] = r.concurrency;
    j["keep_alive"] = r.keep_alive;
    j["total_time_s"] = r.total_time_s;
    j["avg_request_s"] = r.avg_request_s;
    j["throughput_rps"] = r.throughput_rps;
    j["mean_latency_ms"] = r.mean_latency_ms;
    j["p99_latency_ms"] = r.p99_latency_ms;
    j["errors"] = r.errors;
    return j;
}

} // namespace

std::string to_json(const BenchReport& r) { return bench_json(r).dump(2); }

std::string to_json(const MeasureReport& r) {
    nlohmann::ordered_json j;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : r.rows) {
        j["rows"].push_back({{"record_count", row.record_count},
                             {"der_bytes", row.der_bytes},
                             {"pem_bytes", row.pem_bytes},
                             {"ocsp_aggregate_bytes", row.ocsp_bytes}});
    }
    j["crossover_der"] = r.crossover_der ? nlohmann::ordered_json(*r.crossover_der) : nlohmann::ordered_json();
    j["crossover_pem"] = r.crossover_pem ? nlohmann::ordered_json(*r.crossover_pem) : nlohmann::ordered_json();
    return j.dump(2);
}

std::string render_table(const SimReport& r) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2);
    out << "checks        " << r.total_checks << " total, " << r.correct_checks << " correct, " << r.failures
        << " failed, " << r.stale_answers << " stale\n";
    out << "sources       Ocsp " << r.source_counts.ocsp << ", CrlFetch " << r.source_counts.crl_fetch << ", CrlCache "
        << r.source_counts.crl_cache << "\n";
    out << "bytes         Ocsp " << r.bytes_ocsp << ", CrlFetch " << r.bytes_crl_fetch << "\n";
    out << "outage        " << r.outage_checks << " checks, " << r.outage_source_violations << " answered by OCSP\n";
    out << "latency (ms)  mean " << r.latency.mean_ms << ", p50 " << r.latency.p50_ms << ", p99 " << r.latency.p99_ms
        << "\n";
    out << "wall time     " << r.wall_time_s << " s\n";
    return out.str();
}

std::string render_table(const std::vector<BenchReport>& reports) {
    std::ostringstream out;
    out << std::left << std::setw(12) << "requests" << std::setw(13) << "concurrency" << std::setw(12) << "keep-alive"
        << std::setw(16) << "time consumed" << std::setw(20) << "avg request time" << "throughput\n";
    for (const auto& r : reports) {
        std::ostringstream t, a, th;
        t << std::fixed << std::setprecision(2) << r.total_time_s << " s";
        a << std::fixed << std::setprecision(5) << r.avg_request_s << " s";
        th << std::fixed << std::setprecision(1) << r.throughput_rps << " req/s";
        out << std::left << std::setw(12) << r.n_requests << std::setw(13) << r.concurrency << std::setw(12)
            << (r.keep_alive ? "yes" : "no") << std::setw(16) << t.str() << std::setw(20) << a.str() << th.str();
        if (r.errors) out << "  (" << r.errors << " errors)";
        out << "\n";
    }
    return out.str();
}

std::string render_table(const MeasureReport& r) {
    std::ostringstream out;
    out << std::right << std::setw(8) << "records" << std::setw(12) << "CRL DER" << std::setw(12) << "CRL PEM"
        << std::setw(14) << "OCSP req+resp" << "\n";
    for (const auto& row : r.rows) {
        out << std::setw(8) << row.record_count << std::setw(12) << row.der_bytes << std::setw(12) << row.pem_bytes
            << std::setw(14) << row.ocsp_bytes << "\n";
    }
    auto show = [](const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : std::string("none"); };
    out << "crossover: DER > OCSP from " << show(r.crossover_der) << " records, PEM > OCSP from "
        << show(r.crossover_pem) << " records\n";
    return out.str();
}

} // namespace hocsp::sim
