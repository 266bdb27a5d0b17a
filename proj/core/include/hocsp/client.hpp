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

// Meter-side revocation checking: OCSP or CRL chosen by a byte-cost policy,
// with CRL fallback when the responder is unreachable and a local CRL cache.

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hocsp/crl.hpp"
#include "hocsp/crypto.hpp"
#include "hocsp/store.hpp"

namespace hocsp::client {

enum class CrlFormat { Der, Pem };
enum class Mode { Auto, ForceOcsp, ForceCrl };
enum class Decision { UseCache, UseOcsp, UseCrlFetch };
enum class Source { Ocsp, CrlCache, CrlFetch };

std::string_view to_string(CrlFormat format);
std::string_view to_string(Mode mode);
std::string_view to_string(Decision decision);
std::string_view to_string(Source source);
/// "der"/"pem"; throws InvalidArgument.
CrlFormat parse_crl_format(std::string_view text);
/// "auto", "force-ocsp", "force-crl"; throws InvalidArgument.
Mode parse_mode(std::string_view text);

struct ClientPolicy {
    /// Above this many CRL records a single check is cheaper over OCSP.
    int pem_record_threshold = 14;
    int der_record_threshold = 24;
    std::chrono::milliseconds ocsp_timeout{2000};
    CrlFormat preferred_crl_format = CrlFormat::Der;
    /// Batches at least this large always download the CRL.
    int batch_min = 2;
    Mode mode = Mode::Auto;
    /// Cache lifetime; also the effective freshness bound for CRLs without
    /// nextUpdate.
    std::chrono::seconds cache_ttl{3600};

    /// Throws InvalidArgument for negative thresholds or a non-positive timeout.
    void validate() const;
    int threshold() const noexcept {
        return preferred_crl_format == CrlFormat::Pem ? pem_record_threshold : der_record_threshold;
    }
};

Decision choose_protocol(const ClientPolicy& policy, std::size_t n_checks, std::optional<std::size_t> crl_record_count,
                         bool cache_valid);

struct Endpoints {
    std::string ocsp_url;    // empty: no OCSP responder configured
    std::string crl_der_url; // empty: not offered
    std::string crl_pem_url; // empty: not offered

    bool any() const noexcept { return !ocsp_url.empty() || !crl_der_url.empty() || !crl_pem_url.empty(); }
};

/// Verified CRL held by the client.
struct CrlCache {
    CertificateRevocationList crl;
    std::shared_ptr<const store::StoreSnapshot> snapshot;
    store::SteadyClock::time_point fetched_at;
    std::chrono::seconds ttl{3600};

    bool valid(store::SteadyClock::time_point now, Asn1Time wall_now) const;
    std::size_t record_count() const noexcept { return crl.entries.size(); }
};

struct StatusResult {
    RevocationStatus status;
    Source source = Source::Ocsp;
    /// HTTP request + response message bytes; 0 for cache hits.
    std::size_t bytes_used = 0;
    double latency_ms = 0;
    /// Answered from an expired cache because every network path failed.
    bool stale = false;
};

/// Time sources, injectable so simulations can run on a virtual clock.
struct Clocks {
    std::function<store::SteadyClock::time_point()> steady = [] { return store::SteadyClock::now(); };
    std::function<Asn1Time()> wall = [] { return Asn1Time::now(); };
};

struct ClientConfig {
    Endpoints endpoints;
    ClientPolicy policy;
    DistinguishedName issuer;
    PublicKey ca_key;
    bool send_nonce = true;
    Clocks clocks;
};

/// One meter's client. Not thread-safe; the cache is per instance.
class HybridClient {
public:
    /// Throws InvalidArgument for an invalid policy or no endpoints.
    explicit HybridClient(ClientConfig config);

    /// Throws AllPathsFailed when nothing could answer, SignatureInvalid when
    /// the only answers available failed verification.
    StatusResult check(const SerialNumber& serial);
    /// One CRL download shared by the whole batch when the policy picks CRL.
    std::vector<StatusResult> check_many(const std::vector<SerialNumber>& serials);

    const std::optional<CrlCache>& cache() const noexcept { return cache_; }
    bool cache_valid() const;
    void clear_cache() { cache_.reset(); }
    const ClientConfig& config() const noexcept { return config_; }

private:
    struct Attempt;
    StatusResult via_cache(const SerialNumber& serial, bool stale) const;
    std::optional<StatusResult> try_ocsp(const SerialNumber& serial, Attempt& attempt);
    std::optional<StatusResult> try_crl(const SerialNumber& serial, Attempt& attempt);
    StatusResult resolve(const SerialNumber& serial, Decision decision);

    ClientConfig config_;
    std::optional<CrlCache> cache_;
};

} // namespace hocsp::client
