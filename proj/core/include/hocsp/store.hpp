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

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <variant>

#include "hocsp/crl.hpp"
#include "hocsp/error.hpp"

namespace hocsp {

struct GoodStatus {
    bool operator==(const GoodStatus&) const = default;
};
struct RevokedStatus {
    Asn1Time revocation_time;
    std::optional<CrlReason> reason;
    bool operator==(const RevokedStatus&) const = default;
};
struct UnknownStatus {
    bool operator==(const UnknownStatus&) const = default;
};
using RevocationStatus = std::variant<GoodStatus, RevokedStatus, UnknownStatus>;

inline bool is_good(const RevocationStatus& s) { return std::holds_alternative<GoodStatus>(s); }
inline bool is_revoked(const RevocationStatus& s) { return std::holds_alternative<RevokedStatus>(s); }
inline bool is_unknown(const RevocationStatus& s) { return std::holds_alternative<UnknownStatus>(s); }
/// "good", "revoked" or "unknown".
std::string_view status_name(const RevocationStatus& s);

} // namespace hocsp

namespace hocsp::store {

using SteadyClock = std::chrono::steady_clock;

/// Verified, immutable view of one CRL.
class StoreSnapshot {
public:
    struct Entry {
        Asn1Time revocation_time;
        std::optional<CrlReason> reason;
    };

    const DistinguishedName& issuer() const noexcept { return issuer_; }
    Asn1Time source_this_update() const noexcept { return this_update_; }
    SteadyClock::time_point loaded_at() const noexcept { return loaded_at_; }
    bool crl_signature_verified() const noexcept { return verified_; }
    std::size_t size() const noexcept { return revoked_.size(); }
    const std::unordered_map<SerialNumber, Entry>& revoked() const noexcept { return revoked_; }

    /// Hash lookup; independent of how many serials are revoked.
    RevocationStatus lookup(const SerialNumber& serial) const;

private:
    friend StoreSnapshot snapshot_from_crl(const CertificateRevocationList&, const PublicKey&,
                                           SteadyClock::time_point);
    DistinguishedName issuer_;
    Asn1Time this_update_;
    SteadyClock::time_point loaded_at_;
    bool verified_ = false;
    std::unordered_map<SerialNumber, Entry> revoked_;
};

/// Throws SignatureInvalid when the CRL does not verify under `ca_key`.
StoreSnapshot snapshot_from_crl(const CertificateRevocationList& crl, const PublicKey& ca_key,
                                SteadyClock::time_point now = SteadyClock::now());

inline RevocationStatus lookup(const StoreSnapshot& snapshot, const SerialNumber& serial) {
    return snapshot.lookup(serial);
}

/// Returns raw CRL bytes (DER, or PEM text) or throws Error(FetchFailure).
using CrlFetcher = std::function<Bytes()>;

/// Fetches the CRL over HTTP; PEM bodies are recognized and unwrapped.
CrlFetcher http_crl_fetcher(std::string url, std::chrono::milliseconds timeout = std::chrono::milliseconds{5000});

struct RefreshOutcome {
    bool ok = false;
    std::optional<ErrorCode> error;
    std::string message;
    std::size_t entries = 0;
};

struct StoreOptions {
    /// Past this age every lookup answers Unknown. Disabled by default.
    std::optional<std::chrono::milliseconds> max_staleness;
    /// Strict mode: serials outside this set answer Unknown even if absent
    /// from the CRL. Disabled by default.
    std::optional<std::unordered_set<SerialNumber>> issued_serials;
    std::function<SteadyClock::time_point()> clock = [] { return SteadyClock::now(); };
};

struct StoreMetrics {
    std::optional<double> staleness_seconds;
    std::size_t entries = 0;
    std::uint64_t refresh_success = 0;
    std::uint64_t refresh_failure = 0;
};

/// The responder's blacklist. Readers grab the current snapshot pointer and
/// never wait on a refresh; a refresh swaps in a complete new snapshot or
/// leaves the old one in place.
class RevocationStore {
public:
    RevocationStore(PublicKey ca_key, StoreOptions options = {});

    /// Never throws: every failure is reported in the outcome and the
    /// previous snapshot keeps serving.
    RefreshOutcome refresh(const CrlFetcher& fetcher);
    /// Installs a CRL directly (same verification as refresh).
    RefreshOutcome load(const CertificateRevocationList& crl);

    std::shared_ptr<const StoreSnapshot> current() const;
    /// Applies the strict-mode and max-staleness policies on top of the
    /// snapshot lookup. Throws NoSnapshotYet before the first load.
    RevocationStatus lookup(const SerialNumber& serial) const;
    RevocationStatus lookup(const StoreSnapshot& snapshot, const SerialNumber& serial) const;

    /// Seconds since the live snapshot was loaded. Throws NoSnapshotYet.
    double staleness(SteadyClock::time_point now) const;
    double staleness() const { return staleness(options_.clock()); }

    StoreMetrics metrics() const;
    const PublicKey& ca_key() const noexcept { return ca_key_; }

private:
    void install(std::shared_ptr<const StoreSnapshot> next);
    RefreshOutcome fail(ErrorCode code, std::string message);

    PublicKey ca_key_;
    StoreOptions options_;
    mutable std::mutex pointer_mu_; // guards the pointer copy only
    std::shared_ptr<const StoreSnapshot> snapshot_;
    std::mutex refresh_mu_;
    std::atomic<std::uint64_t> successes_{0};
    std::atomic<std::uint64_t> failures_{0};
};

/// Refreshes a store on a fixed interval with ±10% jitter.
class RefreshScheduler {
public:
    RefreshScheduler(RevocationStore& store, CrlFetcher fetcher, std::chrono::milliseconds interval,
                     std::uint64_t seed = 0);
    ~RefreshScheduler();
    RefreshScheduler(const RefreshScheduler&) = delete;
    RefreshScheduler& operator=(const RefreshScheduler&) = delete;

    void start();
    void stop();

private:
    void run();

    RevocationStore& store_;
    CrlFetcher fetcher_;
    std::chrono::milliseconds interval_;
    std::uint64_t seed_;
    std::mutex mu_;
    std::condition_variable cv_;
    bool stopping_ = false;
    std::thread thread_;
};

} // namespace hocsp::store
