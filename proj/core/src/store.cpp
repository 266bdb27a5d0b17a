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
#include "hocsp/store.hpp"

#include <random>

#include <spdlog/spdlog.h>

#include "hocsp/http.hpp"

namespace hocsp {

std::string_view status_name(const RevocationStatus& s) {
    if (is_good(s)) return "good";
    if (is_revoked(s)) return "revoked";
    return "unknown";
}

} // namespace hocsp

namespace hocsp::store {

RevocationStatus StoreSnapshot::lookup(const SerialNumber& serial) const {
    auto it = revoked_.find(serial);
    if (it == revoked_.end()) return GoodStatus{};
    return RevokedStatus{it->second.revocation_time, it->second.reason};
}

StoreSnapshot snapshot_from_crl(const CertificateRevocationList& crl, const PublicKey& ca_key,
                                SteadyClock::time_point now) {
    bool verified = false;
    try {
        verified = verify_crl(crl, ca_key);
    } catch (const Error& e) {
        throw Error(ErrorCode::SignatureInvalid, e.what());
    }
    if (!verified) throw Error(ErrorCode::SignatureInvalid, "CRL signature does not verify under the CA key");

    StoreSnapshot snap;
    snap.issuer_ = crl.issuer;
    snap.this_update_ = crl.this_update;
    snap.loaded_at_ = now;
    snap.verified_ = true;
    snap.revoked_.reserve(crl.entries.size());
    for (const auto& e : crl.entries) snap.revoked_.emplace(e.serial, StoreSnapshot::Entry{e.revocation_date, e.reason});
    return snap;
}

CrlFetcher http_crl_fetcher(std::string url, std::chrono::milliseconds timeout) {
    auto parsed = http::Url::parse(url);
    return [parsed, timeout]() -> Bytes {
        auto ex = http::get(parsed, {.timeout = timeout, .keep_alive = false});
        if (ex.status != 200) {
            throw Error(ErrorCode::FetchFailure, "GET " + parsed.to_string() + " -> " + std::to_string(ex.status));
        }
        return std::move(ex.body);
    };
}

// ---------------------------------------------------------------------------

RevocationStore::RevocationStore(PublicKey ca_key, StoreOptions options)
    : ca_key_(std::move(ca_key)), options_(std::move(options)) {}

std::shared_ptr<const StoreSnapshot> RevocationStore::current() const {
    std::lock_guard lock(pointer_mu_);
    return snapshot_;
}

void RevocationStore::install(std::shared_ptr<const StoreSnapshot> next) {
    std::lock_guard lock(pointer_mu_);
    snapshot_ = std::move(next);
}

RefreshOutcome RevocationStore::fail(ErrorCode code, std::string message) {
    failures_.fetch_add(1, std::memory_order_relaxed);
    spdlog::warn("CRL refresh failed ({}): {}; serving previous snapshot", to_string(code), message);
    return RefreshOutcome{false, code, std::move(message), 0};
}

RefreshOutcome RevocationStore::load(const CertificateRevocationList& crl) {
    std::lock_guard guard(refresh_mu_);
    try {
        auto snap = std::make_shared<const StoreSnapshot>(snapshot_from_crl(crl, ca_key_, options_.clock()));
        auto n = snap->size();
        install(std::move(snap));
        successes_.fetch_add(1, std::memory_order_relaxed);
        return RefreshOutcome{true, std::nullopt, {}, n};
    } catch (const Error& e) {
        return fail(e.code(), e.what());
    }
}

RefreshOutcome RevocationStore::refresh(const CrlFetcher& fetcher) {
    Bytes raw;
    try {
        raw = fetcher();
    } catch (const Error& e) {
        return fail(ErrorCode::FetchFailure, e.what());
    } catch (const std::exception& e) {
        return fail(ErrorCode::FetchFailure, e.what());
    }
    CertificateRevocationList crl;
    try {
        auto text = as_chars(raw);
        crl = text.starts_with("-----BEGIN") ? crl_from_pem(text) : decode_crl_der(raw);
    } catch (const Error& e) {
        return fail(ErrorCode::MalformedCrl, e.what());
    }
    return load(crl);
}

RevocationStatus RevocationStore::lookup(const StoreSnapshot& snapshot, const SerialNumber& serial) const {
    if (options_.max_staleness &&
        options_.clock() - snapshot.loaded_at() > *options_.max_staleness) {
        return UnknownStatus{};
    }
    auto status = snapshot.lookup(serial);
    if (is_good(status) && options_.issued_serials && !options_.issued_serials->contains(serial)) {
        return UnknownStatus{};
    }
    return status;
}

RevocationStatus RevocationStore::lookup(const SerialNumber& serial) const {
    auto snap = current();
    if (!snap) throw Error(ErrorCode::NoSnapshotYet, "no CRL loaded yet");
    return lookup(*snap, serial);
}

double RevocationStore::staleness(SteadyClock::time_point now) const {
    auto snap = current();
    if (!snap) throw Error(ErrorCode::NoSnapshotYet, "no CRL loaded yet");
    return std::chrono::duration<double>(now - snap->loaded_at()).count();
}

StoreMetrics RevocationStore::metrics() const {
    StoreMetrics m;
    if (auto snap = current()) {
        m.staleness_seconds = std::chrono::duration<double>(options_.clock() - snap->loaded_at()).count();
        m.entries = snap->size();
    }
    m.refresh_success = successes_.load();
    m.refresh_failure = failures_.load();
    return m;
}

// ---------------------------------------------------------------------------

RefreshScheduler::RefreshScheduler(RevocationStore& store, CrlFetcher fetcher, std::chrono::milliseconds interval,
                                   std::uint64_t seed)
    : store_(store), fetcher_(std::move(fetcher)), interval_(interval), seed_(seed) {}

RefreshScheduler::~RefreshScheduler() { stop(); }

void RefreshScheduler::start() {
    if (thread_.joinable()) return;
    {
        std::lock_guard lock(mu_);
        stopping_ = false;
    }
    thread_ = std::thread([this] { run(); });
}

void RefreshScheduler::stop() {
    {
        std::lock_guard lock(mu_);
        stopping_ = true;
    }
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
}

void RefreshScheduler::run() {
    std::mt19937_64 rng(seed_);
    std::uniform_real_distribution<double> jitter(0.9, 1.1);
    std::unique_lock lock(mu_);
    while (!stopping_) {
        auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(interval_ * jitter(rng));
        if (cv_.wait_for(lock, wait, [this] { return stopping_; })) break;
        lock.unlock();
        store_.refresh(fetcher_);
        lock.lock();
    }
}

} // namespace hocsp::store
