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
#include "hocsp/client.hpp"

#include <openssl/rand.h>

#include <spdlog/spdlog.h>

#include "hocsp/error.hpp"
#include "hocsp/http.hpp"
#include "hocsp/ocsp.hpp"

namespace hocsp::client {

std::string_view to_string(CrlFormat format) { return format == CrlFormat::Pem ? "pem" : "der"; }

std::string_view to_string(Mode mode) {
    switch (mode) {
    case Mode::Auto: return "auto";
    case Mode::ForceOcsp: return "force-ocsp";
    case Mode::ForceCrl: return "force-crl";
    }
    return "?";
}

std::string_view to_string(Decision decision) {
    switch (decision) {
    case Decision::UseCache: return "UseCache";
    case Decision::UseOcsp: return "UseOcsp";
    case Decision::UseCrlFetch: return "UseCrlFetch";
    }
    return "?";
}

std::string_view to_string(Source source) {
    switch (source) {
    case Source::Ocsp: return "Ocsp";
    case Source::CrlCache: return "CrlCache";
    case Source::CrlFetch: return "CrlFetch";
    }
    return "?";
}

CrlFormat parse_crl_format(std::string_view text) {
    if (text == "der" || text == "DER") return CrlFormat::Der;
    if (text == "pem" || text == "PEM") return CrlFormat::Pem;
    throw Error(ErrorCode::InvalidArgument, "CRL format must be der or pem");
}

Mode parse_mode(std::string_view text) {
    if (text == "auto") return Mode::Auto;
    if (text == "force-ocsp" || text == "force_ocsp") return Mode::ForceOcsp;
    if (text == "force-crl" || text == "force_crl") return Mode::ForceCrl;
    throw Error(ErrorCode::InvalidArgument, "mode must be auto, force-ocsp or force-crl");
}

void ClientPolicy::validate() const {
    if (pem_record_threshold < 0 || der_record_threshold < 0) {
        throw Error(ErrorCode::InvalidArgument, "record thresholds must be >= 0");
    }
    if (ocsp_timeout.count() <= 0) throw Error(ErrorCode::InvalidArgument, "OCSP timeout must be positive");
    if (batch_min < 1) throw Error(ErrorCode::InvalidArgument, "batch_min must be >= 1");
    if (cache_ttl.count() < 0) throw Error(ErrorCode::InvalidArgument, "cache TTL must be >= 0");
}

Decision choose_protocol(const ClientPolicy& policy, std::size_t n_checks, std::optional<std::size_t> crl_record_count,
                         bool cache_valid) {
    if (cache_valid) return Decision::UseCache;
    if (policy.mode == Mode::ForceOcsp) return Decision::UseOcsp;
    if (policy.mode == Mode::ForceCrl) return Decision::UseCrlFetch;
    if (n_checks >= static_cast<std::size_t>(policy.batch_min)) return Decision::UseCrlFetch;
    if (crl_record_count) {
        return *crl_record_count > static_cast<std::size_t>(policy.threshold()) ? Decision::UseOcsp
                                                                               : Decision::UseCrlFetch;
    }
    return Decision::UseOcsp;
}

bool CrlCache::valid(store::SteadyClock::time_point now, Asn1Time wall_now) const {
    if (now >= fetched_at + ttl) return false;
    return !crl.next_update || wall_now < *crl.next_update;
}

// ---------------------------------------------------------------------------

/// Why the network paths failed during one check.
struct HybridClient::Attempt {
    bool signature_failed = false;
    std::vector<std::string> failures;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    void fail(std::string what) { failures.push_back(std::move(what)); }
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    }
    std::string summary() const {
        std::string out;
        for (const auto& f : failures) out += (out.empty() ? "" : "; ") + f;
        return out.empty() ? "no endpoint configured" : out;
    }
};

HybridClient::HybridClient(ClientConfig config) : config_(std::move(config)) {
    config_.policy.validate();
    if (!config_.endpoints.any()) throw Error(ErrorCode::InvalidArgument, "no OCSP or CRL endpoint configured");
}

bool HybridClient::cache_valid() const {
    return cache_ && cache_->valid(config_.clocks.steady(), config_.clocks.wall());
}

StatusResult HybridClient::via_cache(const SerialNumber& serial, bool stale) const {
    StatusResult r;
    r.status = cache_->snapshot->lookup(serial);
    r.source = Source::CrlCache;
    r.stale = stale;
    return r;
}

std::optional<StatusResult> HybridClient::try_ocsp(const SerialNumber& serial, Attempt& attempt) {
    if (config_.endpoints.ocsp_url.empty()) return std::nullopt;
    try {
        ocsp::OcspRequest request;
        request.cert_ids.push_back(ocsp::make_cert_id(der::oid::kSha1, config_.issuer, config_.ca_key, serial));
        if (config_.send_nonce) {
            Bytes nonce(16);
            if (RAND_bytes(nonce.data(), static_cast<int>(nonce.size())) != 1) {
                throw Error(ErrorCode::InvalidArgument, "RAND_bytes failed");
            }
            request.nonce = std::move(nonce);
        }
        auto exchange = http::post(http::Url::parse(config_.endpoints.ocsp_url), http::kOcspRequestType,
                                   ocsp::encode_ocsp_request(request),
                                   http::ClientOptions{config_.policy.ocsp_timeout, false});
        if (exchange.status != 200) {
            attempt.fail("OCSP HTTP " + std::to_string(exchange.status));
            return std::nullopt;
        }
        auto response = ocsp::decode_ocsp_response(exchange.body);
        if (response.status != ocsp::ResponseStatus::Successful) {
            attempt.fail("OCSP " + std::string(ocsp::to_string(response.status)));
            return std::nullopt;
        }
        if (!ocsp::verify_ocsp_response(response, config_.ca_key)) {
            attempt.signature_failed = true;
            attempt.fail("OCSP response signature invalid");
            return std::nullopt;
        }
        if (response.nonce != request.nonce || response.responses.size() != 1 ||
            response.responses.front().cert_id != request.cert_ids.front()) {
            attempt.fail("OCSP response does not answer the request");
            return std::nullopt;
        }
        StatusResult r;
        r.status = response.responses.front().status;
        r.source = Source::Ocsp;
        r.bytes_used = exchange.total_bytes();
        return r;
    } catch (const Error& e) {
        attempt.fail(std::string("OCSP: ") + e.what());
        return std::nullopt;
    }
}

std::optional<StatusResult> HybridClient::try_crl(const SerialNumber& serial, Attempt& attempt) {
    const auto& eps = config_.endpoints;
    const bool prefer_pem = config_.policy.preferred_crl_format == CrlFormat::Pem;
    std::string url = prefer_pem ? eps.crl_pem_url : eps.crl_der_url;
    if (url.empty()) url = prefer_pem ? eps.crl_der_url : eps.crl_pem_url;
    if (url.empty()) return std::nullopt;
    try {
        auto exchange = http::get(http::Url::parse(url), http::ClientOptions{config_.policy.ocsp_timeout, false});
        if (exchange.status != 200) {
            attempt.fail("CRL HTTP " + std::to_string(exchange.status));
            return std::nullopt;
        }
        auto text = as_chars(exchange.body);
        auto crl = text.starts_with("-----BEGIN") ? crl_from_pem(text) : decode_crl_der(exchange.body);
        if (crl.issuer != config_.issuer) {
            attempt.fail("CRL issued by " + crl.issuer.to_string());
            return std::nullopt;
        }
        auto now = config_.clocks.steady();
        auto snapshot = std::make_shared<const store::StoreSnapshot>(store::snapshot_from_crl(crl, config_.ca_key, now));
        cache_ = CrlCache{std::move(crl), std::move(snapshot), now, config_.policy.cache_ttl};
        StatusResult r = via_cache(serial, false);
        r.source = Source::CrlFetch;
        r.bytes_used = exchange.total_bytes();
        return r;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SignatureInvalid) attempt.signature_failed = true;
        attempt.fail(std::string("CRL: ") + e.what());
        return std::nullopt;
    }
}

StatusResult HybridClient::resolve(const SerialNumber& serial, Decision decision) {
    Attempt attempt;
    if (decision == Decision::UseCache) {
        auto r = via_cache(serial, false);
        r.latency_ms = attempt.elapsed_ms();
        return r;
    }
    std::optional<StatusResult> result;
    if (decision == Decision::UseOcsp) {
        result = try_ocsp(serial, attempt);
        if (!result) result = try_crl(serial, attempt);
    } else {
        result = try_crl(serial, attempt);
        if (!result) result = try_ocsp(serial, attempt);
    }
    if (!result && cache_) {
        spdlog::debug("all network paths failed ({}); answering from cached CRL", attempt.summary());
        result = via_cache(serial, !cache_valid());
    }
    if (!result) {
        throw Error(attempt.signature_failed ? ErrorCode::SignatureInvalid : ErrorCode::AllPathsFailed,
                    attempt.summary());
    }
    result->latency_ms = attempt.elapsed_ms();
    return *result;
}

StatusResult HybridClient::check(const SerialNumber& serial) {
    std::optional<std::size_t> count;
    if (cache_) count = cache_->record_count();
    return resolve(serial, choose_protocol(config_.policy, 1, count, cache_valid()));
}

std::vector<StatusResult> HybridClient::check_many(const std::vector<SerialNumber>& serials) {
    if (serials.empty()) throw Error(ErrorCode::InvalidArgument, "no serials to check");
    if (serials.size() == 1) return {check(serials.front())};

    std::optional<std::size_t> count;
    if (cache_) count = cache_->record_count();
    auto decision = choose_protocol(config_.policy, serials.size(), count, cache_valid());
    std::vector<StatusResult> out;
    out.reserve(serials.size());

    if (decision == Decision::UseCrlFetch) {
        Attempt attempt;
        if (auto first = try_crl(serials.front(), attempt)) {
            first->latency_ms = attempt.elapsed_ms();
            out.push_back(*first);
            for (std::size_t i = 1; i < serials.size(); ++i) out.push_back(resolve(serials[i], Decision::UseCache));
            return out;
        }
        // The CRL is unreachable: answer each serial over OCSP, then from a stale cache.
        for (const auto& s : serials) {
            Attempt per;
            auto r = try_ocsp(s, per);
            if (!r && cache_) r = via_cache(s, !cache_valid());
            if (!r) {
                per.failures.insert(per.failures.begin(), attempt.failures.begin(), attempt.failures.end());
                throw Error(per.signature_failed || attempt.signature_failed ? ErrorCode::SignatureInvalid
                                                                              : ErrorCode::AllPathsFailed,
                            per.summary());
            }
            r->latency_ms = per.elapsed_ms();
            out.push_back(*r);
        }
        return out;
    }
    for (const auto& s : serials) {
        out.push_back(resolve(s, cache_valid() ? Decision::UseCache : decision));
    }
    return out;
}

} // namespace hocsp::client
