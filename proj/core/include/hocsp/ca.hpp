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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hocsp/crl.hpp"
#include "hocsp/crypto.hpp"

namespace hocsp::ca {

inline constexpr std::chrono::seconds kDefaultRefreshInterval{3600};

struct LedgerRecord {
    SerialNumber serial;
    CrlReason reason = CrlReason::Unspecified;
    Asn1Time revoked_at;

    bool operator==(const LedgerRecord&) const = default;
};

/// "<serial-hex> <reason-code> <revoked-at-epoch>"
std::string format_ledger_line(const LedgerRecord& record);
LedgerRecord parse_ledger_line(std::string_view line);

/// Append-only record of revocations. With a backing file every revoke is
/// written and fsync'ed before it returns. Safe for one writer and many
/// readers; appends are serialized.
class RevocationLedger {
public:
    /// Memory only; nothing is persisted.
    RevocationLedger();
    /// Loads `path`, creating an empty file if it does not exist.
    static RevocationLedger open(const std::filesystem::path& path);

    RevocationLedger(RevocationLedger&&) noexcept;
    RevocationLedger& operator=(RevocationLedger&&) noexcept;
    ~RevocationLedger();

    /// Throws AlreadyRevoked, PersistenceFailure.
    void revoke(const SerialNumber& serial, CrlReason reason, Asn1Time at);

    std::vector<LedgerRecord> records() const;
    bool contains(const SerialNumber& serial) const;
    std::size_t size() const;
    /// Bumped on every change, including ones picked up by reload_if_changed.
    std::uint64_t generation() const;

    /// Re-reads the backing file if another process appended to it.
    /// Returns true when the in-memory view changed.
    bool reload_if_changed();

    /// Writes every record in ledger order.
    void save_to(const std::filesystem::path& path) const;
    const std::optional<std::filesystem::path>& path() const;

private:
    struct State;
    std::unique_ptr<State> state_;
};

/// Self-signed v3 CA certificate (basicConstraints CA, keyCertSign|cRLSign).
/// The responder ships it in OCSP responses the way `openssl ocsp` does.
Bytes make_ca_certificate(const DistinguishedName& subject, const SignatureProvider& signer, Asn1Time not_before,
                          Asn1Time not_after);

struct CaOptions {
    std::chrono::seconds refresh_interval = kDefaultRefreshInterval;
};

/// On-disk layout of a CA directory.
struct CaFiles {
    std::filesystem::path dir;

    std::filesystem::path private_key() const { return dir / "ca-key.pem"; }
    std::filesystem::path public_key() const { return dir / "ca-pub.pem"; }
    std::filesystem::path certificate() const { return dir / "ca-cert.pem"; }
    std::filesystem::path issuer() const { return dir / "issuer.txt"; }
    std::filesystem::path ledger() const { return dir / "ledger.txt"; }
};

class CertificateAuthority {
public:
    /// Creates key, certificate, issuer name and an empty ledger under `dir`.
    /// Throws PersistenceFailure if a CA already exists there.
    static CertificateAuthority init(const std::filesystem::path& dir, const DistinguishedName& issuer,
                                     int key_bits = 2048, CaOptions options = {});
    static CertificateAuthority open(const std::filesystem::path& dir, CaOptions options = {});
    /// Memory-only CA for simulations and tests.
    static CertificateAuthority in_memory(const DistinguishedName& issuer, PrivateKey key, CaOptions options = {});

    CertificateAuthority(CertificateAuthority&&) noexcept = default;
    CertificateAuthority& operator=(CertificateAuthority&&) noexcept = default;

    const DistinguishedName& issuer() const noexcept { return issuer_; }
    const SignatureProvider& signer() const noexcept { return *signer_; }
    PublicKey public_key() const { return signer_->public_key(); }
    const Bytes& certificate_der() const noexcept { return certificate_; }
    RevocationLedger& ledger() noexcept { return ledger_; }
    const RevocationLedger& ledger() const noexcept { return ledger_; }
    std::chrono::seconds refresh_interval() const noexcept { return options_.refresh_interval; }

    void revoke(const SerialNumber& serial, CrlReason reason, Asn1Time at) { ledger_.revoke(serial, reason, at); }

    /// CRL over every ledger record; nextUpdate = now + refresh interval
    /// when requested.
    CertificateRevocationList issue_crl(Asn1Time now, bool include_next_update = true) const;

private:
    CertificateAuthority(DistinguishedName issuer, std::shared_ptr<const SignatureProvider> signer, Bytes cert,
                         RevocationLedger ledger, CaOptions options);

    DistinguishedName issuer_;
    std::shared_ptr<const SignatureProvider> signer_;
    Bytes certificate_;
    RevocationLedger ledger_;
    CaOptions options_;
};

struct CrlServerOptions {
    std::string host = "127.0.0.1";
    int port = 0;
    std::chrono::milliseconds refresh_interval = kDefaultRefreshInterval;
    bool include_next_update = true;
    std::function<Asn1Time()> clock = [] { return Asn1Time::now(); };
};

/// The CRL as last issued, with both wire encodings.
struct PublishedCrl {
    CertificateRevocationList crl;
    Bytes der;
    std::string pem;
    std::uint64_t ledger_generation = 0;
    std::chrono::steady_clock::time_point issued_at;
};

/// Serves GET /crl.der and GET /crl.pem. The cached CRL is re-issued when
/// the ledger changes (including appends by another process) or when it is
/// older than the refresh interval; readers share one immutable snapshot.
class CrlDistributionServer {
public:
    CrlDistributionServer(CertificateAuthority& ca, CrlServerOptions options);
    ~CrlDistributionServer();
    CrlDistributionServer(const CrlDistributionServer&) = delete;
    CrlDistributionServer& operator=(const CrlDistributionServer&) = delete;

    /// Throws BindFailure.
    void start();
    void stop();

    int port() const;
    std::string der_url() const;
    std::string pem_url() const;

    std::shared_ptr<const PublishedCrl> current();
    std::uint64_t issue_count() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace hocsp::ca
