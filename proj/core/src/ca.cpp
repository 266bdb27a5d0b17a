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
#include "hocsp/ca.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "hocsp/error.hpp"
#include "hocsp/http.hpp"
#include "http_host.hpp"

namespace hocsp::ca {

namespace fs = std::filesystem;
namespace tag = der::tag;

// ---------------------------------------------------------------------------
// Ledger lines

std::string format_ledger_line(const LedgerRecord& r) {
    return r.serial.to_hex() + " " + std::to_string(static_cast<int>(r.reason)) + " " +
           std::to_string(r.revoked_at.epoch_seconds);
}

LedgerRecord parse_ledger_line(std::string_view line) {
    auto fail = [&] { return Error(ErrorCode::PersistenceFailure, "bad ledger line \"" + std::string(line) + "\""); };
    auto s1 = line.find(' ');
    if (s1 == std::string_view::npos) throw fail();
    auto s2 = line.find(' ', s1 + 1);
    if (s2 == std::string_view::npos) throw fail();
    auto code_text = line.substr(s1 + 1, s2 - s1 - 1);
    auto time_text = line.substr(s2 + 1);
    unsigned code = 0;
    std::int64_t epoch = 0;
    auto r1 = std::from_chars(code_text.data(), code_text.data() + code_text.size(), code);
    auto r2 = std::from_chars(time_text.data(), time_text.data() + time_text.size(), epoch);
    if (r1.ec != std::errc{} || r1.ptr != code_text.data() + code_text.size() || r2.ec != std::errc{} ||
        r2.ptr != time_text.data() + time_text.size()) {
        throw fail();
    }
    try {
        return LedgerRecord{SerialNumber::from_hex(line.substr(0, s1)), reason_from_code(code), Asn1Time{epoch}};
    } catch (const Error&) {
        throw fail();
    }
}

// ---------------------------------------------------------------------------
// RevocationLedger

struct RevocationLedger::State {
    mutable std::mutex mu;
    std::vector<LedgerRecord> records;
    std::unordered_set<SerialNumber> serials;
    std::optional<fs::path> path;
    std::uint64_t generation = 0;
    std::uintmax_t known_size = 0;

    void load_file() {
        std::ifstream in(*path, std::ios::binary);
        if (!in) throw Error(ErrorCode::PersistenceFailure, "cannot read " + path->string());
        std::vector<LedgerRecord> loaded;
        std::unordered_set<SerialNumber> seen;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line.front() == '#') continue;
            auto rec = parse_ledger_line(line);
            if (!seen.insert(rec.serial).second) {
                throw Error(ErrorCode::PersistenceFailure, "duplicate serial in ledger: " + rec.serial.to_hex());
            }
            loaded.push_back(std::move(rec));
        }
        records = std::move(loaded);
        serials = std::move(seen);
        known_size = fs::file_size(*path);
        ++generation;
    }
};

RevocationLedger::RevocationLedger() : state_(std::make_unique<State>()) {}
RevocationLedger::RevocationLedger(RevocationLedger&&) noexcept = default;
RevocationLedger& RevocationLedger::operator=(RevocationLedger&&) noexcept = default;
RevocationLedger::~RevocationLedger() = default;

RevocationLedger RevocationLedger::open(const fs::path& path) {
    RevocationLedger ledger;
    ledger.state_->path = path;
    if (!fs::exists(path)) {
        std::ofstream create(path, std::ios::binary);
        if (!create) throw Error(ErrorCode::PersistenceFailure, "cannot create " + path.string());
    }
    ledger.state_->load_file();
    return ledger;
}

void RevocationLedger::revoke(const SerialNumber& serial, CrlReason reason, Asn1Time at) {
    std::lock_guard lock(state_->mu);
    if (state_->serials.contains(serial)) throw Error(ErrorCode::AlreadyRevoked, serial.to_hex());
    LedgerRecord record{serial, reason, at};
    if (state_->path) {
        auto line = format_ledger_line(record) + "\n";
        int fd = ::open(state_->path->c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
        if (fd < 0) throw Error(ErrorCode::PersistenceFailure, "cannot open " + state_->path->string());
        bool ok = ::write(fd, line.data(), line.size()) == static_cast<ssize_t>(line.size()) && ::fsync(fd) == 0;
        ::close(fd);
        if (!ok) throw Error(ErrorCode::PersistenceFailure, "cannot append to " + state_->path->string());
        state_->known_size += line.size();
    }
    state_->serials.insert(serial);
    state_->records.push_back(std::move(record));
    ++state_->generation;
}

std::vector<LedgerRecord> RevocationLedger::records() const {
    std::lock_guard lock(state_->mu);
    return state_->records;
}

bool RevocationLedger::contains(const SerialNumber& serial) const {
    std::lock_guard lock(state_->mu);
    return state_->serials.contains(serial);
}

std::size_t RevocationLedger::size() const {
    std::lock_guard lock(state_->mu);
    return state_->records.size();
}

std::uint64_t RevocationLedger::generation() const {
    std::lock_guard lock(state_->mu);
    return state_->generation;
}

bool RevocationLedger::reload_if_changed() {
    std::lock_guard lock(state_->mu);
    if (!state_->path) return false;
    std::error_code ec;
    auto size = fs::file_size(*state_->path, ec);
    if (ec || size == state_->known_size) return false;
    state_->load_file();
    return true;
}

void RevocationLedger::save_to(const fs::path& path) const {
    std::string body;
    for (const auto& r : records()) body += format_ledger_line(r) + "\n";
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << body;
        if (!out.flush()) throw Error(ErrorCode::PersistenceFailure, "cannot write " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::PersistenceFailure, "cannot rename to " + path.string());
}

const std::optional<fs::path>& RevocationLedger::path() const { return state_->path; }

// ---------------------------------------------------------------------------
// CA certificate

namespace {

Bytes extension_tlv(const der::ObjectIdentifier& id, bool critical, ByteView value) {
    Bytes body = der::encode_oid_tlv(id);
    if (critical) append(body, der::encode_boolean_tlv(true));
    append(body, der::encode_tlv(tag::kOctetString, value));
    return der::encode_tlv(tag::kSequence, body);
}

} // namespace

Bytes make_ca_certificate(const DistinguishedName& subject, const SignatureProvider& signer, Asn1Time not_before,
                          Asn1Time not_after) {
    auto pub = signer.public_key();
    auto spki = pub.spki_der();
    auto key_id = sha1(pub.key_bits());

    // Serial derived from the key so re-running init with the same key is stable.
    auto serial_seed = sha256(spki);
    serial_seed[0] &= 0x7F;
    serial_seed[0] |= 0x01;
    Bytes serial(serial_seed.begin(), serial_seed.begin() + 8);

    const Bytes basic_constraints = der::sequence({der::encode_boolean_tlv(true)});
    const Bytes key_usage = {tag::kBitString, 0x02, 0x01, 0x06}; // keyCertSign | cRLSign
    Bytes extensions;
    append(extensions, extension_tlv(der::oid::kBasicConstraints, true, basic_constraints));
    append(extensions, extension_tlv(der::oid::kKeyUsage, true, key_usage));
    append(extensions, extension_tlv(der::oid::kSubjectKeyIdentifier, false,
                                     der::encode_tlv(tag::kOctetString, key_id)));

    auto name = subject.encode();
    auto tbs = der::sequence({
        der::encode_tlv(tag::explicit_ctx(0), der::encode_integer_tlv(2)),
        der::encode_tlv(tag::kInteger, der::encode_integer(serial)),
        der::algorithm_identifier(signer.algorithm()),
        name,
        der::sequence({der::encode_time(not_before), der::encode_time(not_after)}),
        name,
        spki,
        der::encode_tlv(tag::explicit_ctx(3), der::encode_tlv(tag::kSequence, extensions)),
    });
    auto signature = signer.sign(tbs);
    return der::sequence({tbs, der::algorithm_identifier(signer.algorithm()), der::encode_bit_string_tlv(signature)});
}

// ---------------------------------------------------------------------------
// CertificateAuthority

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::PersistenceFailure, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view content, fs::perms perms = fs::perms::owner_read |
                                                                                  fs::perms::owner_write |
                                                                                  fs::perms::group_read |
                                                                                  fs::perms::others_read) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out.flush()) throw Error(ErrorCode::PersistenceFailure, "cannot write " + path.string());
    std::error_code ec;
    fs::permissions(path, perms, ec);
}

constexpr std::int64_t kCertificateLifetime = 10LL * 365 * 24 * 3600;

} // namespace

CertificateAuthority::CertificateAuthority(DistinguishedName issuer, std::shared_ptr<const SignatureProvider> signer,
                                           Bytes cert, RevocationLedger ledger, CaOptions options)
    : issuer_(std::move(issuer)),
      signer_(std::move(signer)),
      certificate_(std::move(cert)),
      ledger_(std::move(ledger)),
      options_(options) {}

CertificateAuthority CertificateAuthority::init(const fs::path& dir, const DistinguishedName& issuer, int key_bits,
                                                CaOptions options) {
    CaFiles files{dir};
    if (fs::exists(files.private_key()) || fs::exists(files.ledger())) {
        throw Error(ErrorCode::PersistenceFailure, "a CA already exists in " + dir.string());
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::PersistenceFailure, "cannot create " + dir.string());

    auto key = PrivateKey::generate_rsa(key_bits);
    auto signer = std::make_shared<RsaSha256Signer>(key);
    auto now = Asn1Time::now();
    auto cert = make_ca_certificate(issuer, *signer, now, Asn1Time{now.epoch_seconds + kCertificateLifetime});

    write_file(files.private_key(), key.to_pem(), fs::perms::owner_read | fs::perms::owner_write);
    write_file(files.public_key(), key.public_key().to_pem());
    write_file(files.certificate(), der::pem_encode("CERTIFICATE", cert));
    write_file(files.issuer(), issuer.to_string() + "\n");
    auto ledger = RevocationLedger::open(files.ledger());
    return CertificateAuthority(issuer, std::move(signer), std::move(cert), std::move(ledger), options);
}

CertificateAuthority CertificateAuthority::open(const fs::path& dir, CaOptions options) {
    CaFiles files{dir};
    if (!fs::exists(files.private_key())) {
        throw Error(ErrorCode::PersistenceFailure, "no CA in " + dir.string() + " (run ca-init first)");
    }
    auto issuer_text = read_file(files.issuer());
    while (!issuer_text.empty() && (issuer_text.back() == '\n' || issuer_text.back() == '\r')) issuer_text.pop_back();
    auto signer = std::make_shared<RsaSha256Signer>(PrivateKey::from_pem(read_file(files.private_key())));
    auto cert = der::pem_decode(read_file(files.certificate()), "CERTIFICATE");
    return CertificateAuthority(DistinguishedName::parse(issuer_text), std::move(signer), std::move(cert),
                                RevocationLedger::open(files.ledger()), options);
}

CertificateAuthority CertificateAuthority::in_memory(const DistinguishedName& issuer, PrivateKey key,
                                                     CaOptions options) {
    auto signer = std::make_shared<RsaSha256Signer>(std::move(key));
    auto now = Asn1Time::now();
    auto cert = make_ca_certificate(issuer, *signer, now, Asn1Time{now.epoch_seconds + kCertificateLifetime});
    return CertificateAuthority(issuer, std::move(signer), std::move(cert), RevocationLedger{}, options);
}

CertificateRevocationList CertificateAuthority::issue_crl(Asn1Time now, bool include_next_update) const {
    std::vector<RevokedEntry> entries;
    for (auto& r : ledger_.records()) entries.push_back({std::move(r.serial), r.revoked_at, r.reason, {}});
    std::optional<Asn1Time> next;
    if (include_next_update) next = Asn1Time{now.epoch_seconds + options_.refresh_interval.count()};
    return build_crl(issuer_, std::move(entries), now, next, *signer_);
}

// ---------------------------------------------------------------------------
// CrlDistributionServer

struct CrlDistributionServer::Impl {
    CertificateAuthority& ca;
    CrlServerOptions options;
    detail::ServerHost host;
    std::mutex issue_mu;
    mutable std::mutex snapshot_mu;
    std::shared_ptr<const PublishedCrl> snapshot;
    std::atomic<std::uint64_t> issued{0};

    Impl(CertificateAuthority& authority, CrlServerOptions opts)
        : ca(authority), options(std::move(opts)), host([this](httplib::Server& srv) { configure(srv); }) {}

    std::shared_ptr<const PublishedCrl> load() const {
        std::lock_guard lock(snapshot_mu);
        return snapshot;
    }

    bool fresh(const PublishedCrl* crl, std::uint64_t generation) const {
        return crl && crl->ledger_generation == generation &&
               std::chrono::steady_clock::now() - crl->issued_at < options.refresh_interval;
    }

    std::shared_ptr<const PublishedCrl> current() {
        std::lock_guard issue_lock(issue_mu);
        ca.ledger().reload_if_changed();
        auto generation = ca.ledger().generation();
        auto cached = load();
        if (fresh(cached.get(), generation)) return cached;

        auto next = std::make_shared<PublishedCrl>();
        next->crl = ca.issue_crl(options.clock(), options.include_next_update);
        next->der = encode_crl_der(next->crl);
        next->pem = der::pem_encode(kCrlPemLabel, next->der);
        next->ledger_generation = generation;
        next->issued_at = std::chrono::steady_clock::now();
        {
            std::lock_guard lock(snapshot_mu);
            snapshot = next;
        }
        issued.fetch_add(1, std::memory_order_relaxed);
        return next;
    }

    void configure(httplib::Server& srv) {
        srv.Get("/crl.der", [this](const httplib::Request&, httplib::Response& res) {
            try {
                auto crl = current();
                res.set_content(std::string(as_chars(crl->der)), std::string(http::kCrlDerType));
            } catch (const std::exception& e) {
                spdlog::error("CRL issue failed: {}", e.what());
                res.status = 500;
            }
        });
        srv.Get("/crl.pem", [this](const httplib::Request&, httplib::Response& res) {
            try {
                auto crl = current();
                res.set_content(crl->pem, std::string(http::kPemType));
            } catch (const std::exception& e) {
                spdlog::error("CRL issue failed: {}", e.what());
                res.status = 500;
            }
        });
    }
};

CrlDistributionServer::CrlDistributionServer(CertificateAuthority& ca, CrlServerOptions options)
    : impl_(std::make_unique<Impl>(ca, std::move(options))) {}

CrlDistributionServer::~CrlDistributionServer() { stop(); }

void CrlDistributionServer::start() {
    if (!impl_->host.start(impl_->options.host, impl_->options.port)) {
        throw Error(ErrorCode::BindFailure,
                    "cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
    }
}

void CrlDistributionServer::stop() { impl_->host.stop(); }

int CrlDistributionServer::port() const { return impl_->host.port(); }

std::string CrlDistributionServer::der_url() const {
    return "http://" + impl_->options.host + ":" + std::to_string(port()) + "/crl.der";
}

std::string CrlDistributionServer::pem_url() const {
    return "http://" + impl_->options.host + ":" + std::to_string(port()) + "/crl.pem";
}

std::shared_ptr<const PublishedCrl> CrlDistributionServer::current() { return impl_->current(); }

std::uint64_t CrlDistributionServer::issue_count() const { return impl_->issued.load(); }

} // namespace hocsp::ca
