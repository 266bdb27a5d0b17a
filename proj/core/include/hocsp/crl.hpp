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

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hocsp/bytes.hpp"
#include "hocsp/crypto.hpp"
#include "hocsp/der.hpp"

namespace hocsp {

using der::Asn1Time;
using der::ObjectIdentifier;

/// Certificate serial: an unsigned integer of 1..20 octets, stored as its
/// minimal big-endian magnitude ({0x00} for zero).
class SerialNumber {
public:
    SerialNumber() : magnitude_{0x00} {}
    /// Leading zero octets are stripped; more than 20 significant octets
    /// throws InvalidSerial.
    static SerialNumber from_bytes(ByteView big_endian);
    static SerialNumber from_hex(std::string_view hex);
    static SerialNumber from_u64(std::uint64_t value);
    /// Hex by default; a "0d" prefix selects decimal (fits in 64 bits).
    static SerialNumber parse(std::string_view text);

    const Bytes& bytes() const noexcept { return magnitude_; }
    std::string to_hex() const;

    std::strong_ordering operator<=>(const SerialNumber& other) const;
    bool operator==(const SerialNumber& other) const = default;

private:
    Bytes magnitude_;
};

/// RFC 5280 CRLReason; 7 is unassigned.
enum class CrlReason : std::uint8_t {
    Unspecified = 0,
    KeyCompromise = 1,
    CaCompromise = 2,
    AffiliationChanged = 3,
    Superseded = 4,
    CessationOfOperation = 5,
    CertificateHold = 6,
    RemoveFromCrl = 8,
    PrivilegeWithdrawn = 9,
    AaCompromise = 10,
};

CrlReason reason_from_code(std::uint64_t code);
/// "Key Compromise", as openssl crl -text prints it.
std::string_view reason_display_name(CrlReason reason);
/// "key-compromise"
std::string_view reason_flag_name(CrlReason reason);
CrlReason reason_from_flag(std::string_view name);

/// Ordered list of single-valued RDNs.
struct DistinguishedName {
    struct Attribute {
        ObjectIdentifier type;
        std::string value;
        std::uint8_t string_tag = der::tag::kUtf8String;

        bool operator==(const Attribute&) const = default;
    };
    std::vector<Attribute> attributes;

    /// "C=aa, ST=aa, L=aa, O=aa, OU=aa, CN=rootca" (also accepts "/C=aa/ST=aa").
    /// countryName is PrintableString, every other attribute UTF8String.
    static DistinguishedName parse(std::string_view text);
    std::string to_string() const;

    Bytes encode() const;
    static DistinguishedName decode(ByteView name_tlv);

    bool operator==(const DistinguishedName&) const = default;
};

struct Extension {
    ObjectIdentifier id;
    bool critical = false;
    Bytes value;

    bool operator==(const Extension&) const = default;
};

struct RevokedEntry {
    SerialNumber serial;
    Asn1Time revocation_date;
    std::optional<CrlReason> reason;
    /// Non-critical entry extensions other than the reason code, kept opaque.
    std::vector<Extension> other_extensions;

    bool has_extensions() const noexcept { return reason.has_value() || !other_extensions.empty(); }
    bool operator==(const RevokedEntry&) const = default;
};

struct CertificateRevocationList {
    int version = 2; ///< 1 or 2, as printed by tools (DER value is version - 1)
    ObjectIdentifier signature_algorithm = der::oid::kSha256WithRsaEncryption;
    DistinguishedName issuer;
    Asn1Time this_update;
    std::optional<Asn1Time> next_update;
    std::vector<RevokedEntry> entries;
    /// crlExtensions; never emitted by build_crl, preserved on decode.
    std::vector<Extension> extensions;
    Bytes signature;

    bool operator==(const CertificateRevocationList&) const = default;
};

/// Builds and signs a CRL. Entries are emitted in ascending serial order;
/// version is 2 when any entry carries extensions, else 1.
/// Throws DuplicateSerial, SigningFailure.
CertificateRevocationList build_crl(DistinguishedName issuer, std::vector<RevokedEntry> entries,
                                    Asn1Time this_update, std::optional<Asn1Time> next_update,
                                    const SignatureProvider& signer);

/// tbsCertList DER for the fields as they stand (the bytes the signature covers).
Bytes encode_tbs_cert_list(const CertificateRevocationList& crl);
Bytes encode_crl_der(const CertificateRevocationList& crl);

struct CrlDecodeOptions {
    /// When false, a version 1 CRL carrying entry extensions is accepted
    /// (some tools print such CRLs).
    bool strict_version = true;
};

/// Throws MalformedCrl (wrapping the underlying DER error text).
CertificateRevocationList decode_crl_der(ByteView der, CrlDecodeOptions options = {});

inline constexpr std::string_view kCrlPemLabel = "X509 CRL";
std::string crl_to_pem(const CertificateRevocationList& crl);
CertificateRevocationList crl_from_pem(std::string_view pem, CrlDecodeOptions options = {});

/// True iff the signature verifies over the re-encoded tbsCertList.
/// Throws UnsupportedAlgorithm.
bool verify_crl(const CertificateRevocationList& crl, const PublicKey& issuer_key);

/// Human-readable rendering in the layout of `openssl crl -text`.
std::string render_crl_text(const CertificateRevocationList& crl);

} // namespace hocsp

template <>
struct std::hash<hocsp::SerialNumber> {
    std::size_t operator()(const hocsp::SerialNumber& s) const noexcept {
        // FNV-1a; serials are already high-entropy.
        std::size_t h = 1469598103934665603ULL;
        for (auto b : s.bytes()) h = (h ^ b) * 1099511628211ULL;
        return h;
    }
};
