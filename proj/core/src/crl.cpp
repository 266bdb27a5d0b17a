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
#include "hocsp/crl.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "hocsp/error.hpp"

namespace hocsp {

namespace tag = der::tag;

// ---------------------------------------------------------------------------
// SerialNumber

SerialNumber SerialNumber::from_bytes(ByteView big_endian) {
    auto first = std::find_if(big_endian.begin(), big_endian.end(), [](auto b) { return b != 0; });
    SerialNumber s;
    if (first == big_endian.end()) return s;
    if (big_endian.end() - first > 20) throw Error(ErrorCode::InvalidSerial, "serial longer than 20 octets");
    s.magnitude_.assign(first, big_endian.end());
    return s;
}

SerialNumber SerialNumber::from_hex(std::string_view hex) {
    if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
    if (hex.empty()) throw Error(ErrorCode::InvalidSerial, "empty serial");
    try {
        return from_bytes(hocsp::from_hex(hex));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidSerial) throw;
        throw Error(ErrorCode::InvalidSerial, "not a hex serial: " + std::string(hex));
    }
}

SerialNumber SerialNumber::from_u64(std::uint64_t value) {
    Bytes be(8);
    for (int i = 7; i >= 0; --i, value >>= 8) be[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(value);
    return from_bytes(be);
}

SerialNumber SerialNumber::parse(std::string_view text) {
    if (text.starts_with("0d") || text.starts_with("0D")) {
        auto digits = text.substr(2);
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
        if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size()) {
            throw Error(ErrorCode::InvalidSerial, "bad decimal serial: " + std::string(text));
        }
        return from_u64(v);
    }
    return from_hex(text);
}

std::string SerialNumber::to_hex() const { return hocsp::to_hex(magnitude_); }

std::strong_ordering SerialNumber::operator<=>(const SerialNumber& other) const {
    if (auto c = magnitude_.size() <=> other.magnitude_.size(); c != 0) return c;
    return std::lexicographical_compare_three_way(magnitude_.begin(), magnitude_.end(), other.magnitude_.begin(),
                                                  other.magnitude_.end());
}

// ---------------------------------------------------------------------------
// CrlReason

namespace {
struct ReasonName {
    CrlReason reason;
    std::string_view display;
    std::string_view flag;
};

constexpr ReasonName kReasons[] = {
    {CrlReason::Unspecified, "Unspecified", "unspecified"},
    {CrlReason::KeyCompromise, "Key Compromise", "key-compromise"},
    {CrlReason::CaCompromise, "CA Compromise", "ca-compromise"},
    {CrlReason::AffiliationChanged, "Affiliation Changed", "affiliation-changed"},
    {CrlReason::Superseded, "Superseded", "superseded"},
    {CrlReason::CessationOfOperation, "Cessation Of Operation", "cessation-of-operation"},
    {CrlReason::CertificateHold, "Certificate Hold", "certificate-hold"},
    {CrlReason::RemoveFromCrl, "Remove From CRL", "remove-from-crl"},
    {CrlReason::PrivilegeWithdrawn, "Privilege Withdrawn", "privilege-withdrawn"},
    {CrlReason::AaCompromise, "AA Compromise", "aa-compromise"},
};

const ReasonName& reason_entry(CrlReason r) {
    for (const auto& e : kReasons) {
        if (e.reason == r) return e;
    }
    throw Error(ErrorCode::InvalidReason, "unknown reason value");
}
} // namespace

CrlReason reason_from_code(std::uint64_t code) {
    for (const auto& e : kReasons) {
        if (static_cast<std::uint64_t>(e.reason) == code) return e.reason;
    }
    throw Error(ErrorCode::InvalidReason, "reason code " + std::to_string(code) + " is not assigned");
}

std::string_view reason_display_name(CrlReason reason) { return reason_entry(reason).display; }
std::string_view reason_flag_name(CrlReason reason) { return reason_entry(reason).flag; }

CrlReason reason_from_flag(std::string_view name) {
    for (const auto& e : kReasons) {
        if (e.flag == name) return e.reason;
    }
    throw Error(ErrorCode::InvalidReason, "unknown reason name: " + std::string(name));
}

// ---------------------------------------------------------------------------
// DistinguishedName

namespace {
struct AttributeName {
    std::string_view short_name;
    ObjectIdentifier oid;
};

const std::vector<AttributeName>& attribute_names() {
    static const std::vector<AttributeName> names = {
        {"C", {2, 5, 4, 6}},  {"ST", {2, 5, 4, 8}},  {"L", {2, 5, 4, 7}},
        {"O", {2, 5, 4, 10}}, {"OU", {2, 5, 4, 11}}, {"CN", {2, 5, 4, 3}},
        {"serialNumber", {2, 5, 4, 5}},
    };
    return names;
}

std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n";
    while (!s.empty() && ws.find(s.front()) != std::string_view::npos) s.remove_prefix(1);
    while (!s.empty() && ws.find(s.back()) != std::string_view::npos) s.remove_suffix(1);
    return s;
}

const ObjectIdentifier kCountryName{2, 5, 4, 6};
} // namespace

DistinguishedName DistinguishedName::parse(std::string_view text) {
    DistinguishedName dn;
    char separator = ',';
    text = trim(text);
    if (text.starts_with('/')) {
        separator = '/';
        text.remove_prefix(1);
    }
    while (!text.empty()) {
        auto cut = text.find(separator);
        auto part = trim(text.substr(0, cut));
        auto eq = part.find('=');
        if (eq == std::string_view::npos || eq == 0) {
            throw Error(ErrorCode::InvalidName, "expected KEY=value, got \"" + std::string(part) + "\"");
        }
        auto key = trim(part.substr(0, eq));
        auto value = trim(part.substr(eq + 1));
        Attribute attr;
        auto it = std::find_if(attribute_names().begin(), attribute_names().end(),
                               [&](const auto& n) { return n.short_name == key; });
        if (it != attribute_names().end()) {
            attr.type = it->oid;
        } else {
            attr.type = ObjectIdentifier::parse(key);
        }
        attr.value = std::string(value);
        attr.string_tag = attr.type == kCountryName ? tag::kPrintableString : tag::kUtf8String;
        dn.attributes.push_back(std::move(attr));
        if (cut == std::string_view::npos) break;
        text.remove_prefix(cut + 1);
    }
    if (dn.attributes.empty()) throw Error(ErrorCode::InvalidName, "empty distinguished name");
    return dn;
}

std::string DistinguishedName::to_string() const {
    std::string out;
    for (const auto& a : attributes) {
        if (!out.empty()) out += ", ";
        auto it = std::find_if(attribute_names().begin(), attribute_names().end(),
                               [&](const auto& n) { return n.oid == a.type; });
        out += it != attribute_names().end() ? std::string(it->short_name) : a.type.to_string();
        out += '=';
        out += a.value;
    }
    return out;
}

Bytes DistinguishedName::encode() const {
    Bytes rdns;
    for (const auto& a : attributes) {
        auto atv = der::sequence({der::encode_oid_tlv(a.type), der::encode_string_tlv(a.string_tag, a.value)});
        append(rdns, der::encode_tlv(tag::kSet, atv));
    }
    return der::encode_tlv(tag::kSequence, rdns);
}

DistinguishedName DistinguishedName::decode(ByteView name_tlv) {
    auto outer = der::decode_tlv(name_tlv);
    if (outer.tag != tag::kSequence) throw Error(ErrorCode::InvalidName, "Name must be a SEQUENCE");
    if (!outer.rest.empty()) throw Error(ErrorCode::InvalidName, "trailing data after Name");
    DistinguishedName dn;
    der::Reader rdns(outer.payload);
    while (!rdns.empty()) {
        der::Reader set(rdns.expect(tag::kSet).payload);
        der::Reader atv(set.expect(tag::kSequence).payload);
        set.finish(); // multi-valued RDNs are not produced by anything here
        Attribute a;
        a.type = der::decode_oid(atv.expect(tag::kOid).payload);
        auto value = atv.next();
        if (value.tag != tag::kUtf8String && value.tag != tag::kPrintableString && value.tag != 0x16) {
            throw Error(ErrorCode::InvalidName, "unsupported attribute string type");
        }
        a.string_tag = value.tag;
        a.value = std::string(as_chars(value.payload));
        atv.finish();
        dn.attributes.push_back(std::move(a));
    }
    return dn;
}

// ---------------------------------------------------------------------------
// Encoding

namespace {

Bytes encode_extension(const Extension& ext) {
    Bytes body = der::encode_oid_tlv(ext.id);
    if (ext.critical) append(body, der::encode_boolean_tlv(true));
    append(body, der::encode_tlv(tag::kOctetString, ext.value));
    return der::encode_tlv(tag::kSequence, body);
}

Bytes encode_extensions(const std::vector<Extension>& exts) {
    Bytes body;
    for (const auto& e : exts) append(body, encode_extension(e));
    return der::encode_tlv(tag::kSequence, body);
}

Extension reason_extension(CrlReason reason) {
    return Extension{der::oid::kCrlReason, false, der::encode_enumerated_tlv(static_cast<std::uint8_t>(reason))};
}

Bytes encode_entry(const RevokedEntry& e) {
    Bytes body = der::encode_tlv(tag::kInteger, der::encode_integer(e.serial.bytes()));
    append(body, der::encode_time(e.revocation_date));
    if (e.has_extensions()) {
        std::vector<Extension> exts;
        if (e.reason) exts.push_back(reason_extension(*e.reason));
        exts.insert(exts.end(), e.other_extensions.begin(), e.other_extensions.end());
        append(body, encode_extensions(exts));
    }
    return der::encode_tlv(tag::kSequence, body);
}

std::string algorithm_name(const ObjectIdentifier& oid) {
    if (oid == der::oid::kSha256WithRsaEncryption) return "sha256WithRSAEncryption";
    return oid.to_string();
}

} // namespace

Bytes encode_tbs_cert_list(const CertificateRevocationList& crl) {
    if (crl.version != 1 && crl.version != 2) throw Error(ErrorCode::MalformedCrl, "version must be 1 or 2");
    Bytes body;
    if (crl.version == 2) append(body, der::encode_integer_tlv(1));
    append(body, der::algorithm_identifier(crl.signature_algorithm));
    append(body, crl.issuer.encode());
    append(body, der::encode_time(crl.this_update));
    if (crl.next_update) append(body, der::encode_time(*crl.next_update));
    if (!crl.entries.empty()) {
        Bytes list;
        for (const auto& e : crl.entries) append(list, encode_entry(e));
        append(body, der::encode_tlv(tag::kSequence, list));
    }
    if (!crl.extensions.empty()) {
        append(body, der::encode_tlv(tag::explicit_ctx(0), encode_extensions(crl.extensions)));
    }
    return der::encode_tlv(tag::kSequence, body);
}

Bytes encode_crl_der(const CertificateRevocationList& crl) {
    return der::sequence({encode_tbs_cert_list(crl), der::algorithm_identifier(crl.signature_algorithm),
                          der::encode_bit_string_tlv(crl.signature)});
}

CertificateRevocationList build_crl(DistinguishedName issuer, std::vector<RevokedEntry> entries,
                                    Asn1Time this_update, std::optional<Asn1Time> next_update,
                                    const SignatureProvider& signer) {
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.serial < b.serial; });
    auto dup = std::adjacent_find(entries.begin(), entries.end(),
                                  [](const auto& a, const auto& b) { return a.serial == b.serial; });
    if (dup != entries.end()) throw Error(ErrorCode::DuplicateSerial, "serial " + dup->serial.to_hex());
    if (next_update && *next_update <= this_update) {
        throw Error(ErrorCode::InvalidArgument, "nextUpdate must be after thisUpdate");
    }

    CertificateRevocationList crl;
    crl.version = std::any_of(entries.begin(), entries.end(), [](const auto& e) { return e.has_extensions(); })
                      ? 2
                      : 1;
    crl.signature_algorithm = signer.algorithm();
    crl.issuer = std::move(issuer);
    crl.this_update = this_update;
    crl.next_update = next_update;
    crl.entries = std::move(entries);
    crl.signature = signer.sign(encode_tbs_cert_list(crl));
    return crl;
}

// ---------------------------------------------------------------------------
// Decoding

namespace {

Asn1Time decode_canonical_time(const der::Tlv& tlv) {
    auto t = der::decode_time(tlv);
    auto canonical = der::encode_time(t);
    if (!std::equal(canonical.begin(), canonical.end(), tlv.whole.begin(), tlv.whole.end())) {
        throw Error(ErrorCode::NonCanonical, "time must be UTCTime before 2050 and GeneralizedTime after");
    }
    return t;
}

bool is_time_tag(std::optional<std::uint8_t> t) { return t == tag::kUtcTime || t == tag::kGeneralizedTime; }

std::vector<Extension> decode_extensions(ByteView content) {
    std::vector<Extension> out;
    der::Reader list(content);
    if (list.empty()) throw Error(ErrorCode::NonCanonical, "empty Extensions");
    while (!list.empty()) {
        der::Reader r(list.expect(tag::kSequence).payload);
        Extension e;
        e.id = der::decode_oid(r.expect(tag::kOid).payload);
        if (auto crit = r.optional(tag::kBoolean)) {
            e.critical = der::decode_boolean(crit->payload);
            if (!e.critical) throw Error(ErrorCode::NonCanonical, "DEFAULT FALSE encoded explicitly");
        }
        auto value = r.expect(tag::kOctetString).payload;
        e.value.assign(value.begin(), value.end());
        r.finish();
        out.push_back(std::move(e));
    }
    return out;
}

RevokedEntry decode_entry(ByteView content) {
    der::Reader r(content);
    RevokedEntry e;
    e.serial = SerialNumber::from_bytes(der::decode_unsigned_integer(r.expect(tag::kInteger).payload));
    e.revocation_date = decode_canonical_time(r.next());
    if (auto exts = r.optional(tag::kSequence)) {
        for (auto& ext : decode_extensions(exts->payload)) {
            if (ext.id == der::oid::kCrlReason) {
                if (e.reason) throw Error(ErrorCode::MalformedCrl, "duplicate reason code extension");
                auto v = der::decode_tlv(ext.value);
                if (v.tag != tag::kEnumerated || !v.rest.empty()) {
                    throw Error(ErrorCode::MalformedCrl, "reason code must be ENUMERATED");
                }
                e.reason = reason_from_code(der::decode_small_unsigned(v.payload));
            } else if (ext.critical) {
                throw Error(ErrorCode::MalformedCrl, "unknown critical entry extension " + ext.id.to_string());
            } else {
                e.other_extensions.push_back(std::move(ext));
            }
        }
    }
    r.finish();
    return e;
}

CertificateRevocationList decode_crl_impl(ByteView input, CrlDecodeOptions options) {
    auto outer = der::decode_tlv(input);
    if (outer.tag != tag::kSequence) throw Error(ErrorCode::UnexpectedTag, "CertificateList must be a SEQUENCE");
    if (!outer.rest.empty()) throw Error(ErrorCode::NonCanonical, "trailing data after CertificateList");

    der::Reader cert_list(outer.payload);
    der::Reader tbs(cert_list.expect(tag::kSequence).payload);
    auto outer_alg = der::decode_algorithm_identifier(cert_list.expect(tag::kSequence).payload);
    auto sig = der::decode_bit_string(cert_list.expect(tag::kBitString).payload);
    cert_list.finish();

    CertificateRevocationList crl;
    crl.version = 1;
    if (auto v = tbs.optional(tag::kInteger)) {
        if (der::decode_small_unsigned(v->payload) != 1) {
            throw Error(ErrorCode::MalformedCrl, "version field present but not v2");
        }
        crl.version = 2;
    }
    crl.signature_algorithm = der::decode_algorithm_identifier(tbs.expect(tag::kSequence).payload);
    if (crl.signature_algorithm != outer_alg) {
        throw Error(ErrorCode::MalformedCrl, "inner and outer signature algorithms differ");
    }
    crl.issuer = DistinguishedName::decode(tbs.expect(tag::kSequence).whole);
    crl.this_update = decode_canonical_time(tbs.next());
    if (is_time_tag(tbs.peek_tag())) crl.next_update = decode_canonical_time(tbs.next());
    if (auto list = tbs.optional(tag::kSequence)) {
        der::Reader entries(list->payload);
        if (entries.empty()) throw Error(ErrorCode::NonCanonical, "empty revokedCertificates must be omitted");
        while (!entries.empty()) crl.entries.push_back(decode_entry(entries.expect(tag::kSequence).payload));
    }
    if (auto exts = tbs.optional(tag::explicit_ctx(0))) {
        der::Reader wrapper(exts->payload);
        crl.extensions = decode_extensions(wrapper.expect(tag::kSequence).payload);
        wrapper.finish();
        for (const auto& e : crl.extensions) {
            if (e.critical) throw Error(ErrorCode::MalformedCrl, "unknown critical CRL extension " + e.id.to_string());
        }
    }
    tbs.finish();

    std::set<SerialNumber> seen;
    for (const auto& e : crl.entries) {
        if (!seen.insert(e.serial).second) throw Error(ErrorCode::MalformedCrl, "duplicate serial " + e.serial.to_hex());
    }
    bool any_ext = !crl.extensions.empty() ||
                   std::any_of(crl.entries.begin(), crl.entries.end(), [](const auto& e) { return e.has_extensions(); });
    if (options.strict_version && crl.version == 1 && any_ext) {
        throw Error(ErrorCode::MalformedCrl, "extensions require a v2 CRL");
    }
    crl.signature.assign(sig.begin(), sig.end());

    // Every field is modelled, so a DER input re-encodes to itself. Anything
    // else means the decoder normalized something the signature covers.
    auto again = encode_crl_der(crl);
    if (!std::equal(again.begin(), again.end(), input.begin(), input.end())) {
        throw Error(ErrorCode::NonCanonical, "CRL does not re-encode to the received bytes");
    }
    return crl;
}

} // namespace

CertificateRevocationList decode_crl_der(ByteView der, CrlDecodeOptions options) {
    try {
        return decode_crl_impl(der, options);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::MalformedCrl) throw;
        throw Error(ErrorCode::MalformedCrl, e.what());
    }
}

std::string crl_to_pem(const CertificateRevocationList& crl) {
    return der::pem_encode(kCrlPemLabel, encode_crl_der(crl));
}

CertificateRevocationList crl_from_pem(std::string_view pem, CrlDecodeOptions options) {
    return decode_crl_der(der::pem_decode(pem, kCrlPemLabel), options);
}

bool verify_crl(const CertificateRevocationList& crl, const PublicKey& issuer_key) {
    return verify_signature(crl.signature_algorithm, encode_tbs_cert_list(crl), crl.signature, issuer_key);
}

std::string render_crl_text(const CertificateRevocationList& crl) {
    std::ostringstream os;
    os << "Certificate Revocation List (CRL):\n";
    os << "  Version " << crl.version << " (0x" << std::hex << (crl.version - 1) << std::dec << ")\n";
    os << "  Signature Algorithm: " << algorithm_name(crl.signature_algorithm) << "\n";
    os << "  Issuer: " << crl.issuer.to_string() << "\n";
    os << "  Last Update: " << crl.this_update.to_display() << "\n";
    os << "  Next Update: " << (crl.next_update ? crl.next_update->to_display() : std::string("NONE")) << "\n";
    if (crl.entries.empty()) {
        os << "No Revoked Certificates.\n";
    } else {
        os << "Revoked Certificates:\n";
    }
    for (const auto& e : crl.entries) {
        os << "  Serial Number: " << e.serial.to_hex() << "\n";
        os << "  Revocation Date: " << e.revocation_date.to_display() << "\n";
        if (e.reason) {
            os << "  CRL entry extensions:\n";
            os << "    X509v3 CRL Reason Code:\n";
            os << "      " << reason_display_name(*e.reason) << "\n";
        }
    }
    os << "Signature Algorithm: " << algorithm_name(crl.signature_algorithm) << "\n";
    os << "Signature Value:\n";
    static constexpr char kDigits[] = "0123456789abcdef";
    for (std::size_t i = 0; i < crl.signature.size(); ++i) {
        auto b = crl.signature[i];
        os << kDigits[b >> 4] << kDigits[b & 0xF];
        bool last = i + 1 == crl.signature.size();
        if (!last) os << ':';
        if (last || i % 18 == 17) os << "\n";
    }
    return os.str();
}

} // namespace hocsp
