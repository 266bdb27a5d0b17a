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

// A closed DER subset: exactly the universal types and context tags that CRLs,
// OCSP messages and a self-signed CA certificate need. Decoding is strict; BER
// forms (indefinite length, non-minimal length, padded integers) are rejected.

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hocsp/bytes.hpp"

namespace hocsp::der {

namespace tag {
inline constexpr std::uint8_t kBoolean = 0x01;
inline constexpr std::uint8_t kInteger = 0x02;
inline constexpr std::uint8_t kBitString = 0x03;
inline constexpr std::uint8_t kOctetString = 0x04;
inline constexpr std::uint8_t kNull = 0x05;
inline constexpr std::uint8_t kOid = 0x06;
inline constexpr std::uint8_t kEnumerated = 0x0A;
inline constexpr std::uint8_t kUtf8String = 0x0C;
inline constexpr std::uint8_t kPrintableString = 0x13;
inline constexpr std::uint8_t kUtcTime = 0x17;
inline constexpr std::uint8_t kGeneralizedTime = 0x18;
inline constexpr std::uint8_t kSequence = 0x30;
inline constexpr std::uint8_t kSet = 0x31;

/// [n] with the constructed bit set (EXPLICIT tagging).
constexpr std::uint8_t explicit_ctx(unsigned n) { return static_cast<std::uint8_t>(0xA0 | n); }
/// [n] primitive (IMPLICIT tagging of a primitive type).
constexpr std::uint8_t implicit_ctx(unsigned n) { return static_cast<std::uint8_t>(0x80 | n); }
} // namespace tag

// ---------------------------------------------------------------------------
// TLV framing

/// tag ‖ minimal length ‖ payload.
Bytes encode_tlv(std::uint8_t tag, ByteView payload);

/// Length octets alone, minimal form.
Bytes encode_length(std::size_t length);

struct Tlv {
    std::uint8_t tag = 0;
    ByteView payload;
    ByteView rest;
    /// The complete element (header and payload).
    ByteView whole;
};

/// Splits one element off the front of `input`. Multi-byte tags are
/// rejected as UnexpectedTag since nothing in this codec uses them.
Tlv decode_tlv(ByteView input);

/// Sequential reader over the content of a constructed element.
class Reader {
public:
    explicit Reader(ByteView input) : rest_(input) {}

    bool empty() const noexcept { return rest_.empty(); }
    std::optional<std::uint8_t> peek_tag() const noexcept {
        if (rest_.empty()) return std::nullopt;
        return rest_.front();
    }

    Tlv next();
    /// Reads the next element and throws UnexpectedTag unless it carries `tag`.
    Tlv expect(std::uint8_t tag);
    /// Reads the next element only if it carries `tag`.
    std::optional<Tlv> optional(std::uint8_t tag);
    /// Throws NonCanonical if anything is left.
    void finish() const;

private:
    ByteView rest_;
};

/// Concatenates pre-encoded elements into one constructed element.
Bytes constructed(std::uint8_t tag, std::initializer_list<ByteView> parts);
Bytes sequence(std::initializer_list<ByteView> parts);

// ---------------------------------------------------------------------------
// INTEGER / ENUMERATED / BOOLEAN / NULL

/// Content octets for a non-negative integer given as big-endian magnitude
/// (leading zero octets are ignored). A 0x00 pad is added iff the first
/// significant octet has its MSB set.
Bytes encode_integer(ByteView magnitude);
Bytes encode_integer(std::uint64_t value);

/// Inverse of encode_integer: returns the minimal magnitude ({0x00} for zero).
/// Rejects empty content, redundant leading octets and negative values.
Bytes decode_unsigned_integer(ByteView content);
std::uint64_t decode_small_unsigned(ByteView content);

Bytes encode_integer_tlv(std::uint64_t value);
Bytes encode_enumerated_tlv(std::uint64_t value);
Bytes encode_boolean_tlv(bool value);
bool decode_boolean(ByteView content);
Bytes null_tlv();

// ---------------------------------------------------------------------------
// OBJECT IDENTIFIER

struct ObjectIdentifier {
    std::vector<std::uint64_t> arcs;

    ObjectIdentifier() = default;
    ObjectIdentifier(std::initializer_list<std::uint64_t> a) : arcs(a) {}
    explicit ObjectIdentifier(std::vector<std::uint64_t> a) : arcs(std::move(a)) {}

    /// Parses dotted form, e.g. "2.5.29.21".
    static ObjectIdentifier parse(std::string_view dotted);
    std::string to_string() const;
    /// Throws EmptyOid or InvalidOid when the arc list cannot be encoded.
    void validate() const;

    auto operator<=>(const ObjectIdentifier&) const = default;
    bool operator==(const ObjectIdentifier&) const = default;
};

Bytes encode_oid(const ObjectIdentifier& oid);
ObjectIdentifier decode_oid(ByteView content);
Bytes encode_oid_tlv(const ObjectIdentifier& oid);

namespace oid {
extern const ObjectIdentifier kSha1;                    // 1.3.14.3.2.26
extern const ObjectIdentifier kSha256;                  // 2.16.840.1.101.3.4.2.1
extern const ObjectIdentifier kRsaEncryption;           // 1.2.840.113549.1.1.1
extern const ObjectIdentifier kSha256WithRsaEncryption; // 1.2.840.113549.1.1.11
extern const ObjectIdentifier kCrlReason;               // 2.5.29.21
extern const ObjectIdentifier kBasicConstraints;        // 2.5.29.19
extern const ObjectIdentifier kKeyUsage;                // 2.5.29.15
extern const ObjectIdentifier kSubjectKeyIdentifier;    // 2.5.29.14
extern const ObjectIdentifier kOcspBasic;               // 1.3.6.1.5.5.7.48.1.1
extern const ObjectIdentifier kOcspNonce;               // 1.3.6.1.5.5.7.48.1.2
} // namespace oid

/// AlgorithmIdentifier with explicit NULL parameters, as used for RSA and
/// SHA digests.
Bytes algorithm_identifier(const ObjectIdentifier& algorithm);
/// Returns the algorithm OID; parameters must be absent or NULL.
ObjectIdentifier decode_algorithm_identifier(ByteView content);

// ---------------------------------------------------------------------------
// Time

/// UTC seconds since the Unix epoch; no fractional seconds.
struct Asn1Time {
    std::int64_t epoch_seconds = 0;

    static Asn1Time from_civil(int year, unsigned month, unsigned day, unsigned hour = 0,
                               unsigned minute = 0, unsigned second = 0);
    static Asn1Time now();
    int year() const;
    /// ISO-8601, e.g. "2023-05-04T19:57:27Z".
    std::string to_iso8601() const;
    /// OpenSSL style, e.g. "May  4 19:57:27 2023 GMT".
    std::string to_display() const;
    static Asn1Time parse_iso8601(std::string_view text);

    auto operator<=>(const Asn1Time&) const = default;
};

/// UTCTime for 1950..2049, GeneralizedTime for 2050..9999 (full TLV).
Bytes encode_time(Asn1Time t);
/// Always GeneralizedTime (OCSP uses it regardless of year).
Bytes encode_generalized_time(Asn1Time t);
/// Accepts a full UTCTime or GeneralizedTime TLV.
Asn1Time decode_time(ByteView tlv);
Asn1Time decode_time(const Tlv& tlv);

// ---------------------------------------------------------------------------
// Strings and bit strings

Bytes encode_string_tlv(std::uint8_t string_tag, std::string_view value);
bool is_printable_string(std::string_view value);

/// BIT STRING with zero unused bits.
Bytes encode_bit_string_tlv(ByteView bits);
/// Content must declare zero unused bits.
ByteView decode_bit_string(ByteView content);

// ---------------------------------------------------------------------------
// PEM armor

struct PemBlock {
    std::string label;
    Bytes der;

    bool operator==(const PemBlock&) const = default;
};

/// "-----BEGIN <label>-----\n", base64 at 64 columns, "-----END <label>-----\n".
std::string pem_encode(std::string_view label, ByteView der);
/// Decodes the first armored block in `text`. Throws BadArmor on mismatched
/// labels, missing markers or invalid base64.
PemBlock pem_decode(std::string_view text);
/// As pem_decode but additionally requires the given label.
Bytes pem_decode(std::string_view text, std::string_view expected_label);

} // namespace hocsp::der
