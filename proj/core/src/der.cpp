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
#include "hocsp/der.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <limits>

#include "hocsp/error.hpp"

namespace hocsp::der {

// ---------------------------------------------------------------------------
// TLV framing

Bytes encode_length(std::size_t length) {
    if (length < 0x80) return {static_cast<std::uint8_t>(length)};
    Bytes octets;
    for (auto v = length; v != 0; v >>= 8) octets.push_back(static_cast<std::uint8_t>(v & 0xFF));
    std::reverse(octets.begin(), octets.end());
    Bytes out;
    out.reserve(octets.size() + 1);
    out.push_back(static_cast<std::uint8_t>(0x80 | octets.size()));
    append(out, octets);
    return out;
}

Bytes encode_tlv(std::uint8_t tag, ByteView payload) {
    auto len = encode_length(payload.size());
    Bytes out;
    out.reserve(1 + len.size() + payload.size());
    out.push_back(tag);
    append(out, len);
    append(out, payload);
    return out;
}

Tlv decode_tlv(ByteView input) {
    if (input.size() < 2) throw Error(ErrorCode::Truncated, "element header needs two octets");
    std::uint8_t tag = input[0];
    if ((tag & 0x1F) == 0x1F) throw Error(ErrorCode::UnexpectedTag, "high tag numbers are unsupported");

    std::size_t header = 2;
    std::size_t length = input[1];
    if (length == 0x80) throw Error(ErrorCode::IndefiniteLength, "indefinite length is not DER");
    if (length > 0x80) {
        std::size_t count = length & 0x7F;
        if (count > 4) throw Error(ErrorCode::Truncated, "length field wider than 32 bits");
        if (input.size() < 2 + count) throw Error(ErrorCode::Truncated, "length octets missing");
        if (input[2] == 0x00) throw Error(ErrorCode::NonMinimalLength, "leading zero in long-form length");
        length = 0;
        for (std::size_t i = 0; i < count; ++i) length = (length << 8) | input[2 + i];
        if (length < 0x80) throw Error(ErrorCode::NonMinimalLength, "long form used for short length");
        header += count;
    }
    if (input.size() - header < length) {
        throw Error(ErrorCode::Truncated, "declared length " + std::to_string(length) + " exceeds input");
    }
    return Tlv{tag, input.subspan(header, length), input.subspan(header + length),
               input.first(header + length)};
}

Tlv Reader::next() {
    if (rest_.empty()) throw Error(ErrorCode::Truncated, "expected another element");
    auto tlv = decode_tlv(rest_);
    rest_ = tlv.rest;
    return tlv;
}

Tlv Reader::expect(std::uint8_t tag) {
    if (rest_.empty()) throw Error(ErrorCode::Truncated, "expected element with tag " + to_hex(ByteView(&tag, 1)));
    if (rest_.front() != tag) {
        throw Error(ErrorCode::UnexpectedTag,
                    "expected tag " + to_hex(ByteView(&tag, 1)) + ", found " + to_hex(rest_.first(1)));
    }
    return next();
}

std::optional<Tlv> Reader::optional(std::uint8_t tag) {
    if (peek_tag() != tag) return std::nullopt;
    return next();
}

void Reader::finish() const {
    if (!rest_.empty()) throw Error(ErrorCode::NonCanonical, "trailing data after last element");
}

Bytes constructed(std::uint8_t tag, std::initializer_list<ByteView> parts) {
    Bytes body;
    for (auto p : parts) append(body, p);
    return encode_tlv(tag, body);
}

Bytes sequence(std::initializer_list<ByteView> parts) { return constructed(tag::kSequence, parts); }

// ---------------------------------------------------------------------------
// INTEGER and friends

Bytes encode_integer(ByteView magnitude) {
    auto first = std::find_if(magnitude.begin(), magnitude.end(), [](auto b) { return b != 0; });
    if (first == magnitude.end()) return {0x00};
    Bytes out;
    if (*first & 0x80) out.push_back(0x00);
    out.insert(out.end(), first, magnitude.end());
    return out;
}

Bytes encode_integer(std::uint64_t value) {
    Bytes be(8);
    for (int i = 7; i >= 0; --i, value >>= 8) be[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(value & 0xFF);
    return encode_integer(be);
}

Bytes decode_unsigned_integer(ByteView content) {
    if (content.empty()) throw Error(ErrorCode::NonCanonical, "empty INTEGER");
    if (content[0] & 0x80) throw Error(ErrorCode::NonCanonical, "negative INTEGER where unsigned expected");
    if (content.size() > 1) {
        if (content[0] == 0x00 && !(content[1] & 0x80)) {
            throw Error(ErrorCode::NonCanonical, "redundant leading zero in INTEGER");
        }
        if (content[0] == 0x00) content = content.subspan(1);
    }
    return Bytes(content.begin(), content.end());
}

std::uint64_t decode_small_unsigned(ByteView content) {
    auto magnitude = decode_unsigned_integer(content);
    if (magnitude.size() > 8) throw Error(ErrorCode::NonCanonical, "INTEGER too large");
    std::uint64_t v = 0;
    for (auto b : magnitude) v = (v << 8) | b;
    return v;
}

Bytes encode_integer_tlv(std::uint64_t value) { return encode_tlv(tag::kInteger, encode_integer(value)); }

Bytes encode_enumerated_tlv(std::uint64_t value) {
    return encode_tlv(tag::kEnumerated, encode_integer(value));
}

Bytes encode_boolean_tlv(bool value) {
    const std::uint8_t v = value ? 0xFF : 0x00;
    return encode_tlv(tag::kBoolean, ByteView(&v, 1));
}

bool decode_boolean(ByteView content) {
    if (content.size() != 1) throw Error(ErrorCode::NonCanonical, "BOOLEAN must be one octet");
    if (content[0] == 0xFF) return true;
    if (content[0] == 0x00) return false;
    throw Error(ErrorCode::NonCanonical, "BOOLEAN true must be 0xFF in DER");
}

Bytes null_tlv() { return {tag::kNull, 0x00}; }

// ---------------------------------------------------------------------------
// OBJECT IDENTIFIER

ObjectIdentifier ObjectIdentifier::parse(std::string_view dotted) {
    ObjectIdentifier out;
    while (!dotted.empty()) {
        auto dot = dotted.find('.');
        auto part = dotted.substr(0, dot);
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc{} || ptr != part.data() + part.size() || part.empty()) {
            throw Error(ErrorCode::InvalidOid, "bad arc in \"" + std::string(dotted) + "\"");
        }
        out.arcs.push_back(v);
        if (dot == std::string_view::npos) break;
        dotted.remove_prefix(dot + 1);
    }
    out.validate();
    return out;
}

std::string ObjectIdentifier::to_string() const {
    std::string s;
    for (std::size_t i = 0; i < arcs.size(); ++i) {
        if (i) s.push_back('.');
        s += std::to_string(arcs[i]);
    }
    return s;
}

void ObjectIdentifier::validate() const {
    if (arcs.size() < 2) throw Error(ErrorCode::EmptyOid, "an OID needs at least two arcs");
    if (arcs[0] > 2) throw Error(ErrorCode::InvalidOid, "first arc must be 0, 1 or 2");
    if (arcs[0] < 2 && arcs[1] >= 40) throw Error(ErrorCode::InvalidOid, "second arc must be < 40");
    if (arcs[0] == 2 && arcs[1] > std::numeric_limits<std::uint64_t>::max() - 80) {
        throw Error(ErrorCode::InvalidOid, "second arc too large");
    }
}

namespace {
void append_base128(Bytes& out, std::uint64_t v) {
    std::uint8_t tmp[10];
    int n = 0;
    do {
        tmp[n++] = static_cast<std::uint8_t>(v & 0x7F);
        v >>= 7;
    } while (v != 0);
    while (n > 0) {
        --n;
        out.push_back(static_cast<std::uint8_t>(tmp[n] | (n > 0 ? 0x80 : 0x00)));
    }
}
} // namespace

Bytes encode_oid(const ObjectIdentifier& oid) {
    oid.validate();
    Bytes out;
    append_base128(out, oid.arcs[0] * 40 + oid.arcs[1]);
    for (std::size_t i = 2; i < oid.arcs.size(); ++i) append_base128(out, oid.arcs[i]);
    return out;
}

ObjectIdentifier decode_oid(ByteView content) {
    if (content.empty()) throw Error(ErrorCode::EmptyOid, "OBJECT IDENTIFIER with no content");
    std::vector<std::uint64_t> values;
    std::uint64_t current = 0;
    bool in_progress = false;
    for (auto b : content) {
        if (!in_progress && b == 0x80) throw Error(ErrorCode::NonCanonical, "leading 0x80 in OID arc");
        if (current > (std::numeric_limits<std::uint64_t>::max() >> 7)) {
            throw Error(ErrorCode::ArcOverflow, "OID arc exceeds 64 bits");
        }
        current = (current << 7) | (b & 0x7F);
        in_progress = (b & 0x80) != 0;
        if (!in_progress) {
            values.push_back(current);
            current = 0;
        }
    }
    if (in_progress) throw Error(ErrorCode::ArcOverflow, "unterminated OID arc");

    ObjectIdentifier oid;
    auto first = values.front();
    if (first < 40) {
        oid.arcs = {0, first};
    } else if (first < 80) {
        oid.arcs = {1, first - 40};
    } else {
        oid.arcs = {2, first - 80};
    }
    oid.arcs.insert(oid.arcs.end(), values.begin() + 1, values.end());
    return oid;
}

Bytes encode_oid_tlv(const ObjectIdentifier& oid) { return encode_tlv(tag::kOid, encode_oid(oid)); }

namespace oid {
const ObjectIdentifier kSha1{1, 3, 14, 3, 2, 26};
const ObjectIdentifier kSha256{2, 16, 840, 1, 101, 3, 4, 2, 1};
const ObjectIdentifier kRsaEncryption{1, 2, 840, 113549, 1, 1, 1};
const ObjectIdentifier kSha256WithRsaEncryption{1, 2, 840, 113549, 1, 1, 11};
const ObjectIdentifier kCrlReason{2, 5, 29, 21};
const ObjectIdentifier kBasicConstraints{2, 5, 29, 19};
const ObjectIdentifier kKeyUsage{2, 5, 29, 15};
const ObjectIdentifier kSubjectKeyIdentifier{2, 5, 29, 14};
const ObjectIdentifier kOcspBasic{1, 3, 6, 1, 5, 5, 7, 48, 1, 1};
const ObjectIdentifier kOcspNonce{1, 3, 6, 1, 5, 5, 7, 48, 1, 2};
} // namespace oid

Bytes algorithm_identifier(const ObjectIdentifier& algorithm) {
    return sequence({encode_oid_tlv(algorithm), null_tlv()});
}

ObjectIdentifier decode_algorithm_identifier(ByteView content) {
    Reader r(content);
    auto id = decode_oid(r.expect(tag::kOid).payload);
    if (auto params = r.optional(tag::kNull)) {
        if (!params->payload.empty()) throw Error(ErrorCode::NonCanonical, "NULL with content");
    }
    r.finish();
    return id;
}

// ---------------------------------------------------------------------------
// Time

namespace {
using namespace std::chrono;

struct Civil {
    int year;
    unsigned month, day, hour, minute, second;
};

Civil to_civil(Asn1Time t) {
    auto secs = sys_seconds{seconds{t.epoch_seconds}};
    auto days = floor<std::chrono::days>(secs);
    year_month_day ymd{days};
    hh_mm_ss hms{secs - days};
    return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
            static_cast<unsigned>(hms.hours().count()), static_cast<unsigned>(hms.minutes().count()),
            static_cast<unsigned>(hms.seconds().count())};
}

bool parse_digits(std::string_view s, std::size_t pos, std::size_t n, unsigned& out) {
    out = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        out = out * 10 + static_cast<unsigned>(s[i] - '0');
    }
    return true;
}

Asn1Time checked_civil(int year, unsigned mo, unsigned d, unsigned h, unsigned mi, unsigned s) {
    year_month_day ymd{std::chrono::year{year}, month{mo}, day{d}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
        throw Error(ErrorCode::MalformedTime, "calendar fields out of range");
    }
    auto tp = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
    return Asn1Time{tp.time_since_epoch().count()};
}

std::string format_digits(const Civil& c, bool four_digit_year) {
    char buf[32];
    if (four_digit_year) {
        std::snprintf(buf, sizeof buf, "%04d%02u%02u%02u%02u%02uZ", c.year, c.month, c.day, c.hour, c.minute,
                      c.second);
    } else {
        std::snprintf(buf, sizeof buf, "%02d%02u%02u%02u%02u%02uZ", c.year % 100, c.month, c.day, c.hour,
                      c.minute, c.second);
    }
    return buf;
}
} // namespace

Asn1Time Asn1Time::from_civil(int year, unsigned month, unsigned day, unsigned hour, unsigned minute,
                              unsigned second) {
    return checked_civil(year, month, day, hour, minute, second);
}

Asn1Time Asn1Time::now() {
    return Asn1Time{duration_cast<seconds>(system_clock::now().time_since_epoch()).count()};
}

int Asn1Time::year() const { return to_civil(*this).year; }

std::string Asn1Time::to_iso8601() const {
    auto c = to_civil(*this);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02u:%02u:%02uZ", c.year, c.month, c.day, c.hour, c.minute,
                  c.second);
    return buf;
}

std::string Asn1Time::to_display() const {
    static constexpr const char* kMonths[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                              "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    auto c = to_civil(*this);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%s %2u %02u:%02u:%02u %d GMT", kMonths[c.month - 1], c.day, c.hour, c.minute,
                  c.second, c.year);
    return buf;
}

Asn1Time Asn1Time::parse_iso8601(std::string_view s) {
    // YYYY-MM-DDTHH:MM:SSZ
    unsigned y, mo, d, h, mi, sec;
    if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':' ||
        s[19] != 'Z' || !parse_digits(s, 0, 4, y) || !parse_digits(s, 5, 2, mo) || !parse_digits(s, 8, 2, d) ||
        !parse_digits(s, 11, 2, h) || !parse_digits(s, 14, 2, mi) || !parse_digits(s, 17, 2, sec)) {
        throw Error(ErrorCode::MalformedTime, "expected YYYY-MM-DDTHH:MM:SSZ, got \"" + std::string(s) + "\"");
    }
    return checked_civil(static_cast<int>(y), mo, d, h, mi, sec);
}

Bytes encode_time(Asn1Time t) {
    auto c = to_civil(t);
    if (c.year < 1950 || c.year > 9999) {
        throw Error(ErrorCode::MalformedTime, "year " + std::to_string(c.year) + " outside 1950..9999");
    }
    if (c.year < 2050) return encode_tlv(tag::kUtcTime, as_bytes(format_digits(c, false)));
    return encode_tlv(tag::kGeneralizedTime, as_bytes(format_digits(c, true)));
}

Bytes encode_generalized_time(Asn1Time t) {
    auto c = to_civil(t);
    if (c.year < 0 || c.year > 9999) throw Error(ErrorCode::MalformedTime, "year outside 0..9999");
    return encode_tlv(tag::kGeneralizedTime, as_bytes(format_digits(c, true)));
}

Asn1Time decode_time(const Tlv& tlv) {
    auto s = as_chars(tlv.payload);
    unsigned y, mo, d, h, mi, sec;
    if (tlv.tag == tag::kUtcTime) {
        if (s.size() != 13 || s[12] != 'Z' || !parse_digits(s, 0, 2, y) || !parse_digits(s, 2, 2, mo) ||
            !parse_digits(s, 4, 2, d) || !parse_digits(s, 6, 2, h) || !parse_digits(s, 8, 2, mi) ||
            !parse_digits(s, 10, 2, sec)) {
            throw Error(ErrorCode::MalformedTime, "UTCTime must be YYMMDDHHMMSSZ");
        }
        y += (y >= 50) ? 1900 : 2000;
    } else if (tlv.tag == tag::kGeneralizedTime) {
        if (s.size() != 15 || s[14] != 'Z' || !parse_digits(s, 0, 4, y) || !parse_digits(s, 4, 2, mo) ||
            !parse_digits(s, 6, 2, d) || !parse_digits(s, 8, 2, h) || !parse_digits(s, 10, 2, mi) ||
            !parse_digits(s, 12, 2, sec)) {
            throw Error(ErrorCode::MalformedTime, "GeneralizedTime must be YYYYMMDDHHMMSSZ");
        }
    } else {
        throw Error(ErrorCode::MalformedTime, "not a time element");
    }
    return checked_civil(static_cast<int>(y), mo, d, h, mi, sec);
}

Asn1Time decode_time(ByteView tlv) {
    auto parsed = decode_tlv(tlv);
    if (!parsed.rest.empty()) throw Error(ErrorCode::MalformedTime, "trailing data after time");
    return decode_time(parsed);
}

// ---------------------------------------------------------------------------
// Strings and bit strings

bool is_printable_string(std::string_view value) {
    return std::all_of(value.begin(), value.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               std::string_view(" '()+,-./:=?").find(c) != std::string_view::npos;
    });
}

Bytes encode_string_tlv(std::uint8_t string_tag, std::string_view value) {
    if (string_tag == tag::kPrintableString && !is_printable_string(value)) {
        throw Error(ErrorCode::InvalidName, "value not representable as PrintableString: " + std::string(value));
    }
    return encode_tlv(string_tag, as_bytes(value));
}

Bytes encode_bit_string_tlv(ByteView bits) {
    Bytes content;
    content.reserve(bits.size() + 1);
    content.push_back(0x00);
    append(content, bits);
    return encode_tlv(tag::kBitString, content);
}

ByteView decode_bit_string(ByteView content) {
    if (content.empty()) throw Error(ErrorCode::Truncated, "BIT STRING without unused-bits octet");
    if (content[0] != 0x00) throw Error(ErrorCode::NonCanonical, "BIT STRING with unused bits");
    return content.subspan(1);
}

// ---------------------------------------------------------------------------
// PEM armor

namespace {
constexpr std::size_t kPemColumns = 64;

bool is_base64_char(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '+' || c == '/';
}

Bytes base64_decode_strict(std::string_view b64) {
    if (b64.size() % 4 != 0) throw Error(ErrorCode::BadArmor, "base64 length not a multiple of 4");
    std::size_t pad = 0;
    for (std::size_t i = 0; i < b64.size(); ++i) {
        char c = b64[i];
        if (c == '=') {
            if (i + 2 < b64.size()) throw Error(ErrorCode::BadArmor, "base64 padding in the middle");
            ++pad;
        } else if (!is_base64_char(c) || pad > 0) {
            throw Error(ErrorCode::BadArmor, "invalid base64 character");
        }
    }
    Bytes out(b64.size() / 4 * 3);
    if (b64.empty()) return out;
    int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(b64.data()),
                            static_cast<int>(b64.size()));
    if (n < 0) throw Error(ErrorCode::BadArmor, "base64 decode failed");
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}
} // namespace

std::string pem_encode(std::string_view label, ByteView der) {
    if (label.empty() || label.find('-') != std::string_view::npos) {
        throw Error(ErrorCode::BadArmor, "PEM label must be non-empty and free of '-'");
    }
    std::string b64(4 * ((der.size() + 2) / 3), '\0');
    if (!der.empty()) {
        EVP_EncodeBlock(reinterpret_cast<unsigned char*>(b64.data()), der.data(), static_cast<int>(der.size()));
    }
    std::string out = "-----BEGIN " + std::string(label) + "-----\n";
    for (std::size_t i = 0; i < b64.size(); i += kPemColumns) {
        out.append(b64, i, kPemColumns);
        out.push_back('\n');
    }
    out += "-----END " + std::string(label) + "-----\n";
    return out;
}

PemBlock pem_decode(std::string_view text) {
    static constexpr std::string_view kBegin = "-----BEGIN ";
    static constexpr std::string_view kEnd = "-----END ";
    static constexpr std::string_view kDashes = "-----";

    auto begin = text.find(kBegin);
    if (begin == std::string_view::npos) throw Error(ErrorCode::BadArmor, "no BEGIN marker");
    auto label_start = begin + kBegin.size();
    auto label_end = text.find(kDashes, label_start);
    if (label_end == std::string_view::npos) throw Error(ErrorCode::BadArmor, "unterminated BEGIN marker");
    std::string label(text.substr(label_start, label_end - label_start));
    if (label.empty() || label.find('\n') != std::string::npos) throw Error(ErrorCode::BadArmor, "bad label");

    auto body_start = label_end + kDashes.size();
    auto end = text.find(kEnd, body_start);
    if (end == std::string_view::npos) throw Error(ErrorCode::BadArmor, "no END marker");
    auto end_label_start = end + kEnd.size();
    auto end_label_end = text.find(kDashes, end_label_start);
    if (end_label_end == std::string_view::npos) throw Error(ErrorCode::BadArmor, "unterminated END marker");
    if (text.substr(end_label_start, end_label_end - end_label_start) != label) {
        throw Error(ErrorCode::BadArmor, "BEGIN/END labels differ");
    }

    std::string b64;
    for (char c : text.substr(body_start, end - body_start)) {
        if (c == '\n' || c == '\r' || c == ' ' || c == '\t') continue;
        b64.push_back(c);
    }
    return PemBlock{std::move(label), base64_decode_strict(b64)};
}

Bytes pem_decode(std::string_view text, std::string_view expected_label) {
    auto block = pem_decode(text);
    if (block.label != expected_label) {
        throw Error(ErrorCode::BadArmor, "expected \"" + std::string(expected_label) + "\", found \"" +
                                             block.label + "\"");
    }
    return std::move(block.der);
}

} // namespace hocsp::der
