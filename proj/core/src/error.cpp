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
#include "hocsp/error.hpp"

#include "hocsp/bytes.hpp"

namespace hocsp {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::NonMinimalLength: return "NonMinimalLength";
    case ErrorCode::IndefiniteLength: return "IndefiniteLength";
    case ErrorCode::UnexpectedTag: return "UnexpectedTag";
    case ErrorCode::NonCanonical: return "NonCanonical";
    case ErrorCode::EmptyOid: return "EmptyOid";
    case ErrorCode::InvalidOid: return "InvalidOid";
    case ErrorCode::ArcOverflow: return "ArcOverflow";
    case ErrorCode::MalformedTime: return "MalformedTime";
    case ErrorCode::BadArmor: return "BadArmor";
    case ErrorCode::InvalidSerial: return "InvalidSerial";
    case ErrorCode::InvalidReason: return "InvalidReason";
    case ErrorCode::InvalidName: return "InvalidName";
    case ErrorCode::DuplicateSerial: return "DuplicateSerial";
    case ErrorCode::SigningFailure: return "SigningFailure";
    case ErrorCode::MalformedCrl: return "MalformedCrl";
    case ErrorCode::UnsupportedAlgorithm: return "UnsupportedAlgorithm";
    case ErrorCode::KeyError: return "KeyError";
    case ErrorCode::AlreadyRevoked: return "AlreadyRevoked";
    case ErrorCode::PersistenceFailure: return "PersistenceFailure";
    case ErrorCode::BindFailure: return "BindFailure";
    case ErrorCode::SignatureInvalid: return "SignatureInvalid";
    case ErrorCode::FetchFailure: return "FetchFailure";
    case ErrorCode::NoSnapshotYet: return "NoSnapshotYet";
    case ErrorCode::Malformed: return "Malformed";
    case ErrorCode::AllPathsFailed: return "AllPathsFailed";
    case ErrorCode::EndpointUnavailable: return "EndpointUnavailable";
    case ErrorCode::TargetDown: return "TargetDown";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

std::string to_hex(ByteView data) {
    static constexpr char kDigits[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(data.size() * 2);
    for (auto b : data) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0x0F]);
    }
    return out;
}

namespace {
int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}
} // namespace

Bytes from_hex(std::string_view hex) {
    std::string digits;
    if (hex.size() % 2 == 1) digits.push_back('0');
    digits.append(hex);
    Bytes out;
    out.reserve(digits.size() / 2);
    for (std::size_t i = 0; i < digits.size(); i += 2) {
        int hi = hex_value(digits[i]);
        int lo = hex_value(digits[i + 1]);
        if (hi < 0 || lo < 0) {
            throw Error(ErrorCode::InvalidArgument, "not a hex string: " + std::string(hex));
        }
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

} // namespace hocsp
