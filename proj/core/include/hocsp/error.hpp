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

#include <stdexcept>
#include <string>
#include <string_view>

namespace hocsp {

/// Every failure the library reports, grouped by the layer that raises it.
enum class ErrorCode {
    // DER / PEM
    Truncated,
    NonMinimalLength,
    IndefiniteLength,
    UnexpectedTag,
    NonCanonical,
    EmptyOid,
    InvalidOid,
    ArcOverflow,
    MalformedTime,
    BadArmor,
    // CRL and keys
    InvalidSerial,
    InvalidReason,
    InvalidName,
    DuplicateSerial,
    SigningFailure,
    MalformedCrl,
    UnsupportedAlgorithm,
    KeyError,
    // CA
    AlreadyRevoked,
    PersistenceFailure,
    BindFailure,
    // store
    SignatureInvalid,
    FetchFailure,
    NoSnapshotYet,
    // OCSP
    Malformed,
    // client / harness
    AllPathsFailed,
    EndpointUnavailable,
    TargetDown,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace hocsp
