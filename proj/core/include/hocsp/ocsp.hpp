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

// OCSP messages (RFC 6960 subset: unsigned requests, BasicOCSPResponse with
// responder-by-key) and the HTTP responder backed by a RevocationStore.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hocsp/crl.hpp"
#include "hocsp/crypto.hpp"
#include "hocsp/store.hpp"

namespace hocsp::ocsp {

struct CertId {
    ObjectIdentifier hash_algorithm = der::oid::kSha1;
    Bytes issuer_name_hash;
    Bytes issuer_key_hash;
    SerialNumber serial;

    bool operator==(const CertId&) const = default;
};

/// CertID for `serial` under the CA identified by name and key.
/// Throws UnsupportedAlgorithm for digests other than SHA-1/SHA-256.
CertId make_cert_id(const ObjectIdentifier& hash_algorithm, const DistinguishedName& issuer,
                    const PublicKey& issuer_key, const SerialNumber& serial);

struct OcspRequest {
    std::vector<CertId> cert_ids;
    std::optional<Bytes> nonce;

    bool operator==(const OcspRequest&) const = default;
};

/// Throws InvalidArgument for an empty CertID list or a nonce outside 1..32 octets.
Bytes encode_ocsp_request(const OcspRequest& request);
/// Throws Malformed.
OcspRequest decode_ocsp_request(ByteView der);

enum class ResponseStatus : std::uint8_t {
    Successful = 0,
    MalformedRequest = 1,
    InternalError = 2,
    TryLater = 3,
    SigRequired = 5,
    Unauthorized = 6,
};
std::string_view to_string(ResponseStatus status);

struct SingleResponse {
    CertId cert_id;
    RevocationStatus status;
    Asn1Time this_update;
    std::optional<Asn1Time> next_update;

    bool operator==(const SingleResponse&) const = default;
};

struct OcspResponse {
    ResponseStatus status = ResponseStatus::Successful;
    // Everything below is present only when status is Successful.
    Bytes responder_key_hash;
    Asn1Time produced_at;
    std::vector<SingleResponse> responses;
    std::optional<Bytes> nonce;
    ObjectIdentifier signature_algorithm = der::oid::kSha256WithRsaEncryption;
    Bytes signature;
    std::vector<Bytes> certificates;

    bool operator==(const OcspResponse&) const = default;
};

/// ResponseData DER, the bytes the signature covers.
Bytes encode_response_data(const OcspResponse& response);
Bytes encode_ocsp_response(const OcspResponse& response);
/// Throws Malformed.
OcspResponse decode_ocsp_response(ByteView der);
/// Successful responses only; false for any other status.
bool verify_ocsp_response(const OcspResponse& response, const PublicKey& responder_key);

/// Answers for one CA, signing with that CA's key.
struct ResponderIdentity {
    DistinguishedName issuer;
    std::shared_ptr<const SignatureProvider> signer;
    /// Optional certificates to attach (the CA certificate, as `openssl ocsp`
    /// does by default).
    std::vector<Bytes> certificates;
};

/// The configured CA's name/key digests, as matched against CertIDs.
struct IssuerHashes {
    Bytes name_sha1, key_sha1, name_sha256, key_sha256;
    static IssuerHashes compute(const ResponderIdentity& identity);
};

/// Per CertID: issuer hashes matching the configured CA -> store lookup,
/// anything else (other CA, unsupported digest) -> Unknown. A null snapshot
/// yields TryLater; a signing failure yields InternalError.
OcspResponse build_response(const OcspRequest& request, const store::StoreSnapshot* snapshot,
                            const ResponderIdentity& identity, Asn1Time now,
                            const store::RevocationStore* policy = nullptr);
/// Same, with the issuer digests computed ahead of time.
OcspResponse build_response(const OcspRequest& request, const store::StoreSnapshot* snapshot,
                            const ResponderIdentity& identity, const IssuerHashes& hashes, Asn1Time now,
                            const store::RevocationStore* policy = nullptr);

/// Decodes, answers and encodes one request body; malformed input produces
/// a MalformedRequest response rather than an exception.
class Responder {
public:
    Responder(store::RevocationStore& store, ResponderIdentity identity);

    Bytes handle(ByteView request_der, Asn1Time now = Asn1Time::now()) const;
    const ResponderIdentity& identity() const noexcept { return identity_; }
    store::RevocationStore& store() const noexcept { return store_; }

private:
    store::RevocationStore& store_;
    ResponderIdentity identity_;
    IssuerHashes hashes_;
};

struct OcspServerOptions {
    std::string host = "127.0.0.1";
    int port = 0;
};

/// POST (any path) with an OCSP request body -> 200 application/ocsp-response.
/// Other methods -> 405. stop()/start() may be repeated on the same port to
/// model an outage (connections are refused while stopped).
class OcspServer {
public:
    OcspServer(const Responder& responder, OcspServerOptions options);
    ~OcspServer();
    OcspServer(const OcspServer&) = delete;
    OcspServer& operator=(const OcspServer&) = delete;

    /// Throws BindFailure.
    void start();
    void stop();
    bool running() const;

    int port() const;
    std::string url() const;
    std::uint64_t requests_served() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace hocsp::ocsp
