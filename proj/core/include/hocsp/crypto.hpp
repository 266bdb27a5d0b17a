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

// Thin RAII layer over OpenSSL for the three things this project signs or
// hashes: CRLs, OCSP responses and the CA certificate.

#include <memory>
#include <string>
#include <string_view>

#include "hocsp/bytes.hpp"
#include "hocsp/der.hpp"

using EVP_PKEY = struct evp_pkey_st;

namespace hocsp {

Bytes sha1(ByteView data);
Bytes sha256(ByteView data);
/// Digest by algorithm OID; throws UnsupportedAlgorithm for anything but
/// SHA-1 and SHA-256.
Bytes digest(const der::ObjectIdentifier& algorithm, ByteView data);

class PublicKey {
public:
    PublicKey() = default;
    static PublicKey from_pem(std::string_view pem);
    /// SubjectPublicKeyInfo DER.
    static PublicKey from_spki_der(ByteView der);

    bool valid() const noexcept { return key_ != nullptr; }
    Bytes spki_der() const;
    /// The subjectPublicKey BIT STRING contents (PKCS#1 RSAPublicKey for RSA);
    /// this is what OCSP issuer key hashes are computed over.
    Bytes key_bits() const;
    std::string to_pem() const;
    int bits() const;

    EVP_PKEY* native() const noexcept { return key_.get(); }

    bool operator==(const PublicKey& other) const;

private:
    friend class PrivateKey;
    std::shared_ptr<EVP_PKEY> key_;
};

class PrivateKey {
public:
    PrivateKey() = default;
    static PrivateKey generate_rsa(int bits);
    static PrivateKey from_pem(std::string_view pem);

    bool valid() const noexcept { return key_ != nullptr; }
    std::string to_pem() const;
    PublicKey public_key() const;

    EVP_PKEY* native() const noexcept { return key_.get(); }

private:
    std::shared_ptr<EVP_PKEY> key_;
};

/// Signs to-be-signed structures; implementations must be callable from
/// several threads at once.
class SignatureProvider {
public:
    virtual ~SignatureProvider() = default;

    virtual der::ObjectIdentifier algorithm() const = 0;
    virtual Bytes sign(ByteView tbs) const = 0;
    virtual bool verify(ByteView tbs, ByteView signature, const PublicKey& key) const = 0;
    virtual PublicKey public_key() const = 0;
};

/// sha256WithRSAEncryption, PKCS#1 v1.5 padding.
class RsaSha256Signer final : public SignatureProvider {
public:
    explicit RsaSha256Signer(PrivateKey key);

    der::ObjectIdentifier algorithm() const override;
    Bytes sign(ByteView tbs) const override;
    bool verify(ByteView tbs, ByteView signature, const PublicKey& key) const override;
    PublicKey public_key() const override { return public_; }

private:
    PrivateKey key_;
    PublicKey public_;
};

/// Verifies `signature` over `tbs` using the algorithm named by `algorithm`.
/// Throws UnsupportedAlgorithm for anything other than sha256WithRSAEncryption.
bool verify_signature(const der::ObjectIdentifier& algorithm, ByteView tbs, ByteView signature,
                      const PublicKey& key);

} // namespace hocsp
