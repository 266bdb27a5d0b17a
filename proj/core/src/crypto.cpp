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
#include "hocsp/crypto.hpp"

#include <openssl/bio.h>
#include <openssl/evp.h>
#include <openssl/pem.h>
#include <openssl/rsa.h>
#include <openssl/sha.h>
#include <openssl/x509.h>

#include "hocsp/error.hpp"

namespace hocsp {

namespace {

struct BioDeleter {
    void operator()(BIO* b) const { BIO_free(b); }
};
struct MdCtxDeleter {
    void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};
struct PkeyCtxDeleter {
    void operator()(EVP_PKEY_CTX* c) const { EVP_PKEY_CTX_free(c); }
};
using BioPtr = std::unique_ptr<BIO, BioDeleter>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;

std::shared_ptr<EVP_PKEY> adopt(EVP_PKEY* raw) {
    return std::shared_ptr<EVP_PKEY>(raw, [](EVP_PKEY* p) { EVP_PKEY_free(p); });
}

BioPtr memory_bio(std::string_view text) {
    return BioPtr(BIO_new_mem_buf(text.data(), static_cast<int>(text.size())));
}

std::string drain(BIO* bio) {
    char* data = nullptr;
    long n = BIO_get_mem_data(bio, &data);
    return std::string(data, static_cast<std::size_t>(n));
}

} // namespace

Bytes sha1(ByteView data) {
    Bytes out(SHA_DIGEST_LENGTH);
    SHA1(data.data(), data.size(), out.data());
    return out;
}

Bytes sha256(ByteView data) {
    Bytes out(SHA256_DIGEST_LENGTH);
    SHA256(data.data(), data.size(), out.data());
    return out;
}

Bytes digest(const der::ObjectIdentifier& algorithm, ByteView data) {
    if (algorithm == der::oid::kSha1) return sha1(data);
    if (algorithm == der::oid::kSha256) return sha256(data);
    throw Error(ErrorCode::UnsupportedAlgorithm, "digest " + algorithm.to_string());
}

// ---------------------------------------------------------------------------

PublicKey PublicKey::from_pem(std::string_view pem) {
    auto bio = memory_bio(pem);
    EVP_PKEY* raw = PEM_read_bio_PUBKEY(bio.get(), nullptr, nullptr, nullptr);
    if (!raw) throw Error(ErrorCode::KeyError, "cannot parse PUBLIC KEY PEM");
    PublicKey k;
    k.key_ = adopt(raw);
    return k;
}

PublicKey PublicKey::from_spki_der(ByteView der) {
    const unsigned char* p = der.data();
    EVP_PKEY* raw = d2i_PUBKEY(nullptr, &p, static_cast<long>(der.size()));
    if (!raw) throw Error(ErrorCode::KeyError, "cannot parse SubjectPublicKeyInfo");
    PublicKey k;
    k.key_ = adopt(raw);
    return k;
}

Bytes PublicKey::spki_der() const {
    if (!key_) throw Error(ErrorCode::KeyError, "empty public key");
    int n = i2d_PUBKEY(key_.get(), nullptr);
    if (n <= 0) throw Error(ErrorCode::KeyError, "cannot encode SubjectPublicKeyInfo");
    Bytes out(static_cast<std::size_t>(n));
    unsigned char* p = out.data();
    i2d_PUBKEY(key_.get(), &p);
    return out;
}

Bytes PublicKey::key_bits() const {
    auto spki = spki_der();
    der::Reader outer(der::decode_tlv(spki).payload);
    outer.expect(der::tag::kSequence);
    auto bits = der::decode_bit_string(outer.expect(der::tag::kBitString).payload);
    return Bytes(bits.begin(), bits.end());
}

std::string PublicKey::to_pem() const {
    BioPtr bio(BIO_new(BIO_s_mem()));
    if (!key_ || PEM_write_bio_PUBKEY(bio.get(), key_.get()) != 1) {
        throw Error(ErrorCode::KeyError, "cannot write PUBLIC KEY PEM");
    }
    return drain(bio.get());
}

int PublicKey::bits() const { return key_ ? EVP_PKEY_get_bits(key_.get()) : 0; }

bool PublicKey::operator==(const PublicKey& other) const {
    if (!key_ || !other.key_) return key_ == other.key_;
    return EVP_PKEY_eq(key_.get(), other.key_.get()) == 1;
}

// ---------------------------------------------------------------------------

PrivateKey PrivateKey::generate_rsa(int bits) {
    EVP_PKEY* raw = EVP_RSA_gen(static_cast<unsigned>(bits));
    if (!raw) throw Error(ErrorCode::KeyError, "RSA key generation failed");
    PrivateKey k;
    k.key_ = adopt(raw);
    return k;
}

PrivateKey PrivateKey::from_pem(std::string_view pem) {
    auto bio = memory_bio(pem);
    EVP_PKEY* raw = PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr);
    if (!raw) throw Error(ErrorCode::KeyError, "cannot parse PRIVATE KEY PEM");
    PrivateKey k;
    k.key_ = adopt(raw);
    return k;
}

std::string PrivateKey::to_pem() const {
    BioPtr bio(BIO_new(BIO_s_mem()));
    if (!key_ || PEM_write_bio_PrivateKey(bio.get(), key_.get(), nullptr, nullptr, 0, nullptr, nullptr) != 1) {
        throw Error(ErrorCode::KeyError, "cannot write PRIVATE KEY PEM");
    }
    return drain(bio.get());
}

PublicKey PrivateKey::public_key() const {
    if (!key_) throw Error(ErrorCode::KeyError, "empty private key");
    // Round-trip through SPKI so the public half owns no private material.
    int n = i2d_PUBKEY(key_.get(), nullptr);
    Bytes spki(static_cast<std::size_t>(n));
    unsigned char* p = spki.data();
    i2d_PUBKEY(key_.get(), &p);
    return PublicKey::from_spki_der(spki);
}

// ---------------------------------------------------------------------------

RsaSha256Signer::RsaSha256Signer(PrivateKey key) : key_(std::move(key)) {
    if (!key_.valid() || EVP_PKEY_get_base_id(key_.native()) != EVP_PKEY_RSA) {
        throw Error(ErrorCode::KeyError, "RsaSha256Signer needs an RSA private key");
    }
    public_ = key_.public_key();
}

der::ObjectIdentifier RsaSha256Signer::algorithm() const { return der::oid::kSha256WithRsaEncryption; }

Bytes RsaSha256Signer::sign(ByteView tbs) const {
    MdCtxPtr ctx(EVP_MD_CTX_new());
    std::size_t len = 0;
    if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, EVP_sha256(), nullptr, key_.native()) != 1 ||
        EVP_DigestSign(ctx.get(), nullptr, &len, tbs.data(), tbs.size()) != 1) {
        throw Error(ErrorCode::SigningFailure, "EVP_DigestSign setup failed");
    }
    Bytes sig(len);
    if (EVP_DigestSign(ctx.get(), sig.data(), &len, tbs.data(), tbs.size()) != 1) {
        throw Error(ErrorCode::SigningFailure, "EVP_DigestSign failed");
    }
    sig.resize(len);
    return sig;
}

bool RsaSha256Signer::verify(ByteView tbs, ByteView signature, const PublicKey& key) const {
    return verify_signature(algorithm(), tbs, signature, key);
}

bool verify_signature(const der::ObjectIdentifier& algorithm, ByteView tbs, ByteView signature,
                      const PublicKey& key) {
    if (algorithm != der::oid::kSha256WithRsaEncryption) {
        throw Error(ErrorCode::UnsupportedAlgorithm, "signature algorithm " + algorithm.to_string());
    }
    if (!key.valid()) return false;
    MdCtxPtr ctx(EVP_MD_CTX_new());
    if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, EVP_sha256(), nullptr, key.native()) != 1) {
        return false;
    }
    return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), tbs.data(), tbs.size()) == 1;
}

} // namespace hocsp
