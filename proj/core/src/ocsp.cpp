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
#include "hocsp/ocsp.hpp"

#include <atomic>

#include <spdlog/spdlog.h>

#include "hocsp/error.hpp"
#include "hocsp/http.hpp"
#include "http_host.hpp"

namespace hocsp::ocsp {

namespace tag = der::tag;

std::string_view to_string(ResponseStatus status) {
    switch (status) {
    case ResponseStatus::Successful: return "successful";
    case ResponseStatus::MalformedRequest: return "malformedRequest";
    case ResponseStatus::InternalError: return "internalError";
    case ResponseStatus::TryLater: return "tryLater";
    case ResponseStatus::SigRequired: return "sigRequired";
    case ResponseStatus::Unauthorized: return "unauthorized";
    }
    return "invalid";
}

CertId make_cert_id(const ObjectIdentifier& hash_algorithm, const DistinguishedName& issuer,
                    const PublicKey& issuer_key, const SerialNumber& serial) {
    return CertId{hash_algorithm, digest(hash_algorithm, issuer.encode()), digest(hash_algorithm, issuer_key.key_bits()),
                  serial};
}

// ---------------------------------------------------------------------------
// Shared pieces

namespace {

Bytes encode_cert_id(const CertId& id) {
    return der::sequence({der::algorithm_identifier(id.hash_algorithm),
                          der::encode_tlv(tag::kOctetString, id.issuer_name_hash),
                          der::encode_tlv(tag::kOctetString, id.issuer_key_hash),
                          der::encode_tlv(tag::kInteger, der::encode_integer(id.serial.bytes()))});
}

CertId decode_cert_id(ByteView content) {
    der::Reader r(content);
    CertId id;
    id.hash_algorithm = der::decode_algorithm_identifier(r.expect(tag::kSequence).payload);
    auto name = r.expect(tag::kOctetString).payload;
    auto key = r.expect(tag::kOctetString).payload;
    id.issuer_name_hash.assign(name.begin(), name.end());
    id.issuer_key_hash.assign(key.begin(), key.end());
    id.serial = SerialNumber::from_bytes(der::decode_unsigned_integer(r.expect(tag::kInteger).payload));
    r.finish();
    return id;
}

Bytes nonce_extensions(const Bytes& nonce) {
    auto ext = der::sequence({der::encode_oid_tlv(der::oid::kOcspNonce),
                              der::encode_tlv(tag::kOctetString, der::encode_tlv(tag::kOctetString, nonce))});
    return der::encode_tlv(tag::kSequence, ext);
}

void check_nonce(const Bytes& nonce) {
    if (nonce.empty() || nonce.size() > 32) {
        throw Error(ErrorCode::Malformed, "nonce must be 1..32 octets");
    }
}

/// Walks an Extensions SEQUENCE, returning the nonce if present. Unknown
/// critical extensions are rejected.
std::optional<Bytes> read_extensions(ByteView extensions_content) {
    std::optional<Bytes> nonce;
    der::Reader list(extensions_content);
    while (!list.empty()) {
        der::Reader ext(list.expect(tag::kSequence).payload);
        auto id = der::decode_oid(ext.expect(tag::kOid).payload);
        bool critical = false;
        if (auto c = ext.optional(tag::kBoolean)) critical = der::decode_boolean(c->payload);
        auto value = ext.expect(tag::kOctetString).payload;
        ext.finish();
        if (id == der::oid::kOcspNonce) {
            // RFC 8954 wraps the nonce in an OCTET STRING; older clients do not.
            Bytes raw(value.begin(), value.end());
            try {
                auto inner = der::decode_tlv(value);
                if (inner.tag == tag::kOctetString && inner.rest.empty()) raw.assign(inner.payload.begin(), inner.payload.end());
            } catch (const Error&) {
            }
            check_nonce(raw);
            nonce = std::move(raw);
        } else if (critical) {
            throw Error(ErrorCode::Malformed, "unsupported critical extension " + id.to_string());
        }
    }
    return nonce;
}

template <typename Fn>
auto as_malformed(Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Malformed) throw;
        throw Error(ErrorCode::Malformed, e.what());
    }
}

} // namespace

// ---------------------------------------------------------------------------
// Requests

Bytes encode_ocsp_request(const OcspRequest& request) {
    if (request.cert_ids.empty()) throw Error(ErrorCode::InvalidArgument, "request needs at least one CertID");
    Bytes list;
    for (const auto& id : request.cert_ids) append(list, der::sequence({encode_cert_id(id)}));
    Bytes tbs = der::encode_tlv(tag::kSequence, list);
    if (request.nonce) {
        if (request.nonce->empty() || request.nonce->size() > 32) {
            throw Error(ErrorCode::InvalidArgument, "nonce must be 1..32 octets");
        }
        append(tbs, der::encode_tlv(tag::explicit_ctx(2), nonce_extensions(*request.nonce)));
    }
    return der::sequence({der::encode_tlv(tag::kSequence, tbs)});
}

OcspRequest decode_ocsp_request(ByteView input) {
    return as_malformed([&] {
        auto outer = der::decode_tlv(input);
        if (outer.tag != tag::kSequence || !outer.rest.empty()) throw Error(ErrorCode::Malformed, "not an OCSPRequest");
        der::Reader req(outer.payload);
        der::Reader tbs(req.expect(tag::kSequence).payload);
        req.optional(tag::explicit_ctx(0)); // optionalSignature: requester signatures are not checked
        req.finish();

        if (auto version = tbs.optional(tag::explicit_ctx(0))) {
            der::Reader v(version->payload);
            if (der::decode_small_unsigned(v.expect(tag::kInteger).payload) != 0) {
                throw Error(ErrorCode::Malformed, "unsupported request version");
            }
        }
        tbs.optional(tag::explicit_ctx(1)); // requestorName
        OcspRequest out;
        der::Reader list(tbs.expect(tag::kSequence).payload);
        while (!list.empty()) {
            der::Reader one(list.expect(tag::kSequence).payload);
            out.cert_ids.push_back(decode_cert_id(one.expect(tag::kSequence).payload));
            if (auto single_ext = one.optional(tag::explicit_ctx(0))) {
                der::Reader w(single_ext->payload);
                read_extensions(w.expect(tag::kSequence).payload);
            }
            one.finish();
        }
        if (out.cert_ids.empty()) throw Error(ErrorCode::Malformed, "empty requestList");
        if (auto exts = tbs.optional(tag::explicit_ctx(2))) {
            der::Reader w(exts->payload);
            out.nonce = read_extensions(w.expect(tag::kSequence).payload);
            w.finish();
        }
        tbs.finish();
        return out;
    });
}

// ---------------------------------------------------------------------------
// Responses

namespace {

Bytes encode_cert_status(const RevocationStatus& status) {
    if (is_good(status)) return {tag::implicit_ctx(0), 0x00};
    if (is_unknown(status)) return {tag::implicit_ctx(2), 0x00};
    const auto& revoked = std::get<RevokedStatus>(status);
    Bytes info = der::encode_generalized_time(revoked.revocation_time);
    if (revoked.reason) {
        append(info, der::encode_tlv(tag::explicit_ctx(0),
                                     der::encode_enumerated_tlv(static_cast<std::uint8_t>(*revoked.reason))));
    }
    return der::encode_tlv(tag::explicit_ctx(1), info);
}

RevocationStatus decode_cert_status(const der::Tlv& tlv) {
    if (tlv.tag == tag::implicit_ctx(0) && tlv.payload.empty()) return GoodStatus{};
    if (tlv.tag == tag::implicit_ctx(2) && tlv.payload.empty()) return UnknownStatus{};
    if (tlv.tag != tag::explicit_ctx(1)) throw Error(ErrorCode::Malformed, "bad CertStatus");
    der::Reader r(tlv.payload);
    RevokedStatus revoked;
    revoked.revocation_time = der::decode_time(r.expect(tag::kGeneralizedTime));
    if (auto reason = r.optional(tag::explicit_ctx(0))) {
        der::Reader e(reason->payload);
        revoked.reason = reason_from_code(der::decode_small_unsigned(e.expect(tag::kEnumerated).payload));
        e.finish();
    }
    r.finish();
    return revoked;
}

Bytes encode_single(const SingleResponse& single) {
    Bytes body = encode_cert_id(single.cert_id);
    append(body, encode_cert_status(single.status));
    append(body, der::encode_generalized_time(single.this_update));
    if (single.next_update) {
        append(body, der::encode_tlv(tag::explicit_ctx(0), der::encode_generalized_time(*single.next_update)));
    }
    return der::encode_tlv(tag::kSequence, body);
}

SingleResponse decode_single(ByteView content) {
    der::Reader r(content);
    SingleResponse s;
    s.cert_id = decode_cert_id(r.expect(tag::kSequence).payload);
    s.status = decode_cert_status(r.next());
    s.this_update = der::decode_time(r.expect(tag::kGeneralizedTime));
    if (auto next = r.optional(tag::explicit_ctx(0))) {
        der::Reader n(next->payload);
        s.next_update = der::decode_time(n.expect(tag::kGeneralizedTime));
        n.finish();
    }
    r.optional(tag::explicit_ctx(1)); // singleExtensions
    r.finish();
    return s;
}

OcspResponse status_only(ResponseStatus status) {
    OcspResponse r;
    r.status = status;
    return r;
}

} // namespace

Bytes encode_response_data(const OcspResponse& response) {
    Bytes body = der::encode_tlv(tag::explicit_ctx(2), der::encode_tlv(tag::kOctetString, response.responder_key_hash));
    append(body, der::encode_generalized_time(response.produced_at));
    Bytes singles;
    for (const auto& s : response.responses) append(singles, encode_single(s));
    append(body, der::encode_tlv(tag::kSequence, singles));
    if (response.nonce) append(body, der::encode_tlv(tag::explicit_ctx(1), nonce_extensions(*response.nonce)));
    return der::encode_tlv(tag::kSequence, body);
}

Bytes encode_ocsp_response(const OcspResponse& response) {
    auto status = der::encode_enumerated_tlv(static_cast<std::uint8_t>(response.status));
    if (response.status != ResponseStatus::Successful) return der::sequence({status});

    Bytes basic = encode_response_data(response);
    append(basic, der::algorithm_identifier(response.signature_algorithm));
    append(basic, der::encode_bit_string_tlv(response.signature));
    if (!response.certificates.empty()) {
        Bytes certs;
        for (const auto& c : response.certificates) append(certs, c);
        append(basic, der::encode_tlv(tag::explicit_ctx(0), der::encode_tlv(tag::kSequence, certs)));
    }
    auto response_bytes = der::sequence({der::encode_oid_tlv(der::oid::kOcspBasic),
                                         der::encode_tlv(tag::kOctetString, der::encode_tlv(tag::kSequence, basic))});
    return der::sequence({status, der::encode_tlv(tag::explicit_ctx(0), response_bytes)});
}

OcspResponse decode_ocsp_response(ByteView input) {
    return as_malformed([&] {
        auto outer = der::decode_tlv(input);
        if (outer.tag != tag::kSequence || !outer.rest.empty()) throw Error(ErrorCode::Malformed, "not an OCSPResponse");
        der::Reader top(outer.payload);
        auto code = der::decode_small_unsigned(top.expect(tag::kEnumerated).payload);
        if (code > 6 || code == 4) throw Error(ErrorCode::Malformed, "bad responseStatus");
        OcspResponse out;
        out.status = static_cast<ResponseStatus>(code);
        auto bytes = top.optional(tag::explicit_ctx(0));
        top.finish();
        if (out.status != ResponseStatus::Successful) {
            if (bytes) throw Error(ErrorCode::Malformed, "responseBytes on unsuccessful response");
            return out;
        }
        if (!bytes) throw Error(ErrorCode::Malformed, "successful response without responseBytes");

        der::Reader wrapper(bytes->payload);
        der::Reader rb(wrapper.expect(tag::kSequence).payload);
        wrapper.finish();
        if (der::decode_oid(rb.expect(tag::kOid).payload) != der::oid::kOcspBasic) {
            throw Error(ErrorCode::Malformed, "only id-pkix-ocsp-basic responses are supported");
        }
        auto basic_tlv = der::decode_tlv(rb.expect(tag::kOctetString).payload);
        rb.finish();
        if (basic_tlv.tag != tag::kSequence || !basic_tlv.rest.empty()) throw Error(ErrorCode::Malformed, "bad BasicOCSPResponse");

        der::Reader basic(basic_tlv.payload);
        der::Reader data(basic.expect(tag::kSequence).payload);
        out.signature_algorithm = der::decode_algorithm_identifier(basic.expect(tag::kSequence).payload);
        auto sig = der::decode_bit_string(basic.expect(tag::kBitString).payload);
        out.signature.assign(sig.begin(), sig.end());
        if (auto certs = basic.optional(tag::explicit_ctx(0))) {
            der::Reader w(certs->payload);
            der::Reader list(w.expect(tag::kSequence).payload);
            while (!list.empty()) {
                auto cert = list.expect(tag::kSequence).whole;
                out.certificates.emplace_back(cert.begin(), cert.end());
            }
        }
        basic.finish();

        if (data.peek_tag() == tag::explicit_ctx(0)) throw Error(ErrorCode::Malformed, "unsupported response version");
        der::Reader rid(data.expect(tag::explicit_ctx(2)).payload);
        auto key_hash = rid.expect(tag::kOctetString).payload;
        out.responder_key_hash.assign(key_hash.begin(), key_hash.end());
        out.produced_at = der::decode_time(data.expect(tag::kGeneralizedTime));
        der::Reader singles(data.expect(tag::kSequence).payload);
        while (!singles.empty()) out.responses.push_back(decode_single(singles.expect(tag::kSequence).payload));
        if (auto exts = data.optional(tag::explicit_ctx(1))) {
            der::Reader w(exts->payload);
            out.nonce = read_extensions(w.expect(tag::kSequence).payload);
        }
        data.finish();
        return out;
    });
}

bool verify_ocsp_response(const OcspResponse& response, const PublicKey& responder_key) {
    if (response.status != ResponseStatus::Successful) return false;
    try {
        return verify_signature(response.signature_algorithm, encode_response_data(response), response.signature,
                                responder_key);
    } catch (const Error&) {
        return false;
    }
}

IssuerHashes IssuerHashes::compute(const ResponderIdentity& identity) {
    auto name = identity.issuer.encode();
    auto key_bits = identity.signer->public_key().key_bits();
    return IssuerHashes{sha1(name), sha1(key_bits), sha256(name), sha256(key_bits)};
}

OcspResponse build_response(const OcspRequest& request, const store::StoreSnapshot* snapshot,
                            const ResponderIdentity& identity, Asn1Time now, const store::RevocationStore* policy) {
    return build_response(request, snapshot, identity, IssuerHashes::compute(identity), now, policy);
}

OcspResponse build_response(const OcspRequest& request, const store::StoreSnapshot* snapshot,
                            const ResponderIdentity& identity, const IssuerHashes& hashes, Asn1Time now,
                            const store::RevocationStore* policy) {
    if (!snapshot) return status_only(ResponseStatus::TryLater);
    try {
        OcspResponse out;
        out.status = ResponseStatus::Successful;
        out.responder_key_hash = hashes.key_sha1;
        out.produced_at = now;
        out.nonce = request.nonce;
        out.signature_algorithm = identity.signer->algorithm();
        out.certificates = identity.certificates;
        for (const auto& id : request.cert_ids) {
            SingleResponse single{id, UnknownStatus{}, snapshot->source_this_update(), std::nullopt};
            bool ours = false;
            if (id.hash_algorithm == der::oid::kSha1) {
                ours = id.issuer_name_hash == hashes.name_sha1 && id.issuer_key_hash == hashes.key_sha1;
            } else if (id.hash_algorithm == der::oid::kSha256) {
                ours = id.issuer_name_hash == hashes.name_sha256 && id.issuer_key_hash == hashes.key_sha256;
            }
            if (ours) single.status = policy ? policy->lookup(*snapshot, id.serial) : snapshot->lookup(id.serial);
            out.responses.push_back(std::move(single));
        }
        out.signature = identity.signer->sign(encode_response_data(out));
        return out;
    } catch (const std::exception& e) {
        spdlog::error("OCSP response signing failed: {}", e.what());
        return status_only(ResponseStatus::InternalError);
    }
}

// ---------------------------------------------------------------------------
// Responder and HTTP endpoint

Responder::Responder(store::RevocationStore& store, ResponderIdentity identity)
    : store_(store), identity_(std::move(identity)), hashes_(IssuerHashes::compute(identity_)) {}

Bytes Responder::handle(ByteView request_der, Asn1Time now) const {
    OcspRequest request;
    try {
        request = decode_ocsp_request(request_der);
    } catch (const Error&) {
        return encode_ocsp_response(status_only(ResponseStatus::MalformedRequest));
    }
    auto snapshot = store_.current(); // one snapshot for the whole request
    return encode_ocsp_response(build_response(request, snapshot.get(), identity_, hashes_, now, &store_));
}

struct OcspServer::Impl {
    const Responder& responder;
    OcspServerOptions options;
    detail::ServerHost host;
    std::atomic<std::uint64_t> served{0};
    int last_port = 0;

    Impl(const Responder& r, OcspServerOptions opts)
        : responder(r), options(std::move(opts)), host([this](httplib::Server& srv) { configure(srv); }) {}

    void configure(httplib::Server& srv) {
        srv.Post(".*", [this](const httplib::Request& req, httplib::Response& res) {
            auto body = responder.handle(as_bytes(req.body));
            served.fetch_add(1, std::memory_order_relaxed);
            res.set_content(std::string(as_chars(body)), std::string(http::kOcspResponseType));
        });
        auto not_allowed = [](const httplib::Request&, httplib::Response& res) {
            res.status = 405;
            res.set_header("Allow", "POST");
        };
        srv.Get(".*", not_allowed);
        srv.Put(".*", not_allowed);
        srv.Delete(".*", not_allowed);
        srv.Patch(".*", not_allowed);
    }
};

OcspServer::OcspServer(const Responder& responder, OcspServerOptions options)
    : impl_(std::make_unique<Impl>(responder, std::move(options))) {}

OcspServer::~OcspServer() { stop(); }

void OcspServer::start() {
    int port = impl_->options.port != 0 ? impl_->options.port : impl_->last_port;
    if (!impl_->host.start(impl_->options.host, port)) {
        throw Error(ErrorCode::BindFailure, "cannot bind " + impl_->options.host + ":" + std::to_string(port));
    }
    impl_->last_port = impl_->host.port();
}

void OcspServer::stop() { impl_->host.stop(); }
bool OcspServer::running() const { return impl_->host.running(); }
int OcspServer::port() const { return impl_->last_port; }

std::string OcspServer::url() const {
    return "http://" + impl_->options.host + ":" + std::to_string(port()) + "/";
}

std::uint64_t OcspServer::requests_served() const { return impl_->served.load(); }

} // namespace hocsp::ocsp
