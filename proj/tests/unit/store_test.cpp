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
#include <gtest/gtest.h>

#include <atomic>
#include <thread>
#include <unordered_set>

#include "hocsp/ca.hpp"
#include "hocsp/error.hpp"
#include "hocsp/store.hpp"
#include "test_support.hpp"

namespace hocsp {
namespace {

using store::RevocationStore;
using store::snapshot_from_crl;
using testing::reference_issuer;
using testing::reference_time;

RsaSha256Signer signer() { return RsaSha256Signer(testing::ca_key()); }

CertificateRevocationList reference_crl() {
    auto s = signer();
    return build_crl(reference_issuer(), testing::reference_entries(), reference_time(), std::nullopt, s);
}

store::CrlFetcher constant(Bytes bytes) {
    return [bytes] { return bytes; };
}

store::CrlFetcher failing() {
    return []() -> Bytes { throw Error(ErrorCode::FetchFailure, "down"); };
}

TEST(Snapshot, ReferenceCrl) {
    auto snap = snapshot_from_crl(reference_crl(), testing::ca_key().public_key());
    EXPECT_EQ(snap.size(), 3u);
    EXPECT_TRUE(snap.crl_signature_verified());
    EXPECT_EQ(snap.issuer(), reference_issuer());
    EXPECT_EQ(snap.source_this_update(), reference_time());
    auto status = snap.lookup(SerialNumber::from_hex("221A0A99711F9968"));
    ASSERT_TRUE(is_revoked(status));
    EXPECT_EQ(std::get<RevokedStatus>(status), (RevokedStatus{reference_time(), CrlReason::KeyCompromise}));
    EXPECT_TRUE(is_good(snap.lookup(SerialNumber::from_hex("221A0A99711F9969"))));
}

TEST(Snapshot, EmptyCrlAnswersGood) {
    auto s = signer();
    auto crl = build_crl(reference_issuer(), {}, reference_time(), std::nullopt, s);
    auto snap = snapshot_from_crl(crl, testing::ca_key().public_key());
    EXPECT_EQ(snap.size(), 0u);
    std::mt19937_64 rng{3};
    for (int i = 0; i < 100; ++i) EXPECT_TRUE(is_good(snap.lookup(testing::random_serial(rng))));
}

TEST(Snapshot, CorruptedSignatureRejected) {
    auto crl = reference_crl();
    crl.signature[10] ^= 0x01;
    try {
        snapshot_from_crl(crl, testing::ca_key().public_key());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SignatureInvalid);
    }
    EXPECT_THROW(snapshot_from_crl(reference_crl(), testing::other_key().public_key()), Error);
}

TEST(Snapshot, OracleEquivalenceAtScale) {
    std::mt19937_64 rng{2024};
    std::vector<SerialNumber> issued;
    std::unordered_set<SerialNumber> revoked;
    auto authority = ca::CertificateAuthority::in_memory(reference_issuer(), testing::ca_key());
    for (int i = 0; i < 20000; ++i) issued.push_back(testing::random_serial(rng));
    for (const auto& s : issued) {
        if (revoked.size() < 10000 && rng() % 2 == 0 && revoked.insert(s).second) {
            authority.revoke(s, CrlReason::KeyCompromise, Asn1Time{1000});
        }
    }
    auto snap = snapshot_from_crl(authority.issue_crl(Asn1Time{2000}), authority.public_key());
    EXPECT_EQ(snap.size(), revoked.size());
    for (const auto& s : issued) EXPECT_EQ(is_revoked(snap.lookup(s)), revoked.contains(s));
}

TEST(Store, NoSnapshotYet) {
    RevocationStore st(testing::ca_key().public_key());
    EXPECT_EQ(st.current(), nullptr);
    EXPECT_THROW(st.lookup(SerialNumber::from_u64(1)), Error);
    try {
        st.staleness();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoSnapshotYet);
    }
    EXPECT_FALSE(st.metrics().staleness_seconds);
}

TEST(Store, RefreshAcceptsDerAndPem) {
    RevocationStore st(testing::ca_key().public_key());
    auto crl = reference_crl();
    auto outcome = st.refresh(constant(encode_crl_der(crl)));
    EXPECT_TRUE(outcome.ok);
    EXPECT_EQ(outcome.entries, 3u);
    RevocationStore st2(testing::ca_key().public_key());
    auto pem = crl_to_pem(crl);
    auto pem_bytes = as_bytes(pem);
    EXPECT_TRUE(st2.refresh(constant(Bytes(pem_bytes.begin(), pem_bytes.end()))).ok);
    EXPECT_TRUE(is_revoked(st2.lookup(SerialNumber::from_hex("5238F3475665F7C4"))));
    EXPECT_LT(st.staleness(), 1.0);
}

TEST(Store, FailuresKeepOldSnapshot) {
    auto now = store::SteadyClock::now();
    store::StoreOptions opts;
    opts.clock = [&now] { return now; };
    RevocationStore st(testing::ca_key().public_key(), opts);
    ASSERT_TRUE(st.refresh(constant(encode_crl_der(reference_crl()))).ok);
    auto before = st.current();

    now += std::chrono::seconds{2};
    auto fetch_fail = st.refresh(failing());
    EXPECT_FALSE(fetch_fail.ok);
    EXPECT_EQ(fetch_fail.error, ErrorCode::FetchFailure);
    now += std::chrono::seconds{2};
    EXPECT_FALSE(st.refresh(failing()).ok);
    EXPECT_EQ(st.current(), before);
    EXPECT_GE(st.staleness(), 4.0);

    auto tampered = encode_crl_der(reference_crl());
    tampered[tampered.size() - 5] ^= 0x40;
    auto bad_sig = st.refresh(constant(tampered));
    EXPECT_EQ(bad_sig.error, ErrorCode::SignatureInvalid);
    auto garbage = st.refresh(constant(Bytes{1, 2, 3}));
    EXPECT_EQ(garbage.error, ErrorCode::MalformedCrl);
    EXPECT_EQ(st.current(), before);
    EXPECT_TRUE(is_revoked(st.lookup(SerialNumber::from_hex("221A0A99711F9968"))));

    auto m = st.metrics();
    EXPECT_EQ(m.refresh_success, 1u);
    EXPECT_EQ(m.refresh_failure, 4u);
    EXPECT_EQ(m.entries, 3u);
}

TEST(Store, NewSerialVisibleAfterRefresh) {
    auto authority = ca::CertificateAuthority::in_memory(reference_issuer(), testing::ca_key());
    RevocationStore st(authority.public_key());
    store::CrlFetcher fetch = [&] { return encode_crl_der(authority.issue_crl(Asn1Time::now())); };
    ASSERT_TRUE(st.refresh(fetch).ok);
    auto serial = SerialNumber::from_u64(77);
    EXPECT_TRUE(is_good(st.lookup(serial)));
    authority.revoke(serial, CrlReason::CaCompromise, Asn1Time{5});
    EXPECT_TRUE(is_good(st.lookup(serial))); // not yet refreshed
    ASSERT_TRUE(st.refresh(fetch).ok);
    EXPECT_TRUE(is_revoked(st.lookup(serial)));
}

TEST(Store, MaxStalenessTurnsUnknown) {
    auto now = store::SteadyClock::now();
    store::StoreOptions opts;
    opts.clock = [&now] { return now; };
    opts.max_staleness = std::chrono::seconds{10};
    RevocationStore st(testing::ca_key().public_key(), opts);
    ASSERT_TRUE(st.refresh(constant(encode_crl_der(reference_crl()))).ok);
    EXPECT_TRUE(is_good(st.lookup(SerialNumber::from_u64(1))));
    now += std::chrono::seconds{11};
    EXPECT_TRUE(is_unknown(st.lookup(SerialNumber::from_u64(1))));
    EXPECT_TRUE(is_unknown(st.lookup(SerialNumber::from_hex("221A0A99711F9968"))));
}

TEST(Store, StrictModeUnknownForNeverIssued) {
    store::StoreOptions opts;
    opts.issued_serials = std::unordered_set<SerialNumber>{SerialNumber::from_u64(1),
                                                           SerialNumber::from_hex("221A0A99711F9968")};
    RevocationStore st(testing::ca_key().public_key(), opts);
    ASSERT_TRUE(st.refresh(constant(encode_crl_der(reference_crl()))).ok);
    EXPECT_TRUE(is_good(st.lookup(SerialNumber::from_u64(1))));
    EXPECT_TRUE(is_revoked(st.lookup(SerialNumber::from_hex("221A0A99711F9968"))));
    EXPECT_TRUE(is_unknown(st.lookup(SerialNumber::from_u64(2))));
}

TEST(Store, ReadersSeeWholeSnapshotsDuringRefresh) {
    // Two CRLs: A revokes even serials, B revokes odd ones. A reader must
    // never see a mix within one snapshot.
    auto s = signer();
    std::vector<RevokedEntry> even, odd;
    for (std::uint64_t i = 1; i <= 400; ++i) {
        (i % 2 ? odd : even).push_back(RevokedEntry{SerialNumber::from_u64(i), Asn1Time{1}, std::nullopt, {}});
    }
    auto a = encode_crl_der(build_crl(reference_issuer(), even, Asn1Time{10}, std::nullopt, s));
    auto b = encode_crl_der(build_crl(reference_issuer(), odd, Asn1Time{20}, std::nullopt, s));
    RevocationStore st(testing::ca_key().public_key());
    ASSERT_TRUE(st.refresh(constant(a)).ok);

    std::atomic<bool> stop{false};
    std::atomic<int> mixed{0};
    std::vector<std::thread> readers;
    for (int t = 0; t < 3; ++t) {
        readers.emplace_back([&] {
            while (!stop.load()) {
                auto snap = st.current();
                bool even_mode = snap->source_this_update().epoch_seconds == 10;
                for (std::uint64_t i = 1; i <= 400; i += 37) {
                    bool revoked = is_revoked(snap->lookup(SerialNumber::from_u64(i)));
                    if (revoked != (even_mode == (i % 2 == 0))) mixed.fetch_add(1);
                }
            }
        });
    }
    for (int i = 0; i < 40; ++i) ASSERT_TRUE(st.refresh(constant(i % 2 ? a : b)).ok);
    stop = true;
    for (auto& r : readers) r.join();
    EXPECT_EQ(mixed.load(), 0);
}

TEST(Scheduler, RefreshesPeriodically) {
    RevocationStore st(testing::ca_key().public_key());
    std::atomic<int> calls{0};
    auto der = encode_crl_der(reference_crl());
    store::RefreshScheduler sched(st, [&] { calls.fetch_add(1); return der; }, std::chrono::milliseconds{50}, 1);
    sched.start();
    std::this_thread::sleep_for(std::chrono::milliseconds{400});
    sched.stop();
    EXPECT_GE(calls.load(), 4);
    EXPECT_NE(st.current(), nullptr);
}

} // namespace
} // namespace hocsp
