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

// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// the process exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "hocsp/ca.hpp"
#include "hocsp/client.hpp"
#include "hocsp/crl.hpp"
#include "hocsp/der.hpp"
#include "hocsp/error.hpp"
#include "hocsp/http.hpp"
#include "hocsp/ocsp.hpp"
#include "hocsp/sim.hpp"

namespace fs = std::filesystem;
using namespace hocsp;
using Clock = std::chrono::steady_clock;

namespace {

struct Failed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& what) {
    if (!condition) throw Failed(what);
}

class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        std::mt19937_64 rng{std::random_device{}()};
        path_ = fs::temp_directory_path() / ("hocsp-accept-" + tag + "-" + std::to_string(rng()));
        fs::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;
    const fs::path& path() const { return path_; }
    std::string str(const std::string& leaf = {}) const { return (leaf.empty() ? path_ : path_ / leaf).string(); }

private:
    fs::path path_;
};

/// Runs the command-line tool in-process; a non-zero exit fails the criterion.
std::string cli_ok(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    if (code != cli::kExitOk) {
        std::string joined;
        for (const auto& a : args) joined += " " + a;
        throw Failed("`hocsp" + joined + "` exited " + std::to_string(code) + ": " + err.str());
    }
    return out.str();
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    return nlohmann::json::parse(in);
}

Bytes read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return Bytes(std::istreambuf_iterator<char>(in), {});
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

SerialNumber random_serial(std::mt19937_64& rng) {
    std::uint64_t v = (rng() & 0x7FFFFFFFFFFFFFFFULL) | 0x0100000000000000ULL;
    return SerialNumber::from_u64(v);
}

std::string fmt(double v, int precision = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. Reference CRL reconstruction through the command-line tool

const char* const kReferenceIssuer = "C=aa, ST=aa, L=aa, O=aa, OU=aa, CN=rootca";
const char* const kReferenceSerials[] = {"221A0A99711F9968", "308C707EA89F47A5", "5238F3475665F7C4"};

std::string reference_crl() {
    ScratchDir dir("crl");
    auto ca = dir.str("ca");
    cli_ok({"--ca-dir", ca, "ca-init", "--issuer", kReferenceIssuer, "--key-bits", "2048"});
    for (auto serial : kReferenceSerials) {
        cli_ok({"--ca-dir", ca, "revoke", "--serial", serial, "--reason", "key-compromise", "--at",
                "2023-05-04T19:57:27Z"});
    }
    auto out = dir.str("crl.der");
    cli_ok({"--ca-dir", ca, "gen-crl", "--omit-next-update", "--out", out});

    auto crl = decode_crl_der(read_bytes(out));
    require(crl.issuer.to_string() == kReferenceIssuer, "issuer is " + crl.issuer.to_string());
    require(crl.signature_algorithm == der::oid::kSha256WithRsaEncryption, "signature algorithm is not sha256WithRSA");
    require(!crl.next_update.has_value(), "nextUpdate present");
    require(crl.extensions.empty(), "unexpected crlExtensions");
    require(crl.entries.size() == 3, "expected 3 entries, got " + std::to_string(crl.entries.size()));
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& e = crl.entries[i];
        require(e.serial == SerialNumber::from_hex(kReferenceSerials[i]), "entry " + std::to_string(i) + " serial " +
                                                                              e.serial.to_hex());
        require(e.reason == CrlReason::KeyCompromise, "entry " + std::to_string(i) + " reason is not keyCompromise");
        require(reason_display_name(*e.reason) == "Key Compromise", "reason display name");
        require(e.other_extensions.empty(), "unexpected entry extensions");
    }
    auto key = PublicKey::from_pem(read_file(ca::CaFiles{ca}.public_key()));
    require(verify_crl(crl, key), "signature does not verify under the CA key");
    return "issuer, algorithm, 3 keyCompromise entries, no nextUpdate; signature verifies";
}

// ---------------------------------------------------------------------------
// 2. OCSP answers equal ledger membership

std::string oracle_equivalence() {
    sim::Testbed testbed;
    testbed.start();
    std::mt19937_64 rng{20231};
    std::vector<SerialNumber> issued;
    std::unordered_set<SerialNumber> seen;
    while (issued.size() < 10000) {
        auto s = random_serial(rng);
        if (seen.insert(s).second) issued.push_back(s);
    }
    std::vector<SerialNumber> shuffled = issued;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::unordered_set<SerialNumber> revoked(shuffled.begin(), shuffled.begin() + 1000);
    auto at = Asn1Time::now();
    for (const auto& s : revoked) testbed.authority().revoke(s, CrlReason::KeyCompromise, at);
    auto outcome = testbed.refresh_store();
    require(outcome.ok, "store refresh failed: " + outcome.message);

    auto key = testbed.authority().public_key();
    http::Client client(http::Url::parse(testbed.ocsp_url()), http::ClientOptions{.keep_alive = true});
    std::size_t mismatches = 0, bad_signatures = 0, revoked_answers = 0;
    for (std::size_t i = 0; i < issued.size(); ++i) {
        Bytes nonce(16);
        for (auto& b : nonce) b = static_cast<std::uint8_t>(rng());
        auto request = testbed.request_for(issued[i], nonce);
        auto exchange = client.post("/", http::kOcspRequestType, encode_ocsp_request(request));
        auto response = ocsp::decode_ocsp_response(exchange.body);
        if (!ocsp::verify_ocsp_response(response, key) || response.nonce != nonce || response.responses.size() != 1 ||
            response.responses[0].cert_id != request.cert_ids[0]) {
            ++bad_signatures;
            continue;
        }
        bool answered_revoked = is_revoked(response.responses[0].status);
        bool answered_good = is_good(response.responses[0].status);
        bool expected = revoked.contains(issued[i]);
        revoked_answers += answered_revoked;
        if (answered_revoked != expected || answered_good == expected) ++mismatches;
    }
    testbed.stop();
    require(bad_signatures == 0, std::to_string(bad_signatures) + " responses failed verification");
    require(mismatches == 0, std::to_string(mismatches) + " mismatches against the ledger");
    return "10000 serials over HTTP, " + std::to_string(revoked_answers) + " revoked, 0 mismatches";
}

// ---------------------------------------------------------------------------
// 3. CRL vs OCSP byte crossover

std::string byte_crossover() {
    ScratchDir dir("measure");
    auto out = dir.str("measure.json");
    cli_ok({"measure", "--min", "0", "--max", "40", "--key-bits", "2048", "--issuer", kReferenceIssuer, "--out", out});
    auto j = read_json(out);
    const auto& rows = j.at("rows");
    require(rows.size() == 41, "expected 41 rows, got " + std::to_string(rows.size()));
    auto ocsp = rows[0].at("ocsp_aggregate_bytes").get<std::size_t>();
    std::optional<std::size_t> cross_der, cross_pem;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        auto n = r.at("record_count").get<std::size_t>();
        auto der_bytes = r.at("der_bytes").get<std::size_t>();
        auto pem_bytes = r.at("pem_bytes").get<std::size_t>();
        require(n == i, "row " + std::to_string(i) + " has record_count " + std::to_string(n));
        require(r.at("ocsp_aggregate_bytes").get<std::size_t>() == ocsp, "(a) OCSP bytes vary at row " +
                                                                             std::to_string(i));
        if (i > 0) {
            require(der_bytes > rows[i - 1].at("der_bytes").get<std::size_t>(),
                    "(b) DER bytes not strictly increasing at row " + std::to_string(i));
        }
        require(pem_bytes > der_bytes, "(c) PEM <= DER at row " + std::to_string(i));
        if (!cross_der && der_bytes > ocsp) cross_der = n;
        if (!cross_pem && pem_bytes > ocsp) cross_pem = n;
    }
    require(cross_der && cross_pem, "no crossover within 0..40");
    require(j.at("crossover_der") == *cross_der && j.at("crossover_pem") == *cross_pem,
            "reported crossovers disagree with the rows");
    require(*cross_pem < *cross_der, "(d) crossover_pem >= crossover_der");
    require(*cross_der >= 14 && *cross_der <= 40, "(e) crossover_der " + std::to_string(*cross_der) +
                                                      " outside [14, 40]");
    require(*cross_pem >= 8 && *cross_pem <= 25, "(e) crossover_pem " + std::to_string(*cross_pem) +
                                                     " outside [8, 25]");
    return "OCSP " + std::to_string(ocsp) + " B constant; crossover DER " + std::to_string(*cross_der) + ", PEM " +
           std::to_string(*cross_pem);
}

// ---------------------------------------------------------------------------
// 4. Responder throughput

nlohmann::json bench(std::size_t requests, int concurrency, bool keep_alive, const ScratchDir& dir) {
    auto out = dir.str("bench-" + std::to_string(requests) + ".json");
    std::vector<std::string> args{"bench", "--requests", std::to_string(requests), "--concurrency",
                                  std::to_string(concurrency), "--revoked", "10000", "--out", out};
    if (!keep_alive) args.push_back("--no-keep-alive");
    cli_ok(args);
    return read_json(out);
}

std::string responder_throughput() {
    ScratchDir dir("bench");
    struct Run {
        std::size_t requests;
        int concurrency;
        double ceiling_s;
    };
    std::string detail;
    std::vector<std::string> failures;
    for (auto run : {Run{1000, 2, 0.029}, Run{100000, 4, 0.0102}}) {
        auto j = bench(run.requests, run.concurrency, true, dir);
        double avg = j.at("avg_request_s").get<double>();
        auto errors = j.at("errors").get<std::size_t>();
        std::string label = std::to_string(run.requests) + "@" + std::to_string(run.concurrency);
        detail += (detail.empty() ? "" : "; ") + label + " avg " + fmt(avg * 1000) + " ms (ceiling " +
                  fmt(run.ceiling_s * 1000, 1) + " ms), p99 " + fmt(j.at("p99_latency_ms").get<double>()) + " ms";
        if (errors != 0) failures.push_back(label + ": " + std::to_string(errors) + " errors");
        if (avg > run.ceiling_s) failures.push_back(label + ": avg_request_s " + fmt(avg, 5) + " over ceiling");
    }
    if (!failures.empty()) {
        std::string joined;
        for (const auto& f : failures) joined += (joined.empty() ? "" : "; ") + f;
        throw Failed(joined + " [" + detail + "]");
    }
    return detail;
}

// ---------------------------------------------------------------------------
// 5. Fleet simulation with an OCSP outage

std::string outage_fallback() {
    ScratchDir dir("sim");
    auto out = dir.str("sim.json");
    cli_ok({"simulate", "--meters", "100", "--duration", "60", "--outage", "20:40", "--revoked-fraction", "0.1",
            "--out", out});
    auto j = read_json(out);
    auto total = j.at("total_checks").get<std::uint64_t>();
    auto correct = j.at("correct_checks").get<std::uint64_t>();
    auto failures = j.at("failures").get<std::uint64_t>();
    auto outage = j.at("outage_checks").get<std::uint64_t>();
    auto violations = j.at("outage_source_violations").get<std::uint64_t>();
    require(total > 0, "no checks were made");
    require(failures == 0, std::to_string(failures) + " checks went unanswered");
    require(correct == total, std::to_string(total - correct) + " answers disagree with the ledger");
    require(outage > 0, "no checks fell inside the outage window");
    require(violations == 0, std::to_string(violations) + " outage-window checks answered by OCSP");
    const auto& src = j.at("source_counts");
    return std::to_string(total) + " checks all correct; " + std::to_string(outage) +
           " during outage via CRL; sources ocsp=" + std::to_string(src.at("Ocsp").get<std::uint64_t>()) +
           " cache=" + std::to_string(src.at("CrlCache").get<std::uint64_t>()) +
           " fetch=" + std::to_string(src.at("CrlFetch").get<std::uint64_t>());
}

// ---------------------------------------------------------------------------
// 6. Revocation visibility under periodic refresh

std::string refresh_staleness() {
    ScratchDir dir("serve");
    auto ca = dir.str("ca");
    cli_ok({"--ca-dir", ca, "ca-init", "--key-bits", "2048"});

    cli::ServeStack stack(cli::ServeOptions{ca, "127.0.0.1:0", "127.0.0.1:0", std::chrono::seconds{2}, true});
    stack.start();

    ca::CaFiles files{ca};
    client::ClientPolicy policy;
    policy.mode = client::Mode::ForceOcsp;
    client::ClientConfig config;
    config.endpoints.ocsp_url = stack.ocsp_url();
    config.policy = policy;
    config.issuer = DistinguishedName::parse(read_file(files.issuer()));
    config.ca_key = PublicKey::from_pem(read_file(files.public_key()));
    client::HybridClient client(config);

    std::mt19937_64 rng{606};
    double worst = 0, sum = 0;
    std::vector<std::string> slow;
    constexpr int kTrials = 20;
    for (int trial = 0; trial < kTrials; ++trial) {
        auto serial = random_serial(rng);
        require(is_good(client.check(serial).status), "serial reported revoked before revoke");
        // Spread revocations across the refresh cycle.
        std::this_thread::sleep_for(std::chrono::milliseconds(rng() % 2000));
        cli_ok({"--ca-dir", ca, "revoke", "--serial", serial.to_hex(), "--reason", "key-compromise"});
        auto revoked_at = Clock::now();
        double seen = -1;
        while (true) {
            auto result = client.check(serial);
            double elapsed = std::chrono::duration<double>(Clock::now() - revoked_at).count();
            if (is_revoked(result.status)) {
                seen = elapsed;
                break;
            }
            if (elapsed > 10) break;
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
        if (seen < 0) {
            slow.push_back("trial " + std::to_string(trial) + " never visible");
            continue;
        }
        worst = std::max(worst, seen);
        sum += seen;
        if (seen > 4.0) slow.push_back("trial " + std::to_string(trial) + " took " + fmt(seen, 2) + " s");
    }
    stack.stop();
    std::string detail = std::to_string(kTrials) + " trials, worst " + fmt(worst, 2) + " s, mean " +
                         fmt(sum / kTrials, 2) + " s";
    if (!slow.empty()) throw Failed(slow.front() + " (" + std::to_string(slow.size()) + " over 4 s); " + detail);
    return detail;
}

// ---------------------------------------------------------------------------
// 7. Codec properties

struct Node {
    std::uint8_t tag;
    Bytes payload;               // primitive content
    std::vector<Node> children;  // constructed content
    bool constructed() const { return (tag & 0x20) != 0; }
};

Node parse_tree(ByteView input) {
    auto tlv = der::decode_tlv(input);
    Node node{tlv.tag, {}, {}};
    if (node.constructed()) {
        der::Reader reader(tlv.payload);
        while (!reader.empty()) node.children.push_back(parse_tree(reader.next().whole));
    } else {
        node.payload.assign(tlv.payload.begin(), tlv.payload.end());
    }
    return node;
}

std::size_t count_nodes(const Node& n) {
    std::size_t c = 1;
    for (const auto& child : n.children) c += count_nodes(child);
    return c;
}

/// Serialises the tree; node number `target` (pre-order) gets its length
/// written with one superfluous leading length octet.
Bytes serialise(const Node& n, std::size_t target, std::size_t& index) {
    bool widen = index++ == target;
    Bytes content;
    if (n.constructed()) {
        for (const auto& child : n.children) {
            auto part = serialise(child, target, index);
            content.insert(content.end(), part.begin(), part.end());
        }
    } else {
        content = n.payload;
    }
    Bytes out{n.tag};
    if (widen) {
        // Long form with a leading zero octet: never minimal.
        Bytes len;
        for (std::size_t v = content.size(); v > 0; v >>= 8) len.insert(len.begin(), static_cast<std::uint8_t>(v));
        len.insert(len.begin(), 0x00);
        out.push_back(static_cast<std::uint8_t>(0x80 | len.size()));
        out.insert(out.end(), len.begin(), len.end());
    } else {
        auto len = der::encode_length(content.size());
        out.insert(out.end(), len.begin(), len.end());
    }
    out.insert(out.end(), content.begin(), content.end());
    return out;
}

Bytes widen_length(const Node& root, std::size_t target) {
    std::size_t index = 0;
    return serialise(root, target, index);
}

/// True if `der` is refused: a decode error, or a CRL that fails verification.
bool rejected(ByteView der, const PublicKey& key) {
    try {
        auto crl = decode_crl_der(der);
        return !verify_crl(crl, key);
    } catch (const Error&) {
        return true;
    }
}

CertificateRevocationList random_crl(std::mt19937_64& rng, const SignatureProvider& signer,
                                     const std::vector<DistinguishedName>& issuers) {
    static const std::uint64_t kReasonCodes[] = {0, 1, 2, 3, 4, 5, 6, 8, 9, 10};
    auto random_time = [&] {
        // 1990..2120 covers both UTCTime and GeneralizedTime encodings.
        return Asn1Time{static_cast<std::int64_t>(631152000 + rng() % 4102444800ULL)};
    };
    std::vector<RevokedEntry> entries;
    std::unordered_set<SerialNumber> used;
    std::size_t n = rng() % 24;
    while (entries.size() < n) {
        Bytes magnitude(1 + rng() % 20);
        for (auto& b : magnitude) b = static_cast<std::uint8_t>(rng());
        if (magnitude[0] == 0) magnitude[0] = 1;
        auto serial = SerialNumber::from_bytes(magnitude);
        if (!used.insert(serial).second) continue;
        std::optional<CrlReason> reason;
        if (rng() % 3 != 0) reason = reason_from_code(kReasonCodes[rng() % std::size(kReasonCodes)]);
        entries.push_back(RevokedEntry{serial, random_time(), reason, {}});
    }
    auto this_update = random_time();
    std::optional<Asn1Time> next_update;
    if (rng() % 2 == 0) next_update = Asn1Time{this_update.epoch_seconds + static_cast<std::int64_t>(rng() % 31536000)};
    return build_crl(issuers[rng() % issuers.size()], std::move(entries), this_update, next_update, signer);
}

std::string codec_properties() {
    auto key = PrivateKey::generate_rsa(2048);
    RsaSha256Signer signer(key);
    auto pub = key.public_key();
    std::vector<DistinguishedName> issuers{
        DistinguishedName::parse(kReferenceIssuer),
        DistinguishedName::parse("CN=Metering Root CA"),
        DistinguishedName::parse("C=DE, O=Stadtwerke Example, OU=Smart Metering, CN=SM-PKI Sub-CA 7"),
    };
    std::mt19937_64 rng{7};
    std::size_t widened = 0, tampered = 0, survivors_widened = 0, survivors_tampered = 0, roundtrip_failures = 0;
    std::string first_problem;
    auto note = [&](const std::string& what) {
        if (first_problem.empty()) first_problem = what;
    };
    for (int i = 0; i < 1000; ++i) {
        auto crl = random_crl(rng, signer, issuers);
        auto der = encode_crl_der(crl);
        auto decoded = decode_crl_der(der);
        auto pem = crl_to_pem(crl);
        auto from_pem = crl_from_pem(pem);
        if (decoded != crl || encode_crl_der(decoded) != der || from_pem != crl || crl_to_pem(from_pem) != pem ||
            !verify_crl(decoded, pub)) {
            ++roundtrip_failures;
            note("CRL " + std::to_string(i) + " did not round-trip");
            continue;
        }

        // Non-minimal length on one randomly chosen element.
        auto tree = parse_tree(der);
        require(widen_length(tree, static_cast<std::size_t>(-1)) == der, "TLV re-serialiser is not faithful");
        auto nodes = count_nodes(tree);
        for (int k = 0; k < 3; ++k) {
            auto mutated = widen_length(tree, rng() % nodes);
            ++widened;
            bool refused = false;
            try {
                decode_crl_der(mutated);
            } catch (const Error&) {
                refused = true;
            }
            if (!refused) {
                ++survivors_widened;
                note("non-minimal length accepted in CRL " + std::to_string(i));
            }
        }

        // Flipped bits, once inside the signature and once anywhere.
        const auto sig_offset = der.size() - crl.signature.size();
        for (int k = 0; k < 2; ++k) {
            Bytes mutated = der;
            std::size_t pos = k == 0 ? sig_offset + rng() % crl.signature.size() : rng() % der.size();
            mutated[pos] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
            ++tampered;
            if (!rejected(mutated, pub)) {
                ++survivors_tampered;
                note("tampered CRL " + std::to_string(i) + " accepted (byte " + std::to_string(pos) + ")");
            }
        }
    }
    require(roundtrip_failures == 0 && survivors_widened == 0 && survivors_tampered == 0,
            first_problem + " [round-trip failures " + std::to_string(roundtrip_failures) + ", accepted non-minimal " +
                std::to_string(survivors_widened) + ", accepted tampered " + std::to_string(survivors_tampered) + "]");
    return "1000 CRLs round-trip DER+PEM; " + std::to_string(widened) + " non-minimal and " +
           std::to_string(tampered) + " tampered encodings rejected";
}

// ---------------------------------------------------------------------------

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<std::string()> body;
};

} // namespace

int main(int argc, char** argv) {
    std::vector<Criterion> criteria{
        {1, "reference CRL via ca-init/revoke/gen-crl", 5, reference_crl},
        {2, "OCSP status equals ledger membership (10k serials)", 60, oracle_equivalence},
        {3, "CRL/OCSP byte crossover structure", 30, byte_crossover},
        {4, "responder throughput ceilings", 20 * 60, responder_throughput},
        {5, "OCSP outage falls back to CRL", 120, outage_fallback},
        {6, "revocation visible within 4 s at 2 s refresh", 180, refresh_staleness},
        {7, "CRL codec round-trip and rejection corpora", 60, codec_properties},
    };

    // Optional filter: criterion numbers on the command line.
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        auto started = Clock::now();
        std::string detail;
        bool ok = true;
        try {
            detail = c.body();
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        double elapsed = std::chrono::duration<double>(Clock::now() - started).count();
        if (ok && elapsed > c.budget_s) {
            ok = false;
            detail += "; runtime " + fmt(elapsed, 1) + " s exceeds " + fmt(c.budget_s, 0) + " s";
        }
        failed += !ok;
        std::cout << (ok ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name << " (" << fmt(elapsed, 2)
                  << " s) - " << detail << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
