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
#include "cli.hpp"

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <random>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "hocsp/ca.hpp"
#include "hocsp/client.hpp"
#include "hocsp/error.hpp"
#include "hocsp/http.hpp"
#include "hocsp/ocsp.hpp"
#include "hocsp/sim.hpp"
#include "hocsp/store.hpp"

namespace hocsp::cli {

namespace {

namespace fs = std::filesystem;

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::PersistenceFailure, "cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_output(const fs::path& path, std::string_view data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(data.data(), static_cast<std::streamsize>(data.size()))) {
        throw Error(ErrorCode::PersistenceFailure, "cannot write " + path.string());
    }
}

void setup_logging(bool verbose, bool quiet) {
    auto logger = spdlog::get("hocsp");
    if (!logger) {
        logger = spdlog::stderr_color_mt("hocsp");
        spdlog::set_default_logger(logger);
    }
    spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::err : spdlog::level::info);
}

/// Options shared by every command that builds a client policy.
struct PolicyFlags {
    int pem_threshold = 14;
    int der_threshold = 24;
    int timeout_ms = 2000;
    std::string crl_format = "der";
    int batch_min = 2;
    std::string mode = "auto";
    int cache_ttl_s = 3600;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--pem-threshold", pem_threshold, "PEM record count above which OCSP is preferred")
            ->capture_default_str();
        cmd.add_option("--der-threshold", der_threshold, "DER record count above which OCSP is preferred")
            ->capture_default_str();
        cmd.add_option("--timeout-ms", timeout_ms, "Per-request network timeout")->capture_default_str();
        cmd.add_option("--crl-format", crl_format, "Preferred CRL format")
            ->check(CLI::IsMember({"der", "pem"}))
            ->capture_default_str();
        cmd.add_option("--batch-min", batch_min, "Batch size from which the CRL is always downloaded")
            ->capture_default_str();
        cmd.add_option("--mode", mode, "Protocol selection")
            ->check(CLI::IsMember({"auto", "force-ocsp", "force-crl"}))
            ->capture_default_str();
        cmd.add_option("--cache-ttl", cache_ttl_s, "CRL cache lifetime in seconds")->capture_default_str();
    }

    client::ClientPolicy policy() const {
        client::ClientPolicy p;
        p.pem_record_threshold = pem_threshold;
        p.der_record_threshold = der_threshold;
        p.ocsp_timeout = std::chrono::milliseconds{timeout_ms};
        p.preferred_crl_format = client::parse_crl_format(crl_format);
        p.batch_min = batch_min;
        p.mode = client::parse_mode(mode);
        p.cache_ttl = std::chrono::seconds{cache_ttl_s};
        p.validate();
        return p;
    }
};

nlohmann::ordered_json result_json(const SerialNumber& serial, const client::StatusResult& r) {
    nlohmann::ordered_json j;
    j["serial"] = serial.to_hex();
    j["status"] = std::string(status_name(r.status));
    if (const auto* revoked = std::get_if<RevokedStatus>(&r.status)) {
        j["revocation_time"] = revoked->revocation_time.to_iso8601();
        if (revoked->reason) j["reason"] = std::string(reason_flag_name(*revoked->reason));
    }
    j["source"] = std::string(client::to_string(r.source));
    j["bytes_used"] = r.bytes_used;
    j["latency_ms"] = r.latency_ms;
    j["stale"] = r.stale;
    return j;
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& flag) {
    for (const auto& a : args) {
        if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    }
    return false;
}

void apply_env_override(const std::vector<std::string>& args, const std::string& flag, const char* env,
                        std::string& value) {
    if (given_on_command_line(args, flag)) return;
    if (const char* v = std::getenv(env); v != nullptr && *v != '\0') value = v;
}

int usage_error(CLI::App& app, const CLI::ParseError& e, std::ostream& out, std::ostream& err) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
        app.exit(e, out, err); // --help
        return kExitOk;
    }
    app.exit(e, out, err);
    err << "\n" << app.help();
    return kExitUsage;
}

} // namespace

// ---------------------------------------------------------------------------
// serve

struct ServeStack::Impl {
    ServeOptions options;
    ca::CertificateAuthority authority;
    ca::CrlDistributionServer crl_server;
    store::RevocationStore store;
    std::unique_ptr<store::RefreshScheduler> scheduler;
    ocsp::Responder responder;
    ocsp::OcspServer ocsp_server;

    static ca::CrlServerOptions crl_options(const ServeOptions& o) {
        auto addr = http::parse_host_port(o.crl_bind);
        return ca::CrlServerOptions{.host = addr.host, .port = addr.port, .refresh_interval = o.refresh_interval};
    }
    static ocsp::OcspServerOptions ocsp_options(const ServeOptions& o) {
        auto addr = http::parse_host_port(o.ocsp_bind);
        return ocsp::OcspServerOptions{addr.host, addr.port};
    }
    ocsp::ResponderIdentity identity() const {
        auto key = PrivateKey::from_pem(read_text(ca::CaFiles{options.ca_dir}.private_key()));
        ocsp::ResponderIdentity id{authority.issuer(), std::make_shared<RsaSha256Signer>(std::move(key)), {}};
        if (options.attach_certificate) id.certificates.push_back(authority.certificate_der());
        return id;
    }

    explicit Impl(ServeOptions opts)
        : options(std::move(opts)),
          authority(ca::CertificateAuthority::open(options.ca_dir, ca::CaOptions{options.refresh_interval})),
          crl_server(authority, crl_options(options)),
          store(authority.public_key()),
          responder(store, identity()),
          ocsp_server(responder, ocsp_options(options)) {}
};

ServeStack::ServeStack(ServeOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}
ServeStack::~ServeStack() { stop(); }

void ServeStack::start() {
    impl_->crl_server.start();
    auto fetcher = store::http_crl_fetcher(impl_->crl_server.der_url());
    auto first = impl_->store.refresh(fetcher);
    if (!first.ok) {
        impl_->crl_server.stop();
        throw Error(ErrorCode::EndpointUnavailable, "initial CRL load failed: " + first.message);
    }
    impl_->scheduler = std::make_unique<store::RefreshScheduler>(
        impl_->store, fetcher, std::chrono::duration_cast<std::chrono::milliseconds>(impl_->options.refresh_interval));
    impl_->scheduler->start();
    impl_->ocsp_server.start();
}

void ServeStack::stop() {
    if (impl_->scheduler) impl_->scheduler->stop();
    impl_->ocsp_server.stop();
    impl_->crl_server.stop();
}

std::string ServeStack::ocsp_url() const { return impl_->ocsp_server.url(); }
std::string ServeStack::crl_der_url() const { return impl_->crl_server.der_url(); }
std::string ServeStack::crl_pem_url() const { return impl_->crl_server.pem_url(); }
std::uint64_t ServeStack::requests_served() const { return impl_->ocsp_server.requests_served(); }
store::StoreMetrics ServeStack::metrics() const { return impl_->store.metrics(); }

// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"hocsp: hybrid OCSP/CRL revocation toolkit"};
    app.name("hocsp");
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Read options from a TOML/INI file (command-line flags win)");
    app.allow_config_extras(false);

    std::string ca_dir = "ca";
    bool verbose = false, quiet = false;
    app.add_option("--ca-dir", ca_dir, "CA directory")->capture_default_str();
    app.add_flag("-v,--verbose", verbose, "Debug logging");
    app.add_flag("-q,--quiet", quiet, "Errors only");

    // ca-init ---------------------------------------------------------------
    auto* ca_init = app.add_subcommand("ca-init", "Create a CA: key, self-signed certificate, empty ledger");
    std::string issuer_text = "C=aa, ST=aa, L=aa, O=aa, OU=aa, CN=rootca";
    int key_bits = 2048;
    ca_init->add_option("--issuer", issuer_text, "Issuer distinguished name")->capture_default_str();
    ca_init->add_option("--key-bits", key_bits, "RSA modulus size")->check(CLI::Range(1024, 8192))->capture_default_str();

    // revoke ----------------------------------------------------------------
    auto* revoke = app.add_subcommand("revoke", "Append a serial to the revocation ledger");
    std::string serial_text, reason_text = "unspecified", at_text;
    revoke->add_option("--serial", serial_text, "Serial in hex (0d prefix for decimal)")->required();
    revoke->add_option("--reason", reason_text, "Reason, e.g. key-compromise")->capture_default_str();
    revoke->add_option("--at", at_text, "Revocation time, YYYY-MM-DDTHH:MM:SSZ (default: now)");

    // gen-crl ---------------------------------------------------------------
    auto* gen_crl = app.add_subcommand("gen-crl", "Issue and sign a CRL over the whole ledger");
    bool pem = false, omit_next_update = false, text = false;
    std::string out_path;
    int refresh_s = static_cast<int>(ca::kDefaultRefreshInterval.count());
    gen_crl->add_flag("--pem", pem, "PEM armor instead of DER");
    gen_crl->add_flag("--omit-next-update", omit_next_update, "Leave nextUpdate out");
    gen_crl->add_flag("--text", text, "Print a human-readable rendering instead");
    gen_crl->add_option("--out", out_path, "Write to a file instead of standard output");
    gen_crl->add_option("--refresh-interval", refresh_s, "Seconds until nextUpdate")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    // serve -----------------------------------------------------------------
    auto* serve = app.add_subcommand("serve", "Run the CRL distribution point and the OCSP responder");
    std::string ocsp_bind = "127.0.0.1:8080", crl_bind = "127.0.0.1:8081";
    int serve_refresh_s = static_cast<int>(ca::kDefaultRefreshInterval.count());
    double serve_duration = 0;
    bool no_cert = false;
    serve->add_option("--ocsp-bind", ocsp_bind, "host:port for OCSP (env HOCSP_OCSP_BIND)")->capture_default_str();
    serve->add_option("--crl-bind", crl_bind, "host:port for the CRL (env HOCSP_CRL_BIND)")->capture_default_str();
    serve->add_option("--refresh-interval", serve_refresh_s, "Seconds between responder CRL refreshes")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    serve->add_option("--duration", serve_duration, "Stop after this many seconds (default: until interrupted)");
    serve->add_flag("--no-cert", no_cert, "Do not attach the CA certificate to OCSP responses");

    // check -----------------------------------------------------------------
    auto* check = app.add_subcommand("check", "Check serials with OCSP, falling back to the CRL");
    std::vector<std::string> check_serials;
    std::string ocsp_url, crl_url, crl_pem_url;
    PolicyFlags check_policy;
    check->add_option("--serial", check_serials, "Serial(s) to check")->required();
    check->add_option("--ocsp-url", ocsp_url, "OCSP responder URL");
    check->add_option("--crl-url", crl_url, "DER CRL URL");
    check->add_option("--crl-pem-url", crl_pem_url, "PEM CRL URL");
    check_policy.add_to(*check);

    // simulate --------------------------------------------------------------
    auto* simulate = app.add_subcommand("simulate", "Meter-fleet simulation with OCSP outage injection");
    sim::SimConfig sim_config;
    std::vector<std::string> outages;
    std::string sim_out;
    PolicyFlags sim_policy;
    simulate->add_option("--meters", sim_config.n_meters, "Number of meters")->capture_default_str();
    simulate->add_option("--rate", sim_config.request_rate_per_meter_hz, "Checks per meter per second")
        ->capture_default_str();
    simulate->add_option("--duration", sim_config.duration_s, "Simulated seconds")->capture_default_str();
    simulate->add_option("--outage", outages, "OCSP outage window START:END in seconds (repeatable)");
    simulate->add_option("--revoked-fraction", sim_config.revoked_fraction, "Share of issued serials revoked")
        ->capture_default_str();
    simulate->add_option("--issued", sim_config.issued_certificates, "Issued certificate population")
        ->capture_default_str();
    simulate->add_option("--seed", sim_config.rng_seed, "RNG seed")->capture_default_str();
    simulate->add_option("--workers", sim_config.workers, "Threads driving meters")->capture_default_str();
    simulate->add_option("--out", sim_out, "Write the JSON report to a file");
    sim_policy.add_to(*simulate);

    // bench -----------------------------------------------------------------
    auto* bench = app.add_subcommand("bench", "OCSP responder load benchmark");
    std::size_t bench_requests_n = 1000;
    int concurrency = 2;
    std::size_t bench_revoked = 10000;
    std::string target, bench_out;
    bool no_keep_alive = false, both = false;
    bench->add_option("--requests", bench_requests_n, "Number of OCSP requests")->capture_default_str();
    bench->add_option("--concurrency", concurrency, "Concurrent workers")->capture_default_str();
    bench->add_option("--target", target,
                      "Responder URL (default: an in-process responder; a target needs --ca-dir for CertIDs)");
    bench->add_option("--revoked", bench_revoked, "Revoked serials in the in-process responder")->capture_default_str();
    bench->add_flag("--no-keep-alive", no_keep_alive, "New connection per request");
    bench->add_flag("--both", both, "Run with and without keep-alive");
    bench->add_option("--out", bench_out, "Write the JSON report to a file");

    // measure ---------------------------------------------------------------
    auto* measure = app.add_subcommand("measure", "CRL vs OCSP bytes per record count");
    std::size_t min_records = 0, max_records = 40;
    int measure_bits = 2048;
    std::string measure_issuer = issuer_text, measure_out;
    measure->add_option("--min", min_records, "Smallest record count")->capture_default_str();
    measure->add_option("--max", max_records, "Largest record count")->capture_default_str();
    measure->add_option("--key-bits", measure_bits, "RSA modulus size")->capture_default_str();
    measure->add_option("--issuer", measure_issuer, "Issuer distinguished name")->capture_default_str();
    measure->add_option("--out", measure_out, "Write the JSON report to a file");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return usage_error(app, e, out, err);
    }
    setup_logging(verbose, quiet);
    // Bind addresses: flags > environment > config file > defaults. CLI11
    // reads the config file before the environment, so apply these by hand.
    apply_env_override(args, "--ocsp-bind", "HOCSP_OCSP_BIND", ocsp_bind);
    apply_env_override(args, "--crl-bind", "HOCSP_CRL_BIND", crl_bind);

    try {
        if (*ca_init) {
            auto authority = ca::CertificateAuthority::init(ca_dir, DistinguishedName::parse(issuer_text), key_bits);
            out << "initialized CA \"" << authority.issuer().to_string() << "\" in " << ca_dir << "\n";
            return kExitOk;
        }
        if (*revoke) {
            auto authority = ca::CertificateAuthority::open(ca_dir);
            auto serial = SerialNumber::parse(serial_text);
            auto reason = reason_from_flag(reason_text);
            auto at = at_text.empty() ? Asn1Time::now() : Asn1Time::parse_iso8601(at_text);
            authority.revoke(serial, reason, at);
            out << "revoked " << serial.to_hex() << " (" << reason_display_name(reason) << ") at " << at.to_iso8601()
                << "; ledger holds " << authority.ledger().size() << "\n";
            return kExitOk;
        }
        if (*gen_crl) {
            auto authority =
                ca::CertificateAuthority::open(ca_dir, ca::CaOptions{std::chrono::seconds{refresh_s}});
            auto crl = authority.issue_crl(Asn1Time::now(), !omit_next_update);
            std::string body;
            if (text) {
                body = render_crl_text(crl);
            } else if (pem) {
                body = crl_to_pem(crl);
            } else {
                auto der = encode_crl_der(crl);
                body.assign(as_chars(der));
            }
            if (out_path.empty()) {
                out << body;
            } else {
                write_output(out_path, body);
                spdlog::info("wrote {} CRL with {} entries to {}", text ? "text" : pem ? "PEM" : "DER",
                             crl.entries.size(), out_path);
            }
            return kExitOk;
        }
        if (*serve) {
            ServeStack stack(ServeOptions{ca_dir, ocsp_bind, crl_bind, std::chrono::seconds{serve_refresh_s}, !no_cert});
            stack.start();
            out << "OCSP responder on " << stack.ocsp_url() << "\n"
                << "CRL on " << stack.crl_der_url() << " and " << stack.crl_pem_url() << "\n"
                << std::flush;

            g_interrupted = false;
            auto old_int = std::signal(SIGINT, on_signal);
            auto old_term = std::signal(SIGTERM, on_signal);
            auto started = std::chrono::steady_clock::now();
            while (!g_interrupted) {
                if (serve_duration > 0 &&
                    std::chrono::steady_clock::now() - started >= std::chrono::duration<double>(serve_duration)) {
                    break;
                }
                std::this_thread::sleep_for(std::chrono::milliseconds{50});
            }
            std::signal(SIGINT, old_int);
            std::signal(SIGTERM, old_term);
            stack.stop();
            auto m = stack.metrics();
            spdlog::info("served {} OCSP requests; {} refreshes ok, {} failed", stack.requests_served(),
                         m.refresh_success, m.refresh_failure);
            return kExitOk;
        }
        if (*check) {
            client::ClientConfig config;
            config.endpoints = client::Endpoints{ocsp_url, crl_url, crl_pem_url};
            if (!config.endpoints.any()) {
                err << "check: at least one of --ocsp-url, --crl-url, --crl-pem-url is required\n";
                return kExitUsage;
            }
            ca::CaFiles files{ca_dir};
            config.issuer = DistinguishedName::parse(read_text(files.issuer()));
            config.ca_key = PublicKey::from_pem(read_text(files.public_key()));
            config.policy = check_policy.policy();
            std::vector<SerialNumber> serials;
            for (const auto& s : check_serials) serials.push_back(SerialNumber::parse(s));

            client::HybridClient hybrid(config);
            std::vector<client::StatusResult> results;
            try {
                results = hybrid.check_many(serials);
            } catch (const Error& e) {
                err << "check failed: " << e.what() << "\n";
                if (e.code() == ErrorCode::AllPathsFailed) return kExitAllPathsFailed;
                if (e.code() == ErrorCode::SignatureInvalid) return kExitSignatureInvalid;
                throw;
            }
            bool any_revoked = false, any_unknown = false;
            for (std::size_t i = 0; i < results.size(); ++i) {
                out << result_json(serials[i], results[i]).dump() << "\n";
                any_revoked = any_revoked || is_revoked(results[i].status);
                any_unknown = any_unknown || is_unknown(results[i].status);
            }
            return any_revoked ? kExitFailure : any_unknown ? kExitUnknown : kExitOk;
        }
        if (*simulate) {
            for (const auto& w : outages) {
                auto colon = w.find(':');
                if (colon == std::string::npos) {
                    err << "simulate: --outage expects START:END, got " << w << "\n";
                    return kExitUsage;
                }
                try {
                    sim_config.outage_windows.push_back({std::stod(w.substr(0, colon)), std::stod(w.substr(colon + 1))});
                } catch (const std::exception&) {
                    err << "simulate: --outage expects numbers, got " << w << "\n";
                    return kExitUsage;
                }
            }
            sim_config.policy = sim_policy.policy();
            auto report = sim::run_simulation(sim_config);
            out << sim::render_table(report);
            if (!sim_out.empty()) write_output(sim_out, sim::to_json(report) + "\n");
            bool ok = report.all_correct() && report.outage_source_violations == 0;
            if (!ok) err << "simulation found incorrect or unanswered checks\n";
            return ok ? kExitOk : kExitFailure;
        }
        if (*bench) {
            std::optional<sim::Testbed> testbed;
            std::vector<Bytes> bodies;
            std::string url = target;
            if (target.empty()) {
                testbed.emplace();
                auto revoked = sim::populate_ledger(*testbed, bench_revoked, 1);
                testbed->start();
                bodies = sim::bench_requests(*testbed, revoked, 1000, 2);
                url = testbed->ocsp_url();
                spdlog::info("in-process responder with {} revoked serials at {}", bench_revoked, url);
            } else {
                auto authority = ca::CertificateAuthority::open(ca_dir);
                std::mt19937_64 rng{2};
                auto records = authority.ledger().records();
                for (int i = 0; i < 1000; ++i) {
                    auto serial = (i % 10 == 0 && !records.empty()) ? records[rng() % records.size()].serial
                                                                     : SerialNumber::from_u64(rng() >> 1);
                    ocsp::OcspRequest req{{ocsp::make_cert_id(der::oid::kSha1, authority.issuer(),
                                                              authority.public_key(), serial)},
                                          std::nullopt};
                    bodies.push_back(ocsp::encode_ocsp_request(req));
                }
            }
            std::vector<sim::BenchReport> reports;
            std::vector<bool> modes = both ? std::vector<bool>{true, false} : std::vector<bool>{!no_keep_alive};
            for (bool keep_alive : modes) {
                reports.push_back(sim::run_bench(sim::BenchConfig{bench_requests_n, concurrency, url, bodies, keep_alive}));
            }
            out << sim::render_table(reports);
            if (!bench_out.empty()) {
                auto j = nlohmann::json::array();
                for (const auto& r : reports) j.push_back(nlohmann::json::parse(sim::to_json(r)));
                write_output(bench_out, (reports.size() == 1 ? j[0] : j).dump(2) + "\n");
            }
            bool clean = std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.errors == 0; });
            return clean ? kExitOk : kExitFailure;
        }
        if (*measure) {
            if (min_records > max_records) {
                err << "measure: --min must not exceed --max\n";
                return kExitUsage;
            }
            std::vector<std::size_t> counts;
            for (auto n = min_records; n <= max_records; ++n) counts.push_back(n);
            auto report = sim::measure_bytes(
                counts, sim::MeasureOptions{.issuer = DistinguishedName::parse(measure_issuer), .key_bits = measure_bits});
            out << sim::render_table(report);
            if (!measure_out.empty()) write_output(measure_out, sim::to_json(report) + "\n");
            return kExitOk;
        }
    } catch (const Error& e) {
        err << app.get_subcommands().front()->get_name() << ": " << e.what() << "\n";
        switch (e.code()) {
        case ErrorCode::InvalidArgument:
        case ErrorCode::InvalidSerial:
        case ErrorCode::InvalidReason:
        case ErrorCode::InvalidName:
        case ErrorCode::MalformedTime:
            return kExitUsage; // a flag value that does not parse
        default:
            return kExitFailure;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}

} // namespace hocsp::cli
