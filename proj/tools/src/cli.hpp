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

#include <chrono>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "hocsp/store.hpp"

namespace hocsp::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
/// `check` only: 1 also means "revoked"; these cover the remaining outcomes.
inline constexpr int kExitAllPathsFailed = 3;
inline constexpr int kExitUnknown = 4;
inline constexpr int kExitSignatureInvalid = 5;

struct ServeOptions {
    std::string ca_dir = "ca";
    std::string ocsp_bind = "127.0.0.1:8080";
    std::string crl_bind = "127.0.0.1:8081";
    std::chrono::seconds refresh_interval{3600};
    bool attach_certificate = true;
};

/// What `serve` runs: the CRL distribution point over the on-disk CA, and an
/// OCSP responder whose store re-fetches that CRL every refresh interval.
/// Revocations appended to the ledger by other processes are picked up.
class ServeStack {
public:
    explicit ServeStack(ServeOptions options);
    ~ServeStack();
    ServeStack(const ServeStack&) = delete;
    ServeStack& operator=(const ServeStack&) = delete;

    /// Throws BindFailure, EndpointUnavailable.
    void start();
    void stop();

    std::string ocsp_url() const;
    std::string crl_der_url() const;
    std::string crl_pem_url() const;
    std::uint64_t requests_served() const;
    store::StoreMetrics metrics() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Parses `args` (without the program name) and runs the subcommand.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace hocsp::cli
