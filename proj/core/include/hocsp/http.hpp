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

// HTTP/1.1 plumbing shared by the CRL distribution point, the OCSP responder,
// the meter client and the benchmark. Byte counts are HTTP message bytes
// (start line, headers, blank line, body) as written on the socket.

#include <chrono>
#include <memory>
#include <string>
#include <string_view>

#include "hocsp/bytes.hpp"

namespace hocsp::http {

struct Url {
    std::string host;
    int port = 80;
    std::string path = "/";

    /// Accepts "http://host[:port][/path]"; https is rejected.
    static Url parse(std::string_view text);
    std::string to_string() const;
};

/// Parses "host:port" (used for bind flags).
Url parse_host_port(std::string_view text);

struct Exchange {
    int status = 0;
    std::string content_type;
    Bytes body;
    std::size_t request_bytes = 0;
    std::size_t response_bytes = 0;

    std::size_t total_bytes() const noexcept { return request_bytes + response_bytes; }
};

struct ClientOptions {
    std::chrono::milliseconds timeout{2000};
    bool keep_alive = false;
};

/// Client bound to one origin. Not thread-safe; use one per worker.
/// Transport failures (refused, timeout, reset) throw Error(FetchFailure).
class Client {
public:
    Client(const Url& origin, ClientOptions options = {});
    ~Client();
    Client(Client&&) noexcept;
    Client& operator=(Client&&) noexcept;

    Exchange get(std::string_view path);
    Exchange post(std::string_view path, std::string_view content_type, ByteView body);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot helpers with a fresh connection each.
Exchange get(const Url& url, ClientOptions options = {});
Exchange post(const Url& url, std::string_view content_type, ByteView body, ClientOptions options = {});

inline constexpr std::string_view kOcspRequestType = "application/ocsp-request";
inline constexpr std::string_view kOcspResponseType = "application/ocsp-response";
inline constexpr std::string_view kCrlDerType = "application/pkix-crl";
inline constexpr std::string_view kPemType = "application/x-pem-file";

} // namespace hocsp::http
