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
#include "hocsp/http.hpp"

#include <charconv>

#include "hocsp/error.hpp"
#include "httplib.h"

namespace hocsp::http {

Url Url::parse(std::string_view text) {
    static constexpr std::string_view kScheme = "http://";
    if (!text.starts_with(kScheme)) throw Error(ErrorCode::InvalidArgument, "only http:// URLs are supported");
    text.remove_prefix(kScheme.size());
    Url url;
    auto slash = text.find('/');
    auto authority = text.substr(0, slash);
    url.path = slash == std::string_view::npos ? "/" : std::string(text.substr(slash));
    auto hp = parse_host_port(authority.find(':') == std::string_view::npos ? std::string(authority) + ":80"
                                                                             : std::string(authority));
    url.host = hp.host;
    url.port = hp.port;
    return url;
}

Url parse_host_port(std::string_view text) {
    auto colon = text.rfind(':');
    if (colon == std::string_view::npos || colon == 0) {
        throw Error(ErrorCode::InvalidArgument, "expected host:port, got \"" + std::string(text) + "\"");
    }
    Url url;
    url.host = std::string(text.substr(0, colon));
    auto port = text.substr(colon + 1);
    auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), url.port);
    if (ec != std::errc{} || ptr != port.data() + port.size() || url.port < 0 || url.port > 65535) {
        throw Error(ErrorCode::InvalidArgument, "bad port in \"" + std::string(text) + "\"");
    }
    return url;
}

std::string Url::to_string() const { return "http://" + host + ":" + std::to_string(port) + path; }

namespace {

std::size_t header_bytes(const httplib::Headers& headers) {
    std::size_t n = 2; // blank line
    for (const auto& [k, v] : headers) n += k.size() + 2 + v.size() + 2;
    return n;
}

std::size_t request_size(const httplib::Request& req) {
    return req.method.size() + 1 + req.path.size() + std::string_view(" HTTP/1.1\r\n").size() +
           header_bytes(req.headers) + req.body.size();
}

std::size_t response_size(const httplib::Response& res) {
    auto status_line = res.version + " " + std::to_string(res.status) + " " + res.reason + "\r\n";
    return status_line.size() + header_bytes(res.headers) + res.body.size();
}

} // namespace

struct Client::Impl {
    httplib::Client client;
    std::size_t last_request = 0;
    std::size_t last_response = 0;

    Impl(const Url& origin, const ClientOptions& options) : client(origin.host, origin.port) {
        auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
        auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());
        client.set_keep_alive(options.keep_alive);
        client.set_url_encode(false);
        client.set_tcp_nodelay(true);
        client.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
            last_request = request_size(req);
            last_response = response_size(res);
        });
    }

    Exchange finish(httplib::Result result, std::string_view what) {
        if (!result) {
            throw Error(ErrorCode::FetchFailure, std::string(what) + ": " + httplib::to_string(result.error()));
        }
        Exchange ex;
        ex.status = result->status;
        ex.content_type = result->get_header_value("Content-Type");
        ex.body.assign(result->body.begin(), result->body.end());
        ex.request_bytes = last_request;
        ex.response_bytes = last_response;
        return ex;
    }
};

Client::Client(const Url& origin, ClientOptions options) : impl_(std::make_unique<Impl>(origin, options)) {}
Client::~Client() = default;
Client::Client(Client&&) noexcept = default;
Client& Client::operator=(Client&&) noexcept = default;

Exchange Client::get(std::string_view path) {
    return impl_->finish(impl_->client.Get(std::string(path)), "GET " + std::string(path));
}

Exchange Client::post(std::string_view path, std::string_view content_type, ByteView body) {
    return impl_->finish(impl_->client.Post(std::string(path), std::string(as_chars(body)), std::string(content_type)),
                         "POST " + std::string(path));
}

Exchange get(const Url& url, ClientOptions options) { return Client(url, options).get(url.path); }

Exchange post(const Url& url, std::string_view content_type, ByteView body, ClientOptions options) {
    return Client(url, options).post(url.path, content_type, body);
}

} // namespace hocsp::http
