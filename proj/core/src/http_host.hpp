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

#include <functional>
#include <memory>
#include <string>
#include <thread>

#include "httplib.h"

namespace hocsp::detail {

/// Owns an httplib::Server listening on a background thread. Restartable:
/// stop() closes the listening socket (new connections are refused) and
/// start() binds again, on the previous port when `port` is 0 and it ran before.
class ServerHost {
public:
    using Configure = std::function<void(httplib::Server&)>;

    explicit ServerHost(Configure configure) : configure_(std::move(configure)) {}
    ~ServerHost() { stop(); }
    ServerHost(const ServerHost&) = delete;
    ServerHost& operator=(const ServerHost&) = delete;

    /// Returns false when the address cannot be bound.
    bool start(const std::string& host, int port);
    void stop();

    bool running() const noexcept { return server_ != nullptr; }
    int port() const noexcept { return port_; }
    const std::string& host() const noexcept { return host_; }

private:
    Configure configure_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    std::string host_;
    int port_ = 0;
};

inline bool ServerHost::start(const std::string& host, int port) {
    if (server_) return true;
    auto server = std::make_unique<httplib::Server>();
    // httplib's default also sets SO_REUSEPORT, which would let a second
    // listener share the port silently; keep only SO_REUSEADDR so restarts
    // after an outage still rebind immediately.
    server->set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    server->set_tcp_nodelay(true);
    configure_(*server);
    int bound = port;
    if (port == 0) {
        bound = server->bind_to_any_port(host);
        if (bound <= 0) return false;
    } else if (!server->bind_to_port(host, port)) {
        return false;
    }
    host_ = host;
    port_ = bound;
    server_ = std::move(server);
    thread_ = std::thread([srv = server_.get()] { srv->listen_after_bind(); });
    server_->wait_until_ready();
    return true;
}

inline void ServerHost::stop() {
    if (!server_) return;
    server_->stop();
    if (thread_.joinable()) thread_.join();
    server_.reset();
}

} // namespace hocsp::detail
