// Copyright 2026 The nbcheck Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Minimal ZMTP 3.0 peer (NULL security mechanism) over a single TCP
// connection. Enough of ZeroMQ to talk to a Jupyter kernel: multipart
// messages, the READY handshake with socket-type checking, and SUB
// subscriptions. One ZmtpSocket is one connection; there is no routing,
// reconnection or queueing beyond what a single peer needs.

#include <chrono>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nbcheck::zmtp {

enum class SocketType { dealer, router, req, rep, pub, sub };

std::string_view to_string(SocketType type);

/// Whether a `local` socket may talk to a peer announcing `peer`.
bool compatible(SocketType local, SocketType peer) noexcept;

using Multipart = std::vector<std::string>;
using Clock = std::chrono::steady_clock;

class ZmtpSocket {
public:
    ZmtpSocket() = default;
    ~ZmtpSocket();
    ZmtpSocket(ZmtpSocket&& other) noexcept;
    ZmtpSocket& operator=(ZmtpSocket&& other) noexcept;
    ZmtpSocket(const ZmtpSocket&) = delete;
    ZmtpSocket& operator=(const ZmtpSocket&) = delete;

    /// Connects and completes the handshake before `deadline`, retrying
    /// refused connections. Throws ProtocolError on handshake failure and
    /// StartupTimeout when the deadline passes.
    static ZmtpSocket connect(const std::string& ip, std::uint16_t port, SocketType type,
                              Clock::time_point deadline);

    /// Accepts one connection on a listening socket and handshakes.
    static ZmtpSocket accept(int listen_fd, SocketType type, Clock::time_point deadline);

    /// Wraps an already connected stream socket and handshakes.
    static ZmtpSocket handshake(int fd, SocketType type, Clock::time_point deadline);

    /// Sends a multipart message. A SUB socket sends subscriptions only via
    /// subscribe().
    void send(const Multipart& message);

    /// SUB: subscribe to messages starting with `prefix` (empty: all).
    void subscribe(std::string_view prefix = {});

    /// Reads whatever is available without blocking and queues complete
    /// messages. Returns false once the peer has closed the connection.
    bool pump();

    /// Next complete message, if one is queued.
    std::optional<Multipart> next();

    /// Waits up to `deadline` for a complete message.
    std::optional<Multipart> receive(Clock::time_point deadline);

    int fd() const noexcept { return fd_; }
    bool is_open() const noexcept { return fd_ >= 0 && !closed_; }
    SocketType type() const noexcept { return type_; }
    SocketType peer_type() const noexcept { return peer_type_; }
    void close();

private:
    ZmtpSocket(int fd, SocketType type) : fd_(fd), type_(type) {}

    void do_handshake(Clock::time_point deadline);
    void write_all(std::string_view bytes);
    void send_command(std::string_view name, std::string_view body);
    void handle_command(std::string_view body);
    bool parse_frames();

    int fd_ = -1;
    SocketType type_ = SocketType::dealer;
    SocketType peer_type_ = SocketType::dealer;
    bool closed_ = false;
    std::string inbox_;
    Multipart partial_;
    std::deque<Multipart> ready_;
};

/// A loopback TCP listener for the accepting side (used by test kernels).
class Listener {
public:
    /// Binds 127.0.0.1:`port` (0 picks a free port).
    explicit Listener(std::uint16_t port = 0);
    ~Listener();
    Listener(Listener&& other) noexcept;
    Listener& operator=(Listener&&) = delete;
    Listener(const Listener&) = delete;
    Listener& operator=(const Listener&) = delete;

    int fd() const noexcept { return fd_; }
    std::uint16_t port() const noexcept { return port_; }

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

/// Encodes one frame: flags byte, 1- or 8-byte length, body.
std::string encode_frame(std::string_view body, bool more, bool command = false);

} // namespace nbcheck::zmtp
