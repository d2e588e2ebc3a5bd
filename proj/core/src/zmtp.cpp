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

#include "nbcheck/zmtp.hpp"

#include "nbcheck/error.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <thread>

namespace nbcheck::zmtp {

namespace {

constexpr std::size_t kGreetingSize = 64;
constexpr unsigned char kFlagMore = 0x01;
constexpr unsigned char kFlagLong = 0x02;
constexpr unsigned char kFlagCommand = 0x04;

std::string wire_name(SocketType type) {
    std::string name(to_string(type));
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return name;
}

std::optional<SocketType> parse_type(std::string_view name) {
    if (name == "DEALER") return SocketType::dealer;
    if (name == "ROUTER") return SocketType::router;
    if (name == "REQ") return SocketType::req;
    if (name == "REP") return SocketType::rep;
    if (name == "PUB" || name == "XPUB") return SocketType::pub;
    if (name == "SUB" || name == "XSUB") return SocketType::sub;
    return std::nullopt;
}

int remaining_ms(Clock::time_point deadline) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    return left.count() <= 0 ? 0 : static_cast<int>(std::min<long long>(left.count(), 1 << 30));
}

/// Blocks until `fd` is readable or the deadline passes.
bool wait_readable(int fd, Clock::time_point deadline) {
    while (true) {
        pollfd p{fd, POLLIN, 0};
        const int r = ::poll(&p, 1, remaining_ms(deadline));
        if (r > 0) return true;
        if (r == 0) return false;
        if (errno != EINTR) return false;
    }
}

std::string greeting() {
    std::string g(kGreetingSize, '\0');
    g[0] = static_cast<char>(0xFF);
    g[9] = 0x7F;
    g[10] = 3;  // major
    g[11] = 0;  // minor
    std::memcpy(g.data() + 12, "NULL", 4);
    return g;
}

std::string property(std::string_view name, std::string_view value) {
    std::string out;
    out.push_back(static_cast<char>(name.size()));
    out.append(name);
    const auto len = static_cast<std::uint32_t>(value.size());
    out.push_back(static_cast<char>((len >> 24) & 0xFF));
    out.push_back(static_cast<char>((len >> 16) & 0xFF));
    out.push_back(static_cast<char>((len >> 8) & 0xFF));
    out.push_back(static_cast<char>(len & 0xFF));
    out.append(value);
    return out;
}

} // namespace

std::string_view to_string(SocketType type) {
    switch (type) {
    case SocketType::dealer: return "dealer";
    case SocketType::router: return "router";
    case SocketType::req: return "req";
    case SocketType::rep: return "rep";
    case SocketType::pub: return "pub";
    case SocketType::sub: return "sub";
    }
    return "dealer";
}

bool compatible(SocketType local, SocketType peer) noexcept {
    using T = SocketType;
    switch (local) {
    case T::dealer: return peer == T::dealer || peer == T::router || peer == T::rep;
    case T::router: return peer == T::dealer || peer == T::router || peer == T::req;
    case T::req: return peer == T::rep || peer == T::router;
    case T::rep: return peer == T::req || peer == T::dealer;
    case T::pub: return peer == T::sub;
    case T::sub: return peer == T::pub;
    }
    return false;
}

std::string encode_frame(std::string_view body, bool more, bool command) {
    std::string out;
    unsigned char flags = 0;
    if (more) flags |= kFlagMore;
    if (command) flags |= kFlagCommand;
    if (body.size() > 255) {
        flags |= kFlagLong;
        out.push_back(static_cast<char>(flags));
        const auto size = static_cast<std::uint64_t>(body.size());
        for (int shift = 56; shift >= 0; shift -= 8) {
            out.push_back(static_cast<char>((size >> shift) & 0xFF));
        }
    } else {
        out.push_back(static_cast<char>(flags));
        out.push_back(static_cast<char>(body.size()));
    }
    out.append(body);
    return out;
}

ZmtpSocket::~ZmtpSocket() {
    close();
}

ZmtpSocket::ZmtpSocket(ZmtpSocket&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)),
      type_(other.type_),
      peer_type_(other.peer_type_),
      closed_(other.closed_),
      inbox_(std::move(other.inbox_)),
      partial_(std::move(other.partial_)),
      ready_(std::move(other.ready_)) {}

ZmtpSocket& ZmtpSocket::operator=(ZmtpSocket&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = std::exchange(other.fd_, -1);
        type_ = other.type_;
        peer_type_ = other.peer_type_;
        closed_ = other.closed_;
        inbox_ = std::move(other.inbox_);
        partial_ = std::move(other.partial_);
        ready_ = std::move(other.ready_);
    }
    return *this;
}

void ZmtpSocket::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
    closed_ = true;
}

ZmtpSocket ZmtpSocket::connect(const std::string& ip, std::uint16_t port, SocketType type,
                               Clock::time_point deadline) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, ip.c_str(), &addr.sin_addr) != 1) {
        throw ProtocolError("invalid IPv4 address '" + ip + "'");
    }
    while (true) {
        const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
        if (fd < 0) {
            throw ProtocolError(std::string("socket: ") + std::strerror(errno));
        }
        if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0) {
            return handshake(fd, type, deadline);
        }
        const int err = errno;
        ::close(fd);
        if (err != ECONNREFUSED && err != EINTR && err != EAGAIN) {
            throw ProtocolError("connect to " + ip + ":" + std::to_string(port) + ": " +
                                std::strerror(err));
        }
        if (Clock::now() >= deadline) {
            throw StartupTimeout("timed out connecting to " + ip + ":" + std::to_string(port));
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
}

ZmtpSocket ZmtpSocket::accept(int listen_fd, SocketType type, Clock::time_point deadline) {
    if (!wait_readable(listen_fd, deadline)) {
        throw StartupTimeout("timed out waiting for a connection");
    }
    const int fd = ::accept4(listen_fd, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
        throw ProtocolError(std::string("accept: ") + std::strerror(errno));
    }
    return handshake(fd, type, deadline);
}

ZmtpSocket ZmtpSocket::handshake(int fd, SocketType type, Clock::time_point deadline) {
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    ZmtpSocket sock(fd, type);
    sock.closed_ = false;
    sock.do_handshake(deadline);
    return sock;
}

void ZmtpSocket::write_all(std::string_view bytes) {
    if (!is_open()) {
        throw ProtocolError("write on a closed socket");
    }
    while (!bytes.empty()) {
        const ssize_t n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            if (errno == EAGAIN) {
                pollfd p{fd_, POLLOUT, 0};
                ::poll(&p, 1, 100);
                continue;
            }
            closed_ = true;
            throw ProtocolError(std::string("send: ") + std::strerror(errno));
        }
        bytes.remove_prefix(static_cast<std::size_t>(n));
    }
}

void ZmtpSocket::send_command(std::string_view name, std::string_view body) {
    std::string payload;
    payload.push_back(static_cast<char>(name.size()));
    payload.append(name);
    payload.append(body);
    write_all(encode_frame(payload, false, true));
}

void ZmtpSocket::do_handshake(Clock::time_point deadline) {
    write_all(greeting());

    std::string peer;
    char buf[kGreetingSize];
    while (peer.size() < kGreetingSize) {
        if (!wait_readable(fd_, deadline)) {
            throw StartupTimeout("timed out waiting for the ZMTP greeting");
        }
        const ssize_t n = ::recv(fd_, buf, kGreetingSize - peer.size(), 0);
        if (n == 0) {
            throw ProtocolError("peer closed the connection during the greeting");
        }
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            throw ProtocolError(std::string("recv: ") + std::strerror(errno));
        }
        peer.append(buf, static_cast<std::size_t>(n));
        if (peer.size() >= 10 &&
            (static_cast<unsigned char>(peer[0]) != 0xFF || (peer[9] & 0x01) == 0)) {
            throw ProtocolError("peer does not speak ZMTP 3");
        }
    }
    if (peer[10] < 3) {
        throw ProtocolError("peer speaks ZMTP " + std::to_string(static_cast<int>(peer[10])) +
                            ".x; 3.x required");
    }
    if (peer.compare(12, 4, "NULL") != 0 || peer[16] != '\0') {
        throw ProtocolError("peer requires a security mechanism other than NULL");
    }

    send_command("READY", property("Socket-Type", wire_name(type_)));

    // The first frame after the greeting must be the peer's READY command.
    while (true) {
        if (inbox_.size() >= 2) {
            const auto flags = static_cast<unsigned char>(inbox_[0]);
            std::size_t header = 2;
            std::uint64_t size = static_cast<unsigned char>(inbox_[1]);
            if (flags & kFlagLong) {
                header = 9;
                size = 0;
                if (inbox_.size() >= header) {
                    for (std::size_t i = 1; i < 9; ++i) {
                        size = (size << 8) | static_cast<unsigned char>(inbox_[i]);
                    }
                }
            }
            if (inbox_.size() >= header && inbox_.size() - header >= size) {
                if (!(flags & kFlagCommand)) {
                    throw ProtocolError("expected READY command from peer");
                }
                const std::string_view body(inbox_.data() + header, size);
                if (body.empty() || body.size() < 1u + static_cast<unsigned char>(body[0]) ||
                    body.substr(1, static_cast<unsigned char>(body[0])) != "READY") {
                    throw ProtocolError("expected READY command from peer");
                }
                std::string_view props = body.substr(1 + static_cast<unsigned char>(body[0]));
                std::optional<SocketType> peer_type;
                while (!props.empty()) {
                    const auto name_len = static_cast<unsigned char>(props[0]);
                    if (props.size() < 1u + name_len + 4u) {
                        throw ProtocolError("truncated READY metadata");
                    }
                    const auto name = props.substr(1, name_len);
                    std::uint32_t value_len = 0;
                    for (std::size_t i = 0; i < 4; ++i) {
                        value_len = (value_len << 8) |
                                    static_cast<unsigned char>(props[1 + name_len + i]);
                    }
                    if (props.size() < 1u + name_len + 4u + value_len) {
                        throw ProtocolError("truncated READY metadata");
                    }
                    const auto value = props.substr(1 + name_len + 4, value_len);
                    std::string lowered(name);
                    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
                    if (lowered == "socket-type") {
                        peer_type = parse_type(value);
                        if (!peer_type) {
                            throw ProtocolError("unknown peer socket type " + std::string(value));
                        }
                    }
                    props.remove_prefix(1 + name_len + 4 + value_len);
                }
                if (!peer_type) {
                    throw ProtocolError("peer READY lacks Socket-Type");
                }
                if (!compatible(type_, *peer_type)) {
                    throw ProtocolError("socket type " + wire_name(type_) + " cannot talk to " +
                                        wire_name(*peer_type));
                }
                peer_type_ = *peer_type;
                inbox_.erase(0, header + size);
                parse_frames();
                return;
            }
        }
        if (!wait_readable(fd_, deadline)) {
            throw StartupTimeout("timed out waiting for the peer's READY");
        }
        const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
        if (n == 0) {
            throw ProtocolError("peer closed the connection during the handshake");
        }
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            throw ProtocolError(std::string("recv: ") + std::strerror(errno));
        }
        inbox_.append(buf, static_cast<std::size_t>(n));
    }
}

void ZmtpSocket::send(const Multipart& message) {
    if (message.empty()) {
        throw ProtocolError("cannot send an empty multipart message");
    }
    std::string wire;
    for (std::size_t i = 0; i < message.size(); ++i) {
        wire += encode_frame(message[i], i + 1 < message.size());
    }
    write_all(wire);
}

void ZmtpSocket::subscribe(std::string_view prefix) {
    // ZMTP 3.0 subscriptions are ordinary messages starting with 0x01.
    std::string body(1, '\x01');
    body.append(prefix);
    write_all(encode_frame(body, false));
}

void ZmtpSocket::handle_command(std::string_view body) {
    if (body.empty() || body.size() < 1u + static_cast<unsigned char>(body[0])) {
        throw ProtocolError("malformed ZMTP command");
    }
    const auto name = body.substr(1, static_cast<unsigned char>(body[0]));
    const auto data = body.substr(1 + name.size());
    if (name == "PING") {
        // TTL (2 bytes) then the context to echo.
        send_command("PONG", data.size() > 2 ? data.substr(2) : std::string_view{});
    } else if (name == "ERROR") {
        const auto reason = data.empty() ? std::string_view{} : data.substr(1);
        closed_ = true;
        throw ProtocolError("peer reported error: " + std::string(reason));
    }
    // Everything else (PONG, SUBSCRIBE, CANCEL, ...) needs no action here.
}

bool ZmtpSocket::parse_frames() {
    std::size_t offset = 0;
    bool progressed = false;
    while (inbox_.size() - offset >= 2) {
        const auto flags = static_cast<unsigned char>(inbox_[offset]);
        std::size_t header = 2;
        std::uint64_t size = static_cast<unsigned char>(inbox_[offset + 1]);
        if (flags & kFlagLong) {
            header = 9;
            if (inbox_.size() - offset < header) break;
            size = 0;
            for (std::size_t i = 1; i < 9; ++i) {
                size = (size << 8) | static_cast<unsigned char>(inbox_[offset + i]);
            }
        }
        if (inbox_.size() - offset - header < size) break;

        std::string body = inbox_.substr(offset + header, static_cast<std::size_t>(size));
        offset += header + static_cast<std::size_t>(size);
        progressed = true;
        if (flags & kFlagCommand) {
            handle_command(body);
            continue;
        }
        partial_.push_back(std::move(body));
        if (!(flags & kFlagMore)) {
            ready_.push_back(std::move(partial_));
            partial_.clear();
        }
    }
    inbox_.erase(0, offset);
    return progressed;
}

bool ZmtpSocket::pump() {
    if (fd_ < 0 || closed_) {
        return false;
    }
    char buf[65536];
    while (true) {
        const ssize_t n = ::recv(fd_, buf, sizeof buf, MSG_DONTWAIT);
        if (n > 0) {
            inbox_.append(buf, static_cast<std::size_t>(n));
            if (static_cast<std::size_t>(n) < sizeof buf) break;
            continue;
        }
        if (n == 0) {
            closed_ = true;
            break;
        }
        if (errno == EINTR) continue;
        if (errno != EAGAIN && errno != EWOULDBLOCK) {
            closed_ = true;
        }
        break;
    }
    parse_frames();
    return !closed_;
}

std::optional<Multipart> ZmtpSocket::next() {
    if (ready_.empty()) {
        return std::nullopt;
    }
    Multipart m = std::move(ready_.front());
    ready_.pop_front();
    return m;
}

std::optional<Multipart> ZmtpSocket::receive(Clock::time_point deadline) {
    while (true) {
        if (auto m = next()) {
            return m;
        }
        if (!is_open()) {
            return std::nullopt;
        }
        if (!wait_readable(fd_, deadline)) {
            return std::nullopt;
        }
        pump();
    }
}

Listener::Listener(std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd_ < 0) {
        throw ProtocolError(std::string("socket: ") + std::strerror(errno));
    }
    const int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    socklen_t len = sizeof addr;
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
        ::listen(fd_, 8) != 0 ||
        ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
        const int err = errno;
        ::close(fd_);
        fd_ = -1;
        throw ProtocolError("cannot listen on 127.0.0.1:" + std::to_string(port) + ": " +
                            std::strerror(err));
    }
    port_ = ntohs(addr.sin_port);
}

Listener::~Listener() {
    if (fd_ >= 0) ::close(fd_);
}

Listener::Listener(Listener&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), port_(other.port_) {}

} // namespace nbcheck::zmtp
