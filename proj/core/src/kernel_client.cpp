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

#include "nbcheck/kernel_client.hpp"

#include "base64.hpp"
#include "nbcheck/error.hpp"
#include "nbcheck/process.hpp"
#include "nbcheck/wire.hpp"
#include "nbcheck/zmtp.hpp"

#include <poll.h>
#include <signal.h>

#include <array>
#include <filesystem>
#include <optional>
#include <sstream>

namespace nbcheck {

namespace fs = std::filesystem;
using nlohmann::json;
using zmtp::Clock;
using zmtp::SocketType;
using zmtp::ZmtpSocket;

namespace {

std::string text_of(const json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_array()) {
        std::string joined;
        for (const auto& part : value) {
            if (part.is_string()) joined += part.get_ref<const std::string&>();
        }
        return joined;
    }
    return {};
}

std::optional<Bytes> image_of(const json& data, const char* mime) {
    auto it = data.find(mime);
    if (it == data.end()) return std::nullopt;
    try {
        return detail::base64_decode(text_of(*it));
    } catch (const Error&) {
        return std::nullopt;
    }
}

Clock::time_point deadline_after(Seconds s) {
    return Clock::now() + std::chrono::duration_cast<Clock::duration>(s);
}

} // namespace

std::optional<CellOutput> output_from_message(std::string_view msg_type, const json& content) {
    if (!content.is_object()) {
        return std::nullopt;
    }
    if (msg_type == "stream") {
        const auto name = content.value("name", "stdout");
        return CellOutput::stream(name == "stderr" ? StreamName::err : StreamName::out,
                                  text_of(content.value("text", json(""))));
    }
    if (msg_type == "execute_result" || msg_type == "display_data") {
        const json data = content.value("data", json::object());
        CellOutput out = msg_type == "execute_result" ? CellOutput::execute_result(std::nullopt)
                                                      : CellOutput::display_data(std::nullopt);
        if (data.is_object()) {
            if (auto it = data.find("text/plain"); it != data.end()) {
                out.text = text_of(*it);
            }
            out.image_png = image_of(data, "image/png");
            out.image_jpeg = image_of(data, "image/jpeg");
        }
        if (msg_type == "execute_result") {
            if (auto it = content.find("execution_count"); it != content.end() && it->is_number_integer()) {
                out.execution_count = it->get<std::int64_t>();
            }
        }
        return out;
    }
    if (msg_type == "error") {
        std::vector<std::string> traceback;
        if (auto it = content.find("traceback"); it != content.end() && it->is_array()) {
            for (const auto& line : *it) {
                if (line.is_string()) traceback.push_back(line.get<std::string>());
            }
        }
        return CellOutput::error(content.value("ename", ""), content.value("evalue", ""),
                                 std::move(traceback));
    }
    return std::nullopt;
}

struct KernelHandle::Impl {
    ConnectionInfo info;
    KernelOptions options;
    std::string interrupt_mode = "message";
    Session session{""};
    ChildProcess process;
    fs::path connection_file;

    ZmtpSocket shell;
    ZmtpSocket iopub;
    ZmtpSocket stdin_channel;
    ZmtpSocket control;
    ZmtpSocket hb;

    json info_reply = json::object();
    std::size_t rejected = 0;
    bool dead = false;
    bool shut_down = false;

    std::optional<Clock::time_point> hb_sent;
    Clock::time_point hb_last_ok = Clock::now();

    void log(std::string_view line) const {
        if (options.log) options.log(line);
    }

    bool has_process() const { return process.valid(); }

    std::optional<Message> decode(const zmtp::Multipart& frames, const char* channel) {
        try {
            return session.deserialize(frames);
        } catch (const ProtocolError& e) {
            ++rejected;
            log(std::string("dropped message on ") + channel + ": " + e.what());
            return std::nullopt;
        }
    }

    void send(ZmtpSocket& sock, const Message& m) { sock.send(session.serialize(m)); }

    ZmtpSocket connect_channel(std::uint16_t port, SocketType type, Clock::time_point deadline) {
        while (true) {
            const auto attempt = std::min(deadline, Clock::now() + std::chrono::milliseconds(250));
            try {
                return ZmtpSocket::connect(info.ip, port, type, attempt);
            } catch (const StartupTimeout&) {
                if (has_process() && !process.running()) {
                    throw SpawnFailure("kernel exited during startup (" +
                                       describe_exit_status(process.exit_status().value_or(0)) + ")");
                }
                if (Clock::now() >= deadline) {
                    throw StartupTimeout("kernel did not open port " + std::to_string(port) +
                                         " within the startup timeout");
                }
            }
        }
    }

    void connect_all(Clock::time_point deadline) {
        shell = connect_channel(info.shell_port, SocketType::dealer, deadline);
        iopub = connect_channel(info.iopub_port, SocketType::sub, deadline);
        iopub.subscribe();
        stdin_channel = connect_channel(info.stdin_port, SocketType::dealer, deadline);
        control = connect_channel(info.control_port, SocketType::dealer, deadline);
        hb = connect_channel(info.hb_port, SocketType::req, deadline);
    }

    /// kernel_info round trip; also waits for a broadcast tied to one of
    /// our requests so the subscription is known to be live.
    void wait_ready(Clock::time_point deadline) {
        std::vector<std::string> pending;
        bool replied = false;
        bool broadcast_seen = false;
        auto resend_at = Clock::now();
        while (!(replied && broadcast_seen)) {
            const auto now = Clock::now();
            if (now >= deadline) {
                throw StartupTimeout("no kernel_info reply within the startup timeout");
            }
            if (has_process() && !process.running()) {
                throw SpawnFailure("kernel exited during startup (" +
                                   describe_exit_status(process.exit_status().value_or(0)) + ")");
            }
            if (now >= resend_at) {
                auto request = session.make("kernel_info_request", json::object());
                pending.push_back(request.msg_id());
                send(shell, request);
                resend_at = now + std::chrono::milliseconds(1000);
            }
            std::array<pollfd, 2> fds{{{shell.fd(), POLLIN, 0}, {iopub.fd(), POLLIN, 0}}};
            ::poll(fds.data(), fds.size(), 50);
            shell.pump();
            iopub.pump();
            if (!shell.is_open()) {
                throw SpawnFailure("kernel closed the shell channel during startup");
            }
            auto ours = [&pending](const Message& m) {
                return std::find(pending.begin(), pending.end(), m.parent_id()) != pending.end();
            };
            while (auto frames = shell.next()) {
                if (auto m = decode(*frames, "shell"); m && m->msg_type() == "kernel_info_reply" && ours(*m)) {
                    replied = true;
                    info_reply = m->content;
                }
            }
            while (auto frames = iopub.next()) {
                if (auto m = decode(*frames, "iopub"); m && ours(*m)) {
                    broadcast_seen = true;
                }
            }
        }
    }

    void interrupt() {
        if (has_process() && interrupt_mode == "signal") {
            process.signal(SIGINT);
        } else if (control.is_open()) {
            try {
                send(control, session.make("interrupt_request", json::object()));
            } catch (const Error& e) {
                log(std::string("interrupt_request failed: ") + e.what());
            }
        }
    }

    void kill_kernel(std::string_view why) {
        if (has_process() && process.running()) {
            log("killing kernel: " + std::string(why));
        }
        process.kill();
        dead = true;
    }

    /// Heartbeat bookkeeping; returns false when the kernel stopped answering.
    bool heartbeat_ok(Clock::time_point now) {
        if (options.heartbeat_timeout.count() <= 0 || !hb.is_open()) {
            return true;
        }
        while (auto reply = hb.next()) {
            hb_sent.reset();
            hb_last_ok = now;
        }
        if (hb_sent) {
            return now - *hb_sent < options.heartbeat_timeout;
        }
        if (now - hb_last_ok >= options.heartbeat_interval) {
            try {
                hb.send({"", "ping"});
                hb_sent = now;
            } catch (const Error&) {
                return false;
            }
        }
        return true;
    }
};

KernelHandle::KernelHandle() = default;
KernelHandle::~KernelHandle() {
    shutdown();
}
KernelHandle::KernelHandle(KernelHandle&&) noexcept = default;
KernelHandle& KernelHandle::operator=(KernelHandle&& other) noexcept {
    if (this != &other) {
        shutdown();
        impl_ = std::move(other.impl_);
    }
    return *this;
}
KernelHandle::KernelHandle(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}

KernelHandle KernelHandle::start(const KernelSpec& spec, Seconds startup_timeout,
                                 KernelOptions options) {
    auto impl = std::make_unique<Impl>();
    impl->options = std::move(options);
    impl->info = allocate_connection_info(spec.name);
    impl->session = Session(impl->info.key);
    impl->interrupt_mode = spec.interrupt_mode;
    impl->connection_file =
        fs::temp_directory_path() / ("nbcheck-kernel-" + new_uuid() + ".json");
    write_connection_file(impl->info, impl->connection_file);

    KernelHandle handle(std::move(impl));
    auto& self = *handle.impl_;
    const auto deadline = deadline_after(startup_timeout);
    try {
        self.process = ChildProcess::spawn(kernel_command(spec, self.connection_file), spec.env,
                                           self.options.log_path);
        self.connect_all(deadline);
        self.wait_ready(deadline);
    } catch (...) {
        self.kill_kernel("startup failed");
        handle.shutdown();
        throw;
    }
    self.hb_last_ok = Clock::now();
    return handle;
}

KernelHandle KernelHandle::attach(const ConnectionInfo& info, Seconds startup_timeout,
                                  KernelOptions options) {
    auto impl = std::make_unique<Impl>();
    impl->options = std::move(options);
    impl->info = info;
    impl->session = Session(info.key);
    KernelHandle handle(std::move(impl));
    const auto deadline = deadline_after(startup_timeout);
    handle.impl_->connect_all(deadline);
    handle.impl_->wait_ready(deadline);
    handle.impl_->hb_last_ok = Clock::now();
    return handle;
}

ExecutionOutcome KernelHandle::execute(std::string_view source, Seconds cell_timeout) {
    ExecutionOutcome outcome;
    const auto started = Clock::now();
    auto finish = [&outcome, started]() -> ExecutionOutcome {
        outcome.duration = Seconds(Clock::now() - started).count();
        return std::move(outcome);
    };

    if (!impl_ || impl_->dead || impl_->shut_down) {
        outcome.status = ExecutionStatus::kernel_died;
        outcome.detail = "kernel is not running";
        return finish();
    }
    auto& self = *impl_;

    auto request = self.session.make("execute_request",
                                     {{"code", std::string(source)},
                                      {"silent", false},
                                      {"store_history", true},
                                      {"user_expressions", json::object()},
                                      {"allow_stdin", false},
                                      {"stop_on_error", false}});
    const std::string request_id = request.msg_id();
    try {
        self.send(self.shell, request);
    } catch (const Error& e) {
        self.dead = true;
        outcome.status = ExecutionStatus::kernel_died;
        outcome.detail = e.what();
        return finish();
    }

    bool replied = false;
    bool idle = false;
    bool errored = false;
    bool clear_pending = false;
    bool stdin_requested = false;
    json reply_content;

    auto add_output = [&](CellOutput out) {
        if (clear_pending) {
            outcome.outputs.clear();
            clear_pending = false;
        }
        if (out.kind == OutputKind::error) {
            errored = true;
            outcome.ename = out.ename;
            outcome.evalue = out.evalue;
            outcome.traceback = out.traceback;
        }
        outcome.outputs.push_back(std::move(out));
    };

    auto drain = [&] {
        while (auto frames = self.iopub.next()) {
            auto m = self.decode(*frames, "iopub");
            if (!m || m->parent_id() != request_id) continue;
            const auto type = m->msg_type();
            if (type == "status") {
                if (m->content.value("execution_state", "") == "idle") idle = true;
            } else if (type == "clear_output") {
                if (m->content.value("wait", false)) {
                    clear_pending = true;
                } else {
                    outcome.outputs.clear();
                    clear_pending = false;
                }
            } else if (auto out = output_from_message(type, m->content)) {
                add_output(std::move(*out));
            }
        }
        while (auto frames = self.shell.next()) {
            auto m = self.decode(*frames, "shell");
            if (!m || m->parent_id() != request_id || m->msg_type() != "execute_reply") continue;
            replied = true;
            reply_content = m->content;
        }
        while (auto frames = self.stdin_channel.next()) {
            auto m = self.decode(*frames, "stdin");
            if (!m || m->msg_type() != "input_request") continue;
            stdin_requested = true;
            auto answer = self.session.make("input_reply", {{"status", "error"}}, &*m);
            try {
                self.send(self.stdin_channel, answer);
            } catch (const Error& e) {
                self.log(std::string("input_reply failed: ") + e.what());
            }
        }
    };

    auto wait_settled = [&](Clock::time_point until) {
        while (!(replied && idle) && Clock::now() < until) {
            std::array<pollfd, 3> fds{{{self.shell.fd(), POLLIN, 0},
                                       {self.iopub.fd(), POLLIN, 0},
                                       {self.stdin_channel.fd(), POLLIN, 0}}};
            ::poll(fds.data(), fds.size(), 50);
            self.shell.pump();
            self.iopub.pump();
            self.stdin_channel.pump();
            drain();
            if (!self.shell.is_open() || (self.has_process() && !self.process.running())) break;
        }
        return replied && idle;
    };

    const auto deadline = deadline_after(cell_timeout);
    while (!(replied && idle)) {
        const auto now = Clock::now();
        if (now >= deadline) {
            self.interrupt();
            if (!wait_settled(now + self.options.interrupt_grace)) {
                self.kill_kernel("cell did not settle after interrupt");
            }
            outcome.status = ExecutionStatus::timeout;
            std::ostringstream detail;
            detail << "exceeded " << cell_timeout.count() << "s";
            outcome.detail = detail.str();
            return finish();
        }

        const auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
        std::array<pollfd, 4> fds{{{self.shell.fd(), POLLIN, 0},
                                   {self.iopub.fd(), POLLIN, 0},
                                   {self.stdin_channel.fd(), POLLIN, 0},
                                   {self.hb.fd(), POLLIN, 0}}};
        ::poll(fds.data(), fds.size(),
               static_cast<int>(std::clamp<long long>(wait.count(), 1, 100)));
        self.shell.pump();
        self.iopub.pump();
        self.stdin_channel.pump();
        self.hb.pump();
        drain();
        if (replied && idle) break;

        std::string died;
        if (self.has_process() && !self.process.running()) {
            died = "kernel " + describe_exit_status(self.process.exit_status().value_or(0));
        } else if (!self.shell.is_open() || !self.iopub.is_open()) {
            died = "kernel closed its channels";
        } else if (!self.heartbeat_ok(Clock::now())) {
            died = "kernel stopped answering heartbeats";
        }
        if (!died.empty()) {
            self.kill_kernel(died);
            outcome.status = ExecutionStatus::kernel_died;
            outcome.detail = died;
            return finish();
        }
    }

    if (reply_content.value("status", "ok") != "ok") {
        errored = true;
        if (outcome.ename.empty()) {
            outcome.ename = reply_content.value("ename", "");
            outcome.evalue = reply_content.value("evalue", "");
            if (auto it = reply_content.find("traceback"); it != reply_content.end() && it->is_array()) {
                for (const auto& line : *it) {
                    if (line.is_string()) outcome.traceback.push_back(line.get<std::string>());
                }
            }
        }
        if (outcome.ename.empty()) {
            outcome.ename = "ExecutionAborted";
            outcome.evalue = "kernel replied with status " + reply_content.value("status", "");
        }
    }
    if (stdin_requested) {
        errored = true;
        if (outcome.ename.empty()) {
            outcome.ename = "StdinNotAllowed";
            outcome.evalue = "the cell requested input, which validation does not provide";
        }
    }
    outcome.status = errored ? ExecutionStatus::error : ExecutionStatus::ok;
    return finish();
}

void KernelHandle::shutdown() {
    if (!impl_ || impl_->shut_down) {
        return;
    }
    auto& self = *impl_;
    self.shut_down = true;

    if (!self.dead && self.control.is_open()) {
        try {
            self.send(self.control, self.session.make("shutdown_request", {{"restart", false}}));
        } catch (const Error& e) {
            self.log(std::string("shutdown_request failed: ") + e.what());
        }
    }
    if (self.has_process()) {
        if (!self.process.wait_for_exit(self.options.shutdown_grace)) {
            self.kill_kernel("no exit within the shutdown grace period");
        }
        self.process.kill();
    }
    self.shell.close();
    self.iopub.close();
    self.stdin_channel.close();
    self.control.close();
    self.hb.close();
    if (!self.connection_file.empty()) {
        std::error_code ec;
        fs::remove(self.connection_file, ec);
    }
}

bool KernelHandle::alive() {
    if (!impl_ || impl_->dead || impl_->shut_down) return false;
    if (impl_->has_process()) return impl_->process.running();
    return impl_->shell.is_open();
}

const json& KernelHandle::kernel_info() const {
    static const json empty = json::object();
    return impl_ ? impl_->info_reply : empty;
}

const ConnectionInfo& KernelHandle::connection() const {
    static const ConnectionInfo none;
    return impl_ ? impl_->info : none;
}

std::size_t KernelHandle::rejected_messages() const noexcept {
    return impl_ ? impl_->rejected : 0;
}

} // namespace nbcheck
