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

// Scripted stand-in for a Jupyter kernel, speaking the real wire protocol
// over nbcheck's ZMTP implementation.
//
// Usage: mock_kernel [--no-bind] [--exit-on-start] -f <connection_file>
//
// The code of an execute_request is a script, one command per line; lines
// starting with '#' are ignored:
//
//   print TEXT          stdout stream "TEXT\n"
//   stderr TEXT         stderr stream "TEXT\n"
//   chunks N TEXT       "TEXT\n" split over N stdout stream messages
//   result TEXT         execute_result with text/plain TEXT
//   display TEXT        display_data with text/plain TEXT
//   png BASE64          display_data with image/png BASE64
//   error ENAME EVALUE  error broadcast, reply status "error"
//   foreign TEXT        stdout stream whose parent is another request
//   badsig TEXT         stdout stream with a corrupted signature
//   clear / clear-wait  clear_output (wait false / true)
//   input               input_request on stdin; a rejected reply is an error
//   sleep MS            sleeps; an interrupt raises KeyboardInterrupt
//   hang                replies but never returns to idle
//   noreply             returns to idle but never replies
//   idle-first          sends idle before the reply
//   silent-hb           stops answering heartbeats
//   die                 exits immediately with status 3

#include "nbcheck/error.hpp"
#include "nbcheck/kernelspec.hpp"
#include "nbcheck/wire.hpp"
#include "nbcheck/zmtp.hpp"

#include <poll.h>
#include <signal.h>
#include <unistd.h>

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using nbcheck::Message;
using nbcheck::Session;
using nbcheck::zmtp::Clock;
using nbcheck::zmtp::Listener;
using nbcheck::zmtp::SocketType;
using nbcheck::zmtp::ZmtpSocket;
using nlohmann::json;

volatile std::sig_atomic_t g_interrupted = 0;

void on_sigint(int) {
    g_interrupted = 1;
}

struct Channel {
    Listener listener;
    SocketType type;
    std::vector<ZmtpSocket> peers;
};

class MockKernel {
public:
    explicit MockKernel(const nbcheck::ConnectionInfo& info)
        : session_(info.key, "mock"),
          shell_{Listener(info.shell_port), SocketType::router, {}},
          iopub_{Listener(info.iopub_port), SocketType::pub, {}},
          stdin_{Listener(info.stdin_port), SocketType::router, {}},
          control_{Listener(info.control_port), SocketType::router, {}},
          hb_{Listener(info.hb_port), SocketType::rep, {}} {}

    int run() {
        while (!exit_requested_) {
            service(200);
            while (!shell_queue_.empty()) {
                auto [peer, frames] = std::move(shell_queue_.front());
                shell_queue_.erase(shell_queue_.begin());
                handle_shell(peer, frames);
                if (exit_requested_) break;
            }
        }
        return exit_code_;
    }

private:
    std::vector<Channel*> channels() { return {&shell_, &iopub_, &stdin_, &control_, &hb_}; }

    /// One round of I/O: accept connections, answer heartbeats and
    /// control requests, queue shell requests and stdin replies.
    void service(int timeout_ms) {
        std::vector<pollfd> fds;
        for (auto* ch : channels()) {
            fds.push_back({ch->listener.fd(), POLLIN, 0});
            for (auto& p : ch->peers) {
                if (p.is_open()) fds.push_back({p.fd(), POLLIN, 0});
            }
        }
        ::poll(fds.data(), fds.size(), timeout_ms);
        for (auto* ch : channels()) {
            pollfd lp{ch->listener.fd(), POLLIN, 0};
            if (::poll(&lp, 1, 0) > 0 && (lp.revents & POLLIN)) {
                try {
                    ch->peers.push_back(ZmtpSocket::accept(
                        ch->listener.fd(), ch->type, Clock::now() + std::chrono::seconds(5)));
                } catch (const nbcheck::Error& e) {
                    std::cerr << "mock: accept failed: " << e.what() << "\n";
                }
            }
            for (auto& p : ch->peers) {
                if (p.is_open()) p.pump();
            }
        }
        for (auto& p : hb_.peers) {
            while (auto frames = p.next()) {
                if (!heartbeat_silent_) p.send(*frames);
            }
        }
        for (auto& p : iopub_.peers) {
            while (p.next()) {
            }
        }
        for (std::size_t i = 0; i < control_.peers.size(); ++i) {
            while (auto frames = control_.peers[i].next()) handle_control(i, *frames);
        }
        for (std::size_t i = 0; i < shell_.peers.size(); ++i) {
            while (auto frames = shell_.peers[i].next()) shell_queue_.emplace_back(i, *frames);
        }
        for (auto& p : stdin_.peers) {
            while (auto frames = p.next()) {
                try {
                    stdin_replies_.push_back(session_.deserialize(*frames));
                } catch (const nbcheck::Error&) {
                }
            }
        }
    }

    void reply(ZmtpSocket& sock, const Message& request, std::string_view type, json content) {
        auto m = session_.make(type, std::move(content), &request);
        m.identities = request.identities;
        sock.send(session_.serialize(m));
    }

    void publish(const Message& m) {
        const auto frames = session_.serialize(m);
        for (auto& p : iopub_.peers) {
            if (p.is_open()) p.send(frames);
        }
    }

    void publish(std::string_view type, json content, const Message& parent) {
        publish(session_.make(type, std::move(content), &parent));
    }

    void status(std::string_view state, const Message& parent) {
        publish("status", {{"execution_state", state}}, parent);
    }

    void handle_control(std::size_t peer, const nbcheck::zmtp::Multipart& frames) {
        Message m;
        try {
            m = session_.deserialize(frames);
        } catch (const nbcheck::Error&) {
            return;
        }
        const auto type = m.msg_type();
        if (type == "shutdown_request") {
            reply(control_.peers[peer], m, "shutdown_reply", {{"status", "ok"}, {"restart", false}});
            exit_requested_ = true;
        } else if (type == "interrupt_request") {
            reply(control_.peers[peer], m, "interrupt_reply", {{"status", "ok"}});
            g_interrupted = 1;
        } else if (type == "kernel_info_request") {
            reply(control_.peers[peer], m, "kernel_info_reply", kernel_info());
        }
    }

    static json kernel_info() {
        return {{"status", "ok"},
                {"protocol_version", std::string(nbcheck::kProtocolVersion)},
                {"implementation", "mock"},
                {"implementation_version", "1.0"},
                {"language_info", {{"name", "python"}, {"file_extension", ".py"}}},
                {"banner", "scripted mock kernel"}};
    }

    void handle_shell(std::size_t peer, const nbcheck::zmtp::Multipart& frames) {
        Message m;
        try {
            m = session_.deserialize(frames);
        } catch (const nbcheck::Error& e) {
            std::cerr << "mock: bad request: " << e.what() << "\n";
            return;
        }
        auto& sock = shell_.peers[peer];
        const auto type = m.msg_type();
        if (type == "kernel_info_request") {
            status("busy", m);
            reply(sock, m, "kernel_info_reply", kernel_info());
            status("idle", m);
        } else if (type == "execute_request") {
            execute(sock, m);
        } else if (type == "shutdown_request") {
            reply(sock, m, "shutdown_reply", {{"status", "ok"}, {"restart", false}});
            exit_requested_ = true;
        }
    }

    void stream(const Message& parent, std::string_view name, std::string text) {
        publish("stream", {{"name", name}, {"text", std::move(text)}}, parent);
    }

    void execute(ZmtpSocket& sock, const Message& request) {
        g_interrupted = 0;
        ++execution_count_;
        status("busy", request);
        const std::string code = request.content.value("code", "");
        publish("execute_input", {{"code", code}, {"execution_count", execution_count_}}, request);

        bool send_reply = true;
        bool send_idle = true;
        bool idle_first = false;
        json error;

        std::istringstream lines(code);
        std::string line;
        while (error.is_null() && std::getline(lines, line)) {
            if (line.empty() || line[0] == '#') continue;
            const auto space = line.find(' ');
            const std::string cmd = line.substr(0, space);
            const std::string arg = space == std::string::npos ? "" : line.substr(space + 1);
            if (cmd == "print") {
                stream(request, "stdout", arg + "\n");
            } else if (cmd == "stderr") {
                stream(request, "stderr", arg + "\n");
            } else if (cmd == "chunks") {
                const auto sp = arg.find(' ');
                const std::size_t n = std::stoul(arg.substr(0, sp));
                const std::string text = (sp == std::string::npos ? "" : arg.substr(sp + 1)) + "\n";
                const std::size_t step = (text.size() + n - 1) / n;
                for (std::size_t i = 0; i < n; ++i) {
                    const std::size_t from = std::min(text.size(), i * step);
                    stream(request, "stdout", text.substr(from, step));
                }
            } else if (cmd == "result") {
                publish("execute_result",
                        {{"execution_count", execution_count_},
                         {"data", {{"text/plain", arg}}},
                         {"metadata", json::object()}},
                        request);
            } else if (cmd == "display") {
                publish("display_data",
                        {{"data", {{"text/plain", arg}}}, {"metadata", json::object()}}, request);
            } else if (cmd == "png") {
                publish("display_data",
                        {{"data", {{"text/plain", "<Image>"}, {"image/png", arg}}},
                         {"metadata", json::object()}},
                        request);
            } else if (cmd == "error") {
                const auto sp = arg.find(' ');
                raise(request, arg.substr(0, sp), sp == std::string::npos ? "" : arg.substr(sp + 1),
                      error);
            } else if (cmd == "foreign") {
                Message other = session_.make("execute_request", json::object());
                stream(other, "stdout", arg + "\n");
            } else if (cmd == "badsig") {
                auto m = session_.make("stream", {{"name", "stdout"}, {"text", arg + "\n"}}, &request);
                auto frames = session_.serialize(m);
                for (std::size_t i = 0; i < frames.size(); ++i) {
                    if (frames[i] == nbcheck::kDelimiter && i + 1 < frames.size()) {
                        auto& sig = frames[i + 1];
                        if (sig.empty()) {
                            sig = std::string(64, '0');
                        } else {
                            sig[0] = sig[0] == '0' ? '1' : '0';
                        }
                        break;
                    }
                }
                for (auto& p : iopub_.peers) {
                    if (p.is_open()) p.send(frames);
                }
            } else if (cmd == "clear") {
                publish("clear_output", {{"wait", false}}, request);
            } else if (cmd == "clear-wait") {
                publish("clear_output", {{"wait", true}}, request);
            } else if (cmd == "input") {
                if (!request_input(request)) {
                    raise(request, "StdinNotImplementedError", "input was rejected", error);
                }
            } else if (cmd == "sleep") {
                const auto until = Clock::now() + std::chrono::milliseconds(std::stol(arg));
                while (Clock::now() < until && !g_interrupted && !exit_requested_) service(10);
                if (g_interrupted) raise(request, "KeyboardInterrupt", "", error);
            } else if (cmd == "hang") {
                send_idle = false;
            } else if (cmd == "noreply") {
                send_reply = false;
            } else if (cmd == "idle-first") {
                idle_first = true;
            } else if (cmd == "silent-hb") {
                heartbeat_silent_ = true;
            } else if (cmd == "die") {
                std::_Exit(3);
            } else {
                raise(request, "SyntaxError", "unknown command: " + cmd, error);
            }
        }

        json content = error.is_null()
                           ? json{{"status", "ok"},
                                  {"execution_count", execution_count_},
                                  {"user_expressions", json::object()},
                                  {"payload", json::array()}}
                           : error;
        if (idle_first && send_idle) status("idle", request);
        if (send_reply) reply(sock, request, "execute_reply", content);
        if (!idle_first && send_idle) status("idle", request);
    }

    void raise(const Message& request, const std::string& ename, const std::string& evalue,
               json& error) {
        json tb = json::array({"Traceback (most recent call last)", ename + ": " + evalue});
        publish("error", {{"ename", ename}, {"evalue", evalue}, {"traceback", tb}}, request);
        error = {{"status", "error"},
                 {"execution_count", execution_count_},
                 {"ename", ename},
                 {"evalue", evalue},
                 {"traceback", tb}};
    }

    bool request_input(const Message& request) {
        if (stdin_.peers.empty()) return false;
        auto m = session_.make("input_request", {{"prompt", "? "}, {"password", false}}, &request);
        stdin_.peers.front().send(session_.serialize(m));
        const auto until = Clock::now() + std::chrono::seconds(5);
        while (Clock::now() < until) {
            service(10);
            for (const auto& r : stdin_replies_) {
                if (r.parent_id() == m.msg_id()) {
                    const bool ok = r.content.value("status", "ok") == "ok";
                    stdin_replies_.clear();
                    return ok;
                }
            }
        }
        return false;
    }

    Session session_;
    Channel shell_;
    Channel iopub_;
    Channel stdin_;
    Channel control_;
    Channel hb_;
    std::vector<std::pair<std::size_t, nbcheck::zmtp::Multipart>> shell_queue_;
    std::vector<Message> stdin_replies_;
    std::int64_t execution_count_ = 0;
    bool heartbeat_silent_ = false;
    bool exit_requested_ = false;
    int exit_code_ = 0;
};

} // namespace

int main(int argc, char** argv) {
    std::string connection_file;
    bool no_bind = false;
    bool exit_on_start = false;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "-f" && i + 1 < argc) {
            connection_file = argv[++i];
        } else if (arg == "--no-bind") {
            no_bind = true;
        } else if (arg == "--exit-on-start") {
            exit_on_start = true;
        }
    }
    if (exit_on_start) return 4;
    if (connection_file.empty()) {
        std::cerr << "usage: mock_kernel [--no-bind] [--exit-on-start] -f <connection_file>\n";
        return 2;
    }
    std::signal(SIGPIPE, SIG_IGN);
    std::signal(SIGINT, on_sigint);
    if (no_bind) {
        while (true) std::this_thread::sleep_for(std::chrono::seconds(1));
    }
    try {
        std::ifstream in(connection_file);
        std::stringstream buf;
        buf << in.rdbuf();
        MockKernel kernel(nbcheck::ConnectionInfo::from_json(buf.str()));
        return kernel.run();
    } catch (const std::exception& e) {
        std::cerr << "mock: " << e.what() << "\n";
        return 1;
    }
}
