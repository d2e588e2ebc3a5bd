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

#include "nbcheck/kernelspec.hpp"

#include "nbcheck/error.hpp"
#include "nbcheck/process.hpp"

#include <nlohmann/json.hpp>
#include <openssl/rand.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <array>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace nbcheck {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<fs::path> kernel_search_path() {
    std::vector<fs::path> dirs;
    if (const char* jp = std::getenv("JUPYTER_PATH"); jp && *jp) {
        std::string_view rest(jp);
        while (!rest.empty()) {
            const auto colon = rest.find(':');
            const auto entry = rest.substr(0, colon);
            if (!entry.empty()) {
                dirs.push_back(fs::path(entry) / "kernels");
            }
            if (colon == std::string_view::npos) break;
            rest.remove_prefix(colon + 1);
        }
    }
    if (const char* data = std::getenv("JUPYTER_DATA_DIR"); data && *data) {
        dirs.push_back(fs::path(data) / "kernels");
    } else if (const char* xdg = std::getenv("XDG_DATA_HOME"); xdg && *xdg) {
        dirs.push_back(fs::path(xdg) / "jupyter" / "kernels");
    } else if (const char* home = std::getenv("HOME"); home && *home) {
        dirs.push_back(fs::path(home) / ".local" / "share" / "jupyter" / "kernels");
    }
    dirs.emplace_back("/usr/local/share/jupyter/kernels");
    dirs.emplace_back("/usr/share/jupyter/kernels");
    return dirs;
}

KernelSpec load_kernelspec(const fs::path& dir) {
    const fs::path file = dir / "kernel.json";
    std::ifstream in(file);
    if (!in) {
        throw KernelNotFound("cannot read " + file.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const json j = json::parse(buf.str(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw KernelNotFound(file.string() + " is not a valid kernel spec");
    }

    KernelSpec spec;
    spec.name = dir.filename().string();
    spec.resource_dir = dir;
    spec.display_name = j.value("display_name", spec.name);
    spec.language = j.value("language", "");
    spec.interrupt_mode = j.value("interrupt_mode", "signal");

    const auto argv = j.find("argv");
    if (argv == j.end() || !argv->is_array() || argv->empty()) {
        throw KernelNotFound(file.string() + ": missing argv");
    }
    std::size_t placeholders = 0;
    for (const auto& a : *argv) {
        if (!a.is_string()) {
            throw KernelNotFound(file.string() + ": argv entries must be strings");
        }
        const auto& s = a.get_ref<const std::string&>();
        for (auto pos = s.find("{connection_file}"); pos != std::string::npos;
             pos = s.find("{connection_file}", pos + 1)) {
            ++placeholders;
        }
        spec.argv.push_back(s);
    }
    if (placeholders != 1) {
        throw KernelNotFound(file.string() +
                             ": argv must contain {connection_file} exactly once");
    }
    if (auto env = j.find("env"); env != j.end() && env->is_object()) {
        for (const auto& [k, v] : env->items()) {
            if (v.is_string()) spec.env[k] = v.get<std::string>();
        }
    }
    return spec;
}

KernelSpec resolve_kernelspec(std::string_view name, std::string_view default_name,
                              std::span<const fs::path> search_dirs) {
    const std::string wanted(name.empty() ? default_name : name);
    if (wanted.empty() || wanted.find('/') != std::string::npos || wanted == "." || wanted == "..") {
        throw KernelNotFound("invalid kernel name '" + wanted + "'");
    }
    for (const auto& dir : search_dirs) {
        const fs::path candidate = dir / wanted;
        std::error_code ec;
        if (fs::is_regular_file(candidate / "kernel.json", ec)) {
            return load_kernelspec(candidate);
        }
    }
    std::string searched;
    for (const auto& dir : search_dirs) {
        searched += searched.empty() ? "" : ", ";
        searched += dir.string();
    }
    throw KernelNotFound("no kernel named '" + wanted + "' (searched: " + searched + ")");
}

KernelSpec resolve_kernelspec(std::string_view name, std::string_view default_name) {
    const auto dirs = kernel_search_path();
    return resolve_kernelspec(name, default_name, dirs);
}

std::vector<std::string> kernel_command(const KernelSpec& spec, const fs::path& connection_file) {
    auto replace_all = [](std::string s, std::string_view from, const std::string& to) {
        for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
            s.replace(pos, from.size(), to);
        }
        return s;
    };
    std::vector<std::string> argv;
    for (const auto& a : spec.argv) {
        argv.push_back(replace_all(replace_all(a, "{connection_file}", connection_file.string()),
                                   "{resource_dir}", spec.resource_dir.string()));
    }
    // Stock ipykernel specs say "python", which many systems only ship as python3.
    if (!argv.empty() && argv[0] == "python" && find_executable("python").empty() &&
        !find_executable("python3").empty()) {
        argv[0] = "python3";
    }
    return argv;
}

std::string ConnectionInfo::to_json() const {
    json j = {{"transport", transport},
              {"ip", ip},
              {"shell_port", shell_port},
              {"iopub_port", iopub_port},
              {"stdin_port", stdin_port},
              {"control_port", control_port},
              {"hb_port", hb_port},
              {"key", key},
              {"signature_scheme", signature_scheme},
              {"kernel_name", kernel_name}};
    return j.dump(1) + "\n";
}

ConnectionInfo ConnectionInfo::from_json(std::string_view text) {
    const json j = json::parse(text.begin(), text.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ProtocolError("connection file is not a JSON object");
    }
    try {
        ConnectionInfo info;
        info.transport = j.value("transport", "tcp");
        info.ip = j.at("ip").get<std::string>();
        info.shell_port = j.at("shell_port").get<std::uint16_t>();
        info.iopub_port = j.at("iopub_port").get<std::uint16_t>();
        info.stdin_port = j.at("stdin_port").get<std::uint16_t>();
        info.control_port = j.at("control_port").get<std::uint16_t>();
        info.hb_port = j.at("hb_port").get<std::uint16_t>();
        info.key = j.value("key", "");
        info.signature_scheme = j.value("signature_scheme", "hmac-sha256");
        info.kernel_name = j.value("kernel_name", "");
        return info;
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("bad connection file: ") + e.what());
    }
}

ConnectionInfo allocate_connection_info(std::string_view kernel_name) {
    // Hold all five sockets open together so the ports come out distinct.
    std::array<int, 5> fds{};
    std::array<std::uint16_t, 5> ports{};
    for (std::size_t i = 0; i < fds.size(); ++i) {
        fds[i] = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = 0;
        socklen_t len = sizeof addr;
        if (fds[i] < 0 || ::bind(fds[i], reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
            ::getsockname(fds[i], reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
            for (std::size_t k = 0; k <= i; ++k) {
                if (fds[k] >= 0) ::close(fds[k]);
            }
            throw SpawnFailure("cannot allocate a loopback port");
        }
        ports[i] = ntohs(addr.sin_port);
    }
    for (int fd : fds) {
        ::close(fd);
    }

    std::array<unsigned char, 32> raw{};
    if (RAND_bytes(raw.data(), static_cast<int>(raw.size())) != 1) {
        throw SpawnFailure("cannot generate a session key");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string key;
    for (unsigned char b : raw) {
        key.push_back(hex[b >> 4]);
        key.push_back(hex[b & 0xf]);
    }

    ConnectionInfo info;
    info.shell_port = ports[0];
    info.iopub_port = ports[1];
    info.stdin_port = ports[2];
    info.control_port = ports[3];
    info.hb_port = ports[4];
    info.key = std::move(key);
    info.kernel_name = std::string(kernel_name);
    return info;
}

void write_connection_file(const ConnectionInfo& info, const fs::path& path) {
    const std::string text = info.to_json();
    const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0600);
    if (fd < 0) {
        throw SpawnFailure("cannot write connection file " + path.string());
    }
    std::size_t written = 0;
    while (written < text.size()) {
        const auto n = ::write(fd, text.data() + written, text.size() - written);
        if (n <= 0) {
            ::close(fd);
            throw SpawnFailure("cannot write connection file " + path.string());
        }
        written += static_cast<std::size_t>(n);
    }
    ::close(fd);
}

} // namespace nbcheck
