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

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nbcheck {

/// Contents of a `kernels/<name>/kernel.json` file.
struct KernelSpec {
    std::string name;
    std::string display_name;
    /// Command template; contains `{connection_file}` exactly once.
    std::vector<std::string> argv;
    std::string language;
    std::filesystem::path resource_dir;
    /// "signal" (SIGINT) or "message" (interrupt_request on control).
    std::string interrupt_mode = "signal";
    std::map<std::string, std::string> env;
};

/// Kernel directories in search order: each `$JUPYTER_PATH` entry, the
/// user data dir (`$JUPYTER_DATA_DIR` or `~/.local/share/jupyter`), then
/// the system dirs under /usr/local/share and /usr/share.
std::vector<std::filesystem::path> kernel_search_path();

/// Reads and validates `<dir>/kernel.json`.
KernelSpec load_kernelspec(const std::filesystem::path& dir);

/// First `<dir>/<name>/kernel.json` along `search_dirs`. An empty `name`
/// means `default_name`. Throws KernelNotFound.
KernelSpec resolve_kernelspec(std::string_view name, std::string_view default_name,
                              std::span<const std::filesystem::path> search_dirs);

KernelSpec resolve_kernelspec(std::string_view name, std::string_view default_name = "python3");

/// Substitutes `{connection_file}` and `{resource_dir}` in the argv
/// template. A bare `python` that is not on PATH is replaced by `python3`.
std::vector<std::string> kernel_command(const KernelSpec& spec,
                                        const std::filesystem::path& connection_file);

/// The JSON connection file a kernel binds its sockets from.
struct ConnectionInfo {
    std::string transport = "tcp";
    std::string ip = "127.0.0.1";
    std::uint16_t shell_port = 0;
    std::uint16_t iopub_port = 0;
    std::uint16_t stdin_port = 0;
    std::uint16_t control_port = 0;
    std::uint16_t hb_port = 0;
    std::string key;
    std::string signature_scheme = "hmac-sha256";
    std::string kernel_name;

    std::string to_json() const;
    static ConnectionInfo from_json(std::string_view text);

    bool operator==(const ConnectionInfo&) const = default;
};

/// Loopback connection info with five distinct free ports and a fresh
/// key of 32 random bytes (hex encoded).
ConnectionInfo allocate_connection_info(std::string_view kernel_name = {});

/// Writes the file with mode 0600.
void write_connection_file(const ConnectionInfo& info, const std::filesystem::path& path);

} // namespace nbcheck
