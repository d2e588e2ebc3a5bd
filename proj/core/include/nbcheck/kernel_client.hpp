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

#include "nbcheck/execution.hpp"
#include "nbcheck/kernelspec.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <string_view>

namespace nbcheck {

using Seconds = std::chrono::duration<double>;

struct KernelOptions {
    /// How long an interrupted cell may take to settle before the kernel
    /// is killed.
    std::chrono::milliseconds interrupt_grace{5000};
    /// How long a kernel may take to exit after shutdown_request.
    std::chrono::milliseconds shutdown_grace{5000};
    std::chrono::milliseconds heartbeat_interval{1000};
    /// Unanswered heartbeat age that counts as a dead kernel; zero disables.
    std::chrono::milliseconds heartbeat_timeout{20000};
    /// Where the kernel's stdout/stderr go; empty discards them.
    std::string log_path;
    /// Diagnostics sink (rejected messages, forced kills).
    std::function<void(std::string_view)> log;
};

/// A live kernel: the child process (when we launched it) plus the five
/// protocol channels. Confined to one thread at a time.
class KernelHandle {
public:
    KernelHandle();
    ~KernelHandle();
    KernelHandle(KernelHandle&&) noexcept;
    KernelHandle& operator=(KernelHandle&&) noexcept;

    /// Writes a connection file, spawns the kernel from `spec`, connects
    /// all channels and confirms liveness with a kernel_info round trip.
    /// Throws SpawnFailure or StartupTimeout.
    static KernelHandle start(const KernelSpec& spec, Seconds startup_timeout,
                              KernelOptions options = {});

    /// Connects to an already running kernel. Interrupts go through the
    /// control channel and nothing is killed.
    static KernelHandle attach(const ConnectionInfo& info, Seconds startup_timeout,
                               KernelOptions options = {});

    /// Runs `source` and collects its outputs. Completes once both the
    /// execute_reply and the return-to-idle broadcast have arrived.
    /// Timeouts and kernel death are reported in the outcome status.
    ExecutionOutcome execute(std::string_view source, Seconds cell_timeout);

    /// shutdown_request, then kill after the grace period. Idempotent.
    void shutdown();

    bool alive();
    const nlohmann::json& kernel_info() const;
    const ConnectionInfo& connection() const;

    /// Messages dropped because their signature did not verify.
    std::size_t rejected_messages() const noexcept;

private:
    struct Impl;
    explicit KernelHandle(std::unique_ptr<Impl> impl);
    std::unique_ptr<Impl> impl_;
};

inline KernelHandle start_kernel(const KernelSpec& spec, Seconds timeout,
                                 KernelOptions options = {}) {
    return KernelHandle::start(spec, timeout, std::move(options));
}

/// Turns an iopub message into a CellOutput; nullopt for bookkeeping
/// messages (status, execute_input, ...).
std::optional<CellOutput> output_from_message(std::string_view msg_type,
                                              const nlohmann::json& content);

} // namespace nbcheck
