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

#include <sys/types.h>

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nbcheck {

/// A spawned child process. The child runs in its own process group; the
/// destructor kills the group and reaps the child if it is still alive.
class ChildProcess {
public:
    ChildProcess() = default;
    ~ChildProcess();

    ChildProcess(ChildProcess&& other) noexcept;
    ChildProcess& operator=(ChildProcess&& other) noexcept;
    ChildProcess(const ChildProcess&) = delete;
    ChildProcess& operator=(const ChildProcess&) = delete;

    /// Starts `argv[0]` (PATH lookup) with `extra_env` added to the current
    /// environment. Standard output and error go to `log_path`, or to
    /// /dev/null when empty. Throws SpawnFailure if exec fails.
    static ChildProcess spawn(const std::vector<std::string>& argv,
                              const std::map<std::string, std::string>& extra_env = {},
                              const std::string& log_path = {});

    pid_t pid() const noexcept { return pid_; }
    bool valid() const noexcept { return pid_ > 0; }

    /// Non-blocking liveness check; reaps the child when it has exited.
    bool running();

    /// Exit status as returned by waitpid, once reaped.
    std::optional<int> exit_status() const noexcept { return status_; }

    bool wait_for_exit(std::chrono::milliseconds timeout);

    /// Sends `sig` to the child (not its group). Returns false if it is gone.
    bool signal(int sig);

    /// SIGKILL to the whole group, then reap.
    void kill();

private:
    explicit ChildProcess(pid_t pid) : pid_(pid) {}

    pid_t pid_ = -1;
    std::optional<int> status_;
};

/// Human-readable description of a waitpid status.
std::string describe_exit_status(int status);

/// Resolves an executable name against PATH; returns empty if absent.
std::string find_executable(const std::string& name);

} // namespace nbcheck
