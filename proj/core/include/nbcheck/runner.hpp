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

#include "nbcheck/comparator.hpp"
#include "nbcheck/kernel_client.hpp"
#include "nbcheck/sanitizer.hpp"

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace nbcheck {

struct RunConfig {
    RunMode mode = RunMode::strict;
    std::optional<std::filesystem::path> sanitizer_path;
    /// Beats the notebook's own kernelspec name.
    std::optional<std::string> kernel_override;
    /// Used when neither the override nor the notebook names a kernel.
    std::string default_kernel = "python3";
    double cell_timeout = 300.0;
    double startup_timeout = 60.0;
    std::size_t jobs = 1;
    bool compare_images = false;
    bool verbose = false;
    /// Kernelspec directories; empty means the standard Jupyter search path.
    std::vector<std::filesystem::path> kernel_dirs;
    KernelOptions kernel_options;
};

/// Throws ConfigError when jobs is zero or a timeout is not positive.
void validate(const RunConfig& config);

struct VerdictCounts {
    std::size_t passed = 0;
    std::size_t failed = 0;
    std::size_t skipped = 0;
    std::size_t errored = 0;

    std::size_t total() const noexcept { return passed + failed + skipped + errored; }
    VerdictCounts& operator+=(const VerdictCounts& other) noexcept;
    bool operator==(const VerdictCounts&) const = default;
};

struct NotebookResult {
    std::filesystem::path path;
    std::vector<CellVerdict> verdicts;
    /// Tally of `verdicts`, plus one errored unit when `file_error` is set.
    VerdictCounts counts;
    double wall_time = 0.0;
    /// Whole-file failure (unreadable, malformed, no kernel, no startup).
    std::optional<std::string> file_error;
};

/// "<name>" for "<dir>/<name>.ipynb".
std::string notebook_stem(const std::filesystem::path& path);

/// Runs every code cell of one notebook on a fresh kernel, in order, and
/// judges each against its saved outputs. Cells after a timeout or kernel
/// death are not run and get error verdicts.
NotebookResult validate_notebook(const std::filesystem::path& path, const RunConfig& config,
                                 const SanitizerConfig& sanitizer);

/// Validates notebooks with up to `config.jobs` workers. Results follow
/// the order of `paths`. `on_result` (if set) is called as each notebook
/// finishes, from the worker thread, serialized.
std::vector<NotebookResult> validate_notebooks(
    const std::vector<std::filesystem::path>& paths, const RunConfig& config,
    const SanitizerConfig& sanitizer,
    const std::function<void(const NotebookResult&)>& on_result = {});

/// 0 when every verdict is pass or skip and no file failed, otherwise 1.
int exit_code(const std::vector<NotebookResult>& results);

} // namespace nbcheck
