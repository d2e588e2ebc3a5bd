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

#include "nbcheck/runner.hpp"

#include "nbcheck/directives.hpp"
#include "nbcheck/error.hpp"
#include "nbcheck/notebook.hpp"

#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>
#include <variant>

namespace nbcheck {

namespace fs = std::filesystem;
using SteadyClock = std::chrono::steady_clock;

void validate(const RunConfig& config) {
    if (config.jobs == 0) {
        throw ConfigError("jobs must be at least 1");
    }
    if (!(config.cell_timeout > 0.0)) {
        throw ConfigError("cell timeout must be positive");
    }
    if (!(config.startup_timeout > 0.0)) {
        throw ConfigError("startup timeout must be positive");
    }
}

VerdictCounts& VerdictCounts::operator+=(const VerdictCounts& other) noexcept {
    passed += other.passed;
    failed += other.failed;
    skipped += other.skipped;
    errored += other.errored;
    return *this;
}

std::string notebook_stem(const fs::path& path) {
    auto name = path.filename().string();
    constexpr std::string_view ext = ".ipynb";
    if (name.size() > ext.size() && name.ends_with(ext)) {
        name.resize(name.size() - ext.size());
    }
    return name;
}

namespace {

VerdictCounts tally(const NotebookResult& result) {
    VerdictCounts c;
    for (const auto& v : result.verdicts) {
        switch (v.status) {
        case VerdictStatus::pass: ++c.passed; break;
        case VerdictStatus::fail: ++c.failed; break;
        case VerdictStatus::skip: ++c.skipped; break;
        case VerdictStatus::error: ++c.errored; break;
        }
    }
    if (result.file_error) {
        ++c.errored;
    }
    return c;
}

// Per-cell plan, resolved before the kernel starts.
struct Planned {
    const Cell* cell;
    std::variant<CheckPolicy, std::string> policy;  // string: directive error
};

NotebookResult file_failure(NotebookResult result, std::string message) {
    result.verdicts.clear();
    result.file_error = std::move(message);
    return result;
}

} // namespace

NotebookResult validate_notebook(const fs::path& path, const RunConfig& config,
                                 const SanitizerConfig& sanitizer) {
    const auto started = SteadyClock::now();
    NotebookResult result;
    result.path = path;
    auto done = [&](NotebookResult r) {
        r.counts = tally(r);
        r.wall_time = std::chrono::duration<double>(SteadyClock::now() - started).count();
        return r;
    };

    NotebookDocument doc;
    try {
        doc = load_notebook(path.string());
    } catch (const Error& e) {
        return done(file_failure(std::move(result), e.what()));
    }

    const std::string language = doc.language.value_or("");
    std::vector<Planned> plan;
    bool needs_kernel = false;
    for (const auto& cell : doc.cells) {
        if (!cell.is_code()) continue;
        try {
            const auto policy = decide_check_policy(config.mode, extract_directives(cell, language));
            needs_kernel |= policy.kind != PolicyKind::skip;
            plan.push_back({&cell, policy});
        } catch (const ConflictingDirectives& e) {
            plan.push_back({&cell, std::string(e.what())});
        }
    }

    KernelHandle kernel;
    if (needs_kernel) {
        const std::string name =
            config.kernel_override ? *config.kernel_override : doc.kernel_name.value_or("");
        try {
            const auto spec = config.kernel_dirs.empty()
                                  ? resolve_kernelspec(name, config.default_kernel)
                                  : resolve_kernelspec(name, config.default_kernel, config.kernel_dirs);
            kernel = KernelHandle::start(spec, Seconds(config.startup_timeout), config.kernel_options);
        } catch (const Error& e) {
            return done(file_failure(std::move(result), e.what()));
        }
    }

    std::optional<std::string> aborted;
    for (const auto& step : plan) {
        CellVerdict verdict;
        const std::size_t index = step.cell->index.value_or(0);
        if (aborted) {
            verdict.status = VerdictStatus::error;
            verdict.reason = *aborted;
        } else if (const auto* problem = std::get_if<std::string>(&step.policy)) {
            verdict.status = VerdictStatus::error;
            verdict.reason = *problem;
        } else {
            const auto& policy = std::get<CheckPolicy>(step.policy);
            if (policy.kind == PolicyKind::skip) {
                verdict.status = VerdictStatus::skip;
                verdict.reason = "skipped by marker";
            } else {
                const auto outcome = kernel.execute(step.cell->source, Seconds(config.cell_timeout));
                verdict = compare_cell(step.cell->outputs, outcome, policy, sanitizer,
                                       config.compare_images);
                if (outcome.status == ExecutionStatus::timeout ||
                    outcome.status == ExecutionStatus::kernel_died) {
                    aborted = "not executed: cell " + std::to_string(index) +
                              (outcome.status == ExecutionStatus::timeout ? " timed out"
                                                                          : " lost the kernel");
                }
            }
        }
        verdict.cell_index = index;
        result.verdicts.push_back(std::move(verdict));
    }
    kernel.shutdown();
    return done(std::move(result));
}

std::vector<NotebookResult> validate_notebooks(
    const std::vector<fs::path>& paths, const RunConfig& config, const SanitizerConfig& sanitizer,
    const std::function<void(const NotebookResult&)>& on_result) {
    validate(config);
    std::vector<NotebookResult> results(paths.size());
    std::atomic<std::size_t> next{0};
    std::mutex report_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < paths.size(); i = next++) {
            results[i] = validate_notebook(paths[i], config, sanitizer);
            if (on_result) {
                std::lock_guard lock(report_mutex);
                on_result(results[i]);
            }
        }
    };

    const std::size_t workers = std::min(config.jobs, std::max<std::size_t>(paths.size(), 1));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < workers; ++i) {
            pool.emplace_back(worker);
        }
    }
    return results;
}

int exit_code(const std::vector<NotebookResult>& results) {
    for (const auto& r : results) {
        if (r.file_error) return 1;
        for (const auto& v : r.verdicts) {
            if (v.status == VerdictStatus::fail || v.status == VerdictStatus::error) return 1;
        }
    }
    return 0;
}

} // namespace nbcheck
