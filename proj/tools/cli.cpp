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

#include "cli.hpp"

#include "nbcheck/error.hpp"
#include "nbcheck/report.hpp"
#include "nbcheck/runner.hpp"
#include "nbcheck/sanitizer.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>

namespace nbcheck::cli {

namespace fs = std::filesystem;

std::vector<fs::path> discover_notebooks(const std::vector<std::string>& paths) {
    std::vector<fs::path> found;
    for (const auto& p : paths) {
        const fs::path path(p);
        std::error_code ec;
        const auto status = fs::status(path, ec);
        if (ec || !fs::exists(status)) {
            throw PathNotFound("no such file or directory: " + p);
        }
        if (!fs::is_directory(status)) {
            found.push_back(path.lexically_normal());
            continue;
        }
        fs::recursive_directory_iterator it(path, fs::directory_options::skip_permission_denied, ec);
        if (ec) {
            throw PathNotFound("cannot read directory " + p + ": " + ec.message());
        }
        for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
            if (ec) break;
            const auto& entry = *it;
            if (entry.path().filename() == ".ipynb_checkpoints") {
                if (entry.is_directory()) it.disable_recursion_pending();
                continue;
            }
            if (entry.is_regular_file() && entry.path().extension() == ".ipynb") {
                found.push_back(entry.path().lexically_normal());
            }
        }
    }
    std::sort(found.begin(), found.end());
    found.erase(std::unique(found.begin(), found.end()), found.end());
    return found;
}

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Re-execute Jupyter notebooks and check their saved outputs", "nbcheck"};

    std::vector<std::string> paths;
    bool strict = false;
    bool lax = false;
    std::string sanitize_with;
    std::string kernel;
    std::string junit_path;
    RunConfig config;
    std::size_t jobs = 1;

    app.add_option("paths", paths, "Notebook files or directories to search for *.ipynb");
    auto* strict_flag = app.add_flag("--nbval", strict, "Strict mode: check all outputs unless marked");
    auto* lax_flag = app.add_flag("--nbval-lax", lax, "Lax mode: check only cells marked for checking");
    strict_flag->excludes(lax_flag);
    app.add_option("--sanitize-with", sanitize_with, "Sanitize file of regex/replace sections");
    app.add_option("--kernel", kernel, "Kernel to use instead of the notebook's kernelspec");
    app.add_option("--default-kernel", config.default_kernel,
                   "Kernel for notebooks that name none")
        ->envname("NBCHECK_DEFAULT_KERNEL")
        ->capture_default_str();
    app.add_option("--cell-timeout", config.cell_timeout, "Seconds a single cell may run")
        ->envname("NBCHECK_CELL_TIMEOUT")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--startup-timeout", config.startup_timeout, "Seconds a kernel may take to start")
        ->envname("NBCHECK_STARTUP_TIMEOUT")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("-j,--jobs", jobs, "Notebooks validated in parallel")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_flag("--compare-images", config.compare_images, "Also compare PNG and JPEG outputs byte for byte");
    app.add_option("--junit-xml", junit_path, "Write a JUnit XML report to this path");
    app.add_flag("-v,--verbose", config.verbose, "One line per cell");

    std::vector<const char*> raw;
    for (const auto& a : argv) raw.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(raw.size()), raw.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "nbcheck: " << e.what() << '\n';
        return 2;
    }

    if (!strict && !lax) {
        err << "nbcheck: neither --nbval nor --nbval-lax given; using strict mode\n";
    }
    config.mode = lax ? RunMode::lax : RunMode::strict;
    config.jobs = jobs;
    if (!kernel.empty()) config.kernel_override = kernel;
    if (config.verbose) {
        auto log_mutex = std::make_shared<std::mutex>();
        config.kernel_options.log = [&err, log_mutex](std::string_view line) {
            std::lock_guard lock(*log_mutex);
            err << "nbcheck: " << line << '\n';
        };
    }

    SanitizerConfig sanitizer;
    std::vector<fs::path> notebooks;
    try {
        validate(config);
        if (!sanitize_with.empty()) {
            config.sanitizer_path = sanitize_with;
            sanitizer = SanitizerConfig::load(sanitize_with);
        }
        notebooks = discover_notebooks(paths);
    } catch (const Error& e) {
        err << "nbcheck: " << e.what() << '\n';
        return 2;
    }

    const auto started = std::chrono::steady_clock::now();
    const auto results = validate_notebooks(notebooks, config, sanitizer);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    out << emit_console_report(results, config.verbose, elapsed);
    out.flush();

    if (!junit_path.empty()) {
        std::ofstream xml(junit_path, std::ios::binary | std::ios::trunc);
        if (!xml || !(xml << emit_junit_xml(results))) {
            err << "nbcheck: cannot write " << junit_path << '\n';
            return 2;
        }
    }
    return exit_code(results);
}

} // namespace nbcheck::cli
