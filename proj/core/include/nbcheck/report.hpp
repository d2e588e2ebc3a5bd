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

#include "nbcheck/runner.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nbcheck {

/// Console report. Verbose mode lists `<stem>::ipynb::Cell <k> <STATUS>`
/// per cell, otherwise one progress line per notebook. Both end with
/// `<P> passed[, <F> failed][, <S> skipped][, <E> errored] in <T>s`,
/// followed by the details of failed and errored cells. `elapsed`
/// defaults to the summed notebook wall times.
std::string emit_console_report(const std::vector<NotebookResult>& results, bool verbose,
                                std::optional<double> elapsed = std::nullopt);

/// The summary line alone (no trailing newline).
std::string summary_line(const VerdictCounts& counts, double elapsed);

/// JUnit XML: one testsuite per notebook, one testcase per code cell.
std::string emit_junit_xml(const std::vector<NotebookResult>& results);

/// Escapes XML metacharacters and drops characters XML 1.0 forbids.
std::string xml_escape(std::string_view text);

} // namespace nbcheck
