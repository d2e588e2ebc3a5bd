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

// Output checking: which cells are checked, how outputs are normalized
// before comparison, and how mismatches are rendered.

#include "nbcheck/directives.hpp"
#include "nbcheck/execution.hpp"
#include "nbcheck/notebook.hpp"
#include "nbcheck/sanitizer.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nbcheck {

enum class RunMode { strict, lax };

enum class PolicyKind { skip, execute_only, check_output, expect_exception };

std::string_view to_string(PolicyKind kind);

struct CheckPolicy {
    PolicyKind kind = PolicyKind::check_output;
    /// expect_exception only: the cell would have been output-checked without
    /// the marker, so a saved exception type must match the computed one.
    bool compare_error_name = false;

    bool operator==(const CheckPolicy&) const = default;
};

/// skip > raises_exception > mode default, with check/ignore markers
/// flipping the mode default.
CheckPolicy decide_check_policy(RunMode mode, const CellDirectives& directives);

enum class NormalizedKind { stream_stdout, stream_stderr, text_result, error_name, image_png, image_jpeg };

std::string_view to_string(NormalizedKind kind);

constexpr bool is_text_kind(NormalizedKind kind) noexcept {
    return kind != NormalizedKind::image_png && kind != NormalizedKind::image_jpeg;
}

struct NormalizedOutput {
    NormalizedKind kind = NormalizedKind::stream_stdout;
    /// Payload of text kinds.
    std::string text;
    /// Payload of image kinds.
    Bytes bytes;

    bool operator==(const NormalizedOutput&) const = default;
};

/// Reduces outputs to their comparable payloads: adjacent same-name streams
/// are merged, results contribute text/plain (plus images when
/// `compare_images`), errors contribute the exception type. Line endings
/// become `\n` and trailing blanks are stripped from every line.
std::vector<NormalizedOutput> normalize_outputs(std::span<const CellOutput> outputs,
                                                bool compare_images);

/// `\r\n` to `\n`; trailing spaces, tabs and carriage returns removed per
/// line; trailing newlines removed.
std::string normalize_text(std::string_view text);

/// Applies `sanitizer` to every text payload.
std::vector<NormalizedOutput> sanitize_outputs(std::vector<NormalizedOutput> outputs,
                                               const SanitizerConfig& sanitizer);

enum class VerdictStatus { pass, fail, skip, error };

/// PASSED / FAILED / SKIPPED / ERROR.
std::string_view to_string(VerdictStatus status);

struct CellVerdict {
    VerdictStatus status = VerdictStatus::pass;
    std::size_t cell_index = 0;
    /// Set only for failures caused by an output mismatch.
    std::optional<std::string> diff;
    std::string reason;
    double duration = 0.0;
};

CellVerdict compare_cell(std::span<const CellOutput> saved, const ExecutionOutcome& computed,
                         const CheckPolicy& policy, const SanitizerConfig& sanitizer,
                         bool compare_images);

/// Line diff of the flattened payloads. Each output contributes a `[kind]`
/// header line followed by its text lines; lines only in `saved` get a `-`
/// prefix, lines only in `computed` a `+`, shared lines none. Differing
/// images at the same position add a note with both byte counts.
std::string render_diff(std::span<const NormalizedOutput> saved,
                        std::span<const NormalizedOutput> computed);

} // namespace nbcheck
