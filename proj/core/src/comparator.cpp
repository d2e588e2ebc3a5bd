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

#include "nbcheck/comparator.hpp"

#include "nbcheck/diff.hpp"

#include <cstdio>
#include <sstream>

namespace nbcheck {

std::string_view to_string(ExecutionStatus status) {
    switch (status) {
    case ExecutionStatus::ok: return "ok";
    case ExecutionStatus::error: return "error";
    case ExecutionStatus::timeout: return "timeout";
    case ExecutionStatus::kernel_died: return "kernel_died";
    }
    return "ok";
}

std::string_view to_string(PolicyKind kind) {
    switch (kind) {
    case PolicyKind::skip: return "skip";
    case PolicyKind::execute_only: return "execute_only";
    case PolicyKind::check_output: return "check_output";
    case PolicyKind::expect_exception: return "expect_exception";
    }
    return "check_output";
}

std::string_view to_string(NormalizedKind kind) {
    switch (kind) {
    case NormalizedKind::stream_stdout: return "stream_stdout";
    case NormalizedKind::stream_stderr: return "stream_stderr";
    case NormalizedKind::text_result: return "text_result";
    case NormalizedKind::error_name: return "error_name";
    case NormalizedKind::image_png: return "image_png";
    case NormalizedKind::image_jpeg: return "image_jpeg";
    }
    return "text_result";
}

std::string_view to_string(VerdictStatus status) {
    switch (status) {
    case VerdictStatus::pass: return "PASSED";
    case VerdictStatus::fail: return "FAILED";
    case VerdictStatus::skip: return "SKIPPED";
    case VerdictStatus::error: return "ERROR";
    }
    return "ERROR";
}

CheckPolicy decide_check_policy(RunMode mode, const CellDirectives& d) {
    if (d.skip) {
        return {PolicyKind::skip};
    }
    const PolicyKind by_mode =
        mode == RunMode::strict ? (d.ignore_output ? PolicyKind::execute_only : PolicyKind::check_output)
                                : (d.check_output ? PolicyKind::check_output : PolicyKind::execute_only);
    if (d.raises_exception) {
        return {PolicyKind::expect_exception, by_mode == PolicyKind::check_output};
    }
    return {by_mode};
}

std::string normalize_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    auto strip_line_end = [&out] {
        while (!out.empty() && (out.back() == ' ' || out.back() == '\t' || out.back() == '\r' ||
                                out.back() == '\f' || out.back() == '\v')) {
            out.pop_back();
        }
    };
    for (char c : text) {
        if (c == '\n') {
            strip_line_end();
        }
        out.push_back(c);
    }
    strip_line_end();
    // Trailing blank lines carry no content and vary with how a kernel
    // flushes; drop them so "a" and "a\n" compare equal.
    while (!out.empty() && out.back() == '\n') {
        out.pop_back();
        strip_line_end();
    }
    return out;
}

std::vector<NormalizedOutput> normalize_outputs(std::span<const CellOutput> outputs,
                                                bool compare_images) {
    std::vector<NormalizedOutput> raw;
    for (const auto& out : outputs) {
        switch (out.kind) {
        case OutputKind::stream: {
            const auto kind = out.stream_name == StreamName::out ? NormalizedKind::stream_stdout
                                                                 : NormalizedKind::stream_stderr;
            const std::string& text = out.text ? *out.text : std::string();
            if (!raw.empty() && raw.back().kind == kind) {
                raw.back().text += text;
            } else {
                raw.push_back({kind, text, {}});
            }
            break;
        }
        case OutputKind::execute_result:
        case OutputKind::display_data:
            if (out.text) {
                raw.push_back({NormalizedKind::text_result, *out.text, {}});
            }
            if (compare_images && out.image_png) {
                raw.push_back({NormalizedKind::image_png, {}, *out.image_png});
            }
            if (compare_images && out.image_jpeg) {
                raw.push_back({NormalizedKind::image_jpeg, {}, *out.image_jpeg});
            }
            break;
        case OutputKind::error:
            raw.push_back({NormalizedKind::error_name, out.ename, {}});
            break;
        case OutputKind::unknown:
            break;
        }
    }

    std::vector<NormalizedOutput> result;
    result.reserve(raw.size());
    for (auto& entry : raw) {
        if (is_text_kind(entry.kind)) {
            entry.text = normalize_text(entry.text);
            if (entry.text.empty()) {
                continue;
            }
        }
        result.push_back(std::move(entry));
    }
    return result;
}

std::vector<NormalizedOutput> sanitize_outputs(std::vector<NormalizedOutput> outputs,
                                               const SanitizerConfig& sanitizer) {
    if (sanitizer.empty()) {
        return outputs;
    }
    for (auto& out : outputs) {
        if (is_text_kind(out.kind)) {
            out.text = sanitizer.apply(out.text);
        }
    }
    return outputs;
}

namespace {

std::string error_summary(const ExecutionOutcome& outcome) {
    std::string summary = outcome.ename.empty() ? std::string("error") : outcome.ename;
    if (!outcome.evalue.empty()) {
        summary += ": " + outcome.evalue;
    }
    return summary;
}

const CellOutput* saved_error(std::span<const CellOutput> saved) {
    for (const auto& out : saved) {
        if (out.kind == OutputKind::error) {
            return &out;
        }
    }
    return nullptr;
}

std::uint32_t fnv1a(const Bytes& bytes) {
    std::uint32_t h = 2166136261u;
    for (auto b : bytes) {
        h = (h ^ b) * 16777619u;
    }
    return h;
}

std::string header_line(const NormalizedOutput& out) {
    switch (out.kind) {
    case NormalizedKind::stream_stdout: return "[stdout]";
    case NormalizedKind::stream_stderr: return "[stderr]";
    case NormalizedKind::text_result: return "[result]";
    case NormalizedKind::error_name: return "[error]";
    case NormalizedKind::image_png:
    case NormalizedKind::image_jpeg: {
        char hash[16];
        std::snprintf(hash, sizeof hash, "%08x", fnv1a(out.bytes));
        return "[" + std::string(to_string(out.kind)) + " " + std::to_string(out.bytes.size()) +
               " bytes #" + hash + "]";
    }
    }
    return "[?]";
}

std::vector<std::string> flatten(std::span<const NormalizedOutput> outputs) {
    std::vector<std::string> lines;
    for (const auto& out : outputs) {
        lines.push_back(header_line(out));
        if (!is_text_kind(out.kind)) {
            continue;
        }
        std::size_t start = 0;
        while (true) {
            const auto end = out.text.find('\n', start);
            lines.push_back(out.text.substr(start, end == std::string::npos ? std::string::npos
                                                                           : end - start));
            if (end == std::string::npos) {
                break;
            }
            start = end + 1;
        }
    }
    return lines;
}

} // namespace

std::string render_diff(std::span<const NormalizedOutput> saved,
                        std::span<const NormalizedOutput> computed) {
    const auto before = flatten(saved);
    const auto after = flatten(computed);

    std::ostringstream out;
    for (const auto& line : diff_lines(before, after)) {
        switch (line.op) {
        case LineOp::keep: out << line.text << '\n'; break;
        case LineOp::remove: out << '-' << line.text << '\n'; break;
        case LineOp::add: out << '+' << line.text << '\n'; break;
        }
    }

    // Pair images positionally among images.
    std::vector<const NormalizedOutput*> saved_images;
    std::vector<const NormalizedOutput*> computed_images;
    for (const auto& o : saved) {
        if (!is_text_kind(o.kind)) saved_images.push_back(&o);
    }
    for (const auto& o : computed) {
        if (!is_text_kind(o.kind)) computed_images.push_back(&o);
    }
    for (std::size_t i = 0; i < std::min(saved_images.size(), computed_images.size()); ++i) {
        const auto& a = *saved_images[i];
        const auto& b = *computed_images[i];
        if (a.kind == b.kind && a.bytes != b.bytes) {
            out << to_string(a.kind) << " differs: saved " << a.bytes.size()
                << " bytes, computed " << b.bytes.size() << " bytes\n";
        }
    }
    return out.str();
}

CellVerdict compare_cell(std::span<const CellOutput> saved, const ExecutionOutcome& computed,
                         const CheckPolicy& policy, const SanitizerConfig& sanitizer,
                         bool compare_images) {
    CellVerdict verdict;
    verdict.duration = computed.duration;

    if (policy.kind == PolicyKind::skip) {
        verdict.status = VerdictStatus::skip;
        verdict.reason = "skipped by marker";
        return verdict;
    }

    switch (computed.status) {
    case ExecutionStatus::timeout:
        verdict.status = VerdictStatus::error;
        verdict.reason = "cell execution timed out";
        if (!computed.detail.empty()) verdict.reason += " (" + computed.detail + ")";
        return verdict;
    case ExecutionStatus::kernel_died:
        verdict.status = VerdictStatus::error;
        verdict.reason = "kernel died during execution";
        if (!computed.detail.empty()) verdict.reason += " (" + computed.detail + ")";
        return verdict;
    case ExecutionStatus::ok:
    case ExecutionStatus::error:
        break;
    }

    const bool errored = computed.status == ExecutionStatus::error;

    if (policy.kind == PolicyKind::expect_exception) {
        if (!errored) {
            verdict.status = VerdictStatus::fail;
            verdict.reason = "expected an exception but the cell completed without error";
            return verdict;
        }
        if (policy.compare_error_name) {
            if (const auto* expected = saved_error(saved)) {
                const auto want = sanitizer.apply(expected->ename);
                const auto got = sanitizer.apply(computed.ename);
                if (want != got) {
                    verdict.status = VerdictStatus::fail;
                    verdict.reason = "expected exception " + expected->ename + " but got " +
                                     error_summary(computed);
                    return verdict;
                }
            }
        }
        verdict.status = VerdictStatus::pass;
        verdict.reason = "raised " + error_summary(computed) + " as expected";
        return verdict;
    }

    if (errored) {
        verdict.status = VerdictStatus::fail;
        verdict.reason = "cell raised " + error_summary(computed);
        return verdict;
    }

    if (policy.kind == PolicyKind::execute_only) {
        verdict.status = VerdictStatus::pass;
        return verdict;
    }

    const auto want = sanitize_outputs(normalize_outputs(saved, compare_images), sanitizer);
    const auto got = sanitize_outputs(normalize_outputs(computed.outputs, compare_images), sanitizer);
    if (want == got) {
        verdict.status = VerdictStatus::pass;
        return verdict;
    }
    verdict.status = VerdictStatus::fail;
    verdict.reason = "output differs from the saved output";
    verdict.diff = render_diff(want, got);
    return verdict;
}

} // namespace nbcheck
