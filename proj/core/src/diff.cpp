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

#include "nbcheck/diff.hpp"

#include <algorithm>
#include <cstdint>

namespace nbcheck {

namespace {

constexpr std::size_t kMaxTableCells = std::size_t{4} << 20;

void emit_block(std::vector<DiffLine>& out, std::span<const std::string> removed,
                std::span<const std::string> added) {
    for (const auto& line : removed) {
        out.push_back({LineOp::remove, line});
    }
    for (const auto& line : added) {
        out.push_back({LineOp::add, line});
    }
}

} // namespace

std::vector<DiffLine> diff_lines(std::span<const std::string> before,
                                 std::span<const std::string> after) {
    std::vector<DiffLine> out;

    std::size_t prefix = 0;
    while (prefix < before.size() && prefix < after.size() && before[prefix] == after[prefix]) {
        ++prefix;
    }
    std::size_t suffix = 0;
    while (suffix < before.size() - prefix && suffix < after.size() - prefix &&
           before[before.size() - 1 - suffix] == after[after.size() - 1 - suffix]) {
        ++suffix;
    }

    for (std::size_t i = 0; i < prefix; ++i) {
        out.push_back({LineOp::keep, before[i]});
    }

    const auto a = before.subspan(prefix, before.size() - prefix - suffix);
    const auto b = after.subspan(prefix, after.size() - prefix - suffix);
    const std::size_t n = a.size();
    const std::size_t m = b.size();

    if (n == 0 || m == 0 || (n + 1) * (m + 1) > kMaxTableCells) {
        emit_block(out, a, b);
    } else {
        // lcs[i][j] = LCS length of a[i..] and b[j..]
        std::vector<std::uint32_t> lcs((n + 1) * (m + 1), 0);
        auto at = [m](std::size_t i, std::size_t j) { return i * (m + 1) + j; };
        for (std::size_t i = n; i-- > 0;) {
            for (std::size_t j = m; j-- > 0;) {
                lcs[at(i, j)] = a[i] == b[j] ? lcs[at(i + 1, j + 1)] + 1
                                             : std::max(lcs[at(i + 1, j)], lcs[at(i, j + 1)]);
            }
        }

        std::vector<std::string> removed;
        std::vector<std::string> added;
        auto flush = [&] {
            emit_block(out, removed, added);
            removed.clear();
            added.clear();
        };
        std::size_t i = 0;
        std::size_t j = 0;
        while (i < n && j < m) {
            if (a[i] == b[j]) {
                flush();
                out.push_back({LineOp::keep, a[i]});
                ++i;
                ++j;
            } else if (lcs[at(i + 1, j)] >= lcs[at(i, j + 1)]) {
                removed.push_back(a[i++]);
            } else {
                added.push_back(b[j++]);
            }
        }
        while (i < n) {
            removed.push_back(a[i++]);
        }
        while (j < m) {
            added.push_back(b[j++]);
        }
        flush();
    }

    for (std::size_t i = before.size() - suffix; i < before.size(); ++i) {
        out.push_back({LineOp::keep, before[i]});
    }
    return out;
}

} // namespace nbcheck
