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

#include <span>
#include <string>
#include <vector>

namespace nbcheck {

enum class LineOp { keep, remove, add };

struct DiffLine {
    LineOp op;
    std::string text;

    bool operator==(const DiffLine&) const = default;
};

/// Minimal line diff (longest common subsequence). Within each changed
/// region removals come before additions. Inputs whose differing middle
/// exceeds a few million line pairs fall back to remove-all / add-all.
std::vector<DiffLine> diff_lines(std::span<const std::string> before,
                                 std::span<const std::string> after);

} // namespace nbcheck
