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

#include "nbcheck/notebook.hpp"

#include <string_view>

namespace nbcheck {

/// Per-cell markers. Each one can be given as a cell tag (`nbval-skip`) or
/// as an uppercase comment token (`# NBVAL_SKIP`).
struct CellDirectives {
    bool check_output = false;
    bool ignore_output = false;
    bool skip = false;
    bool raises_exception = false;

    bool operator==(const CellDirectives&) const = default;
};

/// Line-comment prefix for a kernel language; "#" when unknown or empty.
std::string_view comment_prefix(std::string_view language);

/// Resolves the markers of a code cell from its tags and source.
///
/// A comment token counts only on a line whose first non-blank characters
/// open a comment for `language`, and only as a whole word. Throws
/// ConflictingDirectives when both check and ignore are requested.
CellDirectives extract_directives(const Cell& cell, std::string_view language = {});

} // namespace nbcheck
