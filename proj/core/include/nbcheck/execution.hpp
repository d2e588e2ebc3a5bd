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

#include <string>
#include <vector>

namespace nbcheck {

enum class ExecutionStatus { ok, error, timeout, kernel_died };

std::string_view to_string(ExecutionStatus status);

/// Result of running one cell on a kernel.
struct ExecutionOutcome {
    ExecutionStatus status = ExecutionStatus::ok;
    /// Broadcast outputs for this request, in arrival order.
    std::vector<CellOutput> outputs;
    std::string ename;
    std::string evalue;
    std::vector<std::string> traceback;
    double duration = 0.0;
    /// Extra context for timeout / kernel_died.
    std::string detail;
};

} // namespace nbcheck
