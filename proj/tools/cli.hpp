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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace nbcheck::cli {

/// Expands files and directories into the notebooks to validate. Directories
/// are searched recursively for *.ipynb, skipping `.ipynb_checkpoints`.
/// The result is sorted and free of duplicates. Throws PathNotFound.
std::vector<std::filesystem::path> discover_notebooks(const std::vector<std::string>& paths);

/// Full command line run: parse, discover, validate, report. Returns the
/// process exit code (0 all passed, 1 failures, 2 usage or config error).
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

} // namespace nbcheck::cli
