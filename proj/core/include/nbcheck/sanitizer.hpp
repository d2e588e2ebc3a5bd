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

#include <cstddef>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace nbcheck {

/// One `[label]` section of a sanitize file.
struct SanitizerRule {
    std::string label;
    std::string pattern;
    std::regex compiled;
    /// Inserted literally; `$1` and friends are not expanded.
    std::string replacement;
};

/// Ordered regex replacements applied to saved and computed text alike.
///
/// File format:
///
///     # comment
///     [timestamps]
///     regex: \d{2}:\d{2}:\d{2}
///     replace: TIMESTAMP
///
/// Rules run in file order and each sees the previous rule's output.
class SanitizerConfig {
public:
    SanitizerConfig() = default;

    /// Throws ConfigError for a missing key, a key outside a section or a
    /// pattern that does not compile.
    static SanitizerConfig parse(std::string_view text);
    static SanitizerConfig load(const std::string& path);

    /// Appends a rule; throws ConfigError if the pattern does not compile.
    void add_rule(std::string label, std::string pattern, std::string replacement);

    /// Replaces every non-overlapping match of every rule, in order.
    std::string apply(std::string_view text) const;

    const std::vector<SanitizerRule>& rules() const noexcept { return rules_; }
    bool empty() const noexcept { return rules_.empty(); }

private:
    std::vector<SanitizerRule> rules_;
};

inline SanitizerConfig parse_sanitizer_file(std::string_view text) {
    return SanitizerConfig::parse(text);
}

} // namespace nbcheck
