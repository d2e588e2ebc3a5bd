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

#include "nbcheck/sanitizer.hpp"

#include "nbcheck/error.hpp"

#include <fstream>
#include <optional>
#include <sstream>

namespace nbcheck {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct PendingSection {
    std::string label;
    std::size_t line = 0;
    std::optional<std::string> regex;
    std::optional<std::string> replace;
};

} // namespace

void SanitizerConfig::add_rule(std::string label, std::string pattern, std::string replacement) {
    std::regex compiled;
    try {
        compiled = std::regex(pattern, std::regex::ECMAScript | std::regex::optimize);
    } catch (const std::regex_error& e) {
        throw ConfigError("section [" + label + "]: pattern '" + pattern +
                          "' does not compile: " + e.what());
    }
    rules_.push_back(SanitizerRule{std::move(label), std::move(pattern), std::move(compiled),
                                   std::move(replacement)});
}

SanitizerConfig SanitizerConfig::parse(std::string_view text) {
    SanitizerConfig config;
    std::optional<PendingSection> section;

    auto finish = [&config](PendingSection& s) {
        const std::string where = "section [" + s.label + "] (line " + std::to_string(s.line) + ")";
        if (!s.regex) {
            throw ConfigError(where + ": missing 'regex' key");
        }
        if (!s.replace) {
            throw ConfigError(where + ": missing 'replace' key");
        }
        try {
            config.add_rule(s.label, *s.regex, *s.replace);
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": " + e.what());
        }
    };

    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        ++line_no;
        const std::string_view line = trim(text.substr(start, end - start));
        start = end + 1;

        if (line.empty() || line.front() == '#' || line.front() == ';') {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
            }
            if (section) {
                finish(*section);
            }
            section = PendingSection{std::string(trim(line.substr(1, line.size() - 2))), line_no,
                                     std::nullopt, std::nullopt};
            continue;
        }

        const auto sep = line.find_first_of(":=");
        if (sep == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key: value'");
        }
        if (!section) {
            throw ConfigError("line " + std::to_string(line_no) + ": key outside of any section");
        }
        const std::string_view key = trim(line.substr(0, sep));
        std::string value(trim(line.substr(sep + 1)));
        if (key == "regex") {
            section->regex = std::move(value);
        } else if (key == "replace") {
            section->replace = std::move(value);
        } else {
            throw ConfigError("section [" + section->label + "] (line " + std::to_string(line_no) +
                              "): unknown key '" + std::string(key) + "'");
        }
    }
    if (section) {
        finish(*section);
    }
    return config;
}

SanitizerConfig SanitizerConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read sanitize file " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

std::string SanitizerConfig::apply(std::string_view text) const {
    std::string current(text);
    for (const auto& rule : rules_) {
        std::string replaced;
        auto last = current.cbegin();
        for (std::sregex_iterator it(current.cbegin(), current.cend(), rule.compiled), end;
             it != end; ++it) {
            replaced.append(last, (*it)[0].first);
            replaced += rule.replacement;
            last = (*it)[0].second;
        }
        replaced.append(last, current.cend());
        current = std::move(replaced);
    }
    return current;
}

} // namespace nbcheck
