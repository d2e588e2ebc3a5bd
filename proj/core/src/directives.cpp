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

#include "nbcheck/directives.hpp"

#include "nbcheck/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <utility>

namespace nbcheck {

namespace {

constexpr std::array<std::pair<std::string_view, std::string_view>, 14> kCommentPrefixes{{
    {"python", "#"},     {"r", "#"},         {"julia", "#"},  {"bash", "#"},
    {"ruby", "#"},       {"c++", "//"},      {"cpp", "//"},   {"c", "//"},
    {"javascript", "//"}, {"typescript", "//"}, {"rust", "//"}, {"go", "//"},
    {"matlab", "%"},     {"octave", "%"},
}};

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool contains_word(std::string_view line, std::string_view word) {
    for (std::size_t pos = line.find(word); pos != std::string_view::npos;
         pos = line.find(word, pos + 1)) {
        const bool left_ok = pos == 0 || !is_word_char(line[pos - 1]);
        const std::size_t end = pos + word.size();
        const bool right_ok = end == line.size() || !is_word_char(line[end]);
        if (left_ok && right_ok) {
            return true;
        }
    }
    return false;
}

struct CommentTokens {
    bool check = false;
    bool ignore = false;
    bool skip = false;
    bool raises = false;
};

CommentTokens scan_comments(std::string_view source, std::string_view prefix) {
    CommentTokens found;
    std::size_t start = 0;
    while (start <= source.size()) {
        std::size_t end = source.find('\n', start);
        if (end == std::string_view::npos) {
            end = source.size();
        }
        std::string_view line = source.substr(start, end - start);
        const std::size_t first = line.find_first_not_of(" \t\r");
        if (first != std::string_view::npos && line.substr(first).starts_with(prefix)) {
            found.check |= contains_word(line, "NBVAL_CHECK_OUTPUT");
            found.ignore |= contains_word(line, "NBVAL_IGNORE_OUTPUT");
            found.skip |= contains_word(line, "NBVAL_SKIP");
            found.raises |= contains_word(line, "NBVAL_RAISES_EXCEPTION");
        }
        start = end + 1;
    }
    return found;
}

} // namespace

std::string_view comment_prefix(std::string_view language) {
    std::string lowered(language);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (const auto& [name, prefix] : kCommentPrefixes) {
        if (name == lowered) {
            return prefix;
        }
    }
    return "#";
}

CellDirectives extract_directives(const Cell& cell, std::string_view language) {
    const CommentTokens comments = scan_comments(cell.source, comment_prefix(language));

    CellDirectives d;
    d.check_output = cell.has_tag("nbval-check-output") || comments.check;
    d.ignore_output = cell.has_tag("nbval-ignore-output") || comments.ignore;
    d.skip = cell.has_tag("nbval-skip") || comments.skip;
    d.raises_exception = cell.has_tag("nbval-raises-exception") ||
                         cell.has_tag("raises-exception") || comments.raises;

    if (d.check_output && d.ignore_output) {
        std::string where = cell.index ? "cell " + std::to_string(*cell.index) : "cell";
        throw ConflictingDirectives(where +
                                    ": both check-output and ignore-output markers are set");
    }
    return d;
}

} // namespace nbcheck
