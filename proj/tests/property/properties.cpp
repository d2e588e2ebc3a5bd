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

#include "properties.hpp"

#include "marker_oracle.hpp"
#include "test_support.hpp"

#include "nbcheck/comparator.hpp"
#include "nbcheck/diff.hpp"
#include "nbcheck/directives.hpp"
#include "nbcheck/error.hpp"
#include "nbcheck/notebook.hpp"
#include "nbcheck/sanitizer.hpp"

#include <algorithm>
#include <cstdlib>
#include <random>
#include <sstream>

namespace nbcheck::property {

namespace {

using Rng = std::mt19937_64;

std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool coin(Rng& rng, double p = 0.5) {
    return std::bernoulli_distribution(p)(rng);
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
    return items[uniform(rng, 0, items.size() - 1)];
}

/// Valid UTF-8 text mixing ASCII, whitespace, line endings and multi-byte
/// characters.
std::string random_text(Rng& rng, std::size_t max_len) {
    static const std::vector<std::string> pieces = {
        "a", "b", "Z", "0", "7", " ", "  ", "\t", "\n", "\n", "\r\n", "-", "+", "'", "\"",
        "\\", "{", "}", "<", ">", "&", ":", "é", "λ", "→", "日本", "\xF0\x9F\x98\x80", "word",
        "Hello World", "42"};
    std::string s;
    const std::size_t n = uniform(rng, 0, max_len);
    for (std::size_t i = 0; i < n; ++i) s += pick(rng, pieces);
    return s;
}

/// Text without whitespace-only structure surprises: visible characters,
/// inner spaces and newlines.
std::string random_visible_text(Rng& rng, std::size_t min_len, std::size_t max_len) {
    static const std::string alphabet =
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789.,;:!?()[]{}<>=+-*/'\"_#";
    std::string s;
    const std::size_t n = uniform(rng, min_len, max_len);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = uniform(rng, 0, 9);
        if (r == 0) {
            s += ' ';
        } else if (r == 1) {
            s += '\n';
        } else {
            s += alphabet[uniform(rng, 0, alphabet.size() - 1)];
        }
    }
    return s;
}

Bytes random_bytes(Rng& rng, std::size_t max_len) {
    Bytes b(uniform(rng, 0, max_len));
    for (auto& x : b) x = static_cast<std::uint8_t>(uniform(rng, 0, 255));
    return b;
}

std::optional<std::int64_t> random_count(Rng& rng) {
    if (coin(rng, 0.3)) return std::nullopt;
    return static_cast<std::int64_t>(uniform(rng, 0, 100000));
}

CellOutput random_output(Rng& rng) {
    switch (uniform(rng, 0, 4)) {
    case 0:
        return CellOutput::stream(coin(rng) ? StreamName::out : StreamName::err,
                                  random_text(rng, 12));
    case 1: {
        auto out = CellOutput::execute_result(coin(rng, 0.8) ? std::optional(random_text(rng, 8))
                                                             : std::nullopt,
                                              random_count(rng));
        if (coin(rng, 0.3)) out.image_png = random_bytes(rng, 40);
        return out;
    }
    case 2: {
        auto out = CellOutput::display_data(coin(rng, 0.7) ? std::optional(random_text(rng, 8))
                                                           : std::nullopt);
        if (coin(rng, 0.4)) out.image_png = random_bytes(rng, 40);
        if (coin(rng, 0.2)) out.image_jpeg = random_bytes(rng, 40);
        return out;
    }
    case 3: {
        std::vector<std::string> tb;
        for (std::size_t i = uniform(rng, 0, 3); i > 0; --i) tb.push_back(random_text(rng, 6));
        return CellOutput::error(pick(rng, std::vector<std::string>{"ValueError", "KeyError",
                                                                     "ZeroDivisionError"}),
                                 random_text(rng, 6), tb);
    }
    default: {
        CellOutput out;
        out.kind = OutputKind::unknown;
        out.raw_type = "custom_" + std::to_string(uniform(rng, 0, 9));
        nlohmann::json obj = {{"output_type", out.raw_type},
                              {"value", uniform(rng, 0, 1000)},
                              {"note", random_text(rng, 4)}};
        out.raw_json = obj.dump();
        return out;
    }
    }
}

NotebookDocument random_document(Rng& rng) {
    NotebookDocument doc;
    doc.format_minor = static_cast<int>(uniform(rng, 0, 5));
    if (coin(rng, 0.8)) doc.kernel_name = pick(rng, std::vector<std::string>{"python3", "ir", "julia-1.9"});
    if (coin(rng, 0.8)) doc.language = pick(rng, std::vector<std::string>{"python", "R", "julia"});
    for (std::size_t i = uniform(rng, 0, 8); i > 0; --i) {
        Cell cell;
        const auto k = uniform(rng, 0, 5);
        cell.kind = k < 4 ? CellKind::code : k == 4 ? CellKind::markdown : CellKind::raw;
        cell.source = random_text(rng, 20);
        for (std::size_t t = uniform(rng, 0, 2); t > 0; --t) {
            cell.tags.push_back(pick(rng, std::vector<std::string>{
                "nbval-skip", "nbval-check-output", "raises-exception", "slow", "λ-tag"}));
        }
        if (cell.is_code()) {
            cell.execution_count = random_count(rng);
            for (std::size_t o = uniform(rng, 0, 4); o > 0; --o) cell.outputs.push_back(random_output(rng));
        }
        doc.cells.push_back(std::move(cell));
    }
    reindex_cells(doc);
    return doc;
}

std::string show(std::string_view s) {
    return nlohmann::json(std::string(s)).dump();
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (true) {
        const auto end = text.find('\n', start);
        lines.push_back(text.substr(start, end == std::string::npos ? std::string::npos : end - start));
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return lines;
}

/// Splits a text into `parts` adjacent pieces at random offsets (which may
/// fall inside multi-byte characters or line endings).
std::vector<std::string> random_chunks(Rng& rng, const std::string& text) {
    std::vector<std::size_t> cuts;
    for (std::size_t i = uniform(rng, 0, 5); i > 0; --i) cuts.push_back(uniform(rng, 0, text.size()));
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::string> pieces;
    std::size_t prev = 0;
    for (auto c : cuts) {
        pieces.push_back(text.substr(prev, c - prev));
        prev = c;
    }
    pieces.push_back(text.substr(prev));
    return pieces;
}

SanitizerConfig shipped_sanitizer() {
    return SanitizerConfig::load((testing::source_root() / "config" / "sanitize-example.cfg").string());
}

} // namespace

std::uint64_t seed() {
    if (const char* env = std::getenv("NBCHECK_PROPERTY_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return 20260101u;
}

PropertyResult notebook_round_trip(std::size_t cases, std::uint64_t s) {
    PropertyResult r{"notebook round-trip"};
    Rng rng(s);
    for (; r.cases < cases; ++r.cases) {
        const auto doc = random_document(rng);
        const auto text = serialize_notebook(doc);
        try {
            const auto back = parse_notebook(text);
            if (!(back == doc)) {
                if (r.failures++ == 0) r.counterexample = text;
            }
        } catch (const std::exception& e) {
            if (r.failures++ == 0) r.counterexample = std::string(e.what()) + "\n" + text;
        }
    }
    return r;
}

PropertyResult sanitizer_idempotence(std::size_t cases, std::uint64_t s) {
    PropertyResult r{"sanitizer idempotence"};
    Rng rng(s);
    const auto sanitizer = shipped_sanitizer();
    static const std::vector<std::string> fragments = {
        "12:34:56", "1:2:3", "Thu Dec 12 16:44:06 2019", "Mon Jan  6 09:05:00 2025",
        "<Foo object at 0x7f3a2b1c>", "<mod.Bar object at 0xDEADBEEF12>", "0x7ffd1234abcd",
        "0x12", "0x0x123456", "TIMESTAMP", "Mon Jan  1 TIMESTAMP 2019", "MEMORY_ADDRESS",
        " ", "\n", "value", ":", "9", "Sun", "Dec", "<OBJECT>"};
    auto check = [&](const std::string& input) {
        const auto once = sanitizer.apply(input);
        const auto twice = sanitizer.apply(once);
        if (once != twice && r.failures++ == 0) {
            r.counterexample = show(input) + " -> " + show(once) + " -> " + show(twice);
        }
        ++r.cases;
    };
    for (const char* name : {"deterministic.ipynb", "timestamp.ipynb", "markers.ipynb"}) {
        const auto doc = load_notebook(testing::fixture(name).string());
        for (const auto& cell : doc.cells) {
            for (const auto& out : cell.outputs) {
                if (out.text) check(*out.text);
            }
        }
    }
    while (r.cases < cases) {
        std::string input;
        for (std::size_t i = uniform(rng, 1, 8); i > 0; --i) {
            input += coin(rng, 0.6) ? pick(rng, fragments) : random_text(rng, 3);
        }
        check(input);
    }
    return r;
}

PropertyResult stream_chunking(std::size_t cases, std::uint64_t s) {
    PropertyResult r{"stream chunking equivalence"};
    Rng rng(s);
    for (; r.cases < cases; ++r.cases) {
        std::vector<CellOutput> whole;
        std::vector<CellOutput> chunked;
        std::optional<StreamName> last_stream;
        for (std::size_t i = uniform(rng, 1, 5); i > 0; --i) {
            if (coin(rng, 0.7)) {
                auto name = coin(rng) ? StreamName::out : StreamName::err;
                if (last_stream == name) {
                    // Keep the reference sequence free of adjacent same-name
                    // streams so `whole` is the canonical single-chunk form.
                    name = name == StreamName::out ? StreamName::err : StreamName::out;
                }
                const auto text = random_text(rng, 15);
                whole.push_back(CellOutput::stream(name, text));
                for (auto& piece : random_chunks(rng, text)) {
                    chunked.push_back(CellOutput::stream(name, std::move(piece)));
                }
                last_stream = name;
            } else {
                auto out = random_output(rng);
                if (out.kind == OutputKind::stream) continue;
                whole.push_back(out);
                chunked.push_back(out);
                last_stream.reset();
            }
        }
        const bool images = coin(rng);
        if (normalize_outputs(whole, images) != normalize_outputs(chunked, images)) {
            if (r.failures++ == 0) {
                std::string texts;
                for (const auto& o : chunked) texts += show(o.text.value_or("")) + " ";
                r.counterexample = "chunks: " + texts;
            }
        }
    }
    return r;
}

PropertyResult single_character_sensitivity(std::size_t cases, std::uint64_t s) {
    PropertyResult r{"strict single-character sensitivity"};
    Rng rng(s);
    static const std::string visible =
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789.,;:!?()[]{}<>=+-*/";
    const SanitizerConfig no_rules;
    const auto policy = decide_check_policy(RunMode::strict, CellDirectives{});
    for (; r.cases < cases; ++r.cases) {
        const auto text = random_visible_text(rng, 1, 60);
        const bool as_stream = coin(rng);
        auto make = [as_stream](std::string t) {
            return as_stream ? CellOutput::stream(StreamName::out, std::move(t))
                             : CellOutput::execute_result(std::move(t), 1);
        };
        ExecutionOutcome computed;
        computed.outputs = {make(text)};

        const std::vector<CellOutput> same = {make(text)};
        const auto baseline = compare_cell(same, computed, policy, no_rules, false);

        std::string mutated = text;
        const auto pos = uniform(rng, 0, mutated.size() - 1);
        char replacement;
        do {
            replacement = visible[uniform(rng, 0, visible.size() - 1)];
        } while (replacement == mutated[pos]);
        mutated[pos] = replacement;
        const std::vector<CellOutput> changed = {make(mutated)};
        const auto verdict = compare_cell(changed, computed, policy, no_rules, false);

        if ((baseline.status != VerdictStatus::pass || verdict.status != VerdictStatus::fail) &&
            r.failures++ == 0) {
            r.counterexample = "saved " + show(mutated) + " computed " + show(text);
        }
    }
    return r;
}

PropertyResult policy_truth_table(std::size_t cases, std::uint64_t s) {
    PropertyResult r{"policy truth table"};
    Rng rng(s);
    struct Form {
        const char* tag;
        const char* comment;
    };
    const Form check{"nbval-check-output", "NBVAL_CHECK_OUTPUT"};
    const Form ignore{"nbval-ignore-output", "NBVAL_IGNORE_OUTPUT"};
    const Form skip{"nbval-skip", "NBVAL_SKIP"};
    const Form raises{"raises-exception", "NBVAL_RAISES_EXCEPTION"};

    auto expected_policy = [](bool strict, const oracle::Markers& m) {
        switch (oracle::expected_treatment(strict, m)) {
        case oracle::Treatment::skip: return PolicyKind::skip;
        case oracle::Treatment::run_only: return PolicyKind::execute_only;
        case oracle::Treatment::check_output: return PolicyKind::check_output;
        case oracle::Treatment::expect_error: return PolicyKind::expect_exception;
        }
        return PolicyKind::check_output;
    };

    // Every non-conflicting combination in both modes first, then random
    // spellings of random combinations.
    std::vector<std::pair<oracle::Markers, bool>> plan;
    for (int bits = 0; bits < 16; ++bits) {
        oracle::Markers m{(bits & 1) != 0, (bits & 2) != 0, (bits & 4) != 0, (bits & 8) != 0};
        plan.emplace_back(m, true);
        plan.emplace_back(m, false);
    }
    while (plan.size() < cases) {
        plan.emplace_back(oracle::Markers{coin(rng), coin(rng), coin(rng), coin(rng)}, coin(rng));
    }

    for (const auto& [markers, strict] : plan) {
        ++r.cases;
        Cell cell;
        std::vector<std::string> lines = {"x = 1", "print(x)"};
        auto apply = [&](bool on, const Form& form) {
            if (!on) return;
            if (coin(rng)) {
                cell.tags.push_back(form.tag);
            } else {
                const auto at = uniform(rng, 0, lines.size());
                lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(at),
                             std::string(uniform(rng, 0, 2), ' ') + "# " + form.comment +
                                 (coin(rng) ? " trailing words" : ""));
            }
        };
        apply(markers.check, check);
        apply(markers.ignore, ignore);
        apply(markers.skip, skip);
        apply(markers.raises, raises);
        if (coin(rng, 0.3)) lines.push_back("value = 'NBVAL_SKIP'  # not a directive line");
        if (coin(rng, 0.3)) lines.push_back("# XNBVAL_SKIP is not a whole word");
        if (coin(rng, 0.2)) cell.tags.push_back("unrelated");
        for (const auto& l : lines) cell.source += l + "\n";

        const bool conflict = markers.check && markers.ignore;
        try {
            const auto d = extract_directives(cell, "python");
            if (conflict) {
                if (r.failures++ == 0) r.counterexample = "no conflict raised for " + show(cell.source);
                continue;
            }
            const auto got = decide_check_policy(strict ? RunMode::strict : RunMode::lax, d);
            if (got.kind != expected_policy(strict, markers) && r.failures++ == 0) {
                r.counterexample = std::string(strict ? "strict " : "lax ") + show(cell.source) +
                                   " got " + std::string(to_string(got.kind));
            }
        } catch (const ConflictingDirectives&) {
            if (!conflict && r.failures++ == 0) r.counterexample = "spurious conflict " + show(cell.source);
        }
    }
    return r;
}

PropertyResult verdict_diff_consistency(std::size_t cases, std::uint64_t s) {
    PropertyResult r{"verdict and diff consistency"};
    Rng rng(s);
    const SanitizerConfig no_rules;
    const CheckPolicy policy{PolicyKind::check_output};
    for (; r.cases < cases; ++r.cases) {
        std::vector<CellOutput> saved;
        for (std::size_t i = uniform(rng, 0, 3); i > 0; --i) {
            saved.push_back(coin(rng) ? CellOutput::stream(StreamName::out, random_visible_text(rng, 0, 30))
                                      : CellOutput::execute_result(random_visible_text(rng, 0, 20)));
        }
        ExecutionOutcome computed;
        computed.outputs = saved;
        if (coin(rng, 0.6) && !computed.outputs.empty()) {
            auto& victim = computed.outputs[uniform(rng, 0, computed.outputs.size() - 1)];
            victim.text = coin(rng) ? random_visible_text(rng, 0, 30) : *victim.text + "\nextra";
        }
        if (coin(rng, 0.2)) computed.outputs.push_back(CellOutput::stream(StreamName::err, "warning"));

        const auto verdict = compare_cell(saved, computed, policy, no_rules, false);
        const auto want = normalize_outputs(saved, false);
        const auto got = normalize_outputs(computed.outputs, false);
        const bool differ = want != got;
        std::string problem;
        if (differ != (verdict.status == VerdictStatus::fail)) {
            problem = "verdict does not follow output equality";
        } else if (verdict.diff.has_value() != differ) {
            problem = "diff presence does not follow the verdict";
        } else if (differ) {
            bool marked = false;
            for (const auto& line : split_lines(*verdict.diff)) {
                marked |= !line.empty() && (line[0] == '-' || line[0] == '+');
            }
            if (!marked) problem = "diff has no - or + line";
            for (const auto& out : want) {
                for (const auto& line : split_lines(out.text)) {
                    if (verdict.diff->find(line) == std::string::npos) {
                        problem = "saved line missing from diff: " + show(line);
                    }
                }
            }
        }
        if (!problem.empty() && r.failures++ == 0) {
            r.counterexample = problem + (verdict.diff ? "\n" + *verdict.diff : std::string());
        }
    }
    return r;
}

PropertyResult diff_minimality(std::size_t cases, std::uint64_t s) {
    PropertyResult r{"diff reconstruction and minimality"};
    Rng rng(s);
    auto random_lines = [&rng] {
        std::vector<std::string> lines;
        for (std::size_t i = uniform(rng, 0, 12); i > 0; --i) {
            lines.push_back(std::string(1, static_cast<char>('a' + uniform(rng, 0, 3))));
        }
        return lines;
    };
    for (; r.cases < cases; ++r.cases) {
        const auto a = random_lines();
        const auto b = random_lines();
        std::vector<std::vector<std::size_t>> table(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
        for (std::size_t i = a.size(); i-- > 0;) {
            for (std::size_t j = b.size(); j-- > 0;) {
                table[i][j] = a[i] == b[j] ? table[i + 1][j + 1] + 1
                                           : std::max(table[i + 1][j], table[i][j + 1]);
            }
        }
        const auto ops = diff_lines(a, b);
        std::vector<std::string> before;
        std::vector<std::string> after;
        std::size_t kept = 0;
        for (const auto& op : ops) {
            if (op.op != LineOp::add) before.push_back(op.text);
            if (op.op != LineOp::remove) after.push_back(op.text);
            kept += op.op == LineOp::keep ? 1 : 0;
        }
        if ((before != a || after != b || kept != table[0][0]) && r.failures++ == 0) {
            std::ostringstream msg;
            msg << "kept " << kept << " lcs " << table[0][0];
            r.counterexample = msg.str();
        }
    }
    return r;
}

std::vector<NamedProperty> all_properties() {
    return {{"notebook round-trip", notebook_round_trip},
            {"sanitizer idempotence", sanitizer_idempotence},
            {"stream chunking equivalence", stream_chunking},
            {"strict single-character sensitivity", single_character_sensitivity},
            {"policy truth table", policy_truth_table},
            {"verdict and diff consistency", verdict_diff_consistency},
            {"diff reconstruction and minimality", diff_minimality}};
}

} // namespace nbcheck::property
