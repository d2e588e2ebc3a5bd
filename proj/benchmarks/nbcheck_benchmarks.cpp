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
#include "nbcheck/notebook.hpp"
#include "nbcheck/sanitizer.hpp"
#include "nbcheck/wire.hpp"

#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::string read_source_file(const std::string& relative) {
    std::ifstream in(std::string(NBCHECK_SOURCE_DIR) + "/" + relative, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

std::vector<std::string> numbered_lines(int count, int changed_every) {
    std::vector<std::string> lines;
    for (int i = 0; i < count; ++i) {
        lines.push_back((changed_every > 0 && i % changed_every == 0 ? "changed " : "line ") + std::to_string(i));
    }
    return lines;
}

void BM_ParseNotebook(benchmark::State& state) {
    const auto raw = read_source_file("tests/fixtures/deterministic.ipynb");
    for (auto _ : state) {
        benchmark::DoNotOptimize(nbcheck::parse_notebook(raw));
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * raw.size()));
}
BENCHMARK(BM_ParseNotebook);

void BM_NormalizeChunkedStreams(benchmark::State& state) {
    std::vector<nbcheck::CellOutput> outputs;
    for (int i = 0; i < state.range(0); ++i) {
        outputs.push_back(nbcheck::CellOutput::stream(nbcheck::StreamName::out, "chunk " + std::to_string(i) + "  \r\n"));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(nbcheck::normalize_outputs(outputs, false));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NormalizeChunkedStreams)->Arg(10)->Arg(1000);

void BM_SanitizeShippedRules(benchmark::State& state) {
    const auto rules = nbcheck::SanitizerConfig::parse(read_source_file("config/sanitize-example.cfg"));
    std::string text;
    for (int i = 0; i < 50; ++i) {
        text += "Thu Dec 12 16:44:06 2019 <__main__.Foo object at 0x7f3a2c1d5e80> value " + std::to_string(i) + "\n";
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(rules.apply(text));
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_SanitizeShippedRules);

void BM_DiffLines(benchmark::State& state) {
    const auto before = numbered_lines(static_cast<int>(state.range(0)), 0);
    const auto after = numbered_lines(static_cast<int>(state.range(0)), 17);
    for (auto _ : state) {
        benchmark::DoNotOptimize(nbcheck::diff_lines(before, after));
    }
}
BENCHMARK(BM_DiffLines)->Arg(100)->Arg(1000);

void BM_SignMessage(benchmark::State& state) {
    const std::string key(64, 'a');
    const std::string header = R"({"msg_id":"0","msg_type":"execute_request","session":"s","username":"u","version":"5.3"})";
    const std::string content(static_cast<std::size_t>(state.range(0)), 'x');
    for (auto _ : state) {
        benchmark::DoNotOptimize(nbcheck::sign_message(key, header, "{}", "{}", content));
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * (header.size() + content.size() + 4)));
}
BENCHMARK(BM_SignMessage)->Arg(64)->Arg(65536);

} // namespace

BENCHMARK_MAIN();
