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

// Randomized property checks, shared by the gtest suite and the acceptance
// binary. Each check draws `cases` inputs from a seeded generator and
// reports the first counterexample it finds.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace nbcheck::property {

struct PropertyResult {
    std::string name;
    std::size_t cases = 0;
    std::size_t failures = 0;
    std::string counterexample;

    bool ok() const noexcept { return cases > 0 && failures == 0; }
};

inline constexpr std::size_t kDefaultCases = 250;

/// Seed from NBCHECK_PROPERTY_SEED, or a fixed default.
std::uint64_t seed();

/// serialize_notebook then parse_notebook reproduces the document.
PropertyResult notebook_round_trip(std::size_t cases, std::uint64_t seed);

/// Applying the shipped sanitizer config twice equals applying it once,
/// on generated text and on every text output of the fixture notebooks.
PropertyResult sanitizer_idempotence(std::size_t cases, std::uint64_t seed);

/// Splitting stream outputs into arbitrary adjacent chunks leaves the
/// normalized outputs unchanged.
PropertyResult stream_chunking(std::size_t cases, std::uint64_t seed);

/// In strict mode an identical text output passes, and replacing one
/// character of the saved text with a different visible character fails.
PropertyResult single_character_sensitivity(std::size_t cases, std::uint64_t seed);

/// Directives written as random mixes of tags and comments resolve to the
/// policy an independent truth table predicts.
PropertyResult policy_truth_table(std::size_t cases, std::uint64_t seed);

/// compare_cell fails exactly when normalized outputs differ, and the diff
/// it renders reconstructs both sides.
PropertyResult verdict_diff_consistency(std::size_t cases, std::uint64_t seed);

/// diff_lines reconstructs both inputs and keeps a longest common
/// subsequence, checked against a textbook LCS table.
PropertyResult diff_minimality(std::size_t cases, std::uint64_t seed);

struct NamedProperty {
    std::string name;
    std::function<PropertyResult(std::size_t, std::uint64_t)> run;
};

std::vector<NamedProperty> all_properties();

} // namespace nbcheck::property
