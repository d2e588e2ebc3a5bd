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

#include <stdexcept>
#include <string>

namespace nbcheck {

/// Base of every error nbcheck reports. `what()` is a complete,
/// user-facing diagnostic.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Notebook model.
class MalformedDocument : public Error {
public:
    using Error::Error;
};

class UnsupportedFormat : public Error {
public:
    using Error::Error;
};

class ConflictingDirectives : public Error {
public:
    using Error::Error;
};

// Sanitizer.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Kernel client.
class KernelNotFound : public Error {
public:
    using Error::Error;
};

class SpawnFailure : public Error {
public:
    using Error::Error;
};

class StartupTimeout : public Error {
public:
    using Error::Error;
};

/// Transport or wire-format violation (bad greeting, truncated frame,
/// signature mismatch).
class ProtocolError : public Error {
public:
    using Error::Error;
};

// CLI.
class PathNotFound : public Error {
public:
    using Error::Error;
};

} // namespace nbcheck
