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

// Jupyter messaging protocol (v5) framing and HMAC signing.
//
// On the wire a message is
//
//     [routing ids...] "<IDS|MSG>" signature header parent_header metadata content [buffers...]
//
// where the signature is the hex HMAC-SHA256 of the four JSON frames.

#include "nbcheck/zmtp.hpp"

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nbcheck {

inline constexpr std::string_view kDelimiter = "<IDS|MSG>";
inline constexpr std::string_view kProtocolVersion = "5.3";

/// Lowercase hex HMAC-SHA256 of the concatenated frames; "" for an empty key.
std::string sign_frames(std::string_view key, std::span<const std::string> frames);

std::string sign_message(std::string_view key, std::string_view header,
                         std::string_view parent_header, std::string_view metadata,
                         std::string_view content);

/// Constant-time comparison of two signatures.
bool signatures_equal(std::string_view a, std::string_view b) noexcept;

struct Message {
    std::vector<std::string> identities;
    nlohmann::json header = nlohmann::json::object();
    nlohmann::json parent_header = nlohmann::json::object();
    nlohmann::json metadata = nlohmann::json::object();
    nlohmann::json content = nlohmann::json::object();
    std::vector<std::string> buffers;

    std::string msg_type() const;
    std::string msg_id() const;
    /// msg_id of the parent header, empty if none.
    std::string parent_id() const;
};

/// Builds, signs and verifies messages for one client session.
class Session {
public:
    explicit Session(std::string key, std::string username = "nbcheck");

    const std::string& id() const noexcept { return session_id_; }
    const std::string& key() const noexcept { return key_; }

    /// A fresh header (new msg_id, current UTC timestamp).
    nlohmann::json make_header(std::string_view msg_type) const;

    Message make(std::string_view msg_type, nlohmann::json content,
                 const Message* parent = nullptr) const;

    zmtp::Multipart serialize(const Message& message) const;

    /// Throws ProtocolError when the delimiter is missing, a frame is not
    /// JSON, or the signature does not verify.
    Message deserialize(const zmtp::Multipart& frames) const;

private:
    std::string key_;
    std::string username_;
    std::string session_id_;
};

/// Random RFC 4122 version-4 UUID string.
std::string new_uuid();

} // namespace nbcheck
