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

#include "nbcheck/wire.hpp"

#include "nbcheck/error.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>

namespace nbcheck {

using nlohmann::json;

namespace {

std::string to_hex(const unsigned char* data, std::size_t size) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(size * 2);
    for (std::size_t i = 0; i < size; ++i) {
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 0x0F]);
    }
    return out;
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const auto secs = std::chrono::system_clock::to_time_t(now);
    const auto micros =
        std::chrono::duration_cast<std::chrono::microseconds>(now.time_since_epoch()).count() %
        1000000;
    std::tm utc{};
    ::gmtime_r(&secs, &utc);
    char buf[64];
    const auto n = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &utc);
    std::snprintf(buf + n, sizeof buf - n, ".%06lldZ", static_cast<long long>(micros));
    return buf;
}

json parse_frame(const std::string& frame, const char* what) {
    json j = json::parse(frame, nullptr, false);
    if (j.is_discarded()) {
        throw ProtocolError(std::string("message ") + what + " is not valid JSON");
    }
    return j;
}

} // namespace

std::string sign_frames(std::string_view key, std::span<const std::string> frames) {
    if (key.empty()) {
        return {};
    }
    std::string data;
    for (const auto& frame : frames) {
        data += frame;
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()),
             reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest.data(),
             &len) == nullptr) {
        throw ProtocolError("HMAC computation failed");
    }
    return to_hex(digest.data(), len);
}

std::string sign_message(std::string_view key, std::string_view header,
                         std::string_view parent_header, std::string_view metadata,
                         std::string_view content) {
    const std::array<std::string, 4> frames{std::string(header), std::string(parent_header),
                                            std::string(metadata), std::string(content)};
    return sign_frames(key, frames);
}

bool signatures_equal(std::string_view a, std::string_view b) noexcept {
    if (a.size() != b.size()) {
        return false;
    }
    unsigned char diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff |= static_cast<unsigned char>(a[i] ^ b[i]);
    }
    return diff == 0;
}

std::string Message::msg_type() const {
    return header.is_object() ? header.value("msg_type", "") : "";
}

std::string Message::msg_id() const {
    return header.is_object() ? header.value("msg_id", "") : "";
}

std::string Message::parent_id() const {
    return parent_header.is_object() ? parent_header.value("msg_id", "") : "";
}

std::string new_uuid() {
    std::array<unsigned char, 16> b{};
    if (RAND_bytes(b.data(), static_cast<int>(b.size())) != 1) {
        throw ProtocolError("random number generator failure");
    }
    b[6] = static_cast<unsigned char>((b[6] & 0x0F) | 0x40);
    b[8] = static_cast<unsigned char>((b[8] & 0x3F) | 0x80);
    const std::string hex = to_hex(b.data(), b.size());
    return hex.substr(0, 8) + "-" + hex.substr(8, 4) + "-" + hex.substr(12, 4) + "-" +
           hex.substr(16, 4) + "-" + hex.substr(20);
}

Session::Session(std::string key, std::string username)
    : key_(std::move(key)), username_(std::move(username)), session_id_(new_uuid()) {}

json Session::make_header(std::string_view msg_type) const {
    return {{"msg_id", new_uuid()},
            {"session", session_id_},
            {"username", username_},
            {"date", iso_timestamp()},
            {"msg_type", std::string(msg_type)},
            {"version", std::string(kProtocolVersion)}};
}

Message Session::make(std::string_view msg_type, json content, const Message* parent) const {
    Message m;
    m.header = make_header(msg_type);
    m.content = std::move(content);
    if (parent != nullptr) {
        m.parent_header = parent->header;
        m.identities = parent->identities;
    }
    return m;
}

zmtp::Multipart Session::serialize(const Message& message) const {
    const std::array<std::string, 4> parts{message.header.dump(), message.parent_header.dump(),
                                           message.metadata.dump(), message.content.dump()};
    zmtp::Multipart frames = message.identities;
    frames.emplace_back(kDelimiter);
    frames.push_back(sign_frames(key_, parts));
    frames.insert(frames.end(), parts.begin(), parts.end());
    frames.insert(frames.end(), message.buffers.begin(), message.buffers.end());
    return frames;
}

Message Session::deserialize(const zmtp::Multipart& frames) const {
    const auto delim = std::find(frames.begin(), frames.end(), kDelimiter);
    if (delim == frames.end()) {
        throw ProtocolError("message lacks the <IDS|MSG> delimiter");
    }
    const auto first = static_cast<std::size_t>(delim - frames.begin()) + 1;
    if (frames.size() < first + 5) {
        throw ProtocolError("message has too few frames");
    }
    const std::span<const std::string> signed_parts(frames.data() + first + 1, 4);
    const std::string expected = sign_frames(key_, signed_parts);
    if (!signatures_equal(expected, frames[first])) {
        throw ProtocolError("message signature does not verify");
    }

    Message m;
    m.identities.assign(frames.begin(), delim);
    m.header = parse_frame(frames[first + 1], "header");
    m.parent_header = parse_frame(frames[first + 2], "parent_header");
    m.metadata = parse_frame(frames[first + 3], "metadata");
    m.content = parse_frame(frames[first + 4], "content");
    m.buffers.assign(frames.begin() + static_cast<std::ptrdiff_t>(first + 5), frames.end());
    return m;
}

} // namespace nbcheck
