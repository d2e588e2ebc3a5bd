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

#include "nbcheck/notebook.hpp"

#include "base64.hpp"
#include "nbcheck/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace nbcheck {

using nlohmann::json;

std::string_view to_string(CellKind kind) {
    switch (kind) {
    case CellKind::code: return "code";
    case CellKind::markdown: return "markdown";
    case CellKind::raw: return "raw";
    }
    return "code";
}

std::string_view to_string(OutputKind kind) {
    switch (kind) {
    case OutputKind::stream: return "stream";
    case OutputKind::execute_result: return "execute_result";
    case OutputKind::display_data: return "display_data";
    case OutputKind::error: return "error";
    case OutputKind::unknown: return "unknown";
    }
    return "unknown";
}

std::string_view to_string(StreamName name) {
    return name == StreamName::out ? "stdout" : "stderr";
}

CellOutput CellOutput::stream(StreamName name, std::string text) {
    CellOutput out;
    out.kind = OutputKind::stream;
    out.stream_name = name;
    out.text = std::move(text);
    return out;
}

CellOutput CellOutput::execute_result(std::optional<std::string> text_plain,
                                      std::optional<std::int64_t> execution_count) {
    CellOutput out;
    out.kind = OutputKind::execute_result;
    out.text = std::move(text_plain);
    out.execution_count = execution_count;
    return out;
}

CellOutput CellOutput::display_data(std::optional<std::string> text_plain) {
    CellOutput out;
    out.kind = OutputKind::display_data;
    out.text = std::move(text_plain);
    return out;
}

CellOutput CellOutput::error(std::string ename, std::string evalue,
                             std::vector<std::string> traceback) {
    CellOutput out;
    out.kind = OutputKind::error;
    out.ename = std::move(ename);
    out.evalue = std::move(evalue);
    out.traceback = std::move(traceback);
    return out;
}

bool Cell::has_tag(std::string_view tag) const noexcept {
    return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

std::size_t NotebookDocument::code_cell_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [](const Cell& c) { return c.is_code(); }));
}

void reindex_cells(NotebookDocument& doc) {
    std::size_t next = 0;
    for (auto& cell : doc.cells) {
        cell.index = cell.is_code() ? std::optional<std::size_t>(next++) : std::nullopt;
    }
}

namespace {

const json& require(const json& obj, const char* key, std::string_view where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw MalformedDocument(std::string(where) + ": missing required key '" + key + "'");
    }
    return *it;
}

// nbformat stores multi-line strings either as one string or as a list of
// lines that already carry their newlines.
std::string multiline(const json& value, std::string_view where) {
    if (value.is_string()) {
        return value.get<std::string>();
    }
    if (value.is_array()) {
        std::string joined;
        for (const auto& part : value) {
            if (!part.is_string()) {
                throw MalformedDocument(std::string(where) + ": expected a list of strings");
            }
            joined += part.get_ref<const std::string&>();
        }
        return joined;
    }
    throw MalformedDocument(std::string(where) + ": expected a string or list of strings");
}

std::optional<std::int64_t> optional_count(const json& obj, std::string_view where) {
    auto it = obj.find("execution_count");
    if (it == obj.end() || it->is_null()) {
        return std::nullopt;
    }
    if (!it->is_number_integer()) {
        throw MalformedDocument(std::string(where) + ": execution_count must be an integer or null");
    }
    return it->get<std::int64_t>();
}

void read_mime_bundle(const json& data, CellOutput& out, std::string_view where) {
    if (!data.is_object()) {
        throw MalformedDocument(std::string(where) + ": 'data' must be an object");
    }
    if (auto it = data.find("text/plain"); it != data.end()) {
        out.text = multiline(*it, where);
    }
    if (auto it = data.find("image/png"); it != data.end()) {
        out.image_png = detail::base64_decode(multiline(*it, where));
    }
    if (auto it = data.find("image/jpeg"); it != data.end()) {
        out.image_jpeg = detail::base64_decode(multiline(*it, where));
    }
}

CellOutput parse_output(const json& obj, const std::string& where) {
    if (!obj.is_object()) {
        throw MalformedDocument(where + ": output must be an object");
    }
    const auto& type_value = require(obj, "output_type", where);
    if (!type_value.is_string()) {
        throw MalformedDocument(where + ": output_type must be a string");
    }
    const auto& type = type_value.get_ref<const std::string&>();

    if (type == "stream") {
        const auto& name = require(obj, "name", where);
        StreamName stream_name;
        if (name == "stdout") {
            stream_name = StreamName::out;
        } else if (name == "stderr") {
            stream_name = StreamName::err;
        } else {
            throw MalformedDocument(where + ": unknown stream name " + name.dump());
        }
        return CellOutput::stream(stream_name, multiline(require(obj, "text", where), where));
    }
    if (type == "execute_result" || type == "display_data") {
        CellOutput out;
        out.kind = type == "execute_result" ? OutputKind::execute_result : OutputKind::display_data;
        read_mime_bundle(require(obj, "data", where), out, where);
        if (out.kind == OutputKind::execute_result) {
            out.execution_count = optional_count(obj, where);
        }
        return out;
    }
    if (type == "error") {
        const auto& ename = require(obj, "ename", where);
        const auto& evalue = require(obj, "evalue", where);
        const auto& traceback = require(obj, "traceback", where);
        if (!ename.is_string() || !evalue.is_string() || !traceback.is_array()) {
            throw MalformedDocument(where + ": malformed error output");
        }
        std::vector<std::string> lines;
        for (const auto& line : traceback) {
            lines.push_back(line.is_string() ? line.get<std::string>() : line.dump());
        }
        return CellOutput::error(ename.get<std::string>(), evalue.get<std::string>(),
                                 std::move(lines));
    }

    CellOutput out;
    out.kind = OutputKind::unknown;
    out.raw_type = type;
    out.raw_json = obj.dump();
    return out;
}

std::vector<std::string> parse_tags(const json& cell) {
    std::vector<std::string> tags;
    auto meta = cell.find("metadata");
    if (meta == cell.end() || !meta->is_object()) {
        return tags;
    }
    auto it = meta->find("tags");
    if (it == meta->end() || !it->is_array()) {
        return tags;
    }
    for (const auto& tag : *it) {
        if (tag.is_string()) {
            tags.push_back(tag.get<std::string>());
        }
    }
    return tags;
}

std::optional<std::string> nested_string(const json& root, const char* outer, const char* inner) {
    auto o = root.find(outer);
    if (o == root.end() || !o->is_object()) {
        return std::nullopt;
    }
    auto i = o->find(inner);
    if (i == o->end() || !i->is_string()) {
        return std::nullopt;
    }
    return i->get<std::string>();
}

json mime_bundle(const CellOutput& out) {
    json data = json::object();
    if (out.text) {
        data["text/plain"] = *out.text;
    }
    if (out.image_png) {
        data["image/png"] = detail::base64_encode(*out.image_png);
    }
    if (out.image_jpeg) {
        data["image/jpeg"] = detail::base64_encode(*out.image_jpeg);
    }
    return data;
}

json output_to_json(const CellOutput& out) {
    switch (out.kind) {
    case OutputKind::stream:
        return {{"output_type", "stream"},
                {"name", std::string(to_string(out.stream_name))},
                {"text", out.text.value_or("")}};
    case OutputKind::execute_result: {
        json obj = {{"output_type", "execute_result"},
                    {"data", mime_bundle(out)},
                    {"metadata", json::object()}};
        obj["execution_count"] =
            out.execution_count ? json(*out.execution_count) : json(nullptr);
        return obj;
    }
    case OutputKind::display_data:
        return {{"output_type", "display_data"},
                {"data", mime_bundle(out)},
                {"metadata", json::object()}};
    case OutputKind::error:
        return {{"output_type", "error"},
                {"ename", out.ename},
                {"evalue", out.evalue},
                {"traceback", out.traceback}};
    case OutputKind::unknown:
        return json::parse(out.raw_json);
    }
    return json::object();
}

} // namespace

NotebookDocument parse_notebook(std::string_view raw) {
    json root = json::parse(raw.begin(), raw.end(), nullptr, /*allow_exceptions=*/false);
    if (root.is_discarded()) {
        throw MalformedDocument("notebook is not valid JSON");
    }
    if (!root.is_object()) {
        throw MalformedDocument("notebook root must be a JSON object");
    }

    const auto& major = require(root, "nbformat", "notebook");
    if (!major.is_number_integer()) {
        throw MalformedDocument("notebook: nbformat must be an integer");
    }
    NotebookDocument doc;
    doc.format_major = major.get<int>();
    if (doc.format_major != 4) {
        throw UnsupportedFormat("unsupported notebook format " + std::to_string(doc.format_major) +
                                ".x; only nbformat 4 is supported");
    }
    const auto& minor = require(root, "nbformat_minor", "notebook");
    if (!minor.is_number_integer()) {
        throw MalformedDocument("notebook: nbformat_minor must be an integer");
    }
    doc.format_minor = minor.get<int>();

    const auto& metadata = require(root, "metadata", "notebook");
    if (!metadata.is_object()) {
        throw MalformedDocument("notebook: metadata must be an object");
    }
    doc.kernel_name = nested_string(metadata, "kernelspec", "name");
    doc.language = nested_string(metadata, "language_info", "name");
    if (!doc.language) {
        doc.language = nested_string(metadata, "kernelspec", "language");
    }

    const auto& cells = require(root, "cells", "notebook");
    if (!cells.is_array()) {
        throw MalformedDocument("notebook: cells must be an array");
    }
    doc.cells.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        const std::string where = "cell " + std::to_string(i);
        if (!c.is_object()) {
            throw MalformedDocument(where + ": cell must be an object");
        }
        Cell cell;
        const auto& type = require(c, "cell_type", where);
        if (type == "code") {
            cell.kind = CellKind::code;
        } else if (type == "markdown") {
            cell.kind = CellKind::markdown;
        } else if (type == "raw") {
            cell.kind = CellKind::raw;
        } else {
            throw MalformedDocument(where + ": unknown cell_type " + type.dump());
        }
        cell.source = multiline(require(c, "source", where), where);
        cell.tags = parse_tags(c);
        if (cell.is_code()) {
            cell.execution_count = optional_count(c, where);
            const auto& outputs = require(c, "outputs", where);
            if (!outputs.is_array()) {
                throw MalformedDocument(where + ": outputs must be an array");
            }
            for (std::size_t k = 0; k < outputs.size(); ++k) {
                cell.outputs.push_back(
                    parse_output(outputs[k], where + " output " + std::to_string(k)));
            }
        }
        doc.cells.push_back(std::move(cell));
    }
    reindex_cells(doc);
    return doc;
}

NotebookDocument load_notebook(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MalformedDocument("cannot read " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_notebook(buffer.str());
}

std::string serialize_notebook(const NotebookDocument& doc) {
    json metadata = json::object();
    if (doc.kernel_name) {
        metadata["kernelspec"] = {{"name", *doc.kernel_name}, {"display_name", *doc.kernel_name}};
    }
    if (doc.language) {
        metadata["language_info"] = {{"name", *doc.language}};
    }

    json cells = json::array();
    for (const auto& cell : doc.cells) {
        json c = {{"cell_type", std::string(to_string(cell.kind))},
                  {"source", cell.source},
                  {"metadata", json::object()}};
        if (!cell.tags.empty()) {
            c["metadata"]["tags"] = cell.tags;
        }
        if (cell.is_code()) {
            c["execution_count"] =
                cell.execution_count ? json(*cell.execution_count) : json(nullptr);
            json outputs = json::array();
            for (const auto& out : cell.outputs) {
                outputs.push_back(output_to_json(out));
            }
            c["outputs"] = std::move(outputs);
        }
        cells.push_back(std::move(c));
    }

    json root = {{"nbformat", doc.format_major},
                 {"nbformat_minor", doc.format_minor},
                 {"metadata", std::move(metadata)},
                 {"cells", std::move(cells)}};
    return root.dump(1) + "\n";
}

} // namespace nbcheck
