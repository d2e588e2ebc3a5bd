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

// In-memory model of an nbformat 4.x notebook.
//
// Only the parts of the format that validation needs are modelled: cell
// kind, source, tags, execution count and the outputs of code cells. Mime
// bundles are reduced to text/plain, image/png and image/jpeg. Output types
// the model does not know are kept verbatim so they survive a round trip.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nbcheck {

using Bytes = std::vector<std::uint8_t>;

enum class CellKind { code, markdown, raw };

enum class OutputKind { stream, execute_result, display_data, error, unknown };

enum class StreamName { out, err };

std::string_view to_string(CellKind kind);
std::string_view to_string(OutputKind kind);
/// "stdout" / "stderr".
std::string_view to_string(StreamName name);

struct CellOutput {
    OutputKind kind = OutputKind::stream;

    // stream
    StreamName stream_name = StreamName::out;

    /// Stream text, or the text/plain representation of a result/display.
    std::optional<std::string> text;

    // execute_result / display_data
    std::optional<Bytes> image_png;
    std::optional<Bytes> image_jpeg;
    std::optional<std::int64_t> execution_count;

    // error
    std::string ename;
    std::string evalue;
    std::vector<std::string> traceback;

    // unknown: original output_type and the serialized JSON object
    std::string raw_type;
    std::string raw_json;

    static CellOutput stream(StreamName name, std::string text);
    static CellOutput execute_result(std::optional<std::string> text_plain,
                                     std::optional<std::int64_t> execution_count = std::nullopt);
    static CellOutput display_data(std::optional<std::string> text_plain);
    static CellOutput error(std::string ename, std::string evalue,
                            std::vector<std::string> traceback = {});

    bool operator==(const CellOutput&) const = default;
};

struct Cell {
    CellKind kind = CellKind::code;
    std::string source;
    std::optional<std::int64_t> execution_count;
    std::vector<CellOutput> outputs;
    std::vector<std::string> tags;
    /// Position among the notebook's code cells; empty for other kinds.
    std::optional<std::size_t> index;

    bool is_code() const noexcept { return kind == CellKind::code; }
    bool has_tag(std::string_view tag) const noexcept;

    bool operator==(const Cell&) const = default;
};

struct NotebookDocument {
    int format_major = 4;
    int format_minor = 5;
    std::optional<std::string> kernel_name;
    std::optional<std::string> language;
    std::vector<Cell> cells;

    std::size_t code_cell_count() const noexcept;

    bool operator==(const NotebookDocument&) const = default;
};

/// Parses an nbformat 4 document.
///
/// Throws MalformedDocument for invalid JSON or missing required keys and
/// UnsupportedFormat when `nbformat` is not 4. Unknown metadata keys are
/// ignored.
NotebookDocument parse_notebook(std::string_view raw);

NotebookDocument load_notebook(const std::string& path);

/// Serializes to nbformat JSON. Re-parsing the result yields an equal
/// document; the byte layout is not that of the original file.
std::string serialize_notebook(const NotebookDocument& doc);

/// Renumbers `Cell::index` densely over code cells.
void reindex_cells(NotebookDocument& doc);

} // namespace nbcheck
