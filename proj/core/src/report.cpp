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

#include "nbcheck/report.hpp"

#include <cstdio>
#include <numeric>
#include <sstream>

namespace nbcheck {

namespace {

std::string seconds(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", t);
    return buf;
}

std::string seconds3(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", t);
    return buf;
}

char progress_char(VerdictStatus s) {
    switch (s) {
    case VerdictStatus::pass: return '.';
    case VerdictStatus::fail: return 'F';
    case VerdictStatus::skip: return 's';
    case VerdictStatus::error: return 'E';
    }
    return '?';
}

std::string cell_id(const NotebookResult& r, const CellVerdict& v) {
    return notebook_stem(r.path) + "::ipynb::Cell " + std::to_string(v.cell_index);
}

} // namespace

std::string summary_line(const VerdictCounts& c, double elapsed) {
    std::string line = std::to_string(c.passed) + " passed";
    if (c.failed) line += ", " + std::to_string(c.failed) + " failed";
    if (c.skipped) line += ", " + std::to_string(c.skipped) + " skipped";
    if (c.errored) line += ", " + std::to_string(c.errored) + " errored";
    return line + " in " + seconds(elapsed) + "s";
}

std::string emit_console_report(const std::vector<NotebookResult>& results, bool verbose,
                                std::optional<double> elapsed) {
    std::ostringstream out;
    VerdictCounts totals;
    double wall = 0.0;
    for (const auto& r : results) {
        totals += r.counts;
        wall += r.wall_time;
    }
    const double shown = elapsed.value_or(wall);

    if (results.empty()) {
        out << "no notebooks collected\n" << summary_line(totals, shown) << '\n';
        return out.str();
    }

    out << "collected " << totals.total() << (totals.total() == 1 ? " item" : " items") << "\n\n";
    for (const auto& r : results) {
        if (verbose) {
            for (const auto& v : r.verdicts) {
                out << cell_id(r, v) << ' ' << to_string(v.status) << '\n';
            }
            if (r.file_error) {
                out << notebook_stem(r.path) << "::ipynb ERROR\n";
            }
        } else {
            out << r.path.string() << ' ';
            for (const auto& v : r.verdicts) {
                out << progress_char(v.status);
            }
            if (r.file_error) out << 'E';
            out << '\n';
        }
    }
    out << '\n' << summary_line(totals, shown) << '\n';

    for (const auto& r : results) {
        if (r.file_error) {
            out << "\n____ " << r.path.string() << " ____\n" << *r.file_error << '\n';
        }
        for (const auto& v : r.verdicts) {
            if (v.status != VerdictStatus::fail && v.status != VerdictStatus::error) continue;
            out << "\n____ " << cell_id(r, v) << " ____\n";
            if (!v.reason.empty()) out << v.reason << '\n';
            if (v.diff) out << *v.diff;
        }
    }
    return out.str();
}

std::string xml_escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        switch (ch) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default:
            if (c < 0x20 && ch != '\t' && ch != '\n' && ch != '\r') {
                break;  // not representable in XML 1.0
            }
            out.push_back(ch);
        }
    }
    return out;
}

std::string emit_junit_xml(const std::vector<NotebookResult>& results) {
    VerdictCounts totals;
    double wall = 0.0;
    for (const auto& r : results) {
        totals += r.counts;
        wall += r.wall_time;
    }

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<testsuites name=\"nbcheck\" tests=\"" << totals.total() << "\" failures=\""
        << totals.failed << "\" errors=\"" << totals.errored << "\" skipped=\"" << totals.skipped
        << "\" time=\"" << seconds3(wall) << "\">\n";

    for (const auto& r : results) {
        const std::string stem = xml_escape(notebook_stem(r.path));
        const std::string classname = stem + "::ipynb";
        out << "  <testsuite name=\"" << stem << "\" file=\"" << xml_escape(r.path.string())
            << "\" tests=\"" << r.counts.total() << "\" failures=\"" << r.counts.failed
            << "\" errors=\"" << r.counts.errored << "\" skipped=\"" << r.counts.skipped
            << "\" time=\"" << seconds3(r.wall_time) << "\">\n";

        if (r.file_error) {
            out << "    <testcase classname=\"" << classname << "\" name=\""
                << xml_escape(r.path.string()) << "\" time=\"" << seconds3(r.wall_time) << "\">\n"
                << "      <error message=\"" << xml_escape(*r.file_error) << "\">"
                << xml_escape(*r.file_error) << "</error>\n"
                << "    </testcase>\n";
        }
        for (const auto& v : r.verdicts) {
            out << "    <testcase classname=\"" << classname << "\" name=\"Cell " << v.cell_index
                << "\" time=\"" << seconds3(v.duration) << "\"";
            switch (v.status) {
            case VerdictStatus::pass:
                out << "/>\n";
                continue;
            case VerdictStatus::fail:
                out << ">\n      <failure message=\"" << xml_escape(v.reason) << "\">"
                    << xml_escape(v.diff.value_or(v.reason)) << "</failure>\n";
                break;
            case VerdictStatus::skip:
                out << ">\n      <skipped message=\"" << xml_escape(v.reason) << "\"/>\n";
                break;
            case VerdictStatus::error:
                out << ">\n      <error message=\"" << xml_escape(v.reason) << "\">"
                    << xml_escape(v.reason) << "</error>\n";
                break;
            }
            out << "    </testcase>\n";
        }
        out << "  </testsuite>\n";
    }
    out << "</testsuites>\n";
    return out.str();
}

} // namespace nbcheck
