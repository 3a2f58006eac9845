#include "covshap/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "covshap/common.hpp"

namespace covshap {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

int CsvTable::col(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

int CsvTable::col_ci(const std::string& name) const {
    std::string n = lower(name);
    for (size_t i = 0; i < header.size(); ++i)
        if (lower(header[i]) == n) return static_cast<int>(i);
    return -1;
}

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool any_field = false;
    bool have_header = false;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        any_field = true;
    };
    auto end_row = [&] {
        if (!any_field && row.empty()) return;  // skip blank lines
        end_field();
        any_field = false;
        if (!have_header) {
            table.header = std::move(row);
            have_header = true;
        } else {
            table.rows.push_back(std::move(row));
        }
        row.clear();
    };

    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r') {
            // swallow; newline handled next
        } else if (c == '\n') {
            if (any_field || !field.empty() || !row.empty()) end_row();
        } else {
            field += c;
        }
    }
    if (any_field || !field.empty() || !row.empty()) end_row();
    if (in_quotes) throw DataError("csv: unterminated quoted field");
    return table;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    auto emit = [&](const std::vector<std::string>& r) {
        for (size_t i = 0; i < r.size(); ++i) {
            if (i) out << ',';
            out << csv_escape(r[i]);
        }
        out << '\n';
    };
    emit(header);
    for (const auto& r : rows) emit(r);
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace covshap
