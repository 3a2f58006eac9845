#pragma once

#include <string>
#include <vector>

namespace covshap {

// Minimal RFC-4180-ish CSV: quoted fields, embedded commas/quotes, CRLF.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column index by header name, -1 if absent.
    int col(const std::string& name) const;
    // Case-insensitive variant.
    int col_ci(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

std::string csv_escape(const std::string& field);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Shortest round-trip decimal representation (std::to_chars).
std::string format_double(double v);

}  // namespace covshap
