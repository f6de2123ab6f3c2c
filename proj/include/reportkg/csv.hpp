#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace reportkg {

/// RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF line endings.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
/// Quotes fields containing separators, quotes or line breaks; LF line endings.
std::string write_csv(const std::vector<std::vector<std::string>>& rows);

/// A named, rectangular table of text cells with unique column names.
struct RowTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    /// Index of `column`, or npos.
    std::size_t column_index(std::string_view column) const;
    /// Throws SchemaViolation on duplicate columns or ragged rows.
    void validate() const;

    friend bool operator==(const RowTable&, const RowTable&) = default;
};

/// Reads `<path>` (CSV with a header row) and its sidecar `<path>.schema.json`
/// ({"name": ..., "columns": [{"name": ..., "type": "string"}]}) when present.
/// Without a sidecar the table is named after the file stem.
RowTable read_row_table(const std::filesystem::path& path);
/// Writes the CSV and the schema sidecar, creating parent directories.
void write_row_table(const std::filesystem::path& path, const RowTable& table);

}  // namespace reportkg
