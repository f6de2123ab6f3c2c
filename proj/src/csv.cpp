#include "reportkg/csv.hpp"

#include "reportkg/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace reportkg {

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t line = 1;

    const auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    const auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                line += c == '\n' ? 1 : 0;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty()) {
                    throw Error(ErrorKind::ParseError, "csv line " + std::to_string(line) + ": stray quote");
                }
                quoted = true;
                field_started = true;
                break;
            case ',':
                end_field();
                field_started = true;
                break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') {
                    ++i;
                }
                [[fallthrough]];
            case '\n':
                end_row();
                ++line;
                break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (quoted) {
        throw Error(ErrorKind::ParseError, "csv line " + std::to_string(line) + ": unterminated quoted field");
    }
    if (field_started || !field.empty() || !row.empty()) {
        end_row();
    }
    return rows;
}

std::string write_csv(const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) {
                out.push_back(',');
            }
            const std::string& cell = row[i];
            if (cell.find_first_of(",\"\r\n") == std::string::npos) {
                out += cell;
                continue;
            }
            out.push_back('"');
            for (char c : cell) {
                if (c == '"') {
                    out.push_back('"');
                }
                out.push_back(c);
            }
            out.push_back('"');
        }
        out.push_back('\n');
    }
    return out;
}

std::size_t RowTable::column_index(std::string_view column) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == column) {
            return i;
        }
    }
    return std::string::npos;
}

void RowTable::validate() const {
    std::set<std::string> seen;
    for (const auto& column : columns) {
        if (!seen.insert(column).second) {
            throw Error(ErrorKind::SchemaViolation, "table " + name + ": duplicate column " + column);
        }
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != columns.size()) {
            throw Error(ErrorKind::SchemaViolation, "table " + name + " row " + std::to_string(r) + " has " +
                                                        std::to_string(rows[r].size()) + " cells, expected " +
                                                        std::to_string(columns.size()));
        }
    }
}

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoError, "cannot read " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::filesystem::path sidecar(const std::filesystem::path& path) {
    return std::filesystem::path(path.string() + ".schema.json");
}

}  // namespace

RowTable read_row_table(const std::filesystem::path& path) {
    auto rows = parse_csv(slurp(path));
    RowTable table;
    table.name = path.stem().string();
    if (!rows.empty()) {
        table.columns = std::move(rows.front());
        table.rows.assign(std::make_move_iterator(rows.begin() + 1), std::make_move_iterator(rows.end()));
    }
    if (const auto schema_path = sidecar(path); std::filesystem::exists(schema_path)) {
        const auto schema = nlohmann::json::parse(slurp(schema_path));
        table.name = schema.value("name", table.name);
        std::vector<std::string> declared;
        for (const auto& column : schema.at("columns")) {
            declared.push_back(column.at("name").get<std::string>());
        }
        if (table.columns.empty() && table.rows.empty()) {
            table.columns = declared;
        } else if (declared != table.columns) {
            throw Error(ErrorKind::SchemaViolation, path.string() + ": header row does not match its schema sidecar");
        }
    }
    table.validate();
    return table;
}

void write_row_table(const std::filesystem::path& path, const RowTable& table) {
    table.validate();
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::vector<std::vector<std::string>> rows;
    rows.reserve(table.rows.size() + 1);
    rows.push_back(table.columns);
    rows.insert(rows.end(), table.rows.begin(), table.rows.end());
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << write_csv(rows);
        if (!out) {
            throw Error(ErrorKind::IoError, "cannot write " + path.string());
        }
    }
    nlohmann::json schema;
    schema["name"] = table.name;
    schema["columns"] = nlohmann::json::array();
    for (const auto& column : table.columns) {
        schema["columns"].push_back({{"name", column}, {"type", "string"}});
    }
    std::ofstream out(sidecar(path), std::ios::binary | std::ios::trunc);
    out << schema.dump(2) << '\n';
}

}  // namespace reportkg
