#include "reportkg/extraction.hpp"

#include "reportkg/error.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace reportkg::extraction {

using nlohmann::json;

namespace {

[[noreturn]] void violation(const std::string& pointer, const std::string& what) {
    throw Error(ErrorKind::SchemaViolation, "at " + (pointer.empty() ? std::string("/") : pointer) + ": " + what);
}

void reject_unknown_fields(const json& object, const std::string& pointer, std::initializer_list<std::string_view> known) {
    for (const auto& [key, value] : object.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            violation(pointer + "/" + key, "unknown field");
        }
    }
}

const json& require(const json& object, const std::string& pointer, const std::string& key) {
    const auto it = object.find(key);
    if (it == object.end()) {
        violation(pointer + "/" + key, "required field is missing");
    }
    return *it;
}

std::string require_string(const json& object, const std::string& pointer, const std::string& key) {
    const json& value = require(object, pointer, key);
    if (!value.is_string()) {
        violation(pointer + "/" + key, "expected a string");
    }
    return value.get<std::string>();
}

std::optional<std::string> optional_string(const json& object, const std::string& pointer, const std::string& key) {
    const auto it = object.find(key);
    if (it == object.end() || it->is_null()) {
        return std::nullopt;
    }
    if (!it->is_string()) {
        violation(pointer + "/" + key, "expected a string");
    }
    return it->get<std::string>();
}

bool valid_iso_date(const std::string& text) {
    static const std::regex pattern(R"((\d{4})-(\d{2})-(\d{2}))");
    std::smatch m;
    if (!std::regex_match(text, m, pattern)) {
        return false;
    }
    const std::chrono::year_month_day date{std::chrono::year{std::stoi(m[1])},
                                           std::chrono::month{static_cast<unsigned>(std::stoi(m[2]))},
                                           std::chrono::day{static_cast<unsigned>(std::stoi(m[3]))}};
    return date.ok();
}

RawTable load_table(const json& node, const std::string& pointer) {
    if (!node.is_object()) {
        violation(pointer, "expected an object");
    }
    reject_unknown_fields(node, pointer, {"title", "test_type_hint", "headers", "rows", "table_level_success"});
    RawTable table;
    table.title = require_string(node, pointer, "title");
    table.test_type_hint = optional_string(node, pointer, "test_type_hint");
    table.table_level_success = optional_string(node, pointer, "table_level_success");

    const json& headers = require(node, pointer, "headers");
    if (!headers.is_array() || headers.empty()) {
        violation(pointer + "/headers", "expected a non-empty array of strings");
    }
    for (std::size_t i = 0; i < headers.size(); ++i) {
        if (!headers[i].is_string()) {
            violation(pointer + "/headers/" + std::to_string(i), "expected a string");
        }
        table.headers.push_back(headers[i].get<std::string>());
    }

    const json& rows = require(node, pointer, "rows");
    if (!rows.is_array()) {
        violation(pointer + "/rows", "expected an array");
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::string row_pointer = pointer + "/rows/" + std::to_string(r);
        if (!rows[r].is_array()) {
            violation(row_pointer, "expected an array of cells");
        }
        if (rows[r].size() != table.headers.size()) {
            violation(row_pointer, "row has " + std::to_string(rows[r].size()) + " cells, expected " +
                                       std::to_string(table.headers.size()));
        }
        std::vector<Cell> row;
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            const json& cell = rows[r][c];
            if (cell.is_null()) {
                row.emplace_back(std::nullopt);
            } else if (cell.is_string()) {
                row.emplace_back(cell.get<std::string>());
            } else {
                violation(row_pointer + "/" + std::to_string(c), "cell must be a string or null");
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string alnum_key(std::string_view text) {
    std::string out;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            out.push_back(static_cast<char>(std::tolower(c)));
        }
    }
    return out;
}

std::string local_name(std::string_view iri) {
    const auto cut = iri.find_last_of("#/");
    return std::string(cut == std::string_view::npos ? iri : iri.substr(cut + 1));
}

std::optional<std::string> bracket_unit(std::string_view text, const units::UnitRegistry& units) {
    static const std::regex bracket(R"(\[([^\]]+)\])");
    const std::string owned(text);
    for (auto it = std::sregex_iterator(owned.begin(), owned.end(), bracket); it != std::sregex_iterator(); ++it) {
        const std::string symbol = trim((*it)[1].str());
        if (units.is_unit_symbol(symbol)) {
            return symbol;
        }
    }
    return std::nullopt;
}

}  // namespace

NormalizedReport load_report(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::SchemaViolation, std::string("at /: malformed JSON: ") + e.what());
    }
    if (!root.is_object()) {
        violation("", "expected an object");
    }
    reject_unknown_fields(root, "", {"version", "reference", "name", "date", "location", "tables"});
    if (const auto it = root.find("version"); it != root.end() && *it != 1) {
        violation("/version", "unsupported schema version");
    }
    NormalizedReport report;
    report.reference = require_string(root, "", "reference");
    if (trim(report.reference).empty()) {
        violation("/reference", "must not be empty");
    }
    report.name = require_string(root, "", "name");
    report.date = require_string(root, "", "date");
    if (!valid_iso_date(report.date)) {
        violation("/date", "expected an ISO-8601 date (yyyy-mm-dd)");
    }
    report.location = require_string(root, "", "location");
    const json& tables = require(root, "", "tables");
    if (!tables.is_array()) {
        violation("/tables", "expected an array");
    }
    for (std::size_t i = 0; i < tables.size(); ++i) {
        report.tables.push_back(load_table(tables[i], "/tables/" + std::to_string(i)));
    }
    return report;
}

NormalizedReport load_report_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoError, "cannot read " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_report(buffer.str());
}

RawTable expand_rowspans(const RawTable& table) {
    RawTable out = table;
    for (std::size_t r = 0; r < out.rows.size(); ++r) {
        for (std::size_t c = 0; c < out.rows[r].size(); ++c) {
            if (out.rows[r][c]) {
                continue;
            }
            if (r == 0) {
                throw Error(ErrorKind::DanglingSpan, "row 0 column " + std::to_string(c) + " (\"" +
                                                         (c < out.headers.size() ? out.headers[c] : "") +
                                                         "\") has no cell above to inherit");
            }
            out.rows[r][c] = out.rows[r - 1][c];
        }
    }
    return out;
}

std::string_view to_string(ColumnRole role) {
    switch (role) {
        case ColumnRole::Label: return "Label";
        case ColumnRole::MeasuredValue: return "MeasuredValue";
        case ColumnRole::AcceptanceLimits: return "AcceptanceLimits";
        case ColumnRole::Success: return "Success";
        case ColumnRole::Ignored: return "Ignored";
    }
    return "Ignored";
}

std::optional<ColumnRole> column_role_from_string(std::string_view name) {
    for (ColumnRole role : {ColumnRole::Label, ColumnRole::MeasuredValue, ColumnRole::AcceptanceLimits,
                            ColumnRole::Success, ColumnRole::Ignored}) {
        if (to_lower_ascii(name) == to_lower_ascii(to_string(role))) {
            return role;
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> ColumnRoleMap::column(ColumnRole role) const {
    const auto it = std::find(roles.begin(), roles.end(), role);
    if (it == roles.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - roles.begin());
}

std::string normalize_header(std::string_view header) {
    std::string stripped;
    int depth = 0;
    for (char c : header) {
        if (c == '[' || c == '(') {
            ++depth;
        } else if ((c == ']' || c == ')') && depth > 0) {
            --depth;
        } else if (depth == 0) {
            stripped.push_back(c);
        }
    }
    std::string out;
    for (unsigned char c : stripped) {
        if (std::isalnum(c) || c >= 0x80) {
            out.push_back(static_cast<char>(std::tolower(c)));
        } else if (!out.empty() && out.back() != ' ') {
            out.push_back(' ');
        }
    }
    while (!out.empty() && out.back() == ' ') {
        out.pop_back();
    }
    return out;
}

const SynonymRegistry& SynonymRegistry::defaults() {
    static const SynonymRegistry registry = [] {
        SynonymRegistry r;
        for (const char* s : {"label", "v cores", "cores", "core", "test point", "test points", "measurement point",
                              "parameter", "name", "description", "item", "channel", "pin", "net", "rail", "signal",
                              "connector", "connectors"}) {
            r.add(ColumnRole::Label, s);
        }
        for (const char* s : {"measured value", "measured values", "measurement", "measurements", "measured",
                              "voltage measurements", "resistance measurements", "isolation measurements", "measure",
                              "value", "values", "reading", "result", "results"}) {
            r.add(ColumnRole::MeasuredValue, s);
        }
        for (const char* s : {"acceptance limits", "acceptance limit", "acceptance range", "expected values",
                              "expected value", "expected", "limits", "limit", "range", "tolerance", "specification"}) {
            r.add(ColumnRole::AcceptanceLimits, s);
        }
        for (const char* s : {"successful", "success", "pass fail", "status", "outcome", "verdict", "ok ko",
                              "test result"}) {
            r.add(ColumnRole::Success, s);
        }
        return r;
    }();
    return registry;
}

SynonymRegistry SynonymRegistry::from_config(const KeyValueConfig& config) {
    SynonymRegistry registry = defaults();
    for (const auto& [role_name, value] : config.section("synonym.")) {
        const auto role = column_role_from_string(role_name);
        if (!role) {
            throw Error(ErrorKind::ConfigError, "unknown column role in synonym." + role_name);
        }
        for (const auto& synonym : split(value, ',')) {
            if (!trim(synonym).empty()) {
                registry.add(*role, synonym);
            }
        }
    }
    return registry;
}

void SynonymRegistry::add(ColumnRole role, std::string synonym) {
    synonyms_[normalize_header(synonym)] = role;
}

std::optional<ColumnRole> SynonymRegistry::match(std::string_view header) const {
    const std::string normalized = normalize_header(header);
    if (const auto it = synonyms_.find(normalized); it != synonyms_.end()) {
        return it->second;
    }
    const std::string padded = " " + normalized + " ";
    std::optional<ColumnRole> best;
    std::size_t best_length = 0;
    for (const auto& [synonym, role] : synonyms_) {
        if (synonym.size() > best_length && padded.find(" " + synonym + " ") != std::string::npos) {
            best = role;
            best_length = synonym.size();
        }
    }
    return best;
}

ColumnRoleMap resolve_columns(const std::vector<std::string>& headers, const kg::StructureDef* structure,
                              const SynonymRegistry& synonyms, std::string_view title,
                              const units::UnitRegistry& units) {
    ColumnRoleMap map;
    bool have_label = false;
    for (const auto& header : headers) {
        std::optional<ColumnRole> role;
        if (structure) {
            const std::string normalized = normalize_header(header);
            for (const auto& [role_name, hints] : structure->header_hints) {
                const auto hinted = column_role_from_string(role_name);
                for (const auto& hint : hints) {
                    if (hinted && normalize_header(hint) == normalized) {
                        role = hinted;
                    }
                }
            }
        }
        if (!role) {
            role = synonyms.match(header);
        }
        ColumnRole resolved = role.value_or(ColumnRole::Ignored);
        if (resolved == ColumnRole::Label) {
            resolved = have_label ? ColumnRole::Ignored : ColumnRole::Label;
            have_label = true;
        } else if (resolved != ColumnRole::Ignored && std::count(map.roles.begin(), map.roles.end(), resolved) > 0) {
            throw Error(ErrorKind::AmbiguousRole, "columns \"" + headers[*map.column(resolved)] + "\" and \"" + header +
                                                      "\" both claim " + std::string(to_string(resolved)));
        }
        map.roles.push_back(resolved);
    }
    for (ColumnRole required : {ColumnRole::MeasuredValue, ColumnRole::AcceptanceLimits}) {
        if (!map.column(required)) {
            std::string listed;
            for (const auto& header : headers) {
                listed += (listed.empty() ? "\"" : ", \"") + header + "\"";
            }
            throw Error(ErrorKind::MissingRole, "no " + std::string(to_string(required)) + " column among " + listed);
        }
    }
    map.default_unit = bracket_unit(headers[*map.column(ColumnRole::MeasuredValue)], units);
    if (!map.default_unit) {
        map.default_unit = bracket_unit(title, units);
    }
    return map;
}

std::string resolve_test_type(const RawTable& table, const kg::TripleStore& store) {
    const auto properties = store.observable_properties();
    std::map<std::string, std::set<std::string>> names;  // property -> alnum keys
    for (const auto& property : properties) {
        auto& keys = names[property];
        keys.insert(alnum_key(local_name(property)));
        if (const auto def = store.structure_def(property); def && !def->label.empty()) {
            keys.insert(alnum_key(def->label));
        }
        keys.erase("");
    }
    if (table.test_type_hint) {
        const std::string hint = alnum_key(*table.test_type_hint);
        for (const auto& [property, keys] : names) {
            if (*table.test_type_hint == property || keys.count(hint) != 0) {
                return property;
            }
        }
    }
    const std::string title = alnum_key(table.title);
    std::string best;
    std::size_t best_length = 0;
    for (const auto& [property, keys] : names) {
        for (const auto& key : keys) {
            if (key.size() > best_length && title.find(key) != std::string::npos) {
                best = property;
                best_length = key.size();
            }
        }
    }
    if (best.empty()) {
        throw Error(ErrorKind::UnknownTestType,
                    "no observable property matches table \"" + table.title + "\"" +
                        (table.test_type_hint ? " (hint \"" + *table.test_type_hint + "\")" : std::string()));
    }
    return best;
}

std::string observation_id(std::string_view reference, std::string_view label) {
    std::string id = std::string(reference) + "-" + std::string(label);
    for (char& c : id) {
        const auto u = static_cast<unsigned char>(c);
        if (!(std::isalnum(u) || c == '.' || c == '_' || c == '~' || c == '-')) {
            c = '_';
        }
    }
    return id;
}

ExtractedReport extract_observations(const NormalizedReport& report, const kg::TripleStore& store,
                                     const SynonymRegistry& synonyms, const units::UnitRegistry& units) {
    ExtractedReport out;
    out.meta.reference = report.reference;
    out.meta.name = report.name;
    out.meta.date = report.date;
    out.meta.location = report.location;
    out.meta.validation = ReportStatus::Pending;

    std::set<std::string> used_ids;
    for (std::size_t t = 0; t < report.tables.size(); ++t) {
        const RawTable& raw = report.tables[t];
        try {
            const std::string property = resolve_test_type(raw, store);
            const auto structure = store.structure_def(property);
            const RawTable table = expand_rowspans(raw);
            const ColumnRoleMap roles = resolve_columns(table.headers, structure ? &*structure : nullptr, synonyms,
                                                        table.title, units);
            if (std::find(out.meta.reported_properties.begin(), out.meta.reported_properties.end(), property) ==
                out.meta.reported_properties.end()) {
                out.meta.reported_properties.push_back(property);
            }
            const auto label_column = roles.column(ColumnRole::Label);
            const auto success_column = roles.column(ColumnRole::Success);
            for (std::size_t r = 0; r < table.rows.size(); ++r) {
                const auto& row = table.rows[r];
                Observation observation;
                observation.observed_property = property;
                observation.test_type = local_name(property);
                observation.label = label_column ? trim(*row[*label_column]) : "row" + std::to_string(r + 1);
                observation.result_raw = *row[*roles.column(ColumnRole::MeasuredValue)];
                observation.limits_raw = *row[*roles.column(ColumnRole::AcceptanceLimits)];
                if (success_column) {
                    observation.success_raw = *row[*success_column];
                } else {
                    observation.success_raw = raw.table_level_success.value_or("");
                }
                observation.report_reference = report.reference;
                observation.date = report.date;
                observation.default_unit = roles.default_unit;
                observation.table_title = table.title;
                observation.row_index = r;

                const std::string base = observation_id(report.reference, observation.label);
                std::string id = base;
                for (int n = 2; used_ids.count(id) != 0; ++n) {
                    id = base + "-" + std::to_string(n);
                }
                used_ids.insert(id);
                observation.id = std::move(id);
                out.observations.push_back(std::move(observation));
            }
        } catch (const Error& e) {
            throw Error(e.kind(), "report " + report.reference + ", table " + std::to_string(t) + " (\"" + raw.title +
                                      "\"): " + e.detail());
        }
    }
    if (out.observations.empty()) {
        spdlog::warn("report {} contains no observations", report.reference);
    }
    return out;
}

}  // namespace reportkg::extraction
