#pragma once

#include "reportkg/config.hpp"
#include "reportkg/kg.hpp"
#include "reportkg/model.hpp"
#include "reportkg/units.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reportkg::extraction {

using Cell = std::optional<std::string>;  // nullopt inherits the cell above (row span)

struct RawTable {
    std::string title;
    std::optional<std::string> test_type_hint;
    std::vector<std::string> headers;
    std::vector<std::vector<Cell>> rows;
    std::optional<std::string> table_level_success;

    friend bool operator==(const RawTable&, const RawTable&) = default;
};

struct NormalizedReport {
    std::string reference;
    std::string name;
    std::string date;  // yyyy-mm-dd
    std::string location;
    std::vector<RawTable> tables;

    friend bool operator==(const NormalizedReport&, const NormalizedReport&) = default;
};

/// Top-level {reference, name, date, location, tables, version?}; each table
/// {title, test_type_hint?, headers, rows, table_level_success?}. Unknown fields,
/// wrong types and ragged rows throw SchemaViolation naming the JSON pointer.
NormalizedReport load_report(std::string_view json_text);
NormalizedReport load_report_file(const std::filesystem::path& path);

/// Fills absent cells from the nearest filled cell above. Throws DanglingSpan.
RawTable expand_rowspans(const RawTable& table);

enum class ColumnRole { Label, MeasuredValue, AcceptanceLimits, Success, Ignored };

std::string_view to_string(ColumnRole role);
std::optional<ColumnRole> column_role_from_string(std::string_view name);

struct ColumnRoleMap {
    std::vector<ColumnRole> roles;
    std::optional<std::string> default_unit;

    std::optional<std::size_t> column(ColumnRole role) const;
};

/// Header synonyms per role, matched case-insensitively after dropping bracketed
/// units and punctuation. Config keys `synonym.<Role> = a, b, c` extend the defaults.
class SynonymRegistry {
public:
    static const SynonymRegistry& defaults();
    static SynonymRegistry from_config(const KeyValueConfig& config);

    void add(ColumnRole role, std::string synonym);
    /// Exact synonym match first, then the longest synonym contained as whole words.
    std::optional<ColumnRole> match(std::string_view header) const;

private:
    std::map<std::string, ColumnRole> synonyms_;  // normalized synonym -> role
};

/// Lowercase, bracketed parts removed, punctuation folded to single spaces.
std::string normalize_header(std::string_view header);

/// Roles from structure-def hints first, then the registry. Throws AmbiguousRole
/// and MissingRole. The bracketed unit of the measured-value header (or else of
/// `title`) becomes the default unit.
ColumnRoleMap resolve_columns(const std::vector<std::string>& headers, const kg::StructureDef* structure,
                              const SynonymRegistry& synonyms = SynonymRegistry::defaults(),
                              std::string_view title = {},
                              const units::UnitRegistry& units = units::UnitRegistry::defaults());

/// Test type for a table: an explicit hint naming a property, or the longest
/// property label/local name contained in the title. Throws UnknownTestType.
std::string resolve_test_type(const RawTable& table, const kg::TripleStore& store);

struct ExtractedReport {
    ReportMeta meta;
    std::vector<Observation> observations;
};

ExtractedReport extract_observations(const NormalizedReport& report, const kg::TripleStore& store,
                                     const SynonymRegistry& synonyms = SynonymRegistry::defaults(),
                                     const units::UnitRegistry& units = units::UnitRegistry::defaults());

/// "{reference}-{label}" with characters outside [A-Za-z0-9._~-] replaced by '_'.
std::string observation_id(std::string_view reference, std::string_view label);

}  // namespace reportkg::extraction
