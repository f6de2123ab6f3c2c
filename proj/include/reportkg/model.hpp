#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reportkg {

/// One test-table row with its raw cells untouched.
struct Observation {
    std::string id;                 // "{report_reference}-{label}", IRI-safe
    std::string observed_property;  // full IRI of the observable property
    std::string test_type;          // local name, e.g. "POLVoltage"
    std::string label;
    std::string result_raw;
    std::string limits_raw;
    std::string success_raw;
    std::string report_reference;
    std::string date;  // ISO-8601 yyyy-mm-dd
    /// Unit harvested from header/title bracket notation, applied to bare-number cells.
    std::optional<std::string> default_unit;
    std::string table_title;
    std::size_t row_index = 0;

    friend bool operator==(const Observation&, const Observation&) = default;
};

enum class ReportStatus { OK, Pending, Anomalous };

std::string_view to_string(ReportStatus status);
std::optional<ReportStatus> report_status_from_string(std::string_view text);

struct ReportMeta {
    std::string reference;
    std::string name;
    std::string date;
    std::string location;
    ReportStatus validation = ReportStatus::Pending;
    std::vector<std::string> reported_properties;  // observable-property IRIs

    friend bool operator==(const ReportMeta&, const ReportMeta&) = default;
};

}  // namespace reportkg
