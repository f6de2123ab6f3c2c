#pragma once

#include "reportkg/model.hpp"
#include "reportkg/units.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace reportkg::compliance {

enum class Verdict { InRange, OutOfRange, Unknown };
enum class Validity { Valid, Anomalous };

std::string_view to_string(Verdict verdict);
std::string_view to_string(Validity validity);

struct RowValidity {
    Validity validity = Validity::Valid;
    std::string reason;  // non-empty when Anomalous
};

struct OracleOptions {
    bool inclusive_bounds = true;
};

/// Exact base-unit comparison. A dimensionless side adopts the other side's unit;
/// differing dimensions yield Unknown.
Verdict oracle_check(const units::Quantity& measured, const units::AcceptanceLimits& limits,
                     const OracleOptions& options = {});

/// Valid iff (InRange and Pass) or (OutOfRange and Fail). Throws UnknownVerdict.
RowValidity classify(Verdict verdict, const units::SuccessMark& mark);

/// Outcome of running the oracle over one observation's raw cells.
struct RowAssessment {
    std::string observation_id;
    Verdict verdict = Verdict::Unknown;
    std::optional<RowValidity> validity;  // absent when the verdict is Unknown
    std::string detail;                   // parse/conversion failure text for Unknown

    bool is_valid() const { return validity && validity->validity == Validity::Valid; }
};

/// Parses the raw cells (applying the observation's default unit to bare numbers),
/// then checks and classifies. Parse failures become Unknown, never exceptions.
RowAssessment assess_row(const Observation& row, const units::UnitRegistry& registry = units::UnitRegistry::defaults(),
                         const OracleOptions& options = {});

struct Anomaly {
    std::string observation_id;
    Verdict verdict = Verdict::Unknown;
    std::string reason;
};

struct ReportValidation {
    ReportStatus status = ReportStatus::OK;
    std::vector<Anomaly> anomalies;  // ordered by observation id
};

/// OK iff every row is Valid; otherwise Pending with the anomalies. Unknown rows are anomalies.
ReportValidation validate_observations(std::span<const Observation> rows,
                                       const units::UnitRegistry& registry = units::UnitRegistry::defaults(),
                                       const OracleOptions& options = {});

}  // namespace reportkg::compliance
