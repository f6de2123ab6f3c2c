#include "reportkg/compliance.hpp"

#include "reportkg/error.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>

namespace reportkg::compliance {

using units::AcceptanceLimits;
using units::Dimension;
using units::Quantity;

std::string_view to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::InRange: return "InRange";
        case Verdict::OutOfRange: return "OutOfRange";
        case Verdict::Unknown: return "Unknown";
    }
    return "Unknown";
}

std::string_view to_string(Validity validity) {
    return validity == Validity::Valid ? "Valid" : "Anomalous";
}

namespace {

bool above(const Decimal& value, const Decimal& bound, bool inclusive) {
    return inclusive ? value >= bound : value > bound;
}

bool below(const Decimal& value, const Decimal& bound, bool inclusive) {
    return inclusive ? value <= bound : value < bound;
}

}  // namespace

Verdict oracle_check(const Quantity& measured, const AcceptanceLimits& limits, const OracleOptions& options) {
    const Dimension limit_dimension = limits.dimension();
    Decimal value = measured.base_value();
    // Base values of the bounds, or raw values when the limits are unitless.
    const auto bound_value = [&](const Quantity& bound) {
        if (limit_dimension == Dimension::Dimensionless && measured.dimension() != Dimension::Dimensionless) {
            return bound.value * measured.unit.scale;
        }
        return bound.base_value();
    };
    if (measured.dimension() == Dimension::Dimensionless && limit_dimension != Dimension::Dimensionless) {
        value = measured.value * limits.unit().scale;
    } else if (measured.dimension() != Dimension::Dimensionless && limit_dimension != Dimension::Dimensionless &&
               measured.dimension() != limit_dimension) {
        return Verdict::Unknown;
    }
    bool inside = true;
    if (limits.lower) {
        inside = inside && above(value, bound_value(*limits.lower), options.inclusive_bounds);
    }
    if (limits.upper) {
        inside = inside && below(value, bound_value(*limits.upper), options.inclusive_bounds);
    }
    return inside ? Verdict::InRange : Verdict::OutOfRange;
}

RowValidity classify(Verdict verdict, const units::SuccessMark& mark) {
    if (verdict == Verdict::Unknown) {
        throw Error(ErrorKind::UnknownVerdict, "cannot classify a row whose verdict is Unknown");
    }
    const bool pass = mark.verdict == units::Mark::Pass;
    if (verdict == Verdict::InRange && pass) {
        return {Validity::Valid, {}};
    }
    if (verdict == Verdict::OutOfRange && !pass) {
        return {Validity::Valid, {}};
    }
    if (verdict == Verdict::InRange) {
        return {Validity::Anomalous, "value within acceptance limits but success mark '" + mark.raw + "' is not a pass"};
    }
    return {Validity::Anomalous, "value outside acceptance limits but success mark '" + mark.raw + "' is a pass"};
}

RowAssessment assess_row(const Observation& row, const units::UnitRegistry& registry, const OracleOptions& options) {
    RowAssessment assessment{row.id, Verdict::Unknown, std::nullopt, {}};
    try {
        Quantity measured = registry.parse_quantity(row.result_raw);
        AcceptanceLimits limits = registry.parse_acceptance_limits(row.limits_raw);
        if (row.default_unit) {
            const units::Unit unit = registry.unit(*row.default_unit);
            if (measured.dimension() == Dimension::Dimensionless) {
                measured = units::convert(measured, unit);
            }
            if (limits.dimension() == Dimension::Dimensionless) {
                for (auto* bound : {&limits.lower, &limits.upper}) {
                    if (*bound) {
                        **bound = units::convert(**bound, unit);
                    }
                }
            }
        }
        assessment.verdict = oracle_check(measured, limits, options);
        if (assessment.verdict == Verdict::Unknown) {
            assessment.detail = "measured value '" + row.result_raw + "' and acceptance limits '" + row.limits_raw +
                                "' have incompatible units";
        }
    } catch (const Error& error) {
        assessment.detail = error.what();
    }
    if (assessment.verdict != Verdict::Unknown) {
        assessment.validity = classify(assessment.verdict, registry.parse_success_mark(row.success_raw));
    }
    return assessment;
}

ReportValidation validate_observations(std::span<const Observation> rows, const units::UnitRegistry& registry,
                                       const OracleOptions& options) {
    ReportValidation result;
    if (rows.empty()) {
        spdlog::warn("validating a report with no observations; status is vacuously OK");
        return result;
    }
    for (const auto& row : rows) {
        const RowAssessment assessment = assess_row(row, registry, options);
        if (assessment.verdict == Verdict::Unknown) {
            result.anomalies.push_back({row.id, Verdict::Unknown, "unknown verdict: " + assessment.detail});
        } else if (!assessment.is_valid()) {
            result.anomalies.push_back({row.id, assessment.verdict, assessment.validity->reason});
        }
    }
    std::sort(result.anomalies.begin(), result.anomalies.end(),
              [](const Anomaly& a, const Anomaly& b) { return a.observation_id < b.observation_id; });
    result.status = result.anomalies.empty() ? ReportStatus::OK : ReportStatus::Pending;
    return result;
}

}  // namespace reportkg::compliance
