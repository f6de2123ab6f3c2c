#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reportkg {

enum class ErrorKind {
    // units
    UnparseableQuantity,
    UnknownUnit,
    UnparseableRange,
    InvertedInterval,
    DimensionMismatch,
    InexactConversion,
    // compliance
    UnknownVerdict,
    // llm
    MissingPlaceholder,
    BackendUnavailable,
    RateLimited,
    InvalidBackendConfig,
    // extraction
    SchemaViolation,
    DanglingSpan,
    AmbiguousRole,
    MissingRole,
    UnknownTestType,
    // kg
    ParseError,
    DuplicateReport,
    UnknownReport,
    // vkg
    MappingParseError,
    UnboundPlaceholder,
    MissingColumn,
    UnknownTable,
    // bench
    IdMismatch,
    EmptyDataset,
    // costmodel
    NoBreakEven,
    InvalidCostInputs,
    // cli / pipeline
    UnknownItem,
    AlreadyResolved,
    StillAnomalous,
    ConfigError,
    LockHeld,
    IoError,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` is the stable, testable part.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

    ErrorKind kind() const noexcept { return kind_; }
    /// The message without the kind prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

}  // namespace reportkg
