#include "reportkg/error.hpp"

namespace reportkg {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::UnparseableQuantity: return "UnparseableQuantity";
        case ErrorKind::UnknownUnit: return "UnknownUnit";
        case ErrorKind::UnparseableRange: return "UnparseableRange";
        case ErrorKind::InvertedInterval: return "InvertedInterval";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::InexactConversion: return "InexactConversion";
        case ErrorKind::UnknownVerdict: return "UnknownVerdict";
        case ErrorKind::MissingPlaceholder: return "MissingPlaceholder";
        case ErrorKind::BackendUnavailable: return "BackendUnavailable";
        case ErrorKind::RateLimited: return "RateLimited";
        case ErrorKind::InvalidBackendConfig: return "InvalidBackendConfig";
        case ErrorKind::SchemaViolation: return "SchemaViolation";
        case ErrorKind::DanglingSpan: return "DanglingSpan";
        case ErrorKind::AmbiguousRole: return "AmbiguousRole";
        case ErrorKind::MissingRole: return "MissingRole";
        case ErrorKind::UnknownTestType: return "UnknownTestType";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::DuplicateReport: return "DuplicateReport";
        case ErrorKind::UnknownReport: return "UnknownReport";
        case ErrorKind::MappingParseError: return "MappingParseError";
        case ErrorKind::UnboundPlaceholder: return "UnboundPlaceholder";
        case ErrorKind::MissingColumn: return "MissingColumn";
        case ErrorKind::UnknownTable: return "UnknownTable";
        case ErrorKind::IdMismatch: return "IdMismatch";
        case ErrorKind::EmptyDataset: return "EmptyDataset";
        case ErrorKind::NoBreakEven: return "NoBreakEven";
        case ErrorKind::InvalidCostInputs: return "InvalidCostInputs";
        case ErrorKind::UnknownItem: return "UnknownItem";
        case ErrorKind::AlreadyResolved: return "AlreadyResolved";
        case ErrorKind::StillAnomalous: return "StillAnomalous";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::LockHeld: return "LockHeld";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace reportkg
