#include "reportkg/model.hpp"

namespace reportkg {

std::string_view to_string(ReportStatus status) {
    switch (status) {
        case ReportStatus::OK: return "OK";
        case ReportStatus::Pending: return "Pending";
        case ReportStatus::Anomalous: return "Anomalous";
    }
    return "Pending";
}

std::optional<ReportStatus> report_status_from_string(std::string_view text) {
    for (auto status : {ReportStatus::OK, ReportStatus::Pending, ReportStatus::Anomalous}) {
        if (to_string(status) == text) {
            return status;
        }
    }
    return std::nullopt;
}

}  // namespace reportkg
