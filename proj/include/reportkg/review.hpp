#pragma once

#include "reportkg/model.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reportkg::review {

enum class Status { Open, ConfirmedAnomaly, Corrected };

std::string_view to_string(Status status);
std::optional<Status> status_from_string(std::string_view text);

struct Correction {
    std::optional<std::string> measured_raw;
    std::optional<std::string> success_raw;

    friend bool operator==(const Correction&, const Correction&) = default;
};

struct ReviewItem {
    std::string id;  // the observation id
    Observation observation;
    std::string reason;
    Status status = Status::Open;
    std::optional<Correction> correction;

    const std::string& report_reference() const { return observation.report_reference; }
    friend bool operator==(const ReviewItem&, const ReviewItem&) = default;
};

std::string to_json_line(const ReviewItem& item);
ReviewItem from_json_line(std::string_view line);

/// Append-only JSONL file; a later record for the same id supersedes earlier ones.
class ReviewQueue {
public:
    explicit ReviewQueue(std::filesystem::path path);

    /// Re-reads the file. A truncated last line (interrupted write) is ignored.
    void reload();
    /// Appends one record and flushes it to disk.
    void append(const ReviewItem& item);

    /// Current state of every item, in first-appearance order.
    const std::vector<ReviewItem>& items() const { return items_; }
    std::vector<ReviewItem> items_with(std::optional<Status> status) const;
    std::optional<ReviewItem> find(std::string_view id) const;
    std::vector<ReviewItem> for_report(std::string_view reference) const;

    const std::filesystem::path& path() const { return path_; }

private:
    void apply(ReviewItem item);

    std::filesystem::path path_;
    std::vector<ReviewItem> items_;
};

}  // namespace reportkg::review
