#include "reportkg/review.hpp"

#include "reportkg/error.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>

namespace reportkg::review {

using nlohmann::json;

std::string_view to_string(Status status) {
    switch (status) {
        case Status::Open: return "Open";
        case Status::ConfirmedAnomaly: return "ConfirmedAnomaly";
        case Status::Corrected: return "Corrected";
    }
    return "Open";
}

std::optional<Status> status_from_string(std::string_view text) {
    for (Status status : {Status::Open, Status::ConfirmedAnomaly, Status::Corrected}) {
        if (text == to_string(status)) {
            return status;
        }
    }
    return std::nullopt;
}

namespace {

json observation_json(const Observation& o) {
    json out = {{"id", o.id},
                {"observed_property", o.observed_property},
                {"test_type", o.test_type},
                {"label", o.label},
                {"result_raw", o.result_raw},
                {"limits_raw", o.limits_raw},
                {"success_raw", o.success_raw},
                {"report_reference", o.report_reference},
                {"date", o.date},
                {"table_title", o.table_title},
                {"row_index", o.row_index}};
    out["default_unit"] = o.default_unit ? json(*o.default_unit) : json(nullptr);
    return out;
}

Observation observation_from(const json& j) {
    Observation o;
    o.id = j.at("id").get<std::string>();
    o.observed_property = j.at("observed_property").get<std::string>();
    o.test_type = j.at("test_type").get<std::string>();
    o.label = j.at("label").get<std::string>();
    o.result_raw = j.at("result_raw").get<std::string>();
    o.limits_raw = j.at("limits_raw").get<std::string>();
    o.success_raw = j.at("success_raw").get<std::string>();
    o.report_reference = j.at("report_reference").get<std::string>();
    o.date = j.at("date").get<std::string>();
    o.table_title = j.value("table_title", "");
    o.row_index = j.value("row_index", std::size_t{0});
    if (const auto it = j.find("default_unit"); it != j.end() && it->is_string()) {
        o.default_unit = it->get<std::string>();
    }
    return o;
}

}  // namespace

std::string to_json_line(const ReviewItem& item) {
    json out = {{"id", item.id},
                {"observation", observation_json(item.observation)},
                {"reason", item.reason},
                {"status", to_string(item.status)}};
    if (item.correction) {
        json correction = json::object();
        if (item.correction->measured_raw) {
            correction["measured_raw"] = *item.correction->measured_raw;
        }
        if (item.correction->success_raw) {
            correction["success_raw"] = *item.correction->success_raw;
        }
        out["correction"] = std::move(correction);
    } else {
        out["correction"] = nullptr;
    }
    return out.dump();
}

ReviewItem from_json_line(std::string_view line) {
    const json j = json::parse(line);
    ReviewItem item;
    item.id = j.at("id").get<std::string>();
    item.observation = observation_from(j.at("observation"));
    item.reason = j.at("reason").get<std::string>();
    const auto status = status_from_string(j.at("status").get<std::string>());
    if (!status) {
        throw Error(ErrorKind::ParseError, "unknown review status in record for " + item.id);
    }
    item.status = *status;
    if (const auto it = j.find("correction"); it != j.end() && it->is_object()) {
        Correction correction;
        if (it->contains("measured_raw")) {
            correction.measured_raw = it->at("measured_raw").get<std::string>();
        }
        if (it->contains("success_raw")) {
            correction.success_raw = it->at("success_raw").get<std::string>();
        }
        item.correction = correction;
    }
    return item;
}

ReviewQueue::ReviewQueue(std::filesystem::path path) : path_(std::move(path)) { reload(); }

void ReviewQueue::reload() {
    items_.clear();
    std::ifstream in(path_);
    if (!in) {
        return;
    }
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            apply(from_json_line(line));
        } catch (const std::exception& e) {
            if (in.peek() == std::char_traits<char>::eof()) {
                spdlog::warn("{}:{}: ignoring truncated review record", path_.string(), number);
            } else {
                throw Error(ErrorKind::ParseError, path_.string() + ":" + std::to_string(number) + ": " + e.what());
            }
        }
    }
}

void ReviewQueue::append(const ReviewItem& item) {
    if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    std::ofstream out(path_, std::ios::app);
    out << to_json_line(item) << '\n';
    out.flush();
    if (!out) {
        throw Error(ErrorKind::IoError, "cannot append to " + path_.string());
    }
    apply(item);
}

void ReviewQueue::apply(ReviewItem item) {
    const auto it = std::find_if(items_.begin(), items_.end(), [&](const ReviewItem& x) { return x.id == item.id; });
    if (it == items_.end()) {
        items_.push_back(std::move(item));
    } else {
        *it = std::move(item);
    }
}

std::vector<ReviewItem> ReviewQueue::items_with(std::optional<Status> status) const {
    std::vector<ReviewItem> out;
    for (const auto& item : items_) {
        if (!status || item.status == *status) {
            out.push_back(item);
        }
    }
    return out;
}

std::optional<ReviewItem> ReviewQueue::find(std::string_view id) const {
    for (const auto& item : items_) {
        if (item.id == id) {
            return item;
        }
    }
    return std::nullopt;
}

std::vector<ReviewItem> ReviewQueue::for_report(std::string_view reference) const {
    std::vector<ReviewItem> out;
    for (const auto& item : items_) {
        if (item.report_reference() == reference) {
            out.push_back(item);
        }
    }
    return out;
}

}  // namespace reportkg::review
