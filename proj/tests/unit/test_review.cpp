#include "reportkg/config.hpp"
#include "reportkg/csv.hpp"
#include "reportkg/error.hpp"
#include "reportkg/review.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace reportkg;
using namespace reportkg::review;

namespace {

Observation sample_row(const std::string& label) {
    Observation o;
    o.id = "TASI-1234-" + label;
    o.observed_property = "http://tasi.com#POLVoltage";
    o.test_type = "POLVoltage";
    o.label = label;
    o.result_raw = "1.301";
    o.limits_raw = "[1.076, 1.224] V";
    o.success_raw = "OK";
    o.report_reference = "TASI-1234";
    o.date = "2023-06-15";
    o.default_unit = "V";
    o.table_title = "POL Voltage";
    o.row_index = 1;
    return o;
}

ReviewItem open_item(const std::string& label) {
    return ReviewItem{"TASI-1234-" + label, sample_row(label), "out of range but marked OK", Status::Open, std::nullopt};
}

}  // namespace

TEST(Csv, QuotingRoundTrip) {
    const std::vector<std::vector<std::string>> rows = {
        {"a", "b,c", "say \"hi\""}, {"multi\nline", "", "1.1M - 1.9MΩ"}, {"[1.076, 1.224] V", "x", "y"}};
    const auto text = write_csv(rows);
    EXPECT_EQ(parse_csv(text), rows);
    EXPECT_EQ(parse_csv("a,b\r\nc,d\r\n"), (std::vector<std::vector<std::string>>{{"a", "b"}, {"c", "d"}}));
    EXPECT_EQ(parse_csv("\"x\"\"y\",z\n"), (std::vector<std::vector<std::string>>{{"x\"y", "z"}}));
}

TEST(RowTables, WriteReadWithSidecar) {
    support::TempDir dir("rowtable");
    const RowTable table{"pol_voltage", {"label", "measured_value"}, {{"Core1", "1.097 V"}, {"Core, 2", "1.1 V"}}};
    const auto path = dir.path() / "nested" / "pol.csv";
    write_row_table(path, table);
    EXPECT_TRUE(std::filesystem::exists(path.string() + ".schema.json"));
    EXPECT_EQ(read_row_table(path), table);

    std::filesystem::remove(path.string() + ".schema.json");
    EXPECT_EQ(read_row_table(path).name, "pol");

    const RowTable ragged{"t", {"a", "b"}, {{"1"}}};
    EXPECT_THROW(ragged.validate(), Error);
    const RowTable duplicate{"t", {"a", "a"}, {}};
    EXPECT_THROW(duplicate.validate(), Error);
    EXPECT_EQ(table.column_index("measured_value"), 1u);
    EXPECT_EQ(table.column_index("nope"), std::string::npos);
}

TEST(ReviewItems, JsonLineRoundTrip) {
    auto item = open_item("Core2");
    EXPECT_EQ(from_json_line(to_json_line(item)), item);
    item.status = Status::Corrected;
    item.correction = Correction{"1.2 V", std::nullopt};
    item.observation.default_unit.reset();
    const auto line = to_json_line(item);
    EXPECT_EQ(line.find('\n'), std::string::npos);
    EXPECT_EQ(from_json_line(line), item);
    EXPECT_EQ(status_from_string(to_string(Status::ConfirmedAnomaly)), Status::ConfirmedAnomaly);
    EXPECT_FALSE(status_from_string("bogus"));
}

TEST(ReviewQueue, LaterRecordsSupersede) {
    support::TempDir dir("queue");
    const auto path = dir.path() / "review.jsonl";
    {
        ReviewQueue queue(path);
        EXPECT_TRUE(queue.items().empty());
        queue.append(open_item("Core2"));
        queue.append(open_item("J1-J2"));
        auto done = open_item("Core2");
        done.status = Status::ConfirmedAnomaly;
        queue.append(done);
        ASSERT_EQ(queue.items().size(), 2u);
        EXPECT_EQ(queue.items()[0].status, Status::ConfirmedAnomaly);
    }
    ReviewQueue reopened(path);
    ASSERT_EQ(reopened.items().size(), 2u);
    EXPECT_EQ(reopened.items()[0].id, "TASI-1234-Core2");
    EXPECT_EQ(reopened.items_with(Status::Open).size(), 1u);
    EXPECT_EQ(reopened.items_with(std::nullopt).size(), 2u);
    EXPECT_EQ(reopened.for_report("TASI-1234").size(), 2u);
    EXPECT_TRUE(reopened.for_report("TASI-9999").empty());
    EXPECT_FALSE(reopened.find("TASI-1234-Core9"));
}

TEST(ReviewQueue, TruncatedLastLineIsIgnored) {
    support::TempDir dir("truncated");
    const auto path = dir.path() / "review.jsonl";
    {
        ReviewQueue queue(path);
        queue.append(open_item("Core2"));
    }
    const auto partial = to_json_line(open_item("Core3"));
    {
        std::ofstream out(path, std::ios::app | std::ios::binary);
        out << partial.substr(0, partial.size() / 2);
    }
    ReviewQueue queue(path);
    ASSERT_EQ(queue.items().size(), 1u);
    EXPECT_EQ(queue.items()[0].id, "TASI-1234-Core2");
}

TEST(KeyValueConfig, ParseAndSections) {
    const auto config = KeyValueConfig::parse(
        "# comment\n"
        "llm.backend = mock\n"
        "  synonym.Label = pad, pin  \n"
        "llm.backend = replay\n"
        "cost.setup = 73.75\n");
    EXPECT_EQ(config.get("llm.backend"), "replay");
    EXPECT_EQ(config.get_list("synonym.Label"), (std::vector<std::string>{"pad", "pin"}));
    EXPECT_EQ(config.get_number("cost.setup"), 73.75);
    EXPECT_FALSE(config.contains("cost.template"));
    EXPECT_EQ(config.get_or("cost.template", "x"), "x");
    EXPECT_EQ(config.section("llm.").at("backend"), "replay");
}
