#include "reportkg/error.hpp"
#include "reportkg/pipeline.hpp"

#include "support.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <fstream>

using namespace reportkg;
using namespace reportkg::pipeline;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::IoError;
}

struct Env {
    support::TempDir dir{"pipeline"};
    PipelineConfig config;

    Env() { config = PipelineConfig::from_config(KeyValueConfig::load(support::write_test_config(dir.path()))); }

    RunSummary run(const std::vector<std::filesystem::path>& documents) {
        Workspace workspace(config);
        auto backend = llm::make_backend(config.backend, config.prompt_template, config.units);
        return run_pipeline(documents, workspace, *backend, llm::DispatchOptions::from(config.backend));
    }
};

std::size_t total_rows() {
    std::size_t rows = 0;
    for (const auto& path : support::batch_reports()) {
        for (const auto& table : extraction::load_report_file(path).tables) {
            rows += table.rows.size();
        }
    }
    return rows;
}

}  // namespace

TEST(Pipeline, BatchQueuesOnlyTheAnomalies) {
    Env env;
    const auto summary = env.run(support::batch_reports());
    EXPECT_EQ(summary.failed(), 0u);
    EXPECT_EQ(summary.exit_code(), 0);
    EXPECT_EQ(summary.items_queued(), 3u);
    EXPECT_EQ(summary.rows_integrated() + summary.items_queued(), total_rows());

    std::set<std::string> pending;
    for (const auto& report : summary.reports) {
        if (report.status == ReportStatus::Pending) {
            pending.insert(report.reference);
        }
    }
    EXPECT_EQ(pending, (std::set<std::string>{"TASI-1232", "TASI-1234", "TASI-1236"}));

    Workspace workspace(env.config);
    std::set<std::string> queued;
    for (const auto& item : workspace.queue().items()) {
        queued.insert(item.id);
    }
    EXPECT_EQ(queued, (std::set<std::string>{"TASI-1232-Core2", "TASI-1234-J1-J2", "TASI-1236-Core1"}));
    EXPECT_EQ(support::integrity_violations(workspace), std::vector<std::string>{});
    EXPECT_EQ(workspace.store().report("TASI-1233")->validation, ReportStatus::OK);

    const auto json = nlohmann::json::parse(summary.to_json());
    EXPECT_EQ(json["reports"].size(), 10u);
}

TEST(Pipeline, RerunSkipsProcessedReports) {
    Env env;
    env.run(support::batch_reports());
    const auto again = env.run(support::batch_reports());
    EXPECT_EQ(again.rows_integrated(), 0u);
    EXPECT_EQ(again.items_queued(), 0u);
    for (const auto& report : again.reports) {
        EXPECT_TRUE(report.skipped) << report.source;
    }
    Workspace workspace(env.config);
    EXPECT_EQ(workspace.queue().items().size(), 3u);
    EXPECT_EQ(support::integrity_violations(workspace), std::vector<std::string>{});
}

TEST(Pipeline, FailingDocumentDoesNotStopTheBatch) {
    Env env;
    const auto broken = env.dir.path() / "broken.json";
    std::ofstream(broken) << "{ not json";
    auto documents = support::batch_reports();
    documents.insert(documents.begin() + 1, broken);
    const auto summary = env.run(documents);
    EXPECT_EQ(summary.failed(), 1u);
    EXPECT_EQ(summary.exit_code(), 1);
    EXPECT_EQ(summary.items_queued(), 3u);
}

TEST(Resolve, EveryActionAndTheReportStatus) {
    Env env;
    env.run(support::batch_reports());
    Workspace workspace(env.config);

    EXPECT_EQ(kind_of([&] { resolve(workspace, "TASI-1232-Core2", ResolveAction::Correct, {"1.5 V", std::nullopt}); }),
              ErrorKind::StillAnomalous);
    EXPECT_EQ(workspace.queue().find("TASI-1232-Core2")->status, review::Status::Open);

    const auto confirmed = resolve(workspace, "TASI-1232-Core2", ResolveAction::Confirm);
    EXPECT_EQ(confirmed.item.status, review::Status::ConfirmedAnomaly);
    EXPECT_EQ(confirmed.report_status, ReportStatus::Anomalous);

    const auto marked = resolve(workspace, "TASI-1234-J1-J2", ResolveAction::Correct, {std::nullopt, "OK"});
    EXPECT_EQ(marked.report_status, ReportStatus::OK);

    const auto measured = resolve(workspace, "TASI-1236-Core1", ResolveAction::Correct, {"1.2 V", std::nullopt});
    EXPECT_EQ(measured.item.status, review::Status::Corrected);
    EXPECT_EQ(measured.report_status, ReportStatus::OK);

    EXPECT_EQ(kind_of([&] { resolve(workspace, "TASI-1236-Core1", ResolveAction::Confirm); }), ErrorKind::AlreadyResolved);
    EXPECT_EQ(kind_of([&] { resolve(workspace, "TASI-0000-X", ResolveAction::Confirm); }), ErrorKind::UnknownItem);

    // State survives reopening the data directory.
    Workspace reopened(env.config);
    EXPECT_EQ(reopened.store().report("TASI-1232")->validation, ReportStatus::Anomalous);
    EXPECT_EQ(reopened.store().report("TASI-1234")->validation, ReportStatus::OK);
    EXPECT_EQ(reopened.store().report("TASI-1236")->validation, ReportStatus::OK);
    EXPECT_TRUE(reopened.queue().items_with(review::Status::Open).empty());
    EXPECT_EQ(support::integrity_violations(reopened), std::vector<std::string>{});

    std::size_t rows = 0;
    for (const auto& table : reopened.tables()) {
        rows += table.rows.size();
    }
    EXPECT_EQ(rows, total_rows());
}

TEST(Resolve, CorrectedCellIsStoredWithItsUnit) {
    Env env;
    env.run(support::batch_reports());
    Workspace workspace(env.config);
    resolve(workspace, "TASI-1236-Core1", ResolveAction::Correct, {"1.2 V", std::nullopt});
    bool found = false;
    for (const auto& table : workspace.tables()) {
        const auto id = table.column_index("observation_id");
        const auto value = table.column_index("measured_value");
        for (const auto& row : table.rows) {
            if (row[id] == "TASI-1236-Core1") {
                EXPECT_EQ(row[value], "1.2 V");
                found = true;
            }
        }
    }
    EXPECT_TRUE(found);
}

TEST(Workspace, LockAndConfigErrors) {
    Env env;
    {
        DirectoryLock lock(env.config.data_dir);
        EXPECT_EQ(kind_of([&] { DirectoryLock second(env.config.data_dir); }), ErrorKind::LockHeld);
    }
    DirectoryLock again(env.config.data_dir);

    auto config = KeyValueConfig::load(support::write_test_config(env.dir.path()));
    config.set("llm.backend", "nope");
    EXPECT_EQ(kind_of([&] { PipelineConfig::from_config(config); }), ErrorKind::ConfigError);

    auto missing = KeyValueConfig::load(support::write_test_config(env.dir.path()));
    missing.set("paths.ontology", (env.dir.path() / "absent.ttl").string());
    EXPECT_EQ(kind_of([&] { PipelineConfig::from_config(missing).validate(); }), ErrorKind::ConfigError);
}

TEST(MeasuredValueCell, AppliesTheDefaultUnit) {
    Observation row;
    row.result_raw = "1.097";
    row.default_unit = "V";
    EXPECT_EQ(measured_value_cell(row, units::UnitRegistry::defaults()), "1.097 V");
    row.result_raw = "1.1O3 V";
    EXPECT_EQ(measured_value_cell(row, units::UnitRegistry::defaults()), "1.1O3 V");
    row.result_raw = "1500 kΩ";
    row.default_unit.reset();
    EXPECT_EQ(measured_value_cell(row, units::UnitRegistry::defaults()), "1500 kΩ");
}
